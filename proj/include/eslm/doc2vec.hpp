#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "eslm/common.hpp"
#include "eslm/corpus.hpp"
#include "eslm/entity.hpp"
#include "eslm/word2vec.hpp"

namespace eslm {

/// Distributed-memory paragraph-vector training over entity pseudo-documents.
/// Each entity's pseudo-document is the concatenation of its documents in
/// ascending document-id order; the entity's meta-token is part of every
/// context window. Word and entity vectors are trained jointly; entities
/// without documents keep their random initialization.
inline EntityMatrix fit_doc2vec_entities(const Corpus& corpus, const AssociationIndex& associations,
                                         int k, int window = 5, int negatives = 5, int epochs = 5,
                                         uint64_t seed = 1, double learning_rate = 0.025) {
  if (associations.num_entities() == 0) throw Error("fit_doc2vec_entities: empty association index");
  if (window < 1) throw Error("fit_doc2vec_entities: window must be >= 1");
  if (negatives < 1) throw Error("fit_doc2vec_entities: negatives must be >= 1");
  if (k < 1) throw Error("fit_doc2vec_entities: k must be >= 1");

  const int V = corpus.vocabulary.size();
  const int X = associations.num_entities();
  std::mt19937_64 rng(mix_seed(seed, 0));
  std::uniform_real_distribution<float> init(-0.5f, 0.5f);

  MatF syn0(std::max(V, 1), k);  // word input vectors
  MatF entity_vecs(X, k);
  MatF syn1 = MatF::Zero(std::max(V, 1), k);  // word output vectors
  for (int w = 0; w < V; ++w)
    for (int c = 0; c < k; ++c) syn0(w, c) = init(rng) / static_cast<float>(k);
  for (int j = 0; j < X; ++j)
    for (int c = 0; c < k; ++c) entity_vecs(j, c) = init(rng) / static_cast<float>(k);

  // Pseudo-documents.
  std::vector<std::vector<int>> pseudo(X);
  int64_t total_words = 0;
  for (int j = 0; j < X; ++j) {
    for (int d : associations.entity_to_docs[j])
      for (int w : corpus.documents[d].tokens) pseudo[j].push_back(w);
    total_words += static_cast<int64_t>(pseudo[j].size());
  }
  if (total_words == 0 || V == 0) {
    EntityMatrix m;
    m.entity_ids = associations.entities;
    m.method = Method::Doc2vec;
    m.vectors = entity_vecs;
    return m;
  }

  // Unigram^(3/4) negative table.
  std::vector<int> table(Word2VecTrainer::kTableSize);
  {
    const auto& counts = corpus.vocabulary.frequencies;
    double pow_sum = 0.0;
    for (int w = 0; w < V; ++w) pow_sum += std::pow(static_cast<double>(counts[w]), 0.75);
    int i = 0;
    double cum = std::pow(static_cast<double>(counts[0]), 0.75) / pow_sum;
    for (size_t a = 0; a < table.size(); ++a) {
      table[a] = i;
      if (static_cast<double>(a + 1) / table.size() > cum && i < V - 1) {
        ++i;
        cum += std::pow(static_cast<double>(counts[i]), 0.75) / pow_sum;
      }
    }
  }

  std::vector<double> h(k), neu1e(k);
  int64_t processed = 0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (int j = 0; j < X; ++j) {
      const auto& sen = pseudo[j];
      const int n = static_cast<int>(sen.size());
      for (int i = 0; i < n; ++i) {
        double alpha = learning_rate * (1.0 - static_cast<double>(processed) /
                                                  (static_cast<double>(epochs) * total_words + 1.0));
        if (alpha < learning_rate * 1e-4) alpha = learning_rate * 1e-4;
        ++processed;
        const int center = sen[i];
        const int b = static_cast<int>(rng() % static_cast<uint64_t>(window));
        std::vector<int> context;
        for (int a = b; a < 2 * window + 1 - b; ++a) {
          if (a == window) continue;
          const int p = i - window + a;
          if (p < 0 || p >= n) continue;
          context.push_back(sen[p]);
        }
        // Mean of context words plus the entity meta-token.
        std::fill(h.begin(), h.end(), 0.0);
        for (int cw : context)
          for (int c = 0; c < k; ++c) h[c] += syn0(cw, c);
        for (int c = 0; c < k; ++c) h[c] += entity_vecs(j, c);
        const double inv = 1.0 / static_cast<double>(context.size() + 1);
        for (int c = 0; c < k; ++c) h[c] *= inv;

        std::fill(neu1e.begin(), neu1e.end(), 0.0);
        for (int d = 0; d < negatives + 1; ++d) {
          int target;
          double label;
          if (d == 0) {
            target = center;
            label = 1.0;
          } else {
            target = table[rng() % table.size()];
            if (target == center) continue;
            label = 0.0;
          }
          double f = 0.0;
          for (int c = 0; c < k; ++c) f += h[c] * syn1(target, c);
          const double g = (label - detail::ns_sigmoid(f)) * alpha;
          for (int c = 0; c < k; ++c) {
            neu1e[c] += g * syn1(target, c);
            syn1(target, c) += static_cast<float>(g * h[c]);
          }
        }
        for (int cw : context)
          for (int c = 0; c < k; ++c) syn0(cw, c) += static_cast<float>(neu1e[c]);
        for (int c = 0; c < k; ++c) entity_vecs(j, c) += static_cast<float>(neu1e[c]);
      }
    }
  }

  EntityMatrix m;
  m.entity_ids = associations.entities;
  m.method = Method::Doc2vec;
  m.vectors = entity_vecs;
  return m;
}

}  // namespace eslm
