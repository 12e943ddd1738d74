#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "eslm/common.hpp"
#include "eslm/corpus.hpp"
#include "eslm/docspace.hpp"

namespace eslm {

struct EntityMatrix {
  std::vector<std::string> entity_ids;
  MatF vectors;  // |X| x k, row j = e_j
  Method method = Method::Random;
  bool normalized = false;

  int num_entities() const { return static_cast<int>(entity_ids.size()); }
  int k() const { return static_cast<int>(vectors.cols()); }
};

/// Embeds every document of the corpus; row d = g(doc d). Safe to
/// parallelize because each worker writes disjoint preallocated rows.
inline MatD embed_documents(const DocSpace& space, const Corpus& corpus, int threads = 1) {
  MatD out(corpus.num_documents(), space.k);
  parallel_for(corpus.num_documents(), threads,
               [&](int d) { out.row(d) = embed_document(space, corpus.documents[d]); });
  return out;
}

/// e_i = sum over the entity's documents of g(d), documents taken in
/// ascending document index so the summation order is reproducible.
/// Entities without documents get the zero vector.
inline EntityMatrix aggregate_entities(const DocSpace& space, const Corpus& corpus,
                                       const AssociationIndex& associations, int threads = 1) {
  const MatD doc_vecs = embed_documents(space, corpus, threads);
  EntityMatrix m;
  m.entity_ids = associations.entities;
  m.method = space.method;
  m.vectors.setZero(associations.num_entities(), space.k);
  for (int j = 0; j < associations.num_entities(); ++j) {
    VecD acc = VecD::Zero(space.k);
    for (int d : associations.entity_to_docs[j]) acc += doc_vecs.row(d);
    m.vectors.row(j) = acc.cast<float>();
  }
  return m;
}

/// Cosine similarity with double accumulation; either operand of zero norm
/// yields 0.
template <typename A, typename B>
double cosine_similarity(const A& a, const B& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (int i = 0; i < static_cast<int>(a.size()); ++i) {
    const double x = static_cast<double>(a[i]);
    const double y = static_cast<double>(b[i]);
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

/// All entities except the query, sorted by descending cosine to the query
/// row; ties broken by ascending entity index (== ascending id for the
/// sorted id lists produced by the association index).
inline std::vector<std::pair<int, double>> rank_similar(const EntityMatrix& m, int query) {
  if (query < 0 || query >= m.num_entities()) throw Error("rank_similar: query index out of range");
  std::vector<std::pair<int, double>> ranked;
  ranked.reserve(m.num_entities() - 1);
  for (int j = 0; j < m.num_entities(); ++j) {
    if (j == query) continue;
    ranked.emplace_back(j, cosine_similarity(m.vectors.row(query), m.vectors.row(j)));
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return ranked;
}

/// Scales every nonzero row to unit L2 norm; zero rows pass through.
inline EntityMatrix normalize_rows(const EntityMatrix& m) {
  EntityMatrix out = m;
  for (int j = 0; j < out.num_entities(); ++j) {
    double norm = 0.0;
    for (int c = 0; c < out.k(); ++c) {
      const double x = out.vectors(j, c);
      norm += x * x;
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    for (int c = 0; c < out.k(); ++c)
      out.vectors(j, c) = static_cast<float>(out.vectors(j, c) / norm);
  }
  out.normalized = true;
  return out;
}

}  // namespace eslm
