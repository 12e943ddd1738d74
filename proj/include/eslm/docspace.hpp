#pragma once

#include <cmath>
#include <iostream>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/SVD>

#include "eslm/common.hpp"
#include "eslm/corpus.hpp"

namespace eslm {

/// A fitted document-level vector space: the function g mapping a document to
/// a k-dimensional representation. Exactly one parameter block is populated,
/// selected by `method`. Parameters live in double precision in memory; the
/// on-disk container stores float32.
struct DocSpace {
  Method method = Method::Lsi;
  int k = 0;

  // LSI: term projection (|V| x k, orthonormal columns), singular values
  // (nonincreasing, positive), and the training idf needed for fold-in.
  MatD term_projection;
  VecD singular_values;
  VecD idf;

  // LDA: final Gibbs topic-word counts (k x |V|) and hyperparameters.
  MatD topic_word;
  double alpha = 0.1;
  double beta = 0.1;

  // W2V: one embedding row per vocabulary term (|V| x k), float32 natively.
  MatF word_embeddings;
};

namespace detail {

inline VecD tfidf_vector(const Document& doc, const VecD& idf, int vocab_size) {
  VecD v = VecD::Zero(vocab_size);
  for (int t : doc.tokens) v[t] += 1.0;
  for (int t = 0; t < vocab_size; ++t)
    if (v[t] != 0.0) v[t] *= idf[t];
  return v;
}

inline VecD compute_idf(const Corpus& corpus) {
  const int V = corpus.vocabulary.size();
  std::vector<int> df(V, 0);
  std::vector<char> seen(V, 0);
  for (const auto& doc : corpus.documents) {
    for (int t : doc.tokens) {
      if (!seen[t]) {
        seen[t] = 1;
        df[t] += 1;
      }
    }
    for (int t : doc.tokens) seen[t] = 0;
  }
  VecD idf(V);
  const double n_docs = static_cast<double>(corpus.documents.size());
  for (int t = 0; t < V; ++t)
    idf[t] = df[t] > 0 ? std::log(n_docs / static_cast<double>(df[t])) : 0.0;
  return idf;
}

// Linear fold-in of a tf-idf vector: Sigma^-1 Q^T t. The linearity invariant
// of the projection is tested at this level.
inline VecD lsi_project(const DocSpace& space, const VecD& tfidf) {
  VecD proj = space.term_projection.transpose() * tfidf;
  for (int i = 0; i < space.k; ++i)
    proj[i] = space.singular_values[i] > 0.0 ? proj[i] / space.singular_values[i] : 0.0;
  return proj;
}

}  // namespace detail

/// TF-IDF weighting (raw tf, log idf) followed by a rank-k truncated SVD of
/// the document-term matrix. Keeps the top-k term-side singular vectors and
/// singular values; k is clamped to the numerical rank with a warning.
inline DocSpace fit_lsi(const Corpus& corpus, int k) {
  const int D = corpus.num_documents();
  const int V = corpus.vocabulary.size();
  if (D == 0 || V == 0) throw Error("fit_lsi: empty corpus");
  if (k < 1) throw Error("fit_lsi: k must be >= 1");

  DocSpace space;
  space.method = Method::Lsi;
  space.idf = detail::compute_idf(corpus);

  MatD A(D, V);
  for (int d = 0; d < D; ++d)
    A.row(d) = detail::tfidf_vector(corpus.documents[d], space.idf, V).transpose();

  Eigen::BDCSVD<MatD> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VecD& sv = svd.singularValues();
  const double tol = std::max(D, V) * std::numeric_limits<double>::epsilon() *
                     (sv.size() > 0 ? sv[0] : 0.0);
  int rank = 0;
  while (rank < sv.size() && sv[rank] > tol) ++rank;
  if (rank == 0) rank = 1;  // degenerate all-zero corpus: keep one flat dim
  if (k > rank) {
    std::cerr << "warning: fit_lsi: k=" << k << " exceeds rank " << rank
              << ", clamping\n";
    k = rank;
  }
  space.k = k;
  space.term_projection = svd.matrixV().leftCols(k);
  space.singular_values = sv.head(k);
  return space;
}

/// g(d) for any fitted space. Documents with zero in-vocabulary tokens map to
/// the zero vector.
inline VecD embed_document(const DocSpace& space, const Document& doc) {
  if (doc.tokens.empty()) return VecD::Zero(space.k);
  switch (space.method) {
    case Method::Lsi: {
      VecD t = detail::tfidf_vector(doc, space.idf, static_cast<int>(space.idf.size()));
      return detail::lsi_project(space, t);
    }
    case Method::Lda: {
      // Held-out inference: 20 Gibbs sweeps against frozen topic-word counts,
      // theta averaged over the last 10. Seeded from the token content so the
      // embedding is a pure function of (space, document).
      const int K = space.k;
      const int V = static_cast<int>(space.topic_word.cols());
      VecD topic_totals = space.topic_word.rowwise().sum();
      std::mt19937_64 rng(fnv1a64(doc.tokens.data(), doc.tokens.size() * sizeof(int)) ^
                          0x5861b2c6d1f0a3e7ull);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const int n = static_cast<int>(doc.tokens.size());
      std::vector<int> z(n);
      VecD local = VecD::Zero(K);
      for (int i = 0; i < n; ++i) {
        z[i] = static_cast<int>(rng() % K);
        local[z[i]] += 1.0;
      }
      VecD probs(K);
      VecD acc = VecD::Zero(K);
      const int sweeps = 20, keep_from = 10;
      for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (int i = 0; i < n; ++i) {
          const int w = doc.tokens[i];
          local[z[i]] -= 1.0;
          double total = 0.0;
          for (int t = 0; t < K; ++t) {
            double p = (local[t] + space.alpha) *
                       (space.topic_word(t, w) + space.beta) /
                       (topic_totals[t] + V * space.beta);
            probs[t] = p;
            total += p;
          }
          double u = unit(rng) * total;
          int t = 0;
          for (; t < K - 1; ++t) {
            u -= probs[t];
            if (u <= 0.0) break;
          }
          z[i] = t;
          local[t] += 1.0;
        }
        if (sweep >= keep_from) acc += local;
      }
      acc /= static_cast<double>(sweeps - keep_from);
      VecD theta(K);
      for (int t = 0; t < K; ++t)
        theta[t] = (acc[t] + space.alpha) / (n + K * space.alpha);
      return theta;
    }
    case Method::W2vSg:
    case Method::W2vCbow: {
      VecD mean = VecD::Zero(space.k);
      for (int t : doc.tokens) mean += space.word_embeddings.row(t).transpose().cast<double>();
      mean /= static_cast<double>(doc.tokens.size());
      return mean;
    }
    default:
      throw Error("embed_document: space method has no document embedding");
  }
}

}  // namespace eslm
