#pragma once

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "eslm/common.hpp"
#include "eslm/corpus.hpp"
#include "eslm/entity.hpp"

namespace eslm {

/// Symmetric co-association counts: weight(i,j) = number of documents shared
/// by entities i and j. Diagonal is zero (no self co-association). Values are
/// integral though stored as doubles for downstream linear algebra.
struct CoassociationGraph {
  std::vector<std::string> entity_ids;
  MatD weights;

  int num_entities() const { return static_cast<int>(entity_ids.size()); }
};

/// Builds the graph by intersecting the (sorted) per-entity document lists.
/// An independent per-document pair scan serves as the test oracle.
inline CoassociationGraph coassociation_graph(const AssociationIndex& associations) {
  const int X = associations.num_entities();
  CoassociationGraph g;
  g.entity_ids = associations.entities;
  g.weights = MatD::Zero(X, X);
  for (int i = 0; i < X; ++i) {
    const auto& di = associations.entity_to_docs[i];
    for (int j = i + 1; j < X; ++j) {
      const auto& dj = associations.entity_to_docs[j];
      size_t a = 0, b = 0;
      int shared = 0;
      while (a < di.size() && b < dj.size()) {
        if (di[a] < dj[b]) ++a;
        else if (di[a] > dj[b]) ++b;
        else { ++shared; ++a; ++b; }
      }
      g.weights(i, j) = shared;
      g.weights(j, i) = shared;
    }
  }
  return g;
}

inline void write_graph_tsv(const CoassociationGraph& g, std::ostream& out) {
  out << "entity_a\tentity_b\tweight\n";
  for (int i = 0; i < g.num_entities(); ++i)
    for (int j = i + 1; j < g.num_entities(); ++j)
      if (g.weights(i, j) > 0)
        out << g.entity_ids[i] << '\t' << g.entity_ids[j] << '\t'
            << static_cast<long long>(g.weights(i, j)) << '\n';
}

/// PCA of the co-association rows: columns mean-centered, covariance
/// eigendecomposition, projection onto the top-k principal directions
/// (descending eigenvalue). Component sign fixed so the largest-magnitude
/// loading is positive. k is clamped to the numerical rank with a warning.
inline EntityMatrix graph_pca(const CoassociationGraph& graph, int k) {
  const int X = graph.num_entities();
  if (k < 1) throw Error("graph_pca: k must be >= 1");
  if (k > X) throw Error("graph_pca: k exceeds the number of entities");

  MatD centered = graph.weights;
  const Eigen::RowVectorXd col_means = centered.colwise().mean();
  centered.rowwise() -= col_means;

  MatD cov = centered.transpose() * centered;
  if (X > 1) cov /= static_cast<double>(X - 1);
  Eigen::SelfAdjointEigenSolver<MatD> eig(cov);
  if (eig.info() != Eigen::Success) throw Error("graph_pca: eigendecomposition failed");
  const VecD& evals = eig.eigenvalues();  // ascending
  const double max_eval = evals.size() > 0 ? std::max(evals[evals.size() - 1], 0.0) : 0.0;
  const double tol = max_eval * X * std::numeric_limits<double>::epsilon();
  int rank = 0;
  for (int i = 0; i < evals.size(); ++i)
    if (evals[i] > tol) ++rank;
  if (rank == 0) rank = 1;  // fully degenerate graph: keep one flat component
  if (k > rank) {
    std::cerr << "warning: graph_pca: k=" << k << " exceeds numerical rank " << rank
              << ", clamping\n";
    k = rank;
  }

  MatD directions(X, k);
  for (int c = 0; c < k; ++c) {
    VecD u = eig.eigenvectors().col(X - 1 - c);  // descending eigenvalue order
    int argmax = 0;
    for (int i = 1; i < X; ++i)
      if (std::abs(u[i]) > std::abs(u[argmax])) argmax = i;
    if (u[argmax] < 0.0) u = -u;
    directions.col(c) = u;
  }

  EntityMatrix m;
  m.entity_ids = graph.entity_ids;
  m.method = Method::GraphPca;
  m.vectors = (centered * directions).cast<float>();
  return m;
}

/// i.i.d. standard normal entries, seeded.
inline EntityMatrix random_entities(const std::vector<std::string>& entity_ids, int k,
                                    uint64_t seed) {
  const int n = static_cast<int>(entity_ids.size());
  if (n < 1 || k < 1) throw Error("random_entities: n and k must be >= 1");
  EntityMatrix m;
  m.entity_ids = entity_ids;
  m.method = Method::Random;
  m.vectors.resize(n, k);
  std::mt19937_64 rng(mix_seed(seed, 0));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < k; ++c) m.vectors(i, c) = static_cast<float>(gauss(rng));
  return m;
}

inline EntityMatrix random_entities(int n, int k, uint64_t seed) {
  std::vector<std::string> ids(static_cast<size_t>(std::max(n, 0)));
  for (int i = 0; i < n; ++i) ids[i] = "x" + std::to_string(i);
  return random_entities(ids, k, seed);
}

}  // namespace eslm
