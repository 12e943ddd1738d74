#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "eslm/common.hpp"
#include "eslm/corpus.hpp"

namespace eslm {

/// Log-linear entity model: score(w_i, x_j) = exp(v_i . e_j + b_j).
struct SertModel {
  MatF word_vectors;    // |V| x k
  MatF entity_vectors;  // |X| x k
  VecF biases;          // |X|
  int k = 0;

  int vocab_size() const { return static_cast<int>(word_vectors.rows()); }
  int num_entities() const { return static_cast<int>(entity_vectors.rows()); }
};

struct TrainConfig {
  double learning_rate = 0.01;
  int batch_size = 256;
  int max_epochs = 100;
  int patience = 5;
  uint64_t seed = 1;
  double validation_fraction = 0.1;
  // 0 = exact softmax over all entities. A positive value approximates the
  // normalizer with the batch's positive entities plus uniformly sampled
  // extras (not used by any default pipeline).
  int softmax_samples = 0;
};

using SertBatch = std::vector<std::pair<int, int>>;  // (word index, entity index)

inline SertModel init_sert(int vocab_size, int n_entities, int k, uint64_t seed) {
  if (vocab_size < 1 || n_entities < 1 || k < 1) throw Error("init_sert: all sizes must be >= 1");
  SertModel m;
  m.k = k;
  m.word_vectors.resize(vocab_size, k);
  m.entity_vectors.resize(n_entities, k);
  m.biases = VecF::Zero(n_entities);
  const float bound = std::sqrt(6.0f / static_cast<float>(k));
  std::mt19937_64 rng(mix_seed(seed, 0));
  std::uniform_real_distribution<float> dist(-bound, bound);
  for (int i = 0; i < vocab_size; ++i)
    for (int c = 0; c < k; ++c) m.word_vectors(i, c) = dist(rng);
  for (int j = 0; j < n_entities; ++j)
    for (int c = 0; c < k; ++c) m.entity_vectors(j, c) = dist(rng);
  return m;
}

inline double sert_score(const SertModel& m, int word, int entity) {
  if (word < 0 || word >= m.vocab_size()) throw Error("sert_score: word index out of range");
  if (entity < 0 || entity >= m.num_entities()) throw Error("sert_score: entity index out of range");
  double z = static_cast<double>(m.biases[entity]);
  for (int c = 0; c < m.k; ++c)
    z += static_cast<double>(m.word_vectors(word, c)) * static_cast<double>(m.entity_vectors(entity, c));
  return std::exp(z);
}

namespace detail {

// z_j = v_word . e_j + b_j for all entities, in double.
inline VecD sert_logits(const SertModel& m, int word) {
  VecD z = (m.entity_vectors.cast<double>() * m.word_vectors.row(word).transpose().cast<double>());
  z += m.biases.cast<double>();
  return z;
}

inline VecD softmax_stable(const VecD& z) {
  const double zmax = z.maxCoeff();
  VecD p = (z.array() - zmax).exp();
  return p / p.sum();
}

}  // namespace detail

/// P(X = x_j | w_i): softmax over all entity scores, max-shifted.
inline VecD sert_posterior(const SertModel& m, int word) {
  if (word < 0 || word >= m.vocab_size()) throw Error("sert_posterior: word index out of range");
  return detail::softmax_stable(detail::sert_logits(m, word));
}

/// P(X = x_i) = softmax of the biases.
inline VecD sert_prior(const SertModel& m) {
  return detail::softmax_stable(m.biases.cast<double>());
}

struct SertGradients {
  double loss = 0.0;
  MatD word_grad;    // |V| x k
  MatD entity_grad;  // |X| x k
  VecD bias_grad;    // |X|
};

/// Mean cross-entropy of the full-softmax posterior over the batch,
/// evaluated on double-precision parameters (the core used by training and
/// by finite-difference checks).
inline double sert_loss(const MatD& v, const MatD& e, const VecD& b, const SertBatch& batch) {
  if (batch.empty()) throw Error("sert_loss: empty batch");
  double loss = 0.0;
  VecD z(e.rows());
  for (const auto& [w, x] : batch) {
    z = e * v.row(w).transpose();
    z += b;
    const double zmax = z.maxCoeff();
    const double lse = zmax + std::log((z.array() - zmax).exp().sum());
    loss += lse - z[x];
  }
  return loss / static_cast<double>(batch.size());
}

/// Loss plus exact analytic gradients of the same objective.
inline SertGradients sert_loss_grad(const MatD& v, const MatD& e, const VecD& b,
                                    const SertBatch& batch) {
  if (batch.empty()) throw Error("sert_loss_grad: empty batch");
  const int B = static_cast<int>(batch.size());
  const int X = static_cast<int>(e.rows());
  const int k = static_cast<int>(e.cols());
  MatD vb(B, k);
  for (int i = 0; i < B; ++i) vb.row(i) = v.row(batch[i].first);
  MatD z = vb * e.transpose();  // B x X
  z.rowwise() += b.transpose();
  const VecD rowmax = z.rowwise().maxCoeff();
  MatD p = (z.colwise() - rowmax).array().exp();
  const VecD rowsum = p.rowwise().sum();
  double loss = 0.0;
  for (int i = 0; i < B; ++i)
    loss += std::log(rowsum[i]) + rowmax[i] - z(i, batch[i].second);
  loss /= B;
  p.array().colwise() /= rowsum.array();
  for (int i = 0; i < B; ++i) p(i, batch[i].second) -= 1.0;  // dL/dz, per pair

  SertGradients g;
  g.loss = loss;
  g.entity_grad = (p.transpose() * vb) / B;
  g.bias_grad = p.colwise().sum().transpose() / B;
  g.word_grad = MatD::Zero(v.rows(), k);
  const MatD ge = (p * e) / B;
  for (int i = 0; i < B; ++i) g.word_grad.row(batch[i].first) += ge.row(i);
  return g;
}

inline SertGradients sert_loss_grad(const SertModel& m, const SertBatch& batch) {
  return sert_loss_grad(m.word_vectors.cast<double>(), m.entity_vectors.cast<double>(),
                        m.biases.cast<double>(), batch);
}

/// Builds the per-word-occurrence training pairs: one (w, x) pair for every
/// token occurrence w of document d and every entity x associated with d.
/// Order: documents ascending, positions ascending, entities ascending.
inline SertBatch sert_training_pairs(const Corpus& corpus, const AssociationIndex& associations) {
  SertBatch pairs;
  for (int d = 0; d < corpus.num_documents(); ++d) {
    const auto& ents = associations.doc_to_entities[d];
    if (ents.empty()) continue;
    for (int w : corpus.documents[d].tokens)
      for (int x : ents) pairs.emplace_back(w, x);
  }
  return pairs;
}

/// Sampled-softmax batch gradient: the normalizer runs over the batch's
/// positive entities plus `samples` uniform extras. Approximate by design;
/// excluded from every default pipeline and acceptance path.
inline SertGradients sert_sampled_loss_grad(const MatD& v, const MatD& e, const VecD& b,
                                            const SertBatch& batch, int samples,
                                            std::mt19937_64& rng) {
  const int X = static_cast<int>(e.rows());
  std::vector<int> cand;
  std::vector<char> in_cand(X, 0);
  for (const auto& [w, x] : batch) {
    (void)w;
    if (!in_cand[x]) {
      in_cand[x] = 1;
      cand.push_back(x);
    }
  }
  for (int s = 0; s < samples && static_cast<int>(cand.size()) < X; ++s) {
    int j = static_cast<int>(rng() % static_cast<uint64_t>(X));
    if (!in_cand[j]) {
      in_cand[j] = 1;
      cand.push_back(j);
    }
  }
  std::sort(cand.begin(), cand.end());
  std::vector<int> remap(X, -1);
  for (size_t i = 0; i < cand.size(); ++i) remap[cand[i]] = static_cast<int>(i);
  MatD e_sub(static_cast<int>(cand.size()), e.cols());
  VecD b_sub(static_cast<int>(cand.size()));
  for (size_t i = 0; i < cand.size(); ++i) {
    e_sub.row(static_cast<int>(i)) = e.row(cand[i]);
    b_sub[static_cast<int>(i)] = b[cand[i]];
  }
  SertBatch sub;
  sub.reserve(batch.size());
  for (const auto& [w, x] : batch) sub.emplace_back(w, remap[x]);
  SertGradients g_sub = sert_loss_grad(v, e_sub, b_sub, sub);
  SertGradients g;
  g.loss = g_sub.loss;
  g.word_grad = std::move(g_sub.word_grad);
  g.entity_grad = MatD::Zero(X, e.cols());
  g.bias_grad = VecD::Zero(X);
  for (size_t i = 0; i < cand.size(); ++i) {
    g.entity_grad.row(cand[i]) = g_sub.entity_grad.row(static_cast<int>(i));
    g.bias_grad[cand[i]] = g_sub.bias_grad[static_cast<int>(i)];
  }
  return g;
}

/// Plain SGD with early stopping on a held-out slice of the training pairs;
/// returns the best-validation model. Parameters are stored in 32 bits and
/// mirrored in 64 bits for accumulation, so results are reproducible f32
/// semantics with double arithmetic inside each step.
inline SertModel train_sert(const Corpus& corpus, const AssociationIndex& associations, int k,
                            const TrainConfig& cfg = {}) {
  if (associations.num_entities() == 0) throw Error("train_sert: empty association index");
  if (cfg.learning_rate <= 0 || cfg.batch_size < 1 || cfg.max_epochs < 1 || cfg.patience < 1)
    throw Error("train_sert: config values must be positive");
  if (cfg.validation_fraction <= 0.0 || cfg.validation_fraction > 0.5)
    throw Error("train_sert: validation_fraction must be in (0, 0.5]");
  SertBatch pairs = sert_training_pairs(corpus, associations);
  if (pairs.empty()) throw Error("train_sert: no valid training pairs");

  const int V = corpus.vocabulary.size();
  const int X = associations.num_entities();
  SertModel model = init_sert(std::max(V, 1), X, k, cfg.seed);

  // Split off the validation slice from one seeded shuffle.
  {
    std::mt19937_64 split_rng(mix_seed(cfg.seed, 1));
    std::shuffle(pairs.begin(), pairs.end(), split_rng);
  }
  const int64_t n = static_cast<int64_t>(pairs.size());
  int64_t n_val = static_cast<int64_t>(cfg.validation_fraction * static_cast<double>(n));
  if (n >= 2) n_val = std::clamp<int64_t>(n_val, 1, n - 1);
  else n_val = 0;
  SertBatch val(pairs.begin(), pairs.begin() + n_val);
  SertBatch train(pairs.begin() + n_val, pairs.end());
  if (val.empty()) val = train;

  // Double mirrors of the f32 parameters.
  MatD v_d = model.word_vectors.cast<double>();
  MatD e_d = model.entity_vectors.cast<double>();
  VecD b_d = model.biases.cast<double>();

  auto apply = [&](const SertGradients& g) {
    model.word_vectors = (v_d - cfg.learning_rate * g.word_grad).cast<float>();
    model.entity_vectors = (e_d - cfg.learning_rate * g.entity_grad).cast<float>();
    model.biases = (b_d - cfg.learning_rate * g.bias_grad).cast<float>();
    v_d = model.word_vectors.cast<double>();
    e_d = model.entity_vectors.cast<double>();
    b_d = model.biases.cast<double>();
  };

  std::mt19937_64 epoch_rng(mix_seed(cfg.seed, 2));
  std::mt19937_64 sample_rng(mix_seed(cfg.seed, 3));
  double best_val = std::numeric_limits<double>::infinity();
  SertModel best = model;
  int stale = 0;

  auto eval_loss = [&](const SertBatch& set) {
    double total = 0.0;
    const int64_t m = static_cast<int64_t>(set.size());
    for (int64_t s = 0; s < m; s += cfg.batch_size) {
      SertBatch chunk(set.begin() + s, set.begin() + std::min<int64_t>(s + cfg.batch_size, m));
      total += sert_loss(v_d, e_d, b_d, chunk) * static_cast<double>(chunk.size());
    }
    return total / static_cast<double>(m);
  };

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::shuffle(train.begin(), train.end(), epoch_rng);
    const int64_t m = static_cast<int64_t>(train.size());
    for (int64_t s = 0; s < m; s += cfg.batch_size) {
      SertBatch chunk(train.begin() + s, train.begin() + std::min<int64_t>(s + cfg.batch_size, m));
      if (cfg.softmax_samples > 0) {
        apply(sert_sampled_loss_grad(v_d, e_d, b_d, chunk, cfg.softmax_samples, sample_rng));
      } else {
        apply(sert_loss_grad(v_d, e_d, b_d, chunk));
      }
    }
    const double val_loss = eval_loss(val);
    if (val_loss < best_val) {
      best_val = val_loss;
      best = model;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }
  return best;
}

}  // namespace eslm
