#pragma once

#include <random>
#include <vector>

#include "eslm/common.hpp"
#include "eslm/corpus.hpp"
#include "eslm/docspace.hpp"

namespace eslm {

/// Collapsed Gibbs sampler for LDA. Exposed as a class so tests can drive
/// individual sweeps and check count conservation.
class LdaSampler {
 public:
  LdaSampler(const Corpus& corpus, int k, double alpha, double beta, uint64_t seed)
      : corpus_(corpus),
        k_(k),
        alpha_(alpha),
        beta_(beta),
        vocab_size_(corpus.vocabulary.size()),
        rng_(seed) {
    if (k < 2) throw Error("fit_lda: k must be >= 2");
    if (corpus.num_documents() == 0 || corpus.total_tokens() == 0)
      throw Error("fit_lda: empty corpus");
    const int D = corpus.num_documents();
    doc_topic_.assign(static_cast<size_t>(D) * k_, 0);
    topic_word_.assign(static_cast<size_t>(k_) * vocab_size_, 0);
    topic_total_.assign(k_, 0);
    assignments_.resize(D);
    for (int d = 0; d < D; ++d) {
      const auto& tokens = corpus.documents[d].tokens;
      assignments_[d].resize(tokens.size());
      for (size_t i = 0; i < tokens.size(); ++i) {
        int t = static_cast<int>(rng_() % k_);
        assignments_[d][i] = t;
        ++doc_topic_[d * k_ + t];
        ++topic_word_[static_cast<size_t>(t) * vocab_size_ + tokens[i]];
        ++topic_total_[t];
      }
    }
  }

  /// One full sweep over every token; returns the fraction of assignments
  /// that changed.
  double sweep() {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> probs(k_);
    int64_t changed = 0, total = 0;
    const double vbeta = vocab_size_ * beta_;
    for (int d = 0; d < corpus_.num_documents(); ++d) {
      const auto& tokens = corpus_.documents[d].tokens;
      for (size_t i = 0; i < tokens.size(); ++i) {
        const int w = tokens[i];
        const int old = assignments_[d][i];
        --doc_topic_[d * k_ + old];
        --topic_word_[static_cast<size_t>(old) * vocab_size_ + w];
        --topic_total_[old];
        double sum = 0.0;
        for (int t = 0; t < k_; ++t) {
          double p = (doc_topic_[d * k_ + t] + alpha_) *
                     (topic_word_[static_cast<size_t>(t) * vocab_size_ + w] + beta_) /
                     (topic_total_[t] + vbeta);
          probs[t] = p;
          sum += p;
        }
        double u = unit(rng_) * sum;
        int t = 0;
        for (; t < k_ - 1; ++t) {
          u -= probs[t];
          if (u <= 0.0) break;
        }
        assignments_[d][i] = t;
        ++doc_topic_[d * k_ + t];
        ++topic_word_[static_cast<size_t>(t) * vocab_size_ + w];
        ++topic_total_[t];
        if (t != old) ++changed;
        ++total;
      }
    }
    return total == 0 ? 0.0 : static_cast<double>(changed) / static_cast<double>(total);
  }

  int64_t total_assignments() const {
    int64_t n = 0;
    for (int64_t c : topic_total_) n += c;
    return n;
  }

  MatD topic_word_counts() const {
    MatD m(k_, vocab_size_);
    for (int t = 0; t < k_; ++t)
      for (int w = 0; w < vocab_size_; ++w)
        m(t, w) = static_cast<double>(topic_word_[static_cast<size_t>(t) * vocab_size_ + w]);
    return m;
  }

  int k() const { return k_; }

 private:
  const Corpus& corpus_;
  int k_;
  double alpha_, beta_;
  int vocab_size_;
  std::mt19937_64 rng_;
  std::vector<std::vector<int>> assignments_;
  std::vector<int64_t> doc_topic_;   // D x k
  std::vector<int64_t> topic_word_;  // k x V
  std::vector<int64_t> topic_total_;
};

/// Fits LDA by collapsed Gibbs sampling; stops early once the per-sweep
/// reassignment fraction drops below 1e-3.
inline DocSpace fit_lda(const Corpus& corpus, int k, double alpha = 0.1, double beta = 0.1,
                        int iterations = 100, uint64_t seed = 1) {
  LdaSampler sampler(corpus, k, alpha, beta, seed);
  for (int it = 0; it < iterations; ++it) {
    double frac = sampler.sweep();
    if (frac < 1e-3) break;
  }
  DocSpace space;
  space.method = Method::Lda;
  space.k = k;
  space.alpha = alpha;
  space.beta = beta;
  space.topic_word = sampler.topic_word_counts();
  return space;
}

}  // namespace eslm
