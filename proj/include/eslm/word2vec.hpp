#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "eslm/common.hpp"
#include "eslm/corpus.hpp"
#include "eslm/docspace.hpp"

namespace eslm {

namespace detail {

inline double ns_sigmoid(double x) {
  if (x > 30.0) x = 30.0;
  if (x < -30.0) x = -30.0;
  return 1.0 / (1.0 + std::exp(-x));
}

}  // namespace detail

/// Negative-sampling word embedding trainer (skip-gram / CBOW).
/// Single-worker, deterministic for a fixed seed. syn0 holds the input
/// (context-side) vectors that become the published embeddings; syn1 holds
/// the output-side vectors used only during training.
class Word2VecTrainer {
 public:
  static constexpr int kTableSize = 1 << 20;

  Word2VecTrainer(const Corpus& corpus, int k, Method variant, int window = 5,
                  int negatives = 5, int epochs = 5, double learning_rate = 0.025,
                  uint64_t seed = 1)
      : corpus_(corpus),
        k_(k),
        variant_(variant),
        window_(window),
        negatives_(negatives),
        epochs_(epochs),
        lr0_(learning_rate),
        rng_(mix_seed(seed, 0)) {
    if (variant != Method::W2vSg && variant != Method::W2vCbow)
      throw Error("word2vec: variant must be w2v-sg or w2v-cbow");
    if (window < 1) throw Error("word2vec: window must be >= 1");
    if (negatives < 1) throw Error("word2vec: negatives must be >= 1");
    if (k < 1) throw Error("word2vec: k must be >= 1");
    const int V = corpus.vocabulary.size();
    if (V < 2) throw Error("fit_word2vec: corpus has fewer than 2 distinct terms");
    syn0_.resize(V, k);
    syn1_.setZero(V, k);
    std::uniform_real_distribution<float> init(-0.5f, 0.5f);
    for (int w = 0; w < V; ++w)
      for (int j = 0; j < k; ++j) syn0_(w, j) = init(rng_) / static_cast<float>(k);
    build_table();
    total_words_ = corpus.total_tokens();
  }

  /// One pass over the corpus, documents as sentences.
  void run_epoch() {
    std::vector<double> neu1(k_), neu1e(k_);
    std::vector<int> context;
    for (const auto& doc : corpus_.documents) {
      const auto& sen = doc.tokens;
      const int n = static_cast<int>(sen.size());
      for (int i = 0; i < n; ++i) {
        double alpha = lr0_ * (1.0 - static_cast<double>(words_processed_) /
                                         (static_cast<double>(epochs_) * total_words_ + 1.0));
        if (alpha < lr0_ * 1e-4) alpha = lr0_ * 1e-4;
        ++words_processed_;
        const int center = sen[i];
        const int b = static_cast<int>(rng_() % static_cast<uint64_t>(window_));
        context.clear();
        for (int a = b; a < 2 * window_ + 1 - b; ++a) {
          if (a == window_) continue;
          const int j = i - window_ + a;
          if (j < 0 || j >= n) continue;
          context.push_back(sen[j]);
        }
        if (context.empty()) continue;
        if (variant_ == Method::W2vSg) {
          for (int cw : context) {
            std::fill(neu1e.begin(), neu1e.end(), 0.0);
            train_pair(cw, center, alpha, neu1e);
            for (int c = 0; c < k_; ++c) syn0_(cw, c) += static_cast<float>(neu1e[c]);
          }
        } else {
          std::fill(neu1.begin(), neu1.end(), 0.0);
          for (int cw : context)
            for (int c = 0; c < k_; ++c) neu1[c] += syn0_(cw, c);
          const double inv = 1.0 / static_cast<double>(context.size());
          for (int c = 0; c < k_; ++c) neu1[c] *= inv;
          std::fill(neu1e.begin(), neu1e.end(), 0.0);
          train_hidden(neu1, center, alpha, neu1e);
          for (int cw : context)
            for (int c = 0; c < k_; ++c) syn0_(cw, c) += static_cast<float>(neu1e[c]);
        }
      }
    }
  }

  /// Mean negative-sampling loss over a fixed, seed-determined set of
  /// (context, center) samples. Same seed → same samples and negatives, so
  /// successive calls are comparable across epochs.
  double probe_loss(int n_samples, uint64_t seed) const {
    std::mt19937_64 rng(mix_seed(seed, 0xb10c));
    std::vector<std::pair<int, int>> positions;  // (doc, token)
    for (int d = 0; d < corpus_.num_documents(); ++d)
      for (size_t i = 0; i < corpus_.documents[d].tokens.size(); ++i)
        positions.emplace_back(d, static_cast<int>(i));
    if (positions.empty()) return 0.0;
    double loss = 0.0;
    int64_t terms = 0;
    std::vector<double> h(k_);
    for (int s = 0; s < n_samples; ++s) {
      auto [d, i] = positions[rng() % positions.size()];
      const auto& sen = corpus_.documents[d].tokens;
      const int n = static_cast<int>(sen.size());
      const int center = sen[i];
      std::vector<int> context;
      for (int j = i - window_; j <= i + window_; ++j) {
        if (j == i || j < 0 || j >= n) continue;
        context.push_back(sen[j]);
      }
      if (context.empty()) continue;
      auto pair_loss = [&](const std::vector<double>& hidden) {
        double f = 0.0;
        for (int c = 0; c < k_; ++c) f += hidden[c] * syn1_(center, c);
        double l = -std::log(std::max(detail::ns_sigmoid(f), 1e-12));
        for (int neg = 0; neg < negatives_; ++neg) {
          int target = table_[rng() % table_.size()];
          if (target == center) continue;
          double fn = 0.0;
          for (int c = 0; c < k_; ++c) fn += hidden[c] * syn1_(target, c);
          l += -std::log(std::max(1.0 - detail::ns_sigmoid(fn), 1e-12));
        }
        return l;
      };
      if (variant_ == Method::W2vSg) {
        for (int cw : context) {
          for (int c = 0; c < k_; ++c) h[c] = syn0_(cw, c);
          loss += pair_loss(h);
          ++terms;
        }
      } else {
        std::fill(h.begin(), h.end(), 0.0);
        for (int cw : context)
          for (int c = 0; c < k_; ++c) h[c] += syn0_(cw, c);
        for (int c = 0; c < k_; ++c) h[c] /= static_cast<double>(context.size());
        loss += pair_loss(h);
        ++terms;
      }
    }
    return terms == 0 ? 0.0 : loss / static_cast<double>(terms);
  }

  const MatF& input_vectors() const { return syn0_; }
  const MatF& output_vectors() const { return syn1_; }
  int epochs() const { return epochs_; }

 private:
  void build_table() {
    const auto& counts = corpus_.vocabulary.frequencies;
    const int V = static_cast<int>(counts.size());
    table_.resize(kTableSize);
    double pow_sum = 0.0;
    for (int w = 0; w < V; ++w) pow_sum += std::pow(static_cast<double>(counts[w]), 0.75);
    int i = 0;
    double cum = std::pow(static_cast<double>(counts[0]), 0.75) / pow_sum;
    for (int a = 0; a < kTableSize; ++a) {
      table_[a] = i;
      if (static_cast<double>(a + 1) / kTableSize > cum && i < V - 1) {
        ++i;
        cum += std::pow(static_cast<double>(counts[i]), 0.75) / pow_sum;
      }
    }
  }

  // One (input word, positive target) update; gradient w.r.t. the hidden
  // vector is accumulated into neu1e, output vectors updated in place.
  void train_pair(int input, int positive, double alpha, std::vector<double>& neu1e) {
    std::vector<double> h(k_);
    for (int c = 0; c < k_; ++c) h[c] = syn0_(input, c);
    train_hidden(h, positive, alpha, neu1e);
  }

  void train_hidden(const std::vector<double>& h, int positive, double alpha,
                    std::vector<double>& neu1e) {
    for (int d = 0; d < negatives_ + 1; ++d) {
      int target;
      double label;
      if (d == 0) {
        target = positive;
        label = 1.0;
      } else {
        target = table_[rng_() % table_.size()];
        if (target == positive) continue;
        label = 0.0;
      }
      double f = 0.0;
      for (int c = 0; c < k_; ++c) f += h[c] * syn1_(target, c);
      const double g = (label - detail::ns_sigmoid(f)) * alpha;
      for (int c = 0; c < k_; ++c) {
        neu1e[c] += g * syn1_(target, c);
        syn1_(target, c) += static_cast<float>(g * h[c]);
      }
    }
  }

  const Corpus& corpus_;
  int k_;
  Method variant_;
  int window_, negatives_, epochs_;
  double lr0_;
  std::mt19937_64 rng_;
  MatF syn0_, syn1_;
  std::vector<int> table_;
  int64_t total_words_ = 0;
  int64_t words_processed_ = 0;
};

enum class W2vVariant { SG, CBOW };

inline DocSpace fit_word2vec(const Corpus& corpus, int k, W2vVariant variant, int window = 5,
                             int negatives = 5, int epochs = 5, uint64_t seed = 1,
                             double learning_rate = 0.025) {
  const Method m = variant == W2vVariant::SG ? Method::W2vSg : Method::W2vCbow;
  Word2VecTrainer trainer(corpus, k, m, window, negatives, epochs, learning_rate, seed);
  for (int e = 0; e < epochs; ++e) trainer.run_epoch();
  DocSpace space;
  space.method = m;
  space.k = k;
  space.word_embeddings = trainer.input_vectors();
  return space;
}

}  // namespace eslm
