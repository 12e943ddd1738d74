#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace eslm {

using MatF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VecF = Eigen::VectorXf;
using VecD = Eigen::VectorXd;

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Representation estimation methods supported end to end.
enum class Method : uint8_t {
  Lsi = 0,
  Lda = 1,
  W2vSg = 2,
  W2vCbow = 3,
  Doc2vec = 4,
  Sert = 5,
  GraphPca = 6,
  Random = 7,
};

inline const char* method_name(Method m) {
  switch (m) {
    case Method::Lsi: return "lsi";
    case Method::Lda: return "lda";
    case Method::W2vSg: return "w2v-sg";
    case Method::W2vCbow: return "w2v-cbow";
    case Method::Doc2vec: return "doc2vec";
    case Method::Sert: return "sert";
    case Method::GraphPca: return "graph-pca";
    case Method::Random: return "random";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  for (int i = 0; i <= 7; ++i) {
    Method m = static_cast<Method>(i);
    if (s == method_name(m)) return m;
  }
  throw Error("unknown method '" + s + "'");
}

// FNV-1a, used for file fingerprints and content-derived seeds.
inline uint64_t fnv1a64(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

/// splitmix64 finalizer; derives independent sub-seeds from (seed, stream).
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Runs fn(i) for i in [0, n). Each index must touch disjoint state, so the
/// result is identical for any thread count.
inline void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  size_t nw = std::min<size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (size_t w = 0; w < nw; ++w) {
    pool.emplace_back([&, w] {
      for (size_t i = w; i < n; i += nw) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace eslm
