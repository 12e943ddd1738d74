#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "eslm/common.hpp"

namespace eslm {

// ---------------------------------------------------------------------------
// Partitions and clustering

struct Partition {
  std::vector<int> labels;  // contiguous cluster ids from 0

  int size() const { return static_cast<int>(labels.size()); }
  int num_clusters() const {
    int m = -1;
    for (int l : labels) m = std::max(m, l);
    return m + 1;
  }
};

struct KmeansResult {
  Partition partition;
  double inertia = 0.0;
  std::vector<double> inertia_history;  // objective after each assignment step
};

namespace detail {

inline void compact_labels(std::vector<int>& labels) {
  std::map<int, int> remap;
  for (int& l : labels) {
    const auto it = remap.emplace(l, static_cast<int>(remap.size())).first;
    l = it->second;
  }
}

}  // namespace detail

/// One Lloyd run: K distinct starting points sampled without replacement,
/// ties to the lowest centroid index, empty clusters reseeded with the point
/// farthest from its assigned centroid, at most 300 iterations.
inline KmeansResult kmeans_single(const MatF& points, int K, uint64_t seed) {
  const int n = static_cast<int>(points.rows());
  const int dim = static_cast<int>(points.cols());
  if (K < 1) throw Error("kmeans: K must be >= 1");
  if (K > n) throw Error("kmeans: K exceeds the number of points");

  std::mt19937_64 rng(seed);
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < K; ++i) {
    const int j = i + static_cast<int>(rng() % static_cast<uint64_t>(n - i));
    std::swap(idx[i], idx[j]);
  }
  MatD centroids(K, dim);
  for (int c = 0; c < K; ++c) centroids.row(c) = points.row(idx[c]).cast<double>();

  std::vector<int> assign(n, -1), prev(n, -2);
  std::vector<double> dist(n, 0.0);
  std::vector<int> counts(K, 0);

  auto assign_all = [&]() {
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < K; ++c) {
        double d = 0.0;
        for (int f = 0; f < dim; ++f) {
          const double diff = static_cast<double>(points(i, f)) - centroids(c, f);
          d += diff * diff;
        }
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      assign[i] = best;
      dist[i] = best_d;
    }
  };

  KmeansResult res;
  for (int iter = 0; iter < 300; ++iter) {
    assign_all();
    // Reseed empty clusters with the farthest point, then reassign; bounded
    // because each round either fills every cluster or runs out of distinct
    // reseed candidates (identical points).
    for (int round = 0; round <= K; ++round) {
      std::fill(counts.begin(), counts.end(), 0);
      for (int i = 0; i < n; ++i) ++counts[assign[i]];
      std::vector<int> empty;
      for (int c = 0; c < K; ++c)
        if (counts[c] == 0) empty.push_back(c);
      if (empty.empty()) break;
      std::vector<double> d = dist;
      bool reseeded = false;
      for (int c : empty) {
        int far = -1;
        for (int i = 0; i < n; ++i)
          if (d[i] > 0.0 && (far < 0 || d[i] > d[far])) far = i;
        if (far < 0) break;
        centroids.row(c) = points.row(far).cast<double>();
        d[far] = -1.0;
        reseeded = true;
      }
      if (!reseeded) break;
      assign_all();
    }
    double inertia = 0.0;
    for (int i = 0; i < n; ++i) inertia += dist[i];
    res.inertia_history.push_back(inertia);
    if (assign == prev) break;
    prev = assign;
    centroids.setZero();
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < n; ++i) {
      centroids.row(assign[i]) += points.row(i).cast<double>();
      ++counts[assign[i]];
    }
    for (int c = 0; c < K; ++c)
      if (counts[c] > 0) centroids.row(c) /= static_cast<double>(counts[c]);
  }
  res.inertia = res.inertia_history.back();
  res.partition.labels = assign;
  detail::compact_labels(res.partition.labels);
  return res;
}

/// Multiple restarts with per-restart derived seeds; restart results are
/// independent of execution order, so they may run in parallel.
inline std::vector<KmeansResult> kmeans(const MatF& points, int K, int restarts = 10,
                                        uint64_t seed = 1, int threads = 1) {
  if (restarts < 1) throw Error("kmeans: restarts must be >= 1");
  std::vector<KmeansResult> results(restarts);
  parallel_for(restarts, threads,
               [&](int r) { results[r] = kmeans_single(points, K, mix_seed(seed, r)); });
  return results;
}

// ---------------------------------------------------------------------------
// Ground-truth partitions

struct GroupAssignment {
  std::vector<std::string> entities;  // covered entities, sorted by id
  Partition partition;                // labels aligned with `entities`
};

/// Assigns every covered entity to its smallest group; ties go to the
/// lexicographically smallest group id. Labels are contiguous ordinals of
/// the chosen groups in lexicographic order.
inline GroupAssignment smallest_group_assignment(
    const std::vector<std::pair<std::string, std::string>>& group_entity_rows) {
  std::map<std::string, std::set<std::string>> members;
  for (const auto& [g, e] : group_entity_rows) members[g].insert(e);
  std::map<std::string, std::vector<std::string>> entity_groups;
  for (const auto& [g, es] : members)
    for (const auto& e : es) entity_groups[e].push_back(g);

  std::map<std::string, std::string> chosen;  // entity -> group
  std::set<std::string> chosen_groups;
  for (const auto& [e, gs] : entity_groups) {
    const std::string* best = nullptr;
    for (const auto& g : gs) {
      if (!best) {
        best = &g;
        continue;
      }
      const size_t sg = members[g].size(), sb = members[*best].size();
      if (sg < sb || (sg == sb && g < *best)) best = &g;
    }
    chosen[e] = *best;
    chosen_groups.insert(*best);
  }
  std::map<std::string, int> group_ordinal;
  for (const auto& g : chosen_groups)
    group_ordinal.emplace(g, static_cast<int>(group_ordinal.size()));

  GroupAssignment out;
  for (const auto& [e, g] : chosen) {
    out.entities.push_back(e);
    out.partition.labels.push_back(group_ordinal[g]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Adjusted Mutual Information

struct Contingency {
  std::vector<std::vector<int64_t>> cells;  // R x C
  std::vector<int64_t> a;                   // row sums
  std::vector<int64_t> b;                   // column sums
  int64_t total = 0;
};

inline Contingency contingency_table(const Partition& pa, const Partition& pb) {
  if (pa.size() != pb.size()) throw Error("ami: partition length mismatch");
  if (pa.size() == 0) throw Error("ami: empty partitions");
  std::map<int, int> ra, rb;
  for (int l : pa.labels) ra.emplace(l, static_cast<int>(ra.size()));
  for (int l : pb.labels) rb.emplace(l, static_cast<int>(rb.size()));
  Contingency t;
  t.cells.assign(ra.size(), std::vector<int64_t>(rb.size(), 0));
  t.a.assign(ra.size(), 0);
  t.b.assign(rb.size(), 0);
  t.total = pa.size();
  for (int i = 0; i < pa.size(); ++i) {
    const int r = ra[pa.labels[i]], c = rb[pb.labels[i]];
    ++t.cells[r][c];
    ++t.a[r];
    ++t.b[c];
  }
  return t;
}

namespace detail {

inline double partition_entropy(const std::vector<int64_t>& sums, int64_t N) {
  double h = 0.0;
  for (int64_t s : sums)
    if (s > 0) h -= (static_cast<double>(s) / N) * std::log(static_cast<double>(s) / N);
  return h;
}

inline double mutual_information(const Contingency& t) {
  const double N = static_cast<double>(t.total);
  double mi = 0.0;
  for (size_t i = 0; i < t.a.size(); ++i)
    for (size_t j = 0; j < t.b.size(); ++j) {
      const int64_t nij = t.cells[i][j];
      if (nij == 0) continue;
      mi += (nij / N) * std::log(N * nij / (static_cast<double>(t.a[i]) * t.b[j]));
    }
  return mi;
}

}  // namespace detail

/// E[MI] under the hypergeometric permutation model (fixed marginals),
/// evaluated with the closed-form cell-wise sum using log-gamma.
inline double expected_mutual_information(const std::vector<int64_t>& a,
                                          const std::vector<int64_t>& b, int64_t N) {
  const double dN = static_cast<double>(N);
  const double lgN = std::lgamma(dN + 1.0);
  double emi = 0.0;
  for (int64_t ai : a) {
    for (int64_t bj : b) {
      const int64_t lo = std::max<int64_t>(1, ai + bj - N);
      const int64_t hi = std::min(ai, bj);
      for (int64_t nij = lo; nij <= hi; ++nij) {
        const double dn = static_cast<double>(nij);
        const double term = (dn / dN) * std::log(dN * dn / (static_cast<double>(ai) * bj));
        const double logp = std::lgamma(ai + 1.0) + std::lgamma(bj + 1.0) +
                            std::lgamma(dN - ai + 1.0) + std::lgamma(dN - bj + 1.0) - lgN -
                            std::lgamma(dn + 1.0) - std::lgamma(ai - dn + 1.0) -
                            std::lgamma(bj - dn + 1.0) -
                            std::lgamma(dN - ai - bj + dn + 1.0);
        emi += term * std::exp(logp);
      }
    }
  }
  return emi;
}

/// AMI_max of Vinh et al. 2010: (MI - E[MI]) / (max(Ha, Hb) - E[MI]),
/// natural logs. Two single-cluster partitions agree perfectly -> 1.0.
inline double ami(const Partition& pa, const Partition& pb) {
  const Contingency t = contingency_table(pa, pb);
  const double ha = detail::partition_entropy(t.a, t.total);
  const double hb = detail::partition_entropy(t.b, t.total);
  if (ha == 0.0 && hb == 0.0) return 1.0;
  const double mi = detail::mutual_information(t);
  const double emi = expected_mutual_information(t.a, t.b, t.total);
  double denom = std::max(ha, hb) - emi;
  // Guard against a vanishing denominator while preserving its sign.
  const double eps = std::numeric_limits<double>::epsilon();
  denom = denom < 0.0 ? std::min(denom, -eps) : std::max(denom, eps);
  return (mi - emi) / denom;
}

// ---------------------------------------------------------------------------
// Ranking metrics

using GainMap = std::map<int, int>;  // entity index -> nonnegative gain

/// NDCG with linear gains and log2(rank+1) discount over the full ranking.
/// Queries whose judgments carry zero total gain are skipped (nullopt).
inline std::optional<double> ndcg(const std::vector<int>& ranked, const GainMap& gains) {
  std::vector<int> positive;
  for (const auto& [e, g] : gains) {
    if (g < 0) throw Error("ndcg: negative gain");
    if (g > 0) positive.push_back(g);
  }
  if (positive.empty()) return std::nullopt;
  {
    std::set<int> in_ranking(ranked.begin(), ranked.end());
    for (const auto& [e, g] : gains)
      if (g > 0 && !in_ranking.count(e)) throw Error("ndcg: ranking does not cover judged entities");
  }
  double dcg = 0.0;
  for (size_t r = 0; r < ranked.size(); ++r) {
    const auto it = gains.find(ranked[r]);
    if (it == gains.end() || it->second == 0) continue;
    dcg += static_cast<double>(it->second) / std::log2(static_cast<double>(r + 2));
  }
  std::sort(positive.begin(), positive.end(), std::greater<int>());
  double idcg = 0.0;
  for (size_t r = 0; r < positive.size(); ++r)
    idcg += static_cast<double>(positive[r]) / std::log2(static_cast<double>(r + 2));
  return dcg / idcg;
}

/// Precision at R where R = number of judged entities with positive gain;
/// R = 0 queries are skipped (nullopt).
inline std::optional<double> r_precision(const std::vector<int>& ranked, const GainMap& gains) {
  int R = 0;
  for (const auto& [e, g] : gains) {
    if (g < 0) throw Error("r_precision: negative gain");
    if (g > 0) ++R;
  }
  if (R == 0) return std::nullopt;
  int hits = 0;
  const int depth = std::min<int>(R, static_cast<int>(ranked.size()));
  for (int r = 0; r < depth; ++r) {
    const auto it = gains.find(ranked[r]);
    if (it != gains.end() && it->second > 0) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(R);
}

// ---------------------------------------------------------------------------
// Paired t-test

namespace detail {

/// Regularized incomplete beta I_x(a, b) via Lentz's continued fraction.
inline double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  if (x > (a + 1.0) / (a + b + 2.0)) return 1.0 - incomplete_beta(b, a, 1.0 - x);
  const double lbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - lbeta) / a;
  const double tiny = 1e-300;
  double f = 1.0, c = 1.0, d = 0.0;
  for (int i = 0; i <= 500; ++i) {
    double numerator;
    const int m = i / 2;
    if (i == 0)
      numerator = 1.0;
    else if (i % 2 == 0)
      numerator = (m * (b - m) * x) / ((a + 2.0 * m - 1.0) * (a + 2.0 * m));
    else
      numerator = -((a + m) * (a + b + m) * x) / ((a + 2.0 * m) * (a + 2.0 * m + 1.0));
    d = 1.0 + numerator * d;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    c = 1.0 + numerator / c;
    if (std::abs(c) < tiny) c = tiny;
    f *= c * d;
    if (std::abs(1.0 - c * d) < 1e-15) break;
  }
  return front * (f - 1.0);
}

/// Two-sided p-value of Student's t with df degrees of freedom.
inline double student_t_two_sided_p(double t, double df) {
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  const double p = incomplete_beta(df / 2.0, 0.5, x);
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace detail

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  int64_t df = 0;
  bool degenerate_variance = false;  // nonzero mean difference with zero variance
};

inline TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw Error("paired_ttest: length mismatch");
  const int64_t n = static_cast<int64_t>(a.size());
  if (n < 2) throw Error("paired_ttest: need at least 2 pairs");
  double mean = 0.0;
  for (int64_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double d = (a[i] - b[i]) - mean;
    var += d * d;
  }
  var /= static_cast<double>(n - 1);
  TTestResult res;
  res.df = n - 1;
  if (var == 0.0) {
    if (mean == 0.0) return res;  // t = 0, p = 1
    res.t = mean > 0.0 ? std::numeric_limits<double>::infinity()
                       : -std::numeric_limits<double>::infinity();
    res.p = 0.0;
    res.degenerate_variance = true;
    return res;
  }
  res.t = mean / std::sqrt(var / static_cast<double>(n));
  res.p = detail::student_t_two_sided_p(res.t, static_cast<double>(res.df));
  return res;
}

// ---------------------------------------------------------------------------
// Rank correlation and summaries

namespace detail {

inline std::vector<double> average_ranks(const std::vector<double>& x) {
  const size_t n = x.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return x[i] < x[j]; });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (size_t s = i; s <= j; ++s) ranks[order[s]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace detail

/// Spearman rank correlation with average ranks for ties; zero variance in
/// either input yields 0.0.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error("spearman: length mismatch");
  const size_t n = x.size();
  if (n < 2) return 0.0;
  const std::vector<double> rx = detail::average_ranks(x);
  const std::vector<double> ry = detail::average_ranks(y);
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

struct FiveNumber {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

namespace detail {

// Linear interpolation between order statistics (the common "type 7" rule).
inline double quantile(const std::vector<double>& sorted, double p) {
  const size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = static_cast<double>(n - 1) * p;
  const size_t lo = static_cast<size_t>(h);
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace detail

inline FiveNumber five_number_summary(std::vector<double> values) {
  if (values.empty()) throw Error("five_number_summary: empty input");
  std::sort(values.begin(), values.end());
  FiveNumber f;
  f.min = values.front();
  f.q1 = detail::quantile(values, 0.25);
  f.median = detail::quantile(values, 0.5);
  f.q3 = detail::quantile(values, 0.75);
  f.max = values.back();
  return f;
}

struct RankGroundTruth {
  // entity id -> (label, ordinal); ordinals dense from 0
  std::map<std::string, std::pair<std::string, int>> entries;
};

struct RankPriorRow {
  std::string label;
  int ordinal = 0;
  int count = 0;
  FiveNumber stats;
};

struct RankPriorSummary {
  std::vector<RankPriorRow> rows;  // ascending ordinal
  double spearman_rho = 0.0;
  int n_covered = 0;
};

/// Per-rank five-number summaries of the prior over covered entities plus
/// the Spearman correlation between prior value and rank ordinal.
inline RankPriorSummary rank_prior_summary(const VecD& prior,
                                           const std::vector<std::string>& entity_ids,
                                           const RankGroundTruth& gt) {
  if (static_cast<int>(entity_ids.size()) != prior.size())
    throw Error("rank_prior_summary: prior/entity length mismatch");
  std::map<int, std::pair<std::string, std::vector<double>>> by_ordinal;
  std::vector<double> xs, ys;
  for (size_t i = 0; i < entity_ids.size(); ++i) {
    const auto it = gt.entries.find(entity_ids[i]);
    if (it == gt.entries.end()) continue;  // uncovered entities excluded
    const auto& [label, ordinal] = it->second;
    auto& bucket = by_ordinal[ordinal];
    if (bucket.second.empty()) bucket.first = label;
    bucket.second.push_back(prior[static_cast<int>(i)]);
    xs.push_back(prior[static_cast<int>(i)]);
    ys.push_back(static_cast<double>(ordinal));
  }
  RankPriorSummary out;
  out.n_covered = static_cast<int>(xs.size());
  for (auto& [ordinal, bucket] : by_ordinal) {
    RankPriorRow row;
    row.label = bucket.first;
    row.ordinal = ordinal;
    row.count = static_cast<int>(bucket.second.size());
    row.stats = five_number_summary(bucket.second);
    out.rows.push_back(std::move(row));
  }
  out.spearman_rho = out.n_covered >= 2 ? spearman(xs, ys) : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Ground-truth file loaders

/// Reads "group_id<TAB>entity_id" rows; blank lines ignored.
inline std::vector<std::pair<std::string, std::string>> load_groups(std::istream& in,
                                                                    const std::string& source) {
  std::vector<std::pair<std::string, std::string>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
      throw Error(source + ":" + std::to_string(lineno) + ": malformed group row");
    rows.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return rows;
}

/// Reads "entity_id<TAB>label<TAB>ordinal" rows; ordinals must be dense
/// from 0 across the file.
inline RankGroundTruth load_ranks(std::istream& in, const std::string& source) {
  RankGroundTruth gt;
  std::string line;
  int lineno = 0;
  std::set<int> ordinals;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const size_t t1 = line.find('\t');
    const size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos)
      throw Error(source + ":" + std::to_string(lineno) + ": malformed rank row");
    const std::string entity = line.substr(0, t1);
    const std::string label = line.substr(t1 + 1, t2 - t1 - 1);
    int ordinal = 0;
    try {
      ordinal = std::stoi(line.substr(t2 + 1));
    } catch (const std::exception&) {
      throw Error(source + ":" + std::to_string(lineno) + ": malformed rank ordinal");
    }
    if (ordinal < 0)
      throw Error(source + ":" + std::to_string(lineno) + ": negative rank ordinal");
    gt.entries[entity] = {label, ordinal};
    ordinals.insert(ordinal);
  }
  if (!ordinals.empty() &&
      (*ordinals.begin() != 0 ||
       *ordinals.rbegin() != static_cast<int>(ordinals.size()) - 1))
    throw Error(source + ": rank ordinals must be dense from 0");
  return gt;
}

}  // namespace eslm
