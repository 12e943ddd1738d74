#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "eslm/common.hpp"

namespace eslm {

/// Knobs for a synthetic organization: entities split into committees with
/// dedicated vocabulary slices, ranks that scale expected document counts,
/// and intra-committee co-authorship.
struct OrgConfig {
  int n_entities = 60;
  int n_committees = 6;
  int n_rank_levels = 5;
  int vocab_size = 500;
  int n_docs = 1200;
  double doc_length_mean = 80.0;
  double topic_concentration = 0.7;  // probability a word comes from the committee slice
  double coauthor_rate = 0.5;        // probability a document has 2-3 authors
  double docs_per_rank_multiplier = 2.0;
  uint64_t seed = 1;
};

struct OrgData {
  struct Doc {
    std::string id;
    std::vector<std::string> words;
  };
  struct RankRow {
    std::string entity;
    std::string label;
    int ordinal = 0;
  };
  std::vector<Doc> docs;
  std::vector<std::pair<std::string, std::string>> associations;  // doc id, entity id
  std::vector<std::pair<std::string, std::string>> groups;        // group id, entity id
  std::vector<RankRow> ranks;
  std::vector<std::string> entity_ids;  // by entity index
  std::vector<int> committee_of;        // by entity index
  std::vector<int> rank_of;             // by entity index
};

namespace detail {

inline std::string padded_id(char prefix, int value, int width) {
  std::string digits = std::to_string(value);
  while (static_cast<int>(digits.size()) < width) digits.insert(digits.begin(), '0');
  return std::string(1, prefix) + digits;
}

inline int id_width(int count) {
  int width = 1, limit = 10;
  while (count > limit) {
    ++width;
    limit *= 10;
  }
  return std::max(width, 2);
}

// Base-26 lowercase words ("aaa", "aab", ...) so every word survives a
// letters-only tokenizer.
inline std::string letter_word(int index, int length) {
  std::string w(length, 'a');
  for (int p = length - 1; p >= 0; --p) {
    w[p] = static_cast<char>('a' + index % 26);
    index /= 26;
  }
  return w;
}

inline std::string rank_label(int ordinal) {
  static const char* names[] = {"phd", "postdoc", "assistant-prof", "associate-prof",
                                "full-prof"};
  if (ordinal < 5) return names[ordinal];
  return "rank" + std::to_string(ordinal);
}

}  // namespace detail

inline OrgData generate_org(const OrgConfig& cfg) {
  if (cfg.n_entities < 1 || cfg.n_committees < 1 || cfg.n_rank_levels < 1 || cfg.n_docs < 1)
    throw Error("generate_org: counts must be positive");
  if (cfg.n_committees > cfg.n_entities)
    throw Error("generate_org: more committees than entities");
  if (cfg.vocab_size < cfg.n_committees + 1)
    throw Error("generate_org: vocab_size must be at least n_committees + 1");
  if (cfg.doc_length_mean <= 0) throw Error("generate_org: doc_length_mean must be positive");
  if (cfg.topic_concentration < 0 || cfg.topic_concentration > 1)
    throw Error("generate_org: topic_concentration must be in [0, 1]");
  if (cfg.coauthor_rate < 0 || cfg.coauthor_rate > 1)
    throw Error("generate_org: coauthor_rate must be in [0, 1]");
  if (cfg.docs_per_rank_multiplier <= 0)
    throw Error("generate_org: docs_per_rank_multiplier must be positive");

  OrgData org;
  std::mt19937_64 rng(mix_seed(cfg.seed, 0));

  const int ent_width = detail::id_width(cfg.n_entities);
  const int doc_width = detail::id_width(cfg.n_docs);
  const int com_width = detail::id_width(cfg.n_committees);

  org.entity_ids.resize(cfg.n_entities);
  org.committee_of.resize(cfg.n_entities);
  org.rank_of.resize(cfg.n_entities);
  for (int i = 0; i < cfg.n_entities; ++i) {
    org.entity_ids[i] = detail::padded_id('e', i, ent_width);
    org.committee_of[i] = i % cfg.n_committees;
    org.rank_of[i] = i % cfg.n_rank_levels;
    org.groups.emplace_back(detail::padded_id('g', org.committee_of[i], com_width),
                            org.entity_ids[i]);
    org.ranks.push_back({org.entity_ids[i], detail::rank_label(org.rank_of[i]), org.rank_of[i]});
  }

  // Vocabulary slices: one block per committee plus a trailing shared-noise
  // block that also absorbs the division remainder.
  int word_len = 3;
  {
    int capacity = 26 * 26 * 26;
    while (capacity < cfg.vocab_size) {
      capacity *= 26;
      ++word_len;
    }
  }
  const int block = cfg.vocab_size / (cfg.n_committees + 1);
  const int noise_begin = cfg.n_committees * block;

  std::vector<double> author_weight(cfg.n_entities);
  for (int i = 0; i < cfg.n_entities; ++i)
    author_weight[i] = std::pow(cfg.docs_per_rank_multiplier, org.rank_of[i]);
  std::discrete_distribution<int> lead_dist(author_weight.begin(), author_weight.end());
  std::vector<std::vector<int>> committee_members(cfg.n_committees);
  for (int i = 0; i < cfg.n_entities; ++i) committee_members[org.committee_of[i]].push_back(i);

  std::poisson_distribution<int> length_dist(cfg.doc_length_mean);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (int d = 0; d < cfg.n_docs; ++d) {
    const int lead = lead_dist(rng);
    const int committee = org.committee_of[lead];
    std::vector<int> authors{lead};
    if (unit(rng) < cfg.coauthor_rate) {
      const int extra = 1 + static_cast<int>(rng() % 2);
      const auto& pool = committee_members[committee];
      std::vector<int> candidates;
      std::vector<double> weights;
      for (int member : pool)
        if (member != lead) {
          candidates.push_back(member);
          weights.push_back(author_weight[member]);
        }
      for (int e = 0; e < extra && !candidates.empty(); ++e) {
        std::discrete_distribution<int> pick(weights.begin(), weights.end());
        const int chosen = pick(rng);
        authors.push_back(candidates[chosen]);
        candidates.erase(candidates.begin() + chosen);
        weights.erase(weights.begin() + chosen);
      }
    }
    std::sort(authors.begin(), authors.end());

    OrgData::Doc doc;
    doc.id = detail::padded_id('d', d, doc_width);
    const int length = std::max(1, length_dist(rng));
    doc.words.reserve(length);
    for (int w = 0; w < length; ++w) {
      int word_index;
      if (unit(rng) < cfg.topic_concentration) {
        word_index = committee * block + static_cast<int>(rng() % static_cast<uint64_t>(block));
      } else {
        word_index = noise_begin +
                     static_cast<int>(rng() % static_cast<uint64_t>(cfg.vocab_size - noise_begin));
      }
      doc.words.push_back(detail::letter_word(word_index, word_len));
    }
    for (int a : authors) org.associations.emplace_back(doc.id, org.entity_ids[a]);
    org.docs.push_back(std::move(doc));
  }
  return org;
}

inline void write_org(const OrgData& org, const std::string& corpus_path,
                      const std::string& associations_path, const std::string& groups_path,
                      const std::string& ranks_path) {
  {
    std::ofstream out(corpus_path, std::ios::binary);
    if (!out) throw Error("write_org: cannot open " + corpus_path);
    for (const auto& doc : org.docs) {
      std::string text;
      for (size_t i = 0; i < doc.words.size(); ++i) {
        if (i) text += ' ';
        text += doc.words[i];
      }
      nlohmann::json j{{"id", doc.id}, {"text", text}};
      out << j.dump() << '\n';
    }
  }
  {
    std::ofstream out(associations_path, std::ios::binary);
    if (!out) throw Error("write_org: cannot open " + associations_path);
    for (const auto& [doc, entity] : org.associations) out << doc << '\t' << entity << '\n';
  }
  {
    std::ofstream out(groups_path, std::ios::binary);
    if (!out) throw Error("write_org: cannot open " + groups_path);
    for (const auto& [group, entity] : org.groups) out << group << '\t' << entity << '\n';
  }
  {
    std::ofstream out(ranks_path, std::ios::binary);
    if (!out) throw Error("write_org: cannot open " + ranks_path);
    for (const auto& row : org.ranks)
      out << row.entity << '\t' << row.label << '\t' << row.ordinal << '\n';
  }
}

}  // namespace eslm
