#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "eslm/common.hpp"

namespace eslm {

/// One ingested document: tokens are vocabulary indices, raw_length counts
/// tokens before vocabulary filtering.
struct Document {
  std::string id;
  std::vector<int> tokens;
  int raw_length = 0;
};

struct Vocabulary {
  std::vector<std::string> terms;      // index -> surface form
  std::vector<int64_t> frequencies;    // corpus frequency per kept term
  int64_t stopwords_removed = 0;       // distinct stopword types dropped
  std::unordered_map<std::string, int> index;

  int size() const { return static_cast<int>(terms.size()); }

  int id_of(const std::string& term) const {
    auto it = index.find(term);
    return it == index.end() ? -1 : it->second;
  }
};

struct Corpus {
  std::vector<Document> documents;
  Vocabulary vocabulary;
  std::unordered_map<std::string, int> doc_index;  // id -> position

  int num_documents() const { return static_cast<int>(documents.size()); }

  int64_t total_tokens() const {
    int64_t n = 0;
    for (const auto& d : documents) n += static_cast<int64_t>(d.tokens.size());
    return n;
  }
};

/// The bipartite entity-document graph. Both directions are kept as sorted
/// unique index lists and are exact transposes of each other.
struct AssociationIndex {
  std::vector<std::string> entities;  // sorted distinct entity ids
  std::unordered_map<std::string, int> entity_index;
  std::vector<std::vector<int>> doc_to_entities;  // X_d
  std::vector<std::vector<int>> entity_to_docs;   // D_x

  int num_entities() const { return static_cast<int>(entities.size()); }

  int64_t num_edges() const {
    int64_t n = 0;
    for (const auto& v : entity_to_docs) n += static_cast<int64_t>(v.size());
    return n;
  }
};

namespace detail {

// Decodes one UTF-8 codepoint starting at s[i]; advances i. Returns 0xFFFD on
// malformed input (consumed one byte).
inline uint32_t utf8_next(const std::string& s, size_t& i) {
  unsigned char c = s[i];
  if (c < 0x80) {
    ++i;
    return c;
  }
  int extra = 0;
  uint32_t cp = 0;
  if ((c & 0xE0) == 0xC0) {
    cp = c & 0x1F;
    extra = 1;
  } else if ((c & 0xF0) == 0xE0) {
    cp = c & 0x0F;
    extra = 2;
  } else if ((c & 0xF8) == 0xF0) {
    cp = c & 0x07;
    extra = 3;
  } else {
    ++i;
    return 0xFFFD;
  }
  if (i + extra >= s.size()) {
    ++i;
    return 0xFFFD;
  }
  size_t j = i + 1;
  for (int e = 0; e < extra; ++e, ++j) {
    if ((static_cast<unsigned char>(s[j]) & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (static_cast<unsigned char>(s[j]) & 0x3F);
  }
  i = j;
  return cp;
}

inline void utf8_append(std::string& out, uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Letter test and lowercase map. ASCII and Latin-1 get real classification;
// codepoints past U+00FF count as letters except common punctuation blocks
// (multilingual normalization is a non-goal).
inline bool is_letter(uint32_t cp) {
  if (cp < 0x80) return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
  if (cp < 0xC0) return false;                    // Latin-1 punctuation/signs
  if (cp == 0xD7 || cp == 0xF7) return false;     // multiply/divide signs
  if (cp <= 0xFF) return true;                    // Latin-1 letters
  if (cp >= 0x2000 && cp <= 0x206F) return false; // general punctuation
  if (cp >= 0x3000 && cp <= 0x303F) return false; // CJK punctuation
  if (cp == 0xFFFD) return false;
  return true;
}

inline uint32_t to_lower(uint32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  return cp;
}

}  // namespace detail

/// Splits text into lowercase tokens: any maximal run of letters is a token,
/// digits and punctuation are separators.
inline std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  size_t i = 0;
  while (i < text.size()) {
    uint32_t cp = detail::utf8_next(text, i);
    if (detail::is_letter(cp)) {
      detail::utf8_append(cur, detail::to_lower(cp));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

/// Counts terms across all streams, drops stopwords, keeps the max_size most
/// frequent terms (ties broken lexicographically).
inline Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& token_streams,
                                   int64_t max_size,
                                   const std::set<std::string>& stopwords) {
  if (max_size < 1) throw Error("build_vocabulary: max_size must be >= 1");
  std::unordered_map<std::string, int64_t> counts;
  for (const auto& stream : token_streams) {
    for (const auto& t : stream) ++counts[t];
  }
  Vocabulary vocab;
  std::vector<std::pair<std::string, int64_t>> ranked;
  ranked.reserve(counts.size());
  for (auto& [term, n] : counts) {
    if (stopwords.count(term)) {
      ++vocab.stopwords_removed;
      continue;
    }
    ranked.emplace_back(term, n);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (static_cast<int64_t>(ranked.size()) > max_size) ranked.resize(max_size);
  vocab.terms.reserve(ranked.size());
  vocab.frequencies.reserve(ranked.size());
  for (auto& [term, n] : ranked) {
    vocab.index.emplace(term, static_cast<int>(vocab.terms.size()));
    vocab.terms.push_back(term);
    vocab.frequencies.push_back(n);
  }
  return vocab;
}

struct CorpusConfig {
  int64_t max_vocab_size = 60000;
  std::set<std::string> stopwords;
};

/// Reads a stopword file, one term per line.
inline std::set<std::string> load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open stopword file: " + path);
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.insert(line);
  }
  return out;
}

/// Loads a JSONL corpus ({"id", "text"} per line), tokenizes, builds the
/// pruned vocabulary and maps tokens to indices. Out-of-vocabulary tokens are
/// dropped; documents that end up empty are kept.
inline Corpus load_corpus(std::istream& in, const CorpusConfig& config,
                          const std::string& source = "<stream>") {
  Corpus corpus;
  std::vector<std::vector<std::string>> streams;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(source + ":" + std::to_string(line_no) + ": malformed JSON: " + e.what());
    }
    if (!rec.is_object() || !rec.contains("id") || !rec["id"].is_string())
      throw Error(source + ":" + std::to_string(line_no) + ": missing string field \"id\"");
    if (!rec.contains("text") || !rec["text"].is_string())
      throw Error(source + ":" + std::to_string(line_no) + ": missing string field \"text\"");
    Document doc;
    doc.id = rec["id"].get<std::string>();
    if (corpus.doc_index.count(doc.id))
      throw Error(source + ":" + std::to_string(line_no) + ": duplicate document id \"" + doc.id + "\"");
    corpus.doc_index.emplace(doc.id, static_cast<int>(corpus.documents.size()));
    streams.push_back(tokenize(rec["text"].get<std::string>()));
    doc.raw_length = static_cast<int>(streams.back().size());
    corpus.documents.push_back(std::move(doc));
  }
  corpus.vocabulary = build_vocabulary(streams, config.max_vocab_size, config.stopwords);
  for (size_t d = 0; d < streams.size(); ++d) {
    auto& tokens = corpus.documents[d].tokens;
    tokens.reserve(streams[d].size());
    for (const auto& t : streams[d]) {
      int id = corpus.vocabulary.id_of(t);
      if (id >= 0) tokens.push_back(id);
    }
  }
  return corpus;
}

inline Corpus load_corpus(const std::string& path, const CorpusConfig& config = {}) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file: " + path);
  return load_corpus(in, config, path);
}

/// Loads "doc_id<TAB>entity_id" association lines. Duplicate pairs collapse;
/// unknown document ids are fatal.
inline AssociationIndex load_associations(std::istream& in, const Corpus& corpus,
                                          const std::string& source = "<stream>") {
  std::vector<std::pair<int, std::string>> pairs;  // (doc index, entity id)
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
      throw Error(source + ":" + std::to_string(line_no) + ": expected \"doc_id<TAB>entity_id\"");
    std::string doc_id = line.substr(0, tab);
    std::string entity_id = line.substr(tab + 1);
    auto it = corpus.doc_index.find(doc_id);
    if (it == corpus.doc_index.end())
      throw Error(source + ":" + std::to_string(line_no) + ": unknown document \"" + doc_id + "\"");
    pairs.emplace_back(it->second, std::move(entity_id));
  }
  AssociationIndex index;
  if (pairs.empty()) {
    std::cerr << "warning: " << source << ": no associations\n";
    index.doc_to_entities.resize(corpus.documents.size());
    return index;
  }
  std::set<std::string> ids;
  for (const auto& [d, e] : pairs) ids.insert(e);
  index.entities.assign(ids.begin(), ids.end());
  for (int i = 0; i < static_cast<int>(index.entities.size()); ++i)
    index.entity_index.emplace(index.entities[i], i);
  index.doc_to_entities.resize(corpus.documents.size());
  index.entity_to_docs.resize(index.entities.size());
  for (const auto& [d, e] : pairs) {
    int x = index.entity_index.at(e);
    index.doc_to_entities[d].push_back(x);
    index.entity_to_docs[x].push_back(d);
  }
  auto dedup = [](std::vector<int>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  for (auto& v : index.doc_to_entities) dedup(v);
  for (auto& v : index.entity_to_docs) dedup(v);
  return index;
}

inline AssociationIndex load_associations(const std::string& path, const Corpus& corpus) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open associations file: " + path);
  return load_associations(in, corpus, path);
}

/// Association loader for evaluation flows that have no corpus at hand.
/// Document ids are interned in lexicographic order, so the index is a pure
/// function of the file content.
inline AssociationIndex load_associations_standalone(std::istream& in,
                                                     const std::string& source = "<stream>") {
  std::vector<std::pair<std::string, std::string>> pairs;  // (doc id, entity id)
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
      throw Error(source + ":" + std::to_string(line_no) + ": expected \"doc_id<TAB>entity_id\"");
    pairs.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  AssociationIndex index;
  if (pairs.empty()) {
    std::cerr << "warning: " << source << ": no associations\n";
    return index;
  }
  std::set<std::string> doc_ids, entity_ids;
  for (const auto& [d, e] : pairs) {
    doc_ids.insert(d);
    entity_ids.insert(e);
  }
  std::unordered_map<std::string, int> doc_index;
  for (const auto& d : doc_ids) doc_index.emplace(d, static_cast<int>(doc_index.size()));
  index.entities.assign(entity_ids.begin(), entity_ids.end());
  for (int i = 0; i < static_cast<int>(index.entities.size()); ++i)
    index.entity_index.emplace(index.entities[i], i);
  index.doc_to_entities.resize(doc_ids.size());
  index.entity_to_docs.resize(index.entities.size());
  for (const auto& [d, e] : pairs) {
    const int di = doc_index.at(d);
    const int x = index.entity_index.at(e);
    index.doc_to_entities[di].push_back(x);
    index.entity_to_docs[x].push_back(di);
  }
  auto dedup = [](std::vector<int>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  for (auto& v : index.doc_to_entities) dedup(v);
  for (auto& v : index.entity_to_docs) dedup(v);
  return index;
}

inline AssociationIndex load_associations_standalone(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open associations file: " + path);
  return load_associations_standalone(in, path);
}

}  // namespace eslm
