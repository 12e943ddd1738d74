#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "eslm/common.hpp"
#include "eslm/docspace.hpp"
#include "eslm/entity.hpp"
#include "eslm/sert.hpp"

namespace eslm {

static_assert(std::endian::native == std::endian::little,
              "model container assumes a little-endian host");

// Binary model container. Fixed 40-byte header:
//   magic "ESLM" | u16 version | u8 method tag | u8 flags | u32 k
//   u32 n_rows | u32 n_aux_rows | u32 n_sections
//   u64 names_offset | u64 aux_names_offset
// followed by a section table (u64 offset, u32 rows, u32 cols per section),
// row-major little-endian float32 section data, and newline-separated UTF-8
// name blocks (primary names, then aux names).
//
// Method tags: 0-3 document spaces (lsi, lda, w2v-sg, w2v-cbow);
// 16 + method for entity matrices; 32 for the log-linear entity model.
struct Container {
  uint16_t version = 1;
  uint8_t method_tag = 0;
  uint8_t flags = 0;  // bit 0: rows are L2-normalized
  uint32_t k = 0;
  std::vector<MatF> sections;
  std::vector<std::string> names;
  std::vector<std::string> aux_names;
};

namespace detail {

constexpr uint8_t kEntityTagBase = 16;
constexpr uint8_t kSertTag = 32;
constexpr size_t kHeaderSize = 40;

template <typename T>
void put(std::string& buf, T value) {
  char raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  buf.append(raw, sizeof(T));
}

template <typename T>
T take(const std::string& buf, size_t& pos, const std::string& path) {
  if (pos + sizeof(T) > buf.size()) throw Error(path + ": truncated model file");
  T value;
  std::memcpy(&value, buf.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

inline std::vector<std::string> split_lines(const std::string& block, size_t expected,
                                            const std::string& path) {
  std::vector<std::string> lines;
  size_t start = 0;
  while (start < block.size()) {
    const size_t nl = block.find('\n', start);
    if (nl == std::string::npos) {
      lines.push_back(block.substr(start));
      break;
    }
    lines.push_back(block.substr(start, nl - start));
    start = nl + 1;
  }
  if (lines.size() != expected) throw Error(path + ": name block count mismatch");
  return lines;
}

}  // namespace detail

inline void write_container(const Container& c, const std::string& path) {
  std::string buf;
  buf.reserve(detail::kHeaderSize + c.sections.size() * 16);
  buf.append("ESLM", 4);
  detail::put<uint16_t>(buf, c.version);
  detail::put<uint8_t>(buf, c.method_tag);
  detail::put<uint8_t>(buf, c.flags);
  detail::put<uint32_t>(buf, c.k);
  detail::put<uint32_t>(buf, static_cast<uint32_t>(c.names.size()));
  detail::put<uint32_t>(buf, static_cast<uint32_t>(c.aux_names.size()));
  detail::put<uint32_t>(buf, static_cast<uint32_t>(c.sections.size()));

  uint64_t data_offset = detail::kHeaderSize + c.sections.size() * 16;
  uint64_t cursor = data_offset;
  std::vector<uint64_t> offsets;
  for (const MatF& s : c.sections) {
    offsets.push_back(cursor);
    cursor += static_cast<uint64_t>(s.rows()) * static_cast<uint64_t>(s.cols()) * 4;
  }
  const uint64_t names_offset = cursor;
  std::string names_block;
  for (const auto& n : c.names) {
    names_block += n;
    names_block += '\n';
  }
  const uint64_t aux_offset = names_offset + names_block.size();
  std::string aux_block;
  for (const auto& n : c.aux_names) {
    aux_block += n;
    aux_block += '\n';
  }

  detail::put<uint64_t>(buf, names_offset);
  detail::put<uint64_t>(buf, aux_offset);
  for (size_t i = 0; i < c.sections.size(); ++i) {
    detail::put<uint64_t>(buf, offsets[i]);
    detail::put<uint32_t>(buf, static_cast<uint32_t>(c.sections[i].rows()));
    detail::put<uint32_t>(buf, static_cast<uint32_t>(c.sections[i].cols()));
  }
  for (const MatF& s : c.sections)
    buf.append(reinterpret_cast<const char*>(s.data()),
               static_cast<size_t>(s.rows()) * static_cast<size_t>(s.cols()) * 4);
  buf += names_block;
  buf += aux_block;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error("write failed: " + path);
}

inline Container read_container(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path);
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < detail::kHeaderSize || buf.compare(0, 4, "ESLM") != 0)
    throw Error(path + ": not a model container (bad magic)");
  size_t pos = 4;
  Container c;
  c.version = detail::take<uint16_t>(buf, pos, path);
  if (c.version != 1) throw Error(path + ": unsupported container version");
  c.method_tag = detail::take<uint8_t>(buf, pos, path);
  c.flags = detail::take<uint8_t>(buf, pos, path);
  c.k = detail::take<uint32_t>(buf, pos, path);
  const uint32_t n_rows = detail::take<uint32_t>(buf, pos, path);
  const uint32_t n_aux = detail::take<uint32_t>(buf, pos, path);
  const uint32_t n_sections = detail::take<uint32_t>(buf, pos, path);
  const uint64_t names_offset = detail::take<uint64_t>(buf, pos, path);
  const uint64_t aux_offset = detail::take<uint64_t>(buf, pos, path);
  if (names_offset > buf.size() || aux_offset > buf.size() || aux_offset < names_offset)
    throw Error(path + ": corrupt name offsets");

  for (uint32_t i = 0; i < n_sections; ++i) {
    const uint64_t offset = detail::take<uint64_t>(buf, pos, path);
    const uint32_t rows = detail::take<uint32_t>(buf, pos, path);
    const uint32_t cols = detail::take<uint32_t>(buf, pos, path);
    const uint64_t bytes = static_cast<uint64_t>(rows) * cols * 4;
    if (offset + bytes > buf.size()) throw Error(path + ": truncated section data");
    MatF m(rows, cols);
    std::memcpy(m.data(), buf.data() + offset, bytes);
    c.sections.push_back(std::move(m));
  }
  c.names = detail::split_lines(buf.substr(names_offset, aux_offset - names_offset), n_rows, path);
  c.aux_names = detail::split_lines(buf.substr(aux_offset), n_aux, path);
  return c;
}

// ---------------------------------------------------------------------------
// Typed wrappers

inline void save_docspace(const DocSpace& space, const std::vector<std::string>& vocab,
                          const std::string& path) {
  Container c;
  c.method_tag = static_cast<uint8_t>(space.method);
  c.k = static_cast<uint32_t>(space.k);
  c.names = vocab;
  switch (space.method) {
    case Method::Lsi: {
      c.sections.push_back(space.term_projection.cast<float>());
      MatF sv(1, space.k);
      sv.row(0) = space.singular_values.cast<float>().transpose();
      c.sections.push_back(sv);
      MatF idf(1, static_cast<int>(space.idf.size()));
      idf.row(0) = space.idf.cast<float>().transpose();
      c.sections.push_back(idf);
      break;
    }
    case Method::Lda: {
      c.sections.push_back(space.topic_word.cast<float>());
      MatF hyper(1, 2);
      hyper(0, 0) = static_cast<float>(space.alpha);
      hyper(0, 1) = static_cast<float>(space.beta);
      c.sections.push_back(hyper);
      break;
    }
    case Method::W2vSg:
    case Method::W2vCbow:
      c.sections.push_back(space.word_embeddings);
      break;
    default:
      throw Error("save_docspace: method is not a document space");
  }
  write_container(c, path);
}

struct LoadedDocSpace {
  DocSpace space;
  std::vector<std::string> vocab;
};

inline LoadedDocSpace load_docspace(const std::string& path) {
  const Container c = read_container(path);
  if (c.method_tag > 3) throw Error(path + ": not a document space container");
  LoadedDocSpace out;
  out.vocab = c.names;
  out.space.method = static_cast<Method>(c.method_tag);
  out.space.k = static_cast<int>(c.k);
  switch (out.space.method) {
    case Method::Lsi:
      if (c.sections.size() != 3) throw Error(path + ": bad section count");
      out.space.term_projection = c.sections[0].cast<double>();
      out.space.singular_values = c.sections[1].row(0).transpose().cast<double>();
      out.space.idf = c.sections[2].row(0).transpose().cast<double>();
      break;
    case Method::Lda:
      if (c.sections.size() != 2) throw Error(path + ": bad section count");
      out.space.topic_word = c.sections[0].cast<double>();
      out.space.alpha = c.sections[1](0, 0);
      out.space.beta = c.sections[1](0, 1);
      break;
    default:
      if (c.sections.size() != 1) throw Error(path + ": bad section count");
      out.space.word_embeddings = c.sections[0];
      break;
  }
  return out;
}

inline void save_entities(const EntityMatrix& m, const std::string& path) {
  Container c;
  c.method_tag = static_cast<uint8_t>(detail::kEntityTagBase + static_cast<uint8_t>(m.method));
  c.flags = m.normalized ? 1 : 0;
  c.k = static_cast<uint32_t>(m.k());
  c.names = m.entity_ids;
  c.sections.push_back(m.vectors);
  write_container(c, path);
}

inline EntityMatrix load_entities(const std::string& path) {
  const Container c = read_container(path);
  if (c.method_tag < detail::kEntityTagBase || c.method_tag >= detail::kSertTag)
    throw Error(path + ": not an entity matrix container");
  if (c.sections.size() != 1) throw Error(path + ": bad section count");
  EntityMatrix m;
  m.method = static_cast<Method>(c.method_tag - detail::kEntityTagBase);
  m.normalized = (c.flags & 1) != 0;
  m.entity_ids = c.names;
  m.vectors = c.sections[0];
  if (m.vectors.rows() != static_cast<Eigen::Index>(m.entity_ids.size()))
    throw Error(path + ": entity count mismatch");
  return m;
}

inline void save_sert(const SertModel& model, const std::vector<std::string>& vocab,
                      const std::vector<std::string>& entity_ids, const std::string& path) {
  Container c;
  c.method_tag = detail::kSertTag;
  c.k = static_cast<uint32_t>(model.k);
  c.names = entity_ids;
  c.aux_names = vocab;
  c.sections.push_back(model.word_vectors);
  c.sections.push_back(model.entity_vectors);
  MatF bias(1, model.num_entities());
  bias.row(0) = model.biases.transpose();
  c.sections.push_back(bias);
  write_container(c, path);
}

struct LoadedSert {
  SertModel model;
  std::vector<std::string> vocab;
  std::vector<std::string> entity_ids;
};

inline LoadedSert load_sert(const std::string& path) {
  const Container c = read_container(path);
  if (c.method_tag != detail::kSertTag) throw Error(path + ": not a log-linear model container");
  if (c.sections.size() != 3) throw Error(path + ": bad section count");
  LoadedSert out;
  out.entity_ids = c.names;
  out.vocab = c.aux_names;
  out.model.k = static_cast<int>(c.k);
  out.model.word_vectors = c.sections[0];
  out.model.entity_vectors = c.sections[1];
  out.model.biases = c.sections[2].row(0).transpose();
  if (out.model.entity_vectors.rows() != static_cast<Eigen::Index>(out.entity_ids.size()) ||
      out.model.biases.size() != out.model.entity_vectors.rows())
    throw Error(path + ": entity count mismatch");
  return out;
}

/// FNV-1a over a file's bytes, for manifests.
inline uint64_t hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path);
  uint64_t h = 0xcbf29ce484222325ull;
  char chunk[65536];
  while (in.read(chunk, sizeof(chunk)) || in.gcount() > 0) {
    h = fnv1a64(chunk, static_cast<size_t>(in.gcount()), h);
    if (!in) break;
  }
  return h;
}

}  // namespace eslm
