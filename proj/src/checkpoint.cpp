// src/checkpoint.cpp

// Copyright 2026  The pathdisc Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "pathdisc/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "json_util.hpp"
#include "pathdisc/io.hpp"
#include "pathdisc/rng.hpp"

namespace pathdisc {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

constexpr char kMagic[4] = {'P', 'D', 'C', 'K'};

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T take(std::string_view bytes, std::size_t& pos, const std::string& source) {
  if (pos + sizeof(T) > bytes.size()) throw ValidationError(source + ": truncated checkpoint");
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  using detail::Json;
  Json header;
  header["format_version"] = kCheckpointFormatVersion;
  header["kind"] = ckpt.kind;
  header["config"] = Json::parse(ckpt.config);
  header["vocab_hash"] = hex64(ckpt.vocab_hash);
  header["arrays"] = Json::array();
  for (const auto& [name, m] : ckpt.arrays) {
    header["arrays"].push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
  }
  header["extra"] = Json::parse(ckpt.extra);
  const std::string h = header.dump();

  std::string out(kMagic, 4);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(h.size()));
  out += h;
  for (const auto& [name, m] : ckpt.arrays) {
    out.append(reinterpret_cast<const char*>(m.data()), static_cast<std::size_t>(m.size()) * sizeof(double));
  }
  put<std::uint64_t>(out, fnv1a(out));
  return out;
}

Checkpoint deserialize_checkpoint(std::string_view bytes, std::string_view source_view) {
  using namespace detail;
  const std::string source(source_view);
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ValidationError(source + ": not a pathdisc checkpoint");
  }
  const std::string_view body = bytes.substr(0, bytes.size() - 8);
  std::size_t tail = bytes.size() - 8;
  if (take<std::uint64_t>(bytes, tail, source) != fnv1a(body)) {
    throw ValidationError(source + ": checksum mismatch (corrupt checkpoint)");
  }
  std::size_t pos = 4;
  const auto hlen = take<std::uint32_t>(body, pos, source);
  if (pos + hlen > body.size()) throw ValidationError(source + ": truncated checkpoint header");
  const Json header = parse_json(body.substr(pos, hlen), source + " header");
  pos += hlen;
  reject_unknown(header, {"format_version", "kind", "config", "vocab_hash", "arrays", "extra"}, source);
  const long long version = as_int(field(header, "format_version", source), source + ": format_version");
  if (version != kCheckpointFormatVersion) {
    throw ValidationError(source + ": unsupported checkpoint format_version " + std::to_string(version) +
                          " (expected " + std::to_string(kCheckpointFormatVersion) + ")");
  }
  Checkpoint ck;
  ck.kind = as_string(field(header, "kind", source), source + ": kind");
  ck.config = field(header, "config", source).dump();
  ck.extra = field(header, "extra", source).dump();
  const std::string vh = as_string(field(header, "vocab_hash", source), source + ": vocab_hash");
  if (vh.size() != 16 || vh.find_first_not_of("0123456789abcdef") != std::string::npos) {
    throw ValidationError(source + ": malformed vocab_hash");
  }
  ck.vocab_hash = std::stoull(vh, nullptr, 16);
  const Json& arrays = as_array(field(header, "arrays", source), source + ": arrays");
  for (std::size_t i = 0; i < arrays.size(); ++i) {
    const std::string w = sub(source + ": arrays", i);
    reject_unknown(arrays[i], {"name", "rows", "cols"}, w);
    const std::string name = as_string(field(arrays[i], "name", w), sub(w, "name"));
    const long long rows = as_int(field(arrays[i], "rows", w), sub(w, "rows"));
    const long long cols = as_int(field(arrays[i], "cols", w), sub(w, "cols"));
    if (rows < 0 || cols < 0) throw ValidationError(w + ": negative dimension");
    const std::size_t n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    if (pos + n * sizeof(double) > body.size()) throw ValidationError(w + ": payload truncated");
    Mat m(rows, cols);
    std::memcpy(m.data(), body.data() + pos, n * sizeof(double));
    pos += n * sizeof(double);
    if (!ck.arrays.emplace(name, std::move(m)).second) throw ValidationError(w + ": duplicate array '" + name + "'");
  }
  if (pos != body.size()) throw ValidationError(source + ": trailing bytes after payload");
  return ck;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& file) {
  write_file_atomic(file, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& file) {
  return deserialize_checkpoint(read_file(file), file);
}

void expect_checkpoint(const Checkpoint& ckpt, std::string_view kind, std::uint64_t vocab_hash,
                       std::string_view source) {
  if (ckpt.kind != kind) {
    throw ValidationError(std::string(source) + ": checkpoint kind '" + ckpt.kind + "', expected '" +
                          std::string(kind) + "'");
  }
  if (ckpt.vocab_hash != vocab_hash) {
    throw ValidationError(std::string(source) + ": vocabulary hash " + hex64(ckpt.vocab_hash) +
                          " does not match the data vocabulary " + hex64(vocab_hash) +
                          "; the checkpoint was trained on a different vocabulary");
  }
}

}  // namespace pathdisc
