// pathdisc/checkpoint.hpp

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

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "pathdisc/core.hpp"

namespace pathdisc {

inline constexpr int kCheckpointFormatVersion = 1;

/// Versioned container of named f64 arrays. `config` and `extra` are JSON
/// documents owned by the writer (model dimensions, optimizer and rng state).
///
/// On disk: "PDCK", u32 header length, JSON header {format_version, kind,
/// config, vocab_hash, arrays:[{name, rows, cols}], extra}, the arrays as
/// little-endian row-major f64 in header order, then a u64 FNV-1a checksum
/// of everything before it.
struct Checkpoint {
  std::string kind;
  std::string config = "{}";
  std::uint64_t vocab_hash = 0;
  ParamStore arrays;
  std::string extra = "{}";
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
/// Throws ValidationError on a bad magic, version, checksum or size; nothing
/// is returned unless the whole file verifies.
Checkpoint deserialize_checkpoint(std::string_view bytes, std::string_view source = "<memory>");

void save_checkpoint(const Checkpoint& ckpt, const std::string& file);
Checkpoint load_checkpoint(const std::string& file);

/// Refuses a checkpoint whose kind or vocabulary hash differs.
void expect_checkpoint(const Checkpoint& ckpt, std::string_view kind, std::uint64_t vocab_hash,
                       std::string_view source);

}  // namespace pathdisc
