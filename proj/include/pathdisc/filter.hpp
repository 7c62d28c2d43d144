// pathdisc/filter.hpp

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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pathdisc/discriminator.hpp"
#include "pathdisc/trainer.hpp"

namespace pathdisc {

struct ScoredPair {
  std::string pair_id;
  double probability = 0;
  std::size_t rank = 0;  // 1 = highest probability

  friend bool operator==(const ScoredPair&, const ScoredPair&) = default;
};

/// Descending probability, ties by ascending pair_id, ranks 1..N.
std::vector<ScoredPair> rank_by_probability(std::vector<ScoredPair> pairs);

/// Scores every pool entry (sigmoid of the raw alignment score) in parallel
/// and ranks the result. Throws ValidationError on an empty pool.
std::vector<ScoredPair> rank_pool(const DiscriminatorConfig& cfg, const ParamStore& params,
                                  std::span<const ScoringInput> pool);

enum class Selection { kTop, kBottom, kRandomFull, kRandomTop, kRandomBottom };
const char* to_string(Selection s);
Selection parse_selection(std::string_view s);

inline constexpr double kDefaultStratum = 0.4;

/// ceil(fraction * n), ignoring floating-point dust above an integer.
std::size_t subset_size(std::size_t n, double fraction);

/// k = subset_size(N, fraction) entries of `ranked` (which must be a
/// ranking as produced above), returned in rank order. Random strategies
/// draw without replacement from the whole pool or from the top/bottom
/// `stratum` fraction. Throws ValidationError when k exceeds the stratum.
std::vector<ScoredPair> select(const std::vector<ScoredPair>& ranked, Selection strategy, double fraction,
                               std::uint64_t seed, double stratum = kDefaultStratum);

/// One {pair_id, probability, rank} object per line.
std::string ranked_to_jsonl(const std::vector<ScoredPair>& ranked);
std::vector<ScoredPair> parse_ranked_jsonl(std::string_view text, std::string_view source = "<memory>");

}  // namespace pathdisc
