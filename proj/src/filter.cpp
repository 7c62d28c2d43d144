// src/filter.cpp

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

#include "pathdisc/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "json_util.hpp"
#include "pathdisc/rng.hpp"

namespace pathdisc {

std::vector<ScoredPair> rank_by_probability(std::vector<ScoredPair> pairs) {
  for (const auto& p : pairs) {
    if (std::isnan(p.probability)) throw NumericalError("rank: NaN probability for '" + p.pair_id + "'");
  }
  std::sort(pairs.begin(), pairs.end(), [](const ScoredPair& a, const ScoredPair& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    return a.pair_id < b.pair_id;
  });
  for (std::size_t i = 0; i < pairs.size(); ++i) pairs[i].rank = i + 1;
  return pairs;
}

std::vector<ScoredPair> rank_pool(const DiscriminatorConfig& cfg, const ParamStore& params,
                                  std::span<const ScoringInput> pool) {
  if (pool.empty()) throw ValidationError("rank_pool: empty pool");
  const std::vector<double> raw = raw_scores(cfg, params, pool);
  std::vector<ScoredPair> out(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    out[i].pair_id = pool[i].pair_id;
    out[i].probability = ad::detail::sigmoid(raw[i]);
  }
  return rank_by_probability(std::move(out));
}

const char* to_string(Selection s) {
  switch (s) {
    case Selection::kTop: return "top";
    case Selection::kBottom: return "bottom";
    case Selection::kRandomFull: return "random_full";
    case Selection::kRandomTop: return "random_top";
    case Selection::kRandomBottom: return "random_bottom";
  }
  return "?";
}

Selection parse_selection(std::string_view s) {
  for (const Selection v : {Selection::kTop, Selection::kBottom, Selection::kRandomFull, Selection::kRandomTop,
                            Selection::kRandomBottom}) {
    if (s == to_string(v)) return v;
  }
  throw ValidationError("unknown selection '" + std::string(s) +
                        "' (expected top, bottom, random_full, random_top or random_bottom)");
}

std::size_t subset_size(std::size_t n, double fraction) {
  const double x = fraction * static_cast<double>(n);
  return static_cast<std::size_t>(std::ceil(x - 1e-9 * std::max(1.0, x)));
}

std::vector<ScoredPair> select(const std::vector<ScoredPair>& ranked, Selection strategy, double fraction,
                               std::uint64_t seed, double stratum) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ValidationError("select: fraction must be in (0, 1]");
  if (!(stratum > 0.0 && stratum <= 1.0)) throw ValidationError("select: stratum must be in (0, 1]");
  const std::size_t n = ranked.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (ranked[i].rank != i + 1) throw ValidationError("select: input is not a ranking (entry " + std::to_string(i) + ")");
  }
  const std::size_t k = subset_size(n, fraction);

  std::size_t lo = 0, hi = n;  // candidate rank positions [lo, hi)
  bool random = true;
  switch (strategy) {
    case Selection::kTop: hi = k; random = false; break;
    case Selection::kBottom: lo = n - k; random = false; break;
    case Selection::kRandomFull: break;
    case Selection::kRandomTop: hi = subset_size(n, stratum); break;
    case Selection::kRandomBottom: lo = n - subset_size(n, stratum); break;
  }
  if (k > hi - lo) {
    throw ValidationError("select: " + std::to_string(k) + " pairs requested from a " + to_string(strategy) +
                          " stratum of " + std::to_string(hi - lo));
  }
  std::vector<std::size_t> idx(hi - lo);
  std::iota(idx.begin(), idx.end(), lo);
  if (random) {
    Rng rng(derive_seed(seed, "select"));
    // Partial Fisher-Yates: the first k slots become a uniform sample.
    for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.index(idx.size() - i)]);
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
  }
  std::vector<ScoredPair> out;
  out.reserve(k);
  for (const std::size_t i : idx) out.push_back(ranked[i]);
  return out;
}

std::string ranked_to_jsonl(const std::vector<ScoredPair>& ranked) {
  std::string out;
  for (const auto& p : ranked) {
    detail::Json j;
    j["pair_id"] = p.pair_id;
    j["probability"] = p.probability;
    j["rank"] = p.rank;
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<ScoredPair> parse_ranked_jsonl(std::string_view text, std::string_view source) {
  std::vector<ScoredPair> out;
  std::set<std::string> ids;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    const detail::Json j = detail::parse_json(line, where);
    detail::reject_unknown(j, {"pair_id", "probability", "rank"}, where);
    ScoredPair p;
    p.pair_id = detail::as_string(detail::field(j, "pair_id", where), where + ": pair_id");
    p.probability = detail::as_number(detail::field(j, "probability", where), where + ": probability");
    if (!(p.probability >= 0.0 && p.probability <= 1.0)) throw ValidationError(where + ": probability outside [0, 1]");
    const detail::Json& r = detail::field(j, "rank", where);
    if (!r.is_number_unsigned()) throw ValidationError(where + ": rank must be a positive integer");
    p.rank = r.get<std::size_t>();
    if (!ids.insert(p.pair_id).second) throw ValidationError(where + ": duplicate pair_id '" + p.pair_id + "'");
    if (p.rank != out.size() + 1) throw ValidationError(where + ": expected rank " + std::to_string(out.size() + 1));
    if (!out.empty() && (p.probability > out.back().probability ||
                         (p.probability == out.back().probability && p.pair_id < out.back().pair_id))) {
      throw ValidationError(where + ": entries are not in rank order");
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace pathdisc
