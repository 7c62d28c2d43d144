// src/metrics.cpp

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

#include "pathdisc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json_util.hpp"

namespace pathdisc {

double auc(std::span<const ScoredLabel> scored) {
  std::vector<ScoredLabel> s(scored.begin(), scored.end());
  for (const auto& x : s) {
    if (std::isnan(x.score)) throw NumericalError("auc: NaN score");
  }
  std::sort(s.begin(), s.end(), [](const ScoredLabel& a, const ScoredLabel& b) { return a.score < b.score; });
  // Walk groups of equal scores upward; every positive beats all negatives
  // below its group and ties half of the negatives within it.
  double wins = 0.0;
  std::size_t neg_below = 0, pos_total = 0, neg_total = 0;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t j = i, pos = 0, neg = 0;
    while (j < s.size() && s[j].score == s[i].score) {
      (s[j].positive ? pos : neg) += 1;
      ++j;
    }
    wins += static_cast<double>(pos) * (static_cast<double>(neg_below) + 0.5 * static_cast<double>(neg));
    neg_below += neg;
    pos_total += pos;
    neg_total += neg;
    i = j;
  }
  if (pos_total == 0 || neg_total == 0) throw ValidationError("auc: needs both positive and negative samples");
  return wins / (static_cast<double>(pos_total) * static_cast<double>(neg_total));
}

void validate(const MetricConfig& config) {
  if (!(config.success_threshold_m > 0.0) || !std::isfinite(config.success_threshold_m)) {
    throw ValidationError("metric config: success_threshold_m must be positive");
  }
}

NavMetrics nav_metrics(const EnvironmentGraph& env, const Path& reference, const Path& predicted,
                       const MetricConfig& config) {
  validate(config);
  if (reference.env_id != env.id() || predicted.env_id != env.id()) {
    throw ValidationError("nav_metrics: episode mixes environments '" + reference.env_id + "' and '" +
                          predicted.env_id + "'");
  }
  if (reference.nodes.empty() || predicted.nodes.empty()) throw ValidationError("nav_metrics: empty path");
  NavMetrics m;
  m.pl = path_length(env, predicted);
  m.ne = geodesic(env, predicted.nodes.back(), reference.nodes.back());
  m.sr = m.ne < config.success_threshold_m ? 1.0 : 0.0;
  const double l = geodesic(env, reference.nodes.front(), reference.nodes.back());
  const double denom = std::max(m.pl, l);
  m.spl = denom > 0.0 ? m.sr * l / denom : m.sr;
  return m;
}

NavMetrics mean_metrics(std::span<const NavMetrics> episodes) {
  NavMetrics out;
  if (episodes.empty()) return out;
  for (const auto& e : episodes) {
    out.pl += e.pl;
    out.ne += e.ne;
    out.sr += e.sr;
    out.spl += e.spl;
  }
  const double n = static_cast<double>(episodes.size());
  out.pl /= n;
  out.ne /= n;
  out.sr /= n;
  out.spl /= n;
  return out;
}

CsvTable nav_metrics_table(const std::vector<std::pair<std::string, NavMetrics>>& rows) {
  CsvTable t;
  t.header = {"split", "PL", "NE", "SR", "SPL"};
  for (const auto& [split, m] : rows) {
    t.rows.push_back({split, format_double(m.pl), format_double(m.ne), format_double(m.sr), format_double(m.spl)});
  }
  return t;
}

ScoreCdf empirical_cdf(std::span<const double> scores) {
  if (scores.empty()) throw ValidationError("score_cdf: empty score list");
  std::vector<double> s(scores.begin(), scores.end());
  std::sort(s.begin(), s.end());
  ScoreCdf out;
  const double n = static_cast<double>(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i + 1 < s.size() && s[i + 1] == s[i]) continue;
    out.values.push_back(s[i]);
    out.cumulative.push_back(static_cast<double>(i + 1) / n);
  }
  out.mean = std::accumulate(s.begin(), s.end(), 0.0) / n;
  return out;
}

CdfReport score_cdf_report(const std::map<std::string, std::vector<double>>& scores) {
  CdfReport r;
  r.cdf.header = {"dataset", "score", "cdf"};
  r.means.header = {"dataset", "n", "mean"};
  for (const auto& [name, list] : scores) {
    const ScoreCdf c = empirical_cdf(list);
    for (std::size_t i = 0; i < c.values.size(); ++i) {
      r.cdf.rows.push_back({name, format_double(c.values[i]), format_double(c.cumulative[i])});
    }
    r.means.rows.push_back({name, std::to_string(list.size()), format_double(c.mean)});
  }
  return r;
}

std::string alignment_csv(const Mat& a) {
  std::string out;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      if (c) out += ',';
      out += format_double(a(r, c));
    }
    out += '\n';
  }
  return out;
}

Mat parse_alignment_csv(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::size_t len = comma == std::string_view::npos ? std::string_view::npos : comma - start;
      row.push_back(parse_double(line.substr(start, len), "alignment csv row " + std::to_string(rows.size() + 1)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ValidationError("alignment csv: ragged row " + std::to_string(rows.size() + 1));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Mat(0, 0);
  Mat a(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return a;
}

std::string alignment_pgm(const Mat& a) {
  std::string out = "P5\n" + std::to_string(a.cols()) + " " + std::to_string(a.rows()) + "\n255\n";
  const double lo = a.size() ? a.minCoeff() : 0.0;
  const double hi = a.size() ? a.maxCoeff() : 0.0;
  const double range = hi - lo;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      int px = 128;
      if (range > 0.0) px = 255 - static_cast<int>(std::lround(255.0 * (a(r, c) - lo) / range));
      out += static_cast<char>(static_cast<unsigned char>(px));
    }
  }
  return out;
}

std::string alignment_labels(const std::vector<std::string>& row_labels,
                             const std::vector<std::string>& col_labels) {
  detail::Json j;
  j["rows"] = row_labels;
  j["cols"] = col_labels;
  return j.dump(1) + "\n";
}

double diagonality(const Mat& a) {
  if (a.rows() < 2 || a.cols() < 2) {
    throw ValidationError("diagonality: needs at least a 2x2 matrix, got " + shape_str(a));
  }
  const Eigen::Index n = a.rows();
  Vec x(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index j = 0;
    a.row(i).maxCoeff(&j);
    x(i) = static_cast<double>(i) / static_cast<double>(n - 1);
    y(i) = static_cast<double>(j) / static_cast<double>(a.cols() - 1);
  }
  const Vec dx = x.array() - x.mean();
  const Vec dy = y.array() - y.mean();
  const double sxx = dx.squaredNorm(), syy = dy.squaredNorm();
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return dx.dot(dy) / std::sqrt(sxx * syy);
}

}  // namespace pathdisc
