// pathdisc/metrics.hpp

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

#include <map>
#include <span>
#include <string>
#include <vector>

#include "pathdisc/core.hpp"
#include "pathdisc/env_graph.hpp"
#include "pathdisc/io.hpp"

namespace pathdisc {

// ---------------------------------------------------------------------------
// ROC-AUC

struct ScoredLabel {
  double score = 0;
  bool positive = false;
};

/// P(score+ > score-) + 1/2 P(tie) by a sorted sweep. Throws
/// ValidationError unless both labels are present.
double auc(std::span<const ScoredLabel> scored);

// ---------------------------------------------------------------------------
// Navigation metrics

struct MetricConfig {
  double success_threshold_m = 3.0;
};
void validate(const MetricConfig& config);

struct NavMetrics {
  double pl = 0;   // path length of the prediction
  double ne = 0;   // geodesic from predicted end to reference end
  double sr = 0;   // 1 when ne < threshold
  double spl = 0;  // sr * L / max(pl, L), L = reference start-to-goal geodesic
};

/// Both paths must belong to `env` (ValidationError otherwise).
NavMetrics nav_metrics(const EnvironmentGraph& env, const Path& reference, const Path& predicted,
                       const MetricConfig& config = {});

/// Mean over episodes; all zeros for an empty list.
NavMetrics mean_metrics(std::span<const NavMetrics> episodes);

/// split,PL,NE,SR,SPL with one row per entry.
CsvTable nav_metrics_table(const std::vector<std::pair<std::string, NavMetrics>>& rows);

// ---------------------------------------------------------------------------
// Score distributions

struct ScoreCdf {
  std::vector<double> values;      // distinct sorted sample points
  std::vector<double> cumulative;  // fraction of samples <= value
  double mean = 0;
};

ScoreCdf empirical_cdf(std::span<const double> scores);

/// dataset,score,cdf rows (one block per dataset, in map order) and a
/// dataset,n,mean summary.
struct CdfReport {
  CsvTable cdf;
  CsvTable means;
};
CdfReport score_cdf_report(const std::map<std::string, std::vector<double>>& scores);

// ---------------------------------------------------------------------------
// Alignment exports

/// Row-major CSV without a header, shortest round-trip decimals.
std::string alignment_csv(const Mat& a);
Mat parse_alignment_csv(std::string_view text);

/// Binary 8-bit PGM, min-max normalized with darker meaning higher
/// alignment; a constant matrix maps to mid-gray (128).
std::string alignment_pgm(const Mat& a);

/// JSON sidecar {"rows":[token...], "cols":[step label...]}.
std::string alignment_labels(const std::vector<std::string>& row_labels,
                             const std::vector<std::string>& col_labels);

/// Pearson correlation between normalized row position and the normalized
/// column of each row's softmax argmax; 0 when either is constant. Needs
/// at least 2 rows and 2 columns.
double diagonality(const Mat& a);

}  // namespace pathdisc
