// SPDX-License-Identifier: Apache-2.0
//
// Buggy-line classification metrics. A line's score is treated as evidence
// of being buggy; the AUC is the Mann-Whitney probability that a random
// buggy line outscores a random clean one, ties counting one half.

#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace codelm {

struct ScoredLabel {
  double score = 0.0;
  bool buggy = false;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct RocReport {
  double auc = 0.0;
  std::vector<RocPoint> roc_points;
  double mean_entropy_buggy = 0.0;
  double mean_entropy_clean = 0.0;
  double entropy_gap = 0.0;  // buggy − clean
  std::size_t n_buggy = 0;
  std::size_t n_clean = 0;

  friend bool operator==(const RocReport&, const RocReport&) = default;
};

/// Rank-based AUC, O(n log n). Throws InputError ("degenerate labels") unless
/// both classes are present.
double auc(std::span<const ScoredLabel> scores);

/// Threshold sweep over distinct scores, descending. Starts at (0,0), ends at
/// (1,1); a group of tied scores contributes one (possibly diagonal) segment.
std::vector<RocPoint> roc_curve(std::span<const ScoredLabel> scores);

double trapezoid_area(std::span<const RocPoint> curve);

RocReport summarize(std::span<const ScoredLabel> scores);

void to_json(nlohmann::json& j, const RocPoint& p);
void from_json(const nlohmann::json& j, RocPoint& p);
void to_json(nlohmann::json& j, const RocReport& r);
void from_json(const nlohmann::json& j, RocReport& r);

struct NamedReport {
  std::string name;
  RocReport report;
};

/// Aligned human-readable table, one row per report, sorted by AUC
/// (descending; ties keep input order).
std::string format_report_table(std::span<const NamedReport> reports);

/// CSV `fpr,tpr`.
void write_roc_csv(std::ostream& out, std::span<const RocPoint> curve);

}  // namespace codelm
