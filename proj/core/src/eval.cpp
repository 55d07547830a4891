// SPDX-License-Identifier: Apache-2.0

#include "codelm/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "codelm/error.hpp"

namespace codelm {

namespace {

void count_classes(std::span<const ScoredLabel> scores, std::size_t& n_buggy, std::size_t& n_clean) {
  n_buggy = static_cast<std::size_t>(std::count_if(scores.begin(), scores.end(), [](auto& s) { return s.buggy; }));
  n_clean = scores.size() - n_buggy;
  if (n_buggy == 0 || n_clean == 0) {
    throw InputError("degenerate labels: need at least one buggy and one clean line (got " + std::to_string(n_buggy) +
                     " buggy, " + std::to_string(n_clean) + " clean)");
  }
}

std::vector<ScoredLabel> sorted_by_score(std::span<const ScoredLabel> scores) {
  std::vector<ScoredLabel> v(scores.begin(), scores.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.score < b.score; });
  return v;
}

}  // namespace

double auc(std::span<const ScoredLabel> scores) {
  std::size_t n_buggy = 0, n_clean = 0;
  count_classes(scores, n_buggy, n_clean);
  const auto v = sorted_by_score(scores);

  // Sum of (1-based, tie-averaged) ranks of the buggy lines. Ranks are
  // integers or halves, so the sum is exact in double precision.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    std::size_t buggy_in_group = 0;
    while (j < v.size() && v[j].score == v[i].score) {
      buggy_in_group += v[j].buggy ? 1 : 0;
      ++j;
    }
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    rank_sum += avg_rank * static_cast<double>(buggy_in_group);
    i = j;
  }
  const double nb = static_cast<double>(n_buggy);
  const double u = rank_sum - nb * (nb + 1.0) / 2.0;
  return u / (nb * static_cast<double>(n_clean));
}

std::vector<RocPoint> roc_curve(std::span<const ScoredLabel> scores) {
  std::size_t n_buggy = 0, n_clean = 0;
  count_classes(scores, n_buggy, n_clean);
  auto v = sorted_by_score(scores);
  std::reverse(v.begin(), v.end());

  std::vector<RocPoint> curve{{0.0, 0.0}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j].score == v[i].score) {
      (v[j].buggy ? tp : fp) += 1;
      ++j;
    }
    curve.push_back({static_cast<double>(fp) / static_cast<double>(n_clean),
                     static_cast<double>(tp) / static_cast<double>(n_buggy)});
    i = j;
  }
  return curve;
}

double trapezoid_area(std::span<const RocPoint> curve) {
  double area = 0.0;
  for (std::size_t k = 1; k < curve.size(); ++k) {
    area += (curve[k].fpr - curve[k - 1].fpr) * (curve[k].tpr + curve[k - 1].tpr) / 2.0;
  }
  return area;
}

RocReport summarize(std::span<const ScoredLabel> scores) {
  RocReport r;
  count_classes(scores, r.n_buggy, r.n_clean);
  double sum_buggy = 0.0, sum_clean = 0.0;
  for (const auto& s : scores) (s.buggy ? sum_buggy : sum_clean) += s.score;
  r.mean_entropy_buggy = sum_buggy / static_cast<double>(r.n_buggy);
  r.mean_entropy_clean = sum_clean / static_cast<double>(r.n_clean);
  r.entropy_gap = r.mean_entropy_buggy - r.mean_entropy_clean;
  r.auc = auc(scores);
  r.roc_points = roc_curve(scores);
  return r;
}

void to_json(nlohmann::json& j, const RocPoint& p) { j = nlohmann::json::array({p.fpr, p.tpr}); }

void from_json(const nlohmann::json& j, RocPoint& p) {
  if (!j.is_array() || j.size() != 2) throw FormatError("ROC point must be a [fpr, tpr] pair");
  p.fpr = j.at(0).get<double>();
  p.tpr = j.at(1).get<double>();
}

void to_json(nlohmann::json& j, const RocReport& r) {
  j = nlohmann::json{{"auc", r.auc},
                     {"mean_entropy_buggy", r.mean_entropy_buggy},
                     {"mean_entropy_clean", r.mean_entropy_clean},
                     {"entropy_gap", r.entropy_gap},
                     {"n_buggy", r.n_buggy},
                     {"n_clean", r.n_clean},
                     {"roc_points", r.roc_points}};
}

void from_json(const nlohmann::json& j, RocReport& r) {
  r.auc = j.at("auc").get<double>();
  r.mean_entropy_buggy = j.at("mean_entropy_buggy").get<double>();
  r.mean_entropy_clean = j.at("mean_entropy_clean").get<double>();
  r.entropy_gap = j.at("entropy_gap").get<double>();
  r.n_buggy = j.at("n_buggy").get<std::size_t>();
  r.n_clean = j.at("n_clean").get<std::size_t>();
  r.roc_points = j.at("roc_points").get<std::vector<RocPoint>>();
}

std::string format_report_table(std::span<const NamedReport> reports) {
  std::vector<std::size_t> order(reports.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return reports[a].report.auc > reports[b].report.auc; });

  std::size_t name_width = 6;
  for (const auto& r : reports) name_width = std::max(name_width, r.name.size());

  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s  %8s  %12s  %12s  %10s  %7s  %7s\n", static_cast<int>(name_width), "scores",
                "AUC", "buggy(bits)", "clean(bits)", "gap(bits)", "n_buggy", "n_clean");
  out << buf;
  for (auto k : order) {
    const auto& r = reports[k].report;
    std::snprintf(buf, sizeof buf, "%-*s  %8.4f  %12.4f  %12.4f  %10.4f  %7zu  %7zu\n", static_cast<int>(name_width),
                  reports[k].name.c_str(), r.auc, r.mean_entropy_buggy, r.mean_entropy_clean, r.entropy_gap, r.n_buggy,
                  r.n_clean);
    out << buf;
  }
  return out.str();
}

void write_roc_csv(std::ostream& out, std::span<const RocPoint> curve) {
  out << "fpr,tpr\n";
  char buf[64];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", p.fpr, p.tpr);
    out << buf;
  }
}

}  // namespace codelm
