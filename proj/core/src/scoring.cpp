// SPDX-License-Identifier: Apache-2.0

#include "codelm/scoring.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "codelm/error.hpp"

namespace codelm {

std::string_view to_string(Metric metric) noexcept {
  return metric == Metric::cross_entropy ? "cross_entropy" : "predictive_entropy";
}

std::optional<Metric> parse_metric(std::string_view text) noexcept {
  if (text == "predictive_entropy" || text == "entropy") return Metric::predictive_entropy;
  if (text == "cross_entropy") return Metric::cross_entropy;
  return std::nullopt;
}

void ScoringConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InputError("scoring: lambda must be in [0, 1]");
  if (!(log_base > 1.0) || !std::isfinite(log_base)) throw InputError("scoring: log base must be > 1");
}

double char_entropy(std::span<const double> distribution, double log_base) {
  double h = 0.0;
  for (double p : distribution) {
    if (p > 0.0) h -= p * std::log(p);
  }
  // Rounding can leave a hair below zero for one-hot inputs.
  return std::max(0.0, h / std::log(log_base));
}

std::vector<double> score_file(const LanguageModel& model, const TokenStream& stream, const ScoringConfig& config) {
  config.validate();
  if (stream.empty()) throw InputError("score_file: empty token stream");

  const double inv_log_base = 1.0 / std::log(config.log_base);
  std::vector<double> per_position(stream.size());
  model.predict_sequence(stream.ids, [&](std::size_t t, std::span<const double> dist) {
    if (config.metric == Metric::predictive_entropy) {
      per_position[t] = char_entropy(dist, config.log_base);
    } else {
      per_position[t] = -std::log(dist[stream.ids[t]]) * inv_log_base;
    }
  });

  std::vector<double> scores;
  scores.reserve(stream.lines.size());
  for (const auto& span : stream.lines) {
    double sum = 0.0;
    for (std::size_t k = span.begin; k < span.end; ++k) sum += per_position[k];
    scores.push_back(sum / static_cast<double>(span.size()));
  }
  return scores;
}

std::vector<double> mix_scores(std::span<const double> global, std::span<const double> local,
                               const ScoringConfig& config) {
  config.validate();
  if (global.size() != local.size()) {
    throw InputError("mix_scores: " + std::to_string(global.size()) + " global vs " + std::to_string(local.size()) +
                     " local scores");
  }
  std::vector<double> mixed(global.size());
  for (std::size_t k = 0; k < mixed.size(); ++k) {
    mixed[k] = config.lambda * global[k] + (1.0 - config.lambda) * local[k];
  }
  return mixed;
}

std::vector<LineScore> score_lines(const std::string& file, const TokenStream& stream, const LanguageModel& global,
                                   const LanguageModel* local, const ScoringConfig& config,
                                   const LabelLookup& label_of) {
  std::vector<LineScore> rows;
  if (stream.empty()) return rows;
  const auto g = score_file(global, stream, config);
  std::vector<double> l, mixed;
  if (local != nullptr) {
    l = score_file(*local, stream, config);
    mixed = mix_scores(g, l, config);
  }
  rows.reserve(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto& span = stream.lines[k];
    LineScore row;
    row.file = file;
    row.line_number = span.line_number;
    row.h_global = g[k];
    if (local != nullptr) row.h_local = l[k];
    row.h_total = local != nullptr ? mixed[k] : g[k];
    row.label = label_of ? label_of(span.line_number) : Label::unlabeled;
    row.char_count = span.size();
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string quote_csv(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// Splits one CSV record; handles quoted fields with doubled quotes.
std::vector<std::string> split_csv(std::string_view line, bool& ok) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  ok = true;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) ok = false;
  fields.push_back(std::move(cur));
  return fields;
}

template <class T>
bool parse_number(const std::string& text, T& out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

void write_score_csv(std::ostream& out, std::span<const LineScore> rows) {
  out << "file,line,h_global,h_local,h_total,label,chars\n";
  for (const auto& r : rows) {
    out << quote_csv(r.file) << ',' << r.line_number << ',' << fixed6(r.h_global) << ','
        << (r.h_local ? fixed6(*r.h_local) : std::string()) << ',' << fixed6(r.h_total) << ',' << to_string(r.label)
        << ',' << r.char_count << '\n';
  }
}

std::vector<LineScore> read_score_csv(std::istream& in, const std::string& context) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(context + ": empty score table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "file,line,h_global,h_local,h_total,label,chars") {
    throw FormatError(context + ": unexpected header '" + line + "'");
  }
  std::vector<LineScore> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string at = context + ":" + std::to_string(lineno) + ": ";
    bool ok = true;
    auto f = split_csv(line, ok);
    if (!ok || f.size() != 7) throw FormatError(at + "expected 7 fields");
    LineScore r;
    r.file = f[0];
    double local = 0.0;
    auto label = parse_label(f[5]);
    if (!parse_number(f[1], r.line_number) || !parse_number(f[2], r.h_global) || !parse_number(f[4], r.h_total) ||
        !parse_number(f[6], r.char_count) || !label || (!f[3].empty() && !parse_number(f[3], local))) {
      throw FormatError(at + "malformed field");
    }
    if (!f[3].empty()) r.h_local = local;
    r.label = *label;
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace codelm
