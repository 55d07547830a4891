// SPDX-License-Identifier: Apache-2.0
//
// Per-line "naturalness" scores: the per-character metric averaged over a
// line's span, and the weighted global/local mixture
//
//   h_total = λ·h_global + (1 − λ)·h_local

#pragma once

#include <cstddef>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "codelm/corpus.hpp"
#include "codelm/language_model.hpp"

namespace codelm {

enum class Metric {
  predictive_entropy,  // entropy of the predicted distribution
  cross_entropy,       // -log p(actual token)
};

std::string_view to_string(Metric metric) noexcept;
std::optional<Metric> parse_metric(std::string_view text) noexcept;

struct ScoringConfig {
  double lambda = 0.5;
  Metric metric = Metric::predictive_entropy;
  double log_base = 2.0;

  void validate() const;
};

/// Shannon entropy −Σ p log p in the given base, with 0·log 0 = 0.
double char_entropy(std::span<const double> distribution, double log_base = 2.0);

/// Runs `model` over the whole stream as one sequence and returns, per line
/// span, the mean of the configured metric over the span's positions.
/// Throws InputError for an empty stream.
std::vector<double> score_file(const LanguageModel& model, const TokenStream& stream, const ScoringConfig& config);

/// Elementwise λ·g + (1 − λ)·l. Throws InputError on length mismatch.
std::vector<double> mix_scores(std::span<const double> global, std::span<const double> local,
                               const ScoringConfig& config);

struct LineScore {
  std::string file;
  std::size_t line_number = 0;
  double h_global = 0.0;
  std::optional<double> h_local;
  double h_total = 0.0;
  Label label = Label::unlabeled;
  std::size_t char_count = 0;

  friend bool operator==(const LineScore&, const LineScore&) = default;
};

using LabelLookup = std::function<Label(std::size_t line_number)>;

/// Scores every line of one file. `local` may be null, in which case
/// h_total = h_global.
std::vector<LineScore> score_lines(const std::string& file, const TokenStream& stream, const LanguageModel& global,
                                   const LanguageModel* local, const ScoringConfig& config,
                                   const LabelLookup& label_of = {});

/// CSV `file,line,h_global,h_local,h_total,label,chars`; entropies with six
/// decimals, h_local empty when absent.
void write_score_csv(std::ostream& out, std::span<const LineScore> rows);
std::vector<LineScore> read_score_csv(std::istream& in, const std::string& context = "score table");

}  // namespace codelm
