// SPDX-License-Identifier: Apache-2.0
//
// Deterministic pseudo-Java corpus generator and line-level bug injector.
// Stands in for mined project history: files are split into a global and a
// local set, and a fraction of local lines receive one mutation each.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "codelm/random.hpp"

namespace codelm {

struct GeneratorConfig {
  std::uint64_t rng_seed = 1;
  std::size_t n_files = 50;
  std::size_t min_functions = 4;
  std::size_t max_functions = 8;
  std::size_t identifier_pool_size = 10;
  std::size_t statement_depth = 2;
  double global_fraction = 0.7;

  void validate() const;
};

struct SourceFile {
  std::string name;  // relative path, e.g. "global/Foo0.java"
  std::string text;

  friend bool operator==(const SourceFile&, const SourceFile&) = default;
};

struct SyntheticCorpus {
  std::vector<SourceFile> global_files;
  std::vector<SourceFile> local_files;
};

/// Emits `n_files` files from a small fixed grammar: one class per file with
/// typed methods, declarations, assignments and nested if/for/while blocks,
/// 4-space indentation and identifiers drawn from a per-file pool. The first
/// round(n_files · global_fraction) files form the global set.
SyntheticCorpus generate_corpus(const GeneratorConfig& config);

/// Checks brace balance and that every non-blank line is indented by four
/// spaces per open brace. Returns a description of the first problem.
std::optional<std::string> check_layout(std::string_view text);

enum class Mutation { identifier_swap, operator_swap, literal_offset, token_deletion };
inline constexpr Mutation kAllMutations[] = {Mutation::identifier_swap, Mutation::operator_swap,
                                             Mutation::literal_offset, Mutation::token_deletion};

std::string_view to_string(Mutation m) noexcept;

/// Distinct non-keyword identifiers in `text` outside package lines, sorted.
std::vector<std::string> identifier_pool(std::string_view text);

/// Applies one mutation of the given kind, or returns nullopt when the line
/// offers nothing to mutate. The result always differs from `line`.
std::optional<std::string> apply_mutation(std::string_view line, Mutation mutation,
                                          std::span<const std::string> pool, Rng& rng);

/// Lines that may be mutated or sampled as clean: not blank and not made of
/// braces alone.
bool is_eligible_line(std::string_view line);

struct BugInjection {
  std::string file;
  std::size_t line_number = 0;
  Mutation mutation = Mutation::token_deletion;
  std::string original_line;
  std::string mutated_line;
};

struct CleanLine {
  std::string file;
  std::size_t line_number = 0;
};

struct InjectionResult {
  std::vector<SourceFile> mutated;
  std::vector<BugInjection> bugs;
  std::vector<CleanLine> clean;
};

/// Mutates round(rate · eligible) lines (at least one, at most half the
/// eligible lines) and samples an equal number of untouched eligible lines
/// as clean. Throws InputError when rate ∉ (0,1) or fewer than two eligible
/// lines exist.
InjectionResult inject_bugs(std::span<const SourceFile> files, double rate, std::uint64_t seed);

/// CSV `file,line,mutation,original,mutated`.
void write_mutation_log(std::ostream& out, std::span<const BugInjection> bugs);

struct SynthPaths {
  std::filesystem::path manifest;
  std::filesystem::path mutation_log;
};

/// Writes global files, mutated local files, the pristine local originals
/// (under original/), manifest.tsv and mutations.csv into `out_dir`.
SynthPaths write_synthetic_corpus(const std::filesystem::path& out_dir, const SyntheticCorpus& corpus,
                                  const InjectionResult& injection);

}  // namespace codelm
