// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "codelm/adam.hpp"
#include "codelm/lstm.hpp"
#include "codelm/scoring.hpp"
#include "codelm/synth.hpp"

namespace codelm::cli {

struct SynthOptions {
  std::string out_dir;
  GeneratorConfig generator;
  double bug_rate = 0.1;
};

struct VocabOptions {
  std::string manifest;
  std::string out;
};

struct TrainCommandOptions {
  std::string family = "lstm";  // lstm | ngram
  std::string role = "global";  // global | local
  std::string manifest;
  std::string vocab;  // optional; built from the global files when empty
  std::string out;
  std::string log;  // optional training-log CSV (lstm)
  std::uint64_t seed = 1;
  ModelConfig model;
  AdamConfig adam;
  std::size_t epochs = 1;
  std::size_t order = 5;
  std::size_t progress = 0;
};

struct ScoreOptions {
  std::string global_model;
  std::string local_model;
  std::string manifest;
  std::vector<std::string> files;
  std::string out;
  ScoringConfig scoring;
  std::string metric = "predictive_entropy";
  bool labeled_only = false;
  std::size_t jobs = 1;
};

struct EvalOptions {
  std::vector<std::string> score_files;
  std::vector<std::string> names;
  std::string column = "h_total";
  std::string json_out;
  std::string roc_dir;
};

/// Each returns a list of validation problems, one line each; empty when the
/// options are usable.
std::vector<std::string> validate(const SynthOptions& o);
std::vector<std::string> validate(const VocabOptions& o);
std::vector<std::string> validate(const TrainCommandOptions& o);
std::vector<std::string> validate(const ScoreOptions& o);
std::vector<std::string> validate(const EvalOptions& o);

/// Run a validated command. Runtime failures surface as exceptions.
void run(const SynthOptions& o);
void run(const VocabOptions& o);
void run(const TrainCommandOptions& o);
void run(const ScoreOptions& o);
void run(const EvalOptions& o);

}  // namespace codelm::cli
