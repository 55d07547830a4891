// SPDX-License-Identifier: Apache-2.0
//
// codelm: synthetic corpus generation, model training, line scoring and
// ROC evaluation.
//
// Exit status: 0 success, 1 runtime failure, 2 usage or validation error.

#include <CLI11.hpp>

#include <iostream>

#include "codelm/error.hpp"
#include "commands.hpp"
#include "config_file.hpp"

namespace {

constexpr int kRuntimeError = 1;
constexpr int kUsageError = 2;

using namespace codelm;

void add_config_flag(CLI::App* cmd) {
  // Consumed before parsing by expand_config; registered here for --help.
  cmd->add_option("--config", "key=value file; command-line flags take precedence");
}

template <class Options>
int execute(const Options& options) {
  const auto problems = cli::validate(options);
  if (!problems.empty()) {
    for (const auto& p : problems) std::cerr << "error: " << p << '\n';
    return kUsageError;
  }
  cli::run(options);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Character-level code language models and entropy-based buggy-line ranking"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", "codelm 0.1.0");

  cli::SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus with injected bugs and a split manifest");
  synth_cmd->add_option("--out", synth.out_dir, "Output directory");
  synth_cmd->add_option("--seed", synth.generator.rng_seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--files", synth.generator.n_files, "Number of files")->capture_default_str();
  synth_cmd->add_option("--min-functions", synth.generator.min_functions, "Fewest methods per file")
      ->capture_default_str();
  synth_cmd->add_option("--max-functions", synth.generator.max_functions, "Most methods per file")
      ->capture_default_str();
  synth_cmd->add_option("--pool-size", synth.generator.identifier_pool_size, "Identifiers per file")
      ->capture_default_str();
  synth_cmd->add_option("--depth", synth.generator.statement_depth, "Maximum block nesting")->capture_default_str();
  synth_cmd->add_option("--global-fraction", synth.generator.global_fraction, "Share of files in the global set")
      ->capture_default_str();
  synth_cmd->add_option("--bug-rate", synth.bug_rate, "Fraction of eligible local lines to mutate")
      ->capture_default_str();
  add_config_flag(synth_cmd);

  cli::VocabOptions vocab;
  auto* vocab_cmd = app.add_subcommand("build-vocab", "Build the byte vocabulary from the global training files");
  vocab_cmd->add_option("--manifest", vocab.manifest, "Split manifest");
  vocab_cmd->add_option("--out", vocab.out, "Vocabulary file to write");
  add_config_flag(vocab_cmd);

  cli::TrainCommandOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train an LSTM or n-gram model on the global or local split");
  train_cmd->add_option("--family", train.family, "lstm or ngram")->capture_default_str();
  train_cmd->add_option("--role", train.role, "global or local")->capture_default_str();
  train_cmd->add_option("--manifest", train.manifest, "Split manifest");
  train_cmd->add_option("--vocab", train.vocab, "Vocabulary file (default: built from the global files)");
  train_cmd->add_option("--out", train.out, "Checkpoint or n-gram table to write");
  train_cmd->add_option("--log", train.log, "Training log CSV (lstm)");
  train_cmd->add_option("--seed", train.seed, "Initialization seed")->capture_default_str();
  train_cmd->add_option("--embed", train.model.embed_dim, "Embedding size")->capture_default_str();
  train_cmd->add_option("--hidden", train.model.hidden_dim, "LSTM cells per layer")->capture_default_str();
  train_cmd->add_option("--layers", train.model.num_layers, "LSTM layers")->capture_default_str();
  train_cmd->add_option("--bptt", train.model.bptt_len, "Truncation window in tokens")->capture_default_str();
  train_cmd->add_option("--lr", train.adam.alpha, "Adam learning rate")->capture_default_str();
  train_cmd->add_option("--beta1", train.adam.beta1, "Adam beta1")->capture_default_str();
  train_cmd->add_option("--beta2", train.adam.beta2, "Adam beta2")->capture_default_str();
  train_cmd->add_option("--eps", train.adam.eps, "Adam epsilon")->capture_default_str();
  train_cmd->add_option("--batch", train.adam.batch_size, "Parallel lanes per step")->capture_default_str();
  train_cmd->add_option("--steps", train.adam.max_steps, "Optimizer steps (0: use --epochs)")->capture_default_str();
  train_cmd->add_option("--epochs", train.epochs, "Passes over the stream when --steps is 0")->capture_default_str();
  train_cmd->add_option("--clip", train.adam.clip_norm, "Global gradient-norm clip (<= 0 disables)")
      ->capture_default_str();
  train_cmd->add_option("--order", train.order, "n-gram order")->capture_default_str();
  train_cmd->add_option("--progress", train.progress, "Print the loss every N steps to stderr");
  add_config_flag(train_cmd);

  cli::ScoreOptions score;
  auto* score_cmd = app.add_subcommand("score", "Per-line entropy under a global and optional local model");
  score_cmd->add_option("--global", score.global_model, "Global model (LSTM checkpoint or n-gram table)");
  score_cmd->add_option("--local", score.local_model, "Local model, same vocabulary");
  score_cmd->add_option("--manifest", score.manifest, "Split manifest supplying labels and default targets");
  score_cmd->add_option("--lambda", score.scoring.lambda, "Weight of the global score")->capture_default_str();
  score_cmd->add_option("--metric", score.metric, "predictive_entropy or cross_entropy")->capture_default_str();
  score_cmd->add_option("--out", score.out, "Score CSV (default: stdout)");
  score_cmd->add_flag("--labeled-only", score.labeled_only, "Only emit labeled lines");
  score_cmd->add_option("--jobs", score.jobs, "Files scored in parallel")->capture_default_str();
  score_cmd->add_option("files", score.files, "Target files (default: the manifest's local files)");
  add_config_flag(score_cmd);

  cli::EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "ROC/AUC and entropy gap of one or more score CSVs");
  eval_cmd->add_option("scores", eval.score_files, "Score CSV files");
  eval_cmd->add_option("--name", eval.names, "Report name per score file")->multi_option_policy(
      CLI::MultiOptionPolicy::TakeAll);
  eval_cmd->add_option("--column", eval.column, "h_total, h_global or h_local")->capture_default_str();
  eval_cmd->add_option("--json", eval.json_out, "Write the JSON report here ('-' for stdout)");
  eval_cmd->add_option("--roc-dir", eval.roc_dir, "Write one ROC CSV per report into this directory");
  add_config_flag(eval_cmd);

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = cli::expand_config(args);
    std::vector<const char*> raw;
    for (const auto& a : args) raw.push_back(a.c_str());
    app.parse(static_cast<int>(raw.size()), raw.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    if (*synth_cmd) return execute(synth);
    if (*vocab_cmd) return execute(vocab);
    if (*train_cmd) return execute(train);
    if (*score_cmd) return execute(score);
    if (*eval_cmd) return execute(eval);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}
