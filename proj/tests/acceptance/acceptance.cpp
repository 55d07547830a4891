// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails. Progress and supplementary numbers go
// to stderr.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "codelm/checkpoint.hpp"
#include "codelm/corpus.hpp"
#include "codelm/eval.hpp"
#include "codelm/language_model.hpp"
#include "codelm/lstm.hpp"
#include "codelm/ngram.hpp"
#include "codelm/random.hpp"
#include "codelm/scoring.hpp"
#include "codelm/synth.hpp"
#include "codelm/trainer.hpp"
#include "finite_difference.hpp"
#include "pair_auc.hpp"
#include "scalar_lstm.hpp"
#include "temp_dir.hpp"

namespace {

using namespace codelm;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int number, const std::string& title, const Outcome& o) {
  std::cout << (o.pass ? "PASS" : "FAIL") << "  " << number << ". " << title << ": " << o.detail << std::endl;
  if (!o.pass) ++failures;
}

void run_criterion(int number, const std::string& title, const std::function<Outcome()>& body) {
  std::cerr << "[" << number << "] " << title << " ..." << std::endl;
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  report(number, title, o);
}

ModelConfig model_config(std::size_t vocab, std::size_t embed, std::size_t hidden, std::size_t layers,
                         std::uint64_t seed) {
  ModelConfig c;
  c.vocab_size = vocab;
  c.embed_dim = embed;
  c.hidden_dim = hidden;
  c.num_layers = layers;
  c.rng_seed = seed;
  return c;
}

void randomize(LstmParams& p, Rng& rng, double scale) {
  for (auto& v : p.flat()) v = rng.uniform(-scale, scale);
}

std::vector<TokenId> random_ids(Rng& rng, std::size_t n, std::size_t vocab) {
  std::vector<TokenId> ids(n);
  for (auto& id : ids) id = static_cast<TokenId>(rng.below(vocab));
  return ids;
}

TokenStream single_line(std::vector<TokenId> ids) {
  TokenStream s;
  s.ids = std::move(ids);
  s.lines.push_back({0, s.ids.size(), 1});
  return s;
}

// ---------------------------------------------------------------------------
// 1. Gradients

Outcome gradient_correctness() {
  const auto start = Clock::now();
  const auto cfg = model_config(10, 6, 8, 2, 2024);
  const auto params = init_params(cfg);
  Rng rng(77);
  const auto inputs = random_ids(rng, 5, cfg.vocab_size);
  const auto targets = random_ids(rng, 5, cfg.vocab_size);
  auto initial = LstmState::zeros(cfg);
  for (auto* group : {&initial.h, &initial.c}) {
    for (auto& m : *group) {
      for (auto& v : m.flat()) v = rng.uniform(-0.5, 0.5);
    }
  }
  const auto check = oracle::check_gradients(params, initial, inputs, targets, 1e-5, 1e-5);
  const double elapsed = seconds_since(start);
  return {check.max_relative_error < 1e-5 && elapsed < 10.0,
          fmt("max relative error %.2e over %zu entries (worst %s), %.2f s", check.max_relative_error, check.checked,
              check.worst.c_str(), elapsed)};
}

// ---------------------------------------------------------------------------
// 2. Oracles

Outcome oracle_equivalences() {
  // (a) forward pass against the scalar loops.
  double forward_err = 0.0;
  Rng rng(314);
  for (int instance = 0; instance < 20; ++instance) {
    const auto vocab = rng.between(2, 12);
    const auto layers = rng.between(1, 3);
    const auto cfg = model_config(vocab, rng.between(1, 6), rng.between(1, 8), layers, 100 + instance);
    LstmParams p(cfg);
    randomize(p, rng, 0.5 + rng.uniform01());
    const auto ids = random_ids(rng, rng.between(1, 12), vocab);
    auto scalar = oracle::zero_state(cfg);
    const auto expected = oracle::forward(p, scalar, ids);
    const auto tape = forward(p, LstmState::zeros(cfg), ids);
    for (std::size_t t = 0; t < ids.size(); ++t) {
      for (std::size_t v = 0; v < vocab; ++v) {
        forward_err = std::max(forward_err, std::abs(tape.distribution(t)[v] - expected[t][v]));
      }
    }
  }

  // (b) rank AUC against pair counting, with deliberate ties.
  int auc_mismatches = 0;
  for (int instance = 0; instance < 100; ++instance) {
    const auto n = rng.between(2, 200);
    const auto levels = rng.between(2, 30);
    std::vector<ScoredLabel> s(n);
    for (auto& x : s) x = {static_cast<double>(rng.below(levels)) * 0.25, rng.chance(0.4)};
    s[0].buggy = true;
    s[1].buggy = false;
    if (auc(s) != oracle::pair_counting_auc(s)) ++auc_mismatches;
  }

  // (c) Witten-Bell table for 0 1 2 0 1 2 0 0 1 2, order 3, |V| = 4.
  const auto stream = single_line({0, 1, 2, 0, 1, 2, 0, 0, 1, 2});
  const auto model = NgramModel::fit(std::span(&stream, 1), 3, 4);
  struct Row {
    std::vector<TokenId> ctx;
    std::array<double, 4> p;
  };
  const std::vector<Row> table = {
      {{}, {19.0 / 52, 15.0 / 52, 15.0 / 52, 3.0 / 52}},
      {{0}, {15.0 / 52, 31.0 / 52, 5.0 / 52, 1.0 / 52}},
      {{1}, {19.0 / 208, 15.0 / 208, 171.0 / 208, 3.0 / 208}},
      {{2}, {41.0 / 52, 5.0 / 52, 5.0 / 52, 1.0 / 52}},
      {{0, 1}, {19.0 / 832, 15.0 / 832, 795.0 / 832, 3.0 / 832}},
      {{0, 0}, {15.0 / 104, 83.0 / 104, 5.0 / 104, 1.0 / 104}},
      {{2, 0}, {41.0 / 104, 57.0 / 104, 5.0 / 104, 1.0 / 104}},
  };
  double table_err = 0.0;
  for (const auto& row : table) {
    const auto p = model.predict(row.ctx);
    for (std::size_t w = 0; w < 4; ++w) table_err = std::max(table_err, std::abs(p[w] - row.p[w]));
  }

  return {forward_err <= 1e-13 && auc_mismatches == 0 && table_err <= 1e-12,
          fmt("forward max |diff| %.1e over 20 instances; AUC mismatches %d/100; Witten-Bell max |diff| %.1e",
              forward_err, auc_mismatches, table_err)};
}

// ---------------------------------------------------------------------------
// 4. Learnability

Outcome learnability_floor() {
  const auto start = Clock::now();
  std::vector<TokenId> ids(3000);
  for (std::size_t k = 0; k < ids.size(); ++k) ids[k] = static_cast<TokenId>(k % 3);
  const auto stream = single_line(ids);
  const std::size_t vocab = 4;  // three symbols plus unk

  auto cfg = model_config(vocab, 8, 32, 1, 11);
  AdamConfig adam;
  adam.alpha = 1e-2;
  adam.batch_size = 16;
  adam.max_steps = 300;
  const auto trained = train(cfg, stream, adam);
  const double lstm_bits = mean_cross_entropy_bits(trained.params, stream.ids);

  const NgramLanguageModel ngram(NgramModel::fit(std::span(&stream, 1), 4, vocab));
  double ngram_nats = 0.0;
  ngram.predict_sequence(stream.ids, [&](std::size_t t, std::span<const double> p) {
    if (t > 0) ngram_nats -= std::log(p[stream.ids[t]]);
  });
  const double ngram_bits = ngram_nats / std::log(2.0) / static_cast<double>(stream.size() - 1);

  const double elapsed = seconds_since(start);
  return {lstm_bits < 0.1 && ngram_bits < 0.01 && elapsed < 120.0,
          fmt("LSTM %.4f bits/char after %zu steps, order-4 n-gram %.5f bits/char, %.1f s", lstm_bits,
              trained.log.size(), ngram_bits, elapsed)};
}

// ---------------------------------------------------------------------------
// Pipeline shared by criteria 3, 5, 6, 7.

struct PipelineSettings {
  std::uint64_t seed = 7;
  std::size_t files = 50;
  double bug_rate = 0.1;
  ModelConfig lstm = model_config(0, 32, 64, 2, 0);
  AdamConfig adam = [] {
    AdamConfig a;
    a.alpha = 3e-3;
    a.batch_size = 32;
    return a;
  }();
  std::size_t global_steps = 3000;
  std::size_t local_steps = 2000;
  std::size_t ngram_order = 5;
};

struct Scores {
  std::vector<ScoredLabel> global;
  std::vector<ScoredLabel> mixed;
};

struct Pipeline {
  std::size_t corpus_bytes = 0;
  std::size_t bugs = 0;
  Vocabulary vocab;
  CorpusSplit split;
  std::vector<TokenStream> targets;  // encoded local files, same order as split.local_train
  std::unique_ptr<LstmLanguageModel> lstm_global, lstm_local;
  std::unique_ptr<NgramLanguageModel> ngram_global, ngram_local;
  double seconds = 0.0;
};

Pipeline build_pipeline(const PipelineSettings& s, const std::filesystem::path& dir) {
  const auto start = Clock::now();
  Pipeline p;
  GeneratorConfig gen;
  gen.rng_seed = s.seed;
  gen.n_files = s.files;
  const auto corpus = generate_corpus(gen);
  const auto injection = inject_bugs(corpus.local_files, s.bug_rate, s.seed);
  for (const auto& f : corpus.global_files) p.corpus_bytes += f.text.size();
  for (const auto& f : injection.mutated) p.corpus_bytes += f.text.size();
  p.bugs = injection.bugs.size();
  const auto paths = write_synthetic_corpus(dir, corpus, injection);

  p.split = load_split(paths.manifest);
  p.vocab = build_vocabulary(p.split.global_train);
  const auto global_stream = training_stream(p.vocab, p.split, false);
  const auto local_stream = training_stream(p.vocab, p.split, true);
  for (const auto& f : p.split.local_train) p.targets.push_back(encode(p.vocab, read_file(f)));
  std::cerr << fmt("  corpus %zu bytes, %zu bugs, |V| = %zu, global %zu tokens, local %zu tokens\n",
                   p.corpus_bytes, p.bugs, p.vocab.size(), global_stream.size(), local_stream.size());

  auto train_lstm = [&](const TokenStream& stream, std::uint64_t seed, std::size_t steps, const char* role) {
    auto cfg = s.lstm;
    cfg.vocab_size = p.vocab.size();
    cfg.rng_seed = seed;
    auto adam = s.adam;
    adam.max_steps = steps;
    TrainOptions options;
    options.on_step = [&](const TrainLogEntry& e) {
      if (e.step % 500 == 0) std::cerr << fmt("  %s step %zu: %.4f bits\n", role, e.step, e.cross_entropy_bits);
    };
    return std::make_unique<LstmLanguageModel>(train(cfg, stream, adam, options).params);
  };
  p.lstm_global = train_lstm(global_stream, s.seed, s.global_steps, "global");
  p.lstm_local = train_lstm(local_stream, s.seed + 1, s.local_steps, "local");
  p.ngram_global = std::make_unique<NgramLanguageModel>(
      NgramModel::fit(std::span(&global_stream, 1), s.ngram_order, p.vocab.size()));
  p.ngram_local = std::make_unique<NgramLanguageModel>(
      NgramModel::fit(std::span(&local_stream, 1), s.ngram_order, p.vocab.size()));
  p.seconds = seconds_since(start);
  return p;
}

// Labeled-line scores with and without the local model.
Scores score_labeled(const Pipeline& p, const LanguageModel& global, const LanguageModel& local,
                     const ScoringConfig& config, std::vector<LineScore>* all_rows = nullptr) {
  Scores out;
  for (std::size_t k = 0; k < p.targets.size(); ++k) {
    const auto& file = p.split.local_train[k];
    const auto rows = score_lines(file.string(), p.targets[k], global, &local, config, [&](std::size_t line) {
      return p.split.label_of(file, line).value_or(Label::unlabeled);
    });
    for (const auto& r : rows) {
      if (all_rows) all_rows->push_back(r);
      if (r.label == Label::unlabeled) continue;
      const bool buggy = r.label == Label::buggy;
      out.global.push_back({r.h_global, buggy});
      out.mixed.push_back({r.h_total, buggy});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// 3. Distribution sanity

Outcome distribution_sanity(const Pipeline& p, const std::vector<LineScore>& lstm_rows,
                            const std::vector<LineScore>& ngram_rows) {
  const std::size_t vocab = p.vocab.size();
  std::size_t checked = 0;
  std::size_t nonpositive = 0;
  double worst_sum = 0.0;
  auto inspect = [&](const LanguageModel& m, std::span<const TokenId> ids) {
    m.predict_sequence(ids, [&](std::size_t, std::span<const double> dist) {
      double sum = 0.0;
      for (double x : dist) {
        if (!(x > 0.0)) ++nonpositive;
        sum += x;
      }
      worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
      ++checked;
    });
  };
  Rng rng(99);
  const auto noise = random_ids(rng, 2000, vocab);  // unseen contexts and unk
  for (const LanguageModel* m :
       {static_cast<const LanguageModel*>(p.lstm_global.get()), static_cast<const LanguageModel*>(p.lstm_local.get()),
        static_cast<const LanguageModel*>(p.ngram_global.get()),
        static_cast<const LanguageModel*>(p.ngram_local.get())}) {
    for (const auto& t : p.targets) inspect(*m, t.ids);
    inspect(*m, noise);
  }

  const double bound = std::log2(static_cast<double>(vocab));
  std::size_t out_of_range = 0;
  std::size_t lines = 0;
  for (const auto* rows : {&lstm_rows, &ngram_rows}) {
    for (const auto& r : *rows) {
      for (double h : {r.h_global, r.h_local.value_or(0.0), r.h_total}) {
        if (!(h >= 0.0 && h <= bound)) ++out_of_range;
      }
      ++lines;
    }
  }
  return {nonpositive == 0 && worst_sum <= 1e-12 && out_of_range == 0,
          fmt("%zu distributions: %zu non-positive entries, max |sum-1| %.1e; %zu line entropies outside [0, %.3f]"
              " across %zu lines",
              checked, nonpositive, worst_sum, out_of_range, bound, lines)};
}

// ---------------------------------------------------------------------------
// 8. Determinism and round-trip

Outcome determinism_and_round_trip(const Pipeline& p) {
  // Two identical runs of a reduced pipeline, compared byte for byte.
  auto run_once = [&](std::string& checkpoint, std::string& csv) {
    const auto stream = training_stream(p.vocab, p.split, false);
    auto cfg = model_config(p.vocab.size(), 8, 16, 2, 5);
    AdamConfig adam;
    adam.batch_size = 8;
    adam.max_steps = 20;
    const LstmLanguageModel model(train(cfg, stream, adam).params);
    std::ostringstream ckpt;
    write_checkpoint(ckpt, p.vocab, model.params());
    checkpoint = ckpt.str();

    std::vector<LineScore> rows;
    score_labeled(p, model, *p.ngram_local, ScoringConfig{}, &rows);
    std::ostringstream out;
    write_score_csv(out, rows);
    csv = out.str();
  };
  std::string ckpt_a, ckpt_b, csv_a, csv_b;
  run_once(ckpt_a, csv_a);
  run_once(ckpt_b, csv_b);
  const bool identical = ckpt_a == ckpt_b && csv_a == csv_b;

  // Round trip of the trained pipeline checkpoint.
  std::ostringstream saved;
  write_checkpoint(saved, p.vocab, p.lstm_global->params());
  std::istringstream in(saved.str());
  const auto loaded = read_checkpoint(in);
  const bool round_trip = loaded.params == p.lstm_global->params() && loaded.vocab == p.vocab;

  // AUC under log-base change and increasing transforms.
  ScoringConfig bits;
  ScoringConfig nats;
  nats.log_base = std::exp(1.0);
  const auto scores_bits = score_labeled(p, *p.lstm_global, *p.lstm_local, bits).mixed;
  const auto scores_nats = score_labeled(p, *p.lstm_global, *p.lstm_local, nats).mixed;
  const double base_auc = auc(scores_bits);
  double worst = std::abs(auc(scores_nats) - base_auc);
  const std::vector<std::function<double(double)>> transforms = {
      [](double x) { return std::exp(x); }, [](double x) { return x * x * x; },
      [](double x) { return 5.0 * x + 2.0; }, [](double x) { return std::atan(x); },
      [](double x) { return std::log1p(x); }};
  for (const auto& f : transforms) {
    auto t = scores_bits;
    for (auto& s : t) s.score = f(s.score);
    worst = std::max(worst, std::abs(auc(t) - base_auc));
  }

  return {identical && round_trip && worst <= 1e-12,
          fmt("repeat runs %s; checkpoint round trip %s; max AUC change under base/transforms %.1e",
              identical ? "bit-identical" : "DIFFER", round_trip ? "exact" : "INEXACT", worst)};
}

}  // namespace

int main() {
  const auto start = Clock::now();
  run_criterion(1, "gradient correctness", gradient_correctness);
  run_criterion(2, "oracle equivalences", oracle_equivalences);

  const PipelineSettings settings;
  TempDir dir;
  Pipeline pipeline;
  std::string pipeline_error;
  std::cerr << "[pipeline] building corpus and training models ..." << std::endl;
  try {
    pipeline = build_pipeline(settings, dir.path() / "corpus");
    std::cerr << fmt("  pipeline built in %.1f s\n", pipeline.seconds);
  } catch (const std::exception& e) {
    pipeline_error = std::string("pipeline failed: ") + e.what();
  }
  const bool have_pipeline = pipeline_error.empty();
  auto needs_pipeline = [&](const std::function<Outcome()>& body) {
    return [&, body] { return have_pipeline ? body() : Outcome{false, pipeline_error}; };
  };

  // Default metric: predictive entropy. Cross-entropy numbers are printed for
  // comparison only.
  std::vector<LineScore> lstm_rows, ngram_rows;
  Scores lstm, ngram;
  RocReport lstm_global, lstm_mixed, ngram_global, ngram_mixed;
  if (have_pipeline) {
    const ScoringConfig config;
    lstm = score_labeled(pipeline, *pipeline.lstm_global, *pipeline.lstm_local, config, &lstm_rows);
    ngram = score_labeled(pipeline, *pipeline.ngram_global, *pipeline.ngram_local, config, &ngram_rows);
    lstm_global = summarize(lstm.global);
    lstm_mixed = summarize(lstm.mixed);
    ngram_global = summarize(ngram.global);
    ngram_mixed = summarize(ngram.mixed);

    ScoringConfig ce;
    ce.metric = Metric::cross_entropy;
    const auto lstm_ce = score_labeled(pipeline, *pipeline.lstm_global, *pipeline.lstm_local, ce);
    const auto ngram_ce = score_labeled(pipeline, *pipeline.ngram_global, *pipeline.ngram_local, ce);
    std::cerr << "  metric              model   global AUC  mixed AUC  global gap  mixed gap\n";
    auto line = [](const char* metric, const char* model, const Scores& s) {
      const auto g = summarize(s.global);
      const auto m = summarize(s.mixed);
      std::cerr << fmt("  %-18s  %-6s  %10.4f  %9.4f  %10.4f  %9.4f\n", metric, model, g.auc, m.auc, g.entropy_gap,
                       m.entropy_gap);
    };
    line("predictive_entropy", "lstm", lstm);
    line("predictive_entropy", "ngram", ngram);
    line("cross_entropy", "lstm", lstm_ce);
    line("cross_entropy", "ngram", ngram_ce);
  }

  run_criterion(3, "distribution sanity",
                needs_pipeline([&] { return distribution_sanity(pipeline, lstm_rows, ngram_rows); }));
  run_criterion(4, "learnability floor", learnability_floor);

  run_criterion(5, "directional entropy gap", needs_pipeline([&] {
                  const double elapsed = seconds_since(start);
                  return Outcome{lstm_mixed.entropy_gap > 0.0 && elapsed < 1800.0,
                                 fmt("LSTM mixed buggy %.4f vs clean %.4f bits, gap %+.4f (n-gram gap %+.4f); "
                                     "%zu bytes, %zu+%zu lines, %.0f s so far",
                                     lstm_mixed.mean_entropy_buggy, lstm_mixed.mean_entropy_clean,
                                     lstm_mixed.entropy_gap, ngram_mixed.entropy_gap, pipeline.corpus_bytes,
                                     lstm_mixed.n_buggy, lstm_mixed.n_clean, elapsed)};
                }));

  run_criterion(6, "locality helps", needs_pipeline([&] {
                  const bool gap_ok = lstm_mixed.entropy_gap >= lstm_global.entropy_gap - 0.02;
                  const bool auc_ok = lstm_mixed.auc >= lstm_global.auc - 0.01;
                  return Outcome{gap_ok && auc_ok,
                                 fmt("LSTM gap mixed %+.4f vs global %+.4f; AUC mixed %.4f vs global %.4f "
                                     "(n-gram AUC mixed %.4f vs global %.4f)",
                                     lstm_mixed.entropy_gap, lstm_global.entropy_gap, lstm_mixed.auc,
                                     lstm_global.auc, ngram_mixed.auc, ngram_global.auc)};
                }));

  run_criterion(7, "LSTM at least matches n-gram", needs_pipeline([&] {
                  const bool order_ok = lstm_mixed.auc >= ngram_mixed.auc - 0.01;
                  const bool chance_ok = lstm_mixed.auc > 0.6 && ngram_mixed.auc > 0.6;
                  return Outcome{order_ok && chance_ok, fmt("mixed AUC LSTM %.4f, n-gram %.4f (seed %llu)",
                                                           lstm_mixed.auc, ngram_mixed.auc,
                                                           static_cast<unsigned long long>(settings.seed))};
                }));

  run_criterion(8, "determinism and round trip",
                needs_pipeline([&] { return determinism_and_round_trip(pipeline); }));

  std::cout << (failures == 0 ? "all criteria passed" : fmt("%d criteria failed", failures))
            << fmt(" (%.0f s)", seconds_since(start)) << std::endl;
  return failures == 0 ? 0 : 1;
}
