// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "codelm/checkpoint.hpp"
#include "codelm/corpus.hpp"
#include "codelm/eval.hpp"
#include "codelm/language_model.hpp"
#include "codelm/ngram.hpp"
#include "codelm/trainer.hpp"

namespace codelm::cli {

namespace fs = std::filesystem;

namespace {

void require(std::vector<std::string>& problems, bool ok, const std::string& message) {
  if (!ok) problems.push_back(message);
}

void check_model_config(std::vector<std::string>& p, const ModelConfig& m) {
  require(p, m.embed_dim >= 1, "--embed must be >= 1");
  require(p, m.hidden_dim >= 1, "--hidden must be >= 1");
  require(p, m.num_layers >= 1, "--layers must be >= 1");
  require(p, m.bptt_len >= 1, "--bptt must be >= 1");
}

void check_adam(std::vector<std::string>& p, const AdamConfig& a) {
  require(p, a.alpha > 0.0 && std::isfinite(a.alpha), "--lr must be > 0");
  require(p, a.beta1 > 0.0 && a.beta1 < 1.0, "--beta1 must be in (0, 1)");
  require(p, a.beta2 > 0.0 && a.beta2 < 1.0, "--beta2 must be in (0, 1)");
  require(p, a.eps > 0.0, "--eps must be > 0");
  require(p, a.batch_size >= 1, "--batch must be >= 1");
  require(p, std::isfinite(a.clip_norm), "--clip must be finite");
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// synth

std::vector<std::string> validate(const SynthOptions& o) {
  std::vector<std::string> p;
  const auto& g = o.generator;
  require(p, !o.out_dir.empty(), "--out is required");
  require(p, g.n_files >= 2, "--files must be >= 2");
  require(p, g.min_functions >= 1, "--min-functions must be >= 1");
  require(p, g.max_functions >= g.min_functions, "--max-functions must be >= --min-functions");
  require(p, g.identifier_pool_size >= 2, "--pool-size must be >= 2");
  require(p, g.statement_depth >= 1, "--depth must be >= 1");
  require(p, g.global_fraction > 0.0 && g.global_fraction < 1.0, "--global-fraction must be in (0, 1)");
  require(p, o.bug_rate > 0.0 && o.bug_rate < 1.0, "--bug-rate must be in (0, 1)");
  return p;
}

void run(const SynthOptions& o) {
  const auto corpus = generate_corpus(o.generator);
  if (corpus.local_files.empty()) throw InputError("synth: no local files; lower --global-fraction");
  const auto injection = inject_bugs(corpus.local_files, o.bug_rate, o.generator.rng_seed);
  const auto paths = write_synthetic_corpus(o.out_dir, corpus, injection);
  std::size_t bytes = 0;
  for (const auto& f : corpus.global_files) bytes += f.text.size();
  for (const auto& f : injection.mutated) bytes += f.text.size();
  std::cout << "wrote " << corpus.global_files.size() << " global + " << corpus.local_files.size() << " local files ("
            << bytes << " bytes), " << injection.bugs.size() << " buggy + " << injection.clean.size()
            << " clean labels\n"
            << "manifest: " << paths.manifest.string() << "\nmutations: " << paths.mutation_log.string() << '\n';
}

// ---------------------------------------------------------------------------
// build-vocab

std::vector<std::string> validate(const VocabOptions& o) {
  std::vector<std::string> p;
  require(p, !o.manifest.empty(), "--manifest is required");
  require(p, !o.out.empty(), "--out is required");
  return p;
}

void run(const VocabOptions& o) {
  const auto split = load_split(o.manifest);
  if (split.global_train.empty()) throw InputError("manifest lists no global training files");
  const auto vocab = build_vocabulary(split.global_train);
  ensure_parent(o.out);
  save_vocabulary(o.out, vocab);
  std::cout << "vocabulary: " << vocab.bytes().size() << " bytes + unk = " << vocab.size() << " ids\n";
}

// ---------------------------------------------------------------------------
// train

std::vector<std::string> validate(const TrainCommandOptions& o) {
  std::vector<std::string> p;
  require(p, o.family == "lstm" || o.family == "ngram", "--family must be 'lstm' or 'ngram'");
  require(p, o.role == "global" || o.role == "local", "--role must be 'global' or 'local'");
  require(p, !o.manifest.empty(), "--manifest is required");
  require(p, !o.out.empty(), "--out is required");
  if (o.family == "lstm") {
    check_model_config(p, o.model);
    check_adam(p, o.adam);
    require(p, o.epochs >= 1 || o.adam.max_steps >= 1, "--epochs or --steps must be >= 1");
  } else {
    require(p, o.order >= 1, "--order must be >= 1");
  }
  return p;
}

void run(const TrainCommandOptions& o) {
  const auto split = load_split(o.manifest);
  if (split.global_train.empty()) throw InputError("manifest lists no global training files");
  const Vocabulary vocab = o.vocab.empty() ? build_vocabulary(split.global_train) : load_vocabulary(o.vocab);
  const bool local = o.role == "local";
  if (local && split.local_train.empty()) throw InputError("manifest lists no local training files");
  const auto stream = training_stream(vocab, split, local);
  if (stream.empty()) throw InputError("training stream for role '" + o.role + "' is empty");

  ensure_parent(o.out);
  if (o.family == "ngram") {
    const std::vector<TokenStream> streams{stream};
    const auto model = NgramModel::fit(streams, o.order, vocab.size());
    save_ngram(o.out, vocab, model);
    const NgramLanguageModel lm(model);
    double bits = 0.0;
    lm.predict_sequence(stream.ids, [&](std::size_t t, std::span<const double> d) {
      bits -= std::log2(d[stream.ids[t]]);
    });
    std::cout << "n-gram order " << o.order << ", " << model.context_count() << " contexts, training cross-entropy "
              << fixed(bits / static_cast<double>(stream.size()), 4) << " bits/char\n";
    return;
  }

  ModelConfig model = o.model;
  model.vocab_size = vocab.size();
  model.rng_seed = o.seed;
  TrainOptions options;
  options.epochs = o.epochs;
  options.on_warning = [](std::string_view w) { std::cerr << "warning: " << w << '\n'; };
  if (o.progress > 0) {
    options.on_step = [&](const TrainLogEntry& e) {
      if (e.step % o.progress == 0) {
        std::cerr << "step " << e.step << "  tokens " << e.tokens_seen << "  " << fixed(e.cross_entropy_bits, 4)
                  << " bits\n";
      }
    };
  }
  const auto result = train(model, stream, o.adam, options);
  save_checkpoint(o.out, vocab, result.params);
  if (!o.log.empty()) {
    std::ostringstream log;
    write_training_log(log, result.log);
    ensure_parent(o.log);
    write_file(o.log, log.str());
  }
  std::cout << "trained " << result.log.size() << " steps (batch " << result.batch_size << ") on "
            << stream.size() << " tokens, final cross-entropy "
            << fixed(result.log.empty() ? 0.0 : result.log.back().cross_entropy_bits, 4) << " bits/char\n";
}

// ---------------------------------------------------------------------------
// score

std::vector<std::string> validate(const ScoreOptions& o) {
  std::vector<std::string> p;
  require(p, !o.global_model.empty(), "--global is required");
  require(p, !o.manifest.empty() || !o.files.empty(), "give --manifest or target files");
  require(p, o.scoring.lambda >= 0.0 && o.scoring.lambda <= 1.0, "--lambda must be in [0, 1]");
  require(p, parse_metric(o.metric).has_value(), "--metric must be 'predictive_entropy' or 'cross_entropy'");
  require(p, o.jobs >= 1, "--jobs must be >= 1");
  return p;
}

void run(const ScoreOptions& o) {
  ScoringConfig cfg = o.scoring;
  cfg.metric = *parse_metric(o.metric);

  const auto global = load_language_model(o.global_model);
  LoadedModel local;
  if (!o.local_model.empty()) {
    local = load_language_model(o.local_model);
    if (!(local.vocab == global.vocab)) {
      throw InputError("vocabulary mismatch between '" + o.global_model + "' and '" + o.local_model + "'");
    }
  }

  std::optional<CorpusSplit> split;
  if (!o.manifest.empty()) split = load_split(o.manifest);
  std::vector<fs::path> targets;
  if (!o.files.empty()) {
    for (const auto& f : o.files) targets.emplace_back(f);
  } else {
    targets = split->local_train;
  }

  // Labels and display names are keyed by canonical path so target files
  // given on the command line match manifest entries however spelled.
  std::map<fs::path, std::map<std::size_t, Label>> labels;
  fs::path root;
  if (split) {
    root = fs::weakly_canonical(split->root.empty() ? fs::path(".") : split->root);
    for (const auto& t : split->test_lines) labels[fs::weakly_canonical(t.file)][t.line_number] = t.label;
  }
  auto display = [&](const fs::path& f) {
    if (split) {
      const auto rel = fs::weakly_canonical(f).lexically_relative(root);
      if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
    }
    return f.generic_string();
  };

  std::vector<std::vector<LineScore>> per_file(targets.size());
  auto score_one = [&](std::size_t k) {
    const auto& file = targets[k];
    const auto stream = encode(global.vocab, read_file(file));
    if (stream.empty()) return;
    LabelLookup lookup;
    if (auto it = labels.find(fs::weakly_canonical(file)); it != labels.end()) {
      const auto* by_line = &it->second;
      lookup = [by_line](std::size_t line) {
        const auto hit = by_line->find(line);
        return hit == by_line->end() ? Label::unlabeled : hit->second;
      };
    }
    per_file[k] = score_lines(display(file), stream, *global.model, local.model.get(), cfg, lookup);
  };

  // Files are independent; rows are assembled in input order afterwards.
  const std::size_t jobs = std::min(o.jobs, std::max<std::size_t>(targets.size(), 1));
  if (jobs <= 1) {
    for (std::size_t k = 0; k < targets.size(); ++k) score_one(k);
  } else {
    std::vector<std::exception_ptr> errors(jobs);
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&, w] {
        try {
          for (std::size_t k = w; k < targets.size(); k += jobs) score_one(k);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : workers) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<LineScore> rows;
  for (auto& file_rows : per_file) {
    for (auto& r : file_rows) {
      if (!o.labeled_only || r.label != Label::unlabeled) rows.push_back(std::move(r));
    }
  }
  std::ostringstream csv;
  write_score_csv(csv, rows);
  if (o.out.empty() || o.out == "-") {
    std::cout << csv.str();
  } else {
    ensure_parent(o.out);
    write_file(o.out, csv.str());
    std::cerr << "scored " << rows.size() << " lines from " << targets.size() << " files\n";
  }
}

// ---------------------------------------------------------------------------
// eval

std::vector<std::string> validate(const EvalOptions& o) {
  std::vector<std::string> p;
  require(p, !o.score_files.empty(), "at least one score CSV is required");
  require(p, o.column == "h_total" || o.column == "h_global" || o.column == "h_local",
          "--column must be h_total, h_global or h_local");
  require(p, o.names.empty() || o.names.size() == o.score_files.size(), "--name must be given once per score file");
  return p;
}

void run(const EvalOptions& o) {
  std::vector<NamedReport> reports;
  std::map<std::string, int> seen;
  for (std::size_t k = 0; k < o.score_files.size(); ++k) {
    const auto& path = o.score_files[k];
    std::istringstream in(read_file(path));
    const auto rows = read_score_csv(in, path);
    std::vector<ScoredLabel> scores;
    for (const auto& r : rows) {
      if (r.label == Label::unlabeled) continue;
      double v = r.h_total;
      if (o.column == "h_global") v = r.h_global;
      if (o.column == "h_local") {
        if (!r.h_local) throw InputError(path + ": no h_local values (scored without a local model)");
        v = *r.h_local;
      }
      scores.push_back({v, r.label == Label::buggy});
    }
    std::string name = o.names.empty() ? fs::path(path).stem().string() : o.names[k];
    if (seen[name]++ > 0) name = path;
    try {
      reports.push_back({name, summarize(scores)});
    } catch (const InputError& e) {
      throw InputError(path + ": " + e.what());
    }
  }

  std::stable_sort(reports.begin(), reports.end(),
                   [](const NamedReport& a, const NamedReport& b) { return a.report.auc > b.report.auc; });
  std::cout << format_report_table(reports);

  if (!o.json_out.empty()) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& r : reports) {
      nlohmann::json j = r.report;
      j["name"] = r.name;
      j["column"] = o.column;
      list.push_back(std::move(j));
    }
    const std::string text = nlohmann::json{{"reports", list}}.dump(2) + "\n";
    if (o.json_out == "-") {
      std::cout << text;
    } else {
      ensure_parent(o.json_out);
      write_file(o.json_out, text);
    }
  }
  if (!o.roc_dir.empty()) {
    for (const auto& r : reports) {
      std::ostringstream csv;
      write_roc_csv(csv, r.report.roc_points);
      const auto path = fs::path(o.roc_dir) / (fs::path(r.name).stem().string() + ".roc.csv");
      ensure_parent(path);
      write_file(path, csv.str());
    }
  }
}

}  // namespace codelm::cli
