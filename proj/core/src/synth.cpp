// SPDX-License-Identifier: Apache-2.0

#include "codelm/synth.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <optional>
#include <sstream>
#include <tuple>

#include "codelm/corpus.hpp"
#include "codelm/error.hpp"

namespace codelm {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 40> kStems = {
    "count",  "total", "index", "offset", "limit",  "size",   "value",  "result", "buffer", "length",
    "width",  "height", "node", "score",  "weight", "sum",    "delta",  "step",   "level",  "depth",
    "range",  "start", "end",   "first",  "last",   "prev",   "next",   "max",    "min",    "base",
    "factor", "ratio", "block", "chunk",  "slot",   "bucket", "row",    "col",    "pos",    "key"};

constexpr std::array<std::string_view, 10> kVerbs = {"compute", "update", "find",  "count", "merge",
                                                      "scale",   "check",  "reset", "apply", "collect"};

constexpr std::array<std::string_view, 6> kClassSuffixes = {"Service", "Manager", "Helper", "Util", "Builder", "Index"};

constexpr std::array<std::string_view, 26> kKeywords = {
    "package", "import",  "public", "private", "protected", "static", "final", "class", "int",
    "long",    "double",  "boolean", "void",   "return",    "if",     "else",  "for",   "while",
    "new",     "this",    "true",   "false",   "null",      "System", "out",   "println"};

constexpr std::array<std::string_view, 4> kLibraryNames = {"Math", "max", "min", "abs"};

constexpr std::array<int, 7> kLiterals = {0, 1, 2, 3, 10, 16, 100};

std::string capitalize(std::string_view s) {
  std::string out(s);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

template <class T, std::size_t N>
const T& pick(Rng& rng, const std::array<T, N>& items) {
  return items[rng.below(N)];
}

const std::string& pick(Rng& rng, const std::vector<std::string>& items) { return items[rng.below(items.size())]; }

struct Function {
  std::string name;
  std::size_t arity;
};

// Builds one source file. Scopes are a flat list of names plus a stack of
// marks recording where each block's declarations begin.
class FileBuilder {
 public:
  FileBuilder(const GeneratorConfig& config, Rng& rng) : config_(config), rng_(rng) {}

  std::string build(const std::string& class_name, const std::string& package) {
    make_pool();
    emit("package org.synth." + package + ";");
    blank();
    emit("public class " + class_name + " {");
    ++indent_;
    const std::size_t n_fields = 1 + rng_.below(2);
    for (std::size_t k = 0; k < n_fields && k < pool_.size(); ++k) {
      const std::string& f = pool_[k];
      emit("private int " + f + ";");
      scope_.push_back(f);
    }
    const std::size_t n_functions = rng_.between(config_.min_functions, config_.max_functions);
    for (std::size_t k = 0; k < n_functions; ++k) {
      blank();
      function();
    }
    --indent_;
    emit("}");
    return std::move(out_);
  }

 private:
  void make_pool() {
    std::set<std::string> names;
    while (names.size() < config_.identifier_pool_size) {
      std::string name(pick(rng_, kStems));
      if (rng_.chance(0.5)) name += capitalize(pick(rng_, kStems));
      names.insert(std::move(name));
    }
    pool_.assign(names.begin(), names.end());
    rng_.shuffle(std::span<std::string>(pool_));
  }

  void emit(std::string_view text) {
    out_.append(4 * indent_, ' ');
    out_ += text;
    out_ += '\n';
  }
  void blank() { out_ += '\n'; }

  void function() {
    std::string name;
    do {
      name = std::string(pick(rng_, kVerbs)) + capitalize(pick(rng_, kStems));
    } while (std::any_of(functions_.begin(), functions_.end(), [&](const Function& f) { return f.name == name; }));

    const std::size_t mark = scope_.size();
    const std::size_t arity = 1 + rng_.below(3);
    std::string header = "public int " + name + "(";
    for (std::size_t k = 0; k < arity; ++k) {
      auto fresh = fresh_name();
      if (!fresh) break;
      header += (k ? ", int " : "int ") + *fresh;
      scope_.push_back(*fresh);
    }
    header += ") {";
    const std::size_t actual_arity = scope_.size() - mark;
    emit(header);
    ++indent_;

    const std::size_t result_mark = scope_.size();
    if (auto local = fresh_name()) {
      emit("int " + *local + " = " + expression() + ";");
      scope_.push_back(*local);
    }
    const std::size_t n = 3 + rng_.below(5);
    for (std::size_t k = 0; k < n; ++k) statement(0);
    const std::string& ret = scope_.size() > result_mark ? scope_[result_mark] : pick(rng_, scope_);
    emit("return " + ret + ";");

    --indent_;
    emit("}");
    scope_.resize(mark);
    functions_.push_back({name, actual_arity});
  }

  std::optional<std::string> fresh_name() {
    std::vector<std::string> free;
    for (const auto& p : pool_) {
      if (std::find(scope_.begin(), scope_.end(), p) == scope_.end()) free.push_back(p);
    }
    if (free.empty()) return std::nullopt;
    return pick(rng_, free);
  }

  std::string variable() {
    // Prefer recently declared names: code tends to use what it just defined.
    if (scope_.size() > 1 && rng_.chance(0.5)) {
      const std::size_t window = std::min<std::size_t>(4, scope_.size());
      return scope_[scope_.size() - 1 - rng_.below(window)];
    }
    return pick(rng_, scope_);
  }

  std::string term() {
    if (rng_.chance(0.7)) return variable();
    return std::to_string(pick(rng_, kLiterals));
  }

  std::string expression() {
    static constexpr std::array<std::string_view, 7> ops = {"+", "-", "*", "+", "-", "/", "%"};
    std::string e = term();
    const std::size_t extra = rng_.below(3);
    for (std::size_t k = 0; k < extra; ++k) e += " " + std::string(pick(rng_, ops)) + " " + term();
    return e;
  }

  std::string condition() {
    static constexpr std::array<std::string_view, 6> cmps = {"<", ">", "<=", ">=", "==", "!="};
    std::string c = variable() + " " + std::string(pick(rng_, cmps)) + " " + term();
    if (rng_.chance(0.25)) {
      c += rng_.chance(0.5) ? " && " : " || ";
      c += variable() + " " + std::string(pick(rng_, cmps)) + " " + term();
    }
    return c;
  }

  void block(std::size_t depth) {
    const std::size_t mark = scope_.size();
    ++indent_;
    const std::size_t n = 1 + rng_.below(3);
    for (std::size_t k = 0; k < n; ++k) statement(depth + 1);
    --indent_;
    scope_.resize(mark);
  }

  void statement(std::size_t depth) {
    const bool can_nest = depth < config_.statement_depth;
    // decl, assign, compound, call, if, for, while
    std::array<std::uint64_t, 7> weights = {3, 3, 2, 2, can_nest ? 2u : 0u, can_nest ? 2u : 0u, can_nest ? 1u : 0u};
    std::uint64_t total = 0;
    for (auto w : weights) total += w;
    std::uint64_t roll = rng_.below(total);
    std::size_t kind = 0;
    while (roll >= weights[kind]) roll -= weights[kind++];

    switch (kind) {
      case 0:
        if (auto name = fresh_name()) {
          emit("int " + *name + " = " + expression() + ";");
          scope_.push_back(*name);
          return;
        }
        [[fallthrough]];
      case 1:
        emit(variable() + " = " + expression() + ";");
        return;
      case 2:
        emit(variable() + (rng_.chance(0.5) ? " += " : " -= ") + term() + ";");
        return;
      case 3:
        call();
        return;
      case 4: {
        emit("if (" + condition() + ") {");
        block(depth);
        if (rng_.chance(0.3)) {
          emit("} else {");
          block(depth);
        }
        emit("}");
        return;
      }
      case 5: {
        static constexpr std::array<std::string_view, 3> loop_vars = {"i", "j", "k"};
        const std::string v(loop_vars[std::min<std::size_t>(depth, loop_vars.size() - 1)]);
        emit("for (int " + v + " = 0; " + v + " < " + variable() + "; " + v + "++) {");
        scope_.push_back(v);
        block(depth);
        scope_.pop_back();
        emit("}");
        return;
      }
      default: {
        const std::string v = variable();
        emit("while (" + v + " > " + std::to_string(pick(rng_, kLiterals)) + ") {");
        block(depth);
        ++indent_;
        emit(v + " = " + v + " / 2;");
        --indent_;
        emit("}");
        return;
      }
    }
  }

  void call() {
    const auto roll = rng_.below(3);
    if (roll == 0 && !functions_.empty()) {
      const auto& f = functions_[rng_.below(functions_.size())];
      std::string args;
      for (std::size_t k = 0; k < f.arity; ++k) args += (k ? ", " : "") + term();
      emit(variable() + " = " + f.name + "(" + args + ");");
    } else if (roll == 1) {
      const std::string v = variable();
      emit(v + " = Math." + (rng_.chance(0.5) ? "max" : "min") + "(" + v + ", " + term() + ");");
    } else {
      emit("System.out.println(" + variable() + ");");
    }
  }

  const GeneratorConfig& config_;
  Rng& rng_;
  std::vector<std::string> pool_;
  std::vector<std::string> scope_;
  std::vector<Function> functions_;
  std::string out_;
  std::size_t indent_ = 0;
};

// ---------------------------------------------------------------------------
// Line tokenization for mutations

enum class TokKind { identifier, number, op, punct };

struct Tok {
  std::size_t begin;
  std::size_t end;
  TokKind kind;
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Tok> tokenize(std::string_view line) {
  static constexpr std::array<std::string_view, 12> two_char = {"==", "!=", "<=", ">=", "&&", "||",
                                                                "++", "--", "+=", "-=", "*=", "/="};
  std::vector<Tok> toks;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (c == ' ' || c == '\t') {
      ++i;
    } else if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < line.size() && is_ident_char(line[j])) ++j;
      toks.push_back({i, j, TokKind::identifier});
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
      toks.push_back({i, j, TokKind::number});
      i = j;
    } else if (i + 1 < line.size() &&
               std::find(two_char.begin(), two_char.end(), line.substr(i, 2)) != two_char.end()) {
      toks.push_back({i, i + 2, TokKind::op});
      i += 2;
    } else if (std::string_view("+-*/%<>=!&|").find(c) != std::string_view::npos) {
      toks.push_back({i, i + 1, TokKind::op});
      ++i;
    } else {
      toks.push_back({i, i + 1, TokKind::punct});
      ++i;
    }
  }
  return toks;
}

bool is_keyword(std::string_view word) {
  return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end() ||
         std::find(kLibraryNames.begin(), kLibraryNames.end(), word) != kLibraryNames.end();
}

std::optional<std::string_view> swapped_operator(std::string_view op) {
  static const std::map<std::string_view, std::string_view> swaps = {
      {"+", "-"},   {"-", "+"},   {"*", "/"},  {"/", "*"},  {"<", ">"},   {">", "<"},   {"<=", ">="}, {">=", "<="},
      {"==", "!="}, {"!=", "=="}, {"&&", "||"}, {"||", "&&"}, {"++", "--"}, {"--", "++"}, {"+=", "-="}, {"-=", "+="}};
  auto it = swaps.find(op);
  if (it == swaps.end()) return std::nullopt;
  return it->second;
}

std::string replace_range(std::string_view line, std::size_t begin, std::size_t end, std::string_view with) {
  std::string out(line.substr(0, begin));
  out += with;
  out += line.substr(end);
  return out;
}

std::string quote_csv(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.emplace_back(text.substr(start));
      break;
    }
    lines.emplace_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

}  // namespace

void GeneratorConfig::validate() const {
  if (n_files < 1) throw InputError("generator: n_files must be >= 1");
  if (min_functions < 1 || max_functions < min_functions) {
    throw InputError("generator: need 1 <= min_functions <= max_functions");
  }
  if (identifier_pool_size < 2) throw InputError("generator: identifier_pool_size must be >= 2");
  if (statement_depth < 1) throw InputError("generator: statement_depth must be >= 1");
  if (!(global_fraction >= 0.0 && global_fraction <= 1.0)) throw InputError("generator: global_fraction must be in [0, 1]");
}

SyntheticCorpus generate_corpus(const GeneratorConfig& config) {
  config.validate();
  Rng rng(config.rng_seed);
  const auto n_global = static_cast<std::size_t>(std::llround(static_cast<double>(config.n_files) * config.global_fraction));

  SyntheticCorpus corpus;
  std::set<std::string> used_classes;
  for (std::size_t k = 0; k < config.n_files; ++k) {
    std::string class_name;
    do {
      class_name = capitalize(pick(rng, kStems)) + std::string(pick(rng, kClassSuffixes));
    } while (!used_classes.insert(class_name).second && used_classes.size() < kStems.size() * kClassSuffixes.size());
    if (used_classes.size() < k + 1) class_name += std::to_string(k);

    // Each file draws from its own stream so files are independent of each
    // other's length.
    Rng file_rng(rng.next());
    FileBuilder builder(config, file_rng);
    const std::string package(pick(rng, kStems));
    SourceFile file{(k < n_global ? "global/" : "local/") + class_name + ".java", builder.build(class_name, package)};
    (k < n_global ? corpus.global_files : corpus.local_files).push_back(std::move(file));
  }
  return corpus;
}

std::optional<std::string> check_layout(std::string_view text) {
  long depth = 0;
  std::size_t lineno = 0;
  for (const auto& line : split_lines(text)) {
    ++lineno;
    const auto first = line.find_first_not_of(' ');
    if (first == std::string::npos) {
      if (!line.empty()) return "line " + std::to_string(lineno) + ": whitespace-only line";
      continue;
    }
    const long expected = line[first] == '}' ? depth - 1 : depth;
    if (static_cast<long>(first) != 4 * expected) {
      return "line " + std::to_string(lineno) + ": indentation " + std::to_string(first) + ", expected " +
             std::to_string(4 * expected);
    }
    for (char c : line) {
      if (c == '{') ++depth;
      if (c == '}') --depth;
      if (depth < 0) return "line " + std::to_string(lineno) + ": unbalanced '}'";
    }
  }
  if (depth != 0) return "unclosed braces at end of file";
  return std::nullopt;
}

std::string_view to_string(Mutation m) noexcept {
  switch (m) {
    case Mutation::identifier_swap:
      return "identifier_swap";
    case Mutation::operator_swap:
      return "operator_swap";
    case Mutation::literal_offset:
      return "literal_offset";
    case Mutation::token_deletion:
      break;
  }
  return "token_deletion";
}

std::vector<std::string> identifier_pool(std::string_view text) {
  std::set<std::string> names;
  for (const auto& line : split_lines(text)) {
    if (line.starts_with("package ")) continue;
    for (const auto& t : tokenize(line)) {
      if (t.kind != TokKind::identifier) continue;
      std::string word = line.substr(t.begin, t.end - t.begin);
      if (!is_keyword(word)) names.insert(std::move(word));
    }
  }
  return {names.begin(), names.end()};
}

bool is_eligible_line(std::string_view line) {
  for (char c : line) {
    if (c != ' ' && c != '\t' && c != '\r' && c != '{' && c != '}') return true;
  }
  return false;
}

std::optional<std::string> apply_mutation(std::string_view line, Mutation mutation, std::span<const std::string> pool,
                                          Rng& rng) {
  const auto toks = tokenize(line);
  std::vector<const Tok*> candidates;
  auto text_of = [&](const Tok& t) { return line.substr(t.begin, t.end - t.begin); };

  switch (mutation) {
    case Mutation::identifier_swap: {
      for (const auto& t : toks) {
        if (t.kind != TokKind::identifier) continue;
        const auto word = text_of(t);
        if (std::find(pool.begin(), pool.end(), word) != pool.end()) candidates.push_back(&t);
      }
      if (candidates.empty() || pool.size() < 2) return std::nullopt;
      const Tok& t = *candidates[rng.below(candidates.size())];
      const auto word = text_of(t);
      std::vector<std::string_view> others;
      for (const auto& p : pool) {
        if (p != word) others.push_back(p);
      }
      return replace_range(line, t.begin, t.end, others[rng.below(others.size())]);
    }
    case Mutation::operator_swap: {
      for (const auto& t : toks) {
        if (t.kind == TokKind::op && swapped_operator(text_of(t))) candidates.push_back(&t);
      }
      if (candidates.empty()) return std::nullopt;
      const Tok& t = *candidates[rng.below(candidates.size())];
      return replace_range(line, t.begin, t.end, *swapped_operator(text_of(t)));
    }
    case Mutation::literal_offset: {
      for (const auto& t : toks) {
        if (t.kind == TokKind::number) candidates.push_back(&t);
      }
      if (candidates.empty()) return std::nullopt;
      const Tok& t = *candidates[rng.below(candidates.size())];
      const long value = std::stol(std::string(text_of(t)));
      const long shifted = (value == 0 || rng.chance(0.5)) ? value + 1 : value - 1;
      return replace_range(line, t.begin, t.end, std::to_string(shifted));
    }
    case Mutation::token_deletion: {
      if (toks.empty()) return std::nullopt;
      const Tok& t = toks[rng.below(toks.size())];
      std::size_t begin = t.begin;
      std::size_t end = t.end;
      // Swallow one neighbouring space so "a = b" loses "= " rather than
      // leaving a double space; never eat indentation.
      if (end < line.size() && line[end] == ' ' && begin > 0 && line[begin - 1] == ' ') {
        ++end;
      } else if (end == line.size() && begin > 0 && line[begin - 1] == ' ' &&
                 line.find_first_not_of(' ') < begin) {
        --begin;
      }
      return replace_range(line, begin, end, "");
    }
  }
  return std::nullopt;
}

InjectionResult inject_bugs(std::span<const SourceFile> files, double rate, std::uint64_t seed) {
  if (!(rate > 0.0 && rate < 1.0)) throw InputError("inject_bugs: rate must be in (0, 1)");
  Rng rng(seed);

  std::vector<std::vector<std::string>> lines;
  std::vector<std::vector<std::string>> pools;
  std::vector<std::pair<std::size_t, std::size_t>> eligible;  // (file, 0-based line)
  for (std::size_t f = 0; f < files.size(); ++f) {
    lines.push_back(split_lines(files[f].text));
    pools.push_back(identifier_pool(files[f].text));
    for (std::size_t k = 0; k < lines[f].size(); ++k) {
      if (is_eligible_line(lines[f][k])) eligible.emplace_back(f, k);
    }
  }
  if (eligible.size() < 2) throw InputError("inject_bugs: no eligible lines to mutate and sample");

  const auto wanted = static_cast<std::size_t>(std::llround(rate * static_cast<double>(eligible.size())));
  const std::size_t n_bugs = std::clamp<std::size_t>(wanted, 1, eligible.size() / 2);
  rng.shuffle(std::span(eligible));

  InjectionResult result;
  std::vector<std::pair<std::size_t, std::size_t>> untouched;
  std::size_t next = 0;
  for (; next < eligible.size() && result.bugs.size() < n_bugs; ++next) {
    const auto [f, k] = eligible[next];
    const std::string& original = lines[f][k];
    std::vector<std::pair<Mutation, std::string>> options;
    for (auto m : kAllMutations) {
      // Each candidate mutation gets its own stream so the choice among
      // applicable ones stays uniform.
      Rng trial(rng.next());
      if (auto mutated = apply_mutation(original, m, pools[f], trial); mutated && *mutated != original) {
        options.emplace_back(m, std::move(*mutated));
      }
    }
    if (options.empty()) {
      untouched.push_back(eligible[next]);
      continue;
    }
    auto& [mutation, mutated] = options[rng.below(options.size())];
    result.bugs.push_back({files[f].name, k + 1, mutation, original, mutated});
    lines[f][k] = mutated;
  }
  for (; next < eligible.size(); ++next) untouched.push_back(eligible[next]);
  rng.shuffle(std::span(untouched));
  if (untouched.size() < result.bugs.size()) result.bugs.resize(untouched.size());
  for (std::size_t k = 0; k < result.bugs.size(); ++k) {
    result.clean.push_back({files[untouched[k].first].name, untouched[k].second + 1});
  }

  // Re-apply in case bugs were trimmed above.
  for (std::size_t f = 0; f < files.size(); ++f) lines[f] = split_lines(files[f].text);
  for (const auto& b : result.bugs) {
    const auto f = static_cast<std::size_t>(
        std::find_if(files.begin(), files.end(), [&](const SourceFile& s) { return s.name == b.file; }) - files.begin());
    lines[f][b.line_number - 1] = b.mutated_line;
  }
  for (std::size_t f = 0; f < files.size(); ++f) {
    std::string text;
    for (const auto& l : lines[f]) {
      text += l;
      text += '\n';
    }
    if (!files[f].text.empty() && files[f].text.back() != '\n') text.pop_back();
    result.mutated.push_back({files[f].name, std::move(text)});
  }

  auto by_position = [](const auto& a, const auto& b) {
    return std::tie(a.file, a.line_number) < std::tie(b.file, b.line_number);
  };
  std::sort(result.bugs.begin(), result.bugs.end(), by_position);
  std::sort(result.clean.begin(), result.clean.end(), by_position);
  return result;
}

void write_mutation_log(std::ostream& out, std::span<const BugInjection> bugs) {
  out << "file,line,mutation,original,mutated\n";
  for (const auto& b : bugs) {
    out << quote_csv(b.file) << ',' << b.line_number << ',' << to_string(b.mutation) << ',' << quote_csv(b.original_line)
        << ',' << quote_csv(b.mutated_line) << '\n';
  }
}

SynthPaths write_synthetic_corpus(const fs::path& out_dir, const SyntheticCorpus& corpus,
                                  const InjectionResult& injection) {
  std::error_code ec;
  for (const char* sub : {"global", "local", "original"}) {
    fs::create_directories(out_dir / sub, ec);
    if (ec) throw IoError("cannot create directory '" + (out_dir / sub).string() + "': " + ec.message());
  }
  for (const auto& f : corpus.global_files) write_file(out_dir / f.name, f.text);
  for (const auto& f : injection.mutated) write_file(out_dir / f.name, f.text);
  for (const auto& f : corpus.local_files) {
    write_file(out_dir / "original" / fs::path(f.name).filename(), f.text);
  }

  std::ostringstream manifest;
  manifest << "# synthetic corpus: " << corpus.global_files.size() << " global, " << corpus.local_files.size()
           << " local files, " << injection.bugs.size() << " buggy + " << injection.clean.size() << " clean lines\n";
  for (const auto& f : corpus.global_files) manifest << "global\t" << f.name << '\n';
  for (const auto& f : corpus.local_files) manifest << "local\t" << f.name << '\n';
  for (const auto& b : injection.bugs) manifest << "buggy\t" << b.file << '\t' << b.line_number << '\n';
  for (const auto& c : injection.clean) manifest << "clean\t" << c.file << '\t' << c.line_number << '\n';

  SynthPaths paths{out_dir / "manifest.tsv", out_dir / "mutations.csv"};
  write_file(paths.manifest, manifest.str());
  std::ostringstream log;
  write_mutation_log(log, injection.bugs);
  write_file(paths.mutation_log, log.str());
  return paths;
}

}  // namespace codelm
