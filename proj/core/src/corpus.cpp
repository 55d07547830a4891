// SPDX-License-Identifier: Apache-2.0

#include "codelm/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

namespace codelm {

namespace fs = std::filesystem;

Vocabulary Vocabulary::from_bytes(std::span<const std::uint8_t> bytes) {
  std::array<bool, 256> seen{};
  for (auto b : bytes) seen[b] = true;

  Vocabulary vocab;
  for (int b = 0; b < 256; ++b) {
    if (seen[b]) vocab.id_to_byte_.push_back(static_cast<std::uint8_t>(b));
  }
  vocab.byte_to_id_.fill(vocab.unk_id());
  for (std::size_t id = 0; id < vocab.id_to_byte_.size(); ++id) {
    vocab.byte_to_id_[vocab.id_to_byte_[id]] = static_cast<TokenId>(id);
  }
  return vocab;
}

Vocabulary Vocabulary::from_text(std::string_view text) {
  std::vector<std::uint8_t> bytes(text.begin(), text.end());
  return from_bytes(bytes);
}

std::optional<std::uint8_t> Vocabulary::byte_of(TokenId id) const noexcept {
  if (id >= id_to_byte_.size()) return std::nullopt;
  return id_to_byte_[id];
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error while reading '" + path.string() + "'");
  return contents;
}

void write_file(const fs::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("error while writing '" + path.string() + "'");
}

Vocabulary build_vocabulary(std::span<const fs::path> files) {
  std::array<bool, 256> seen{};
  bool any = false;
  for (const auto& file : files) {
    const std::string text = read_file(file);
    for (unsigned char c : text) seen[c] = true;
    any = any || !text.empty();
  }
  if (!any) throw InputError("empty corpus: no bytes in any training file");

  std::vector<std::uint8_t> present;
  for (int b = 0; b < 256; ++b) {
    if (seen[b]) present.push_back(static_cast<std::uint8_t>(b));
  }
  return Vocabulary::from_bytes(present);
}

TokenStream encode(const Vocabulary& vocab, std::string_view raw) {
  TokenStream stream;
  stream.ids.reserve(raw.size());
  std::size_t line_start = 0;
  std::size_t line_number = 1;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto byte = static_cast<std::uint8_t>(raw[i]);
    stream.ids.push_back(vocab.id_of(byte));
    if (byte == '\n') {
      stream.lines.push_back({line_start, i + 1, line_number++});
      line_start = i + 1;
    }
  }
  if (line_start < raw.size()) stream.lines.push_back({line_start, raw.size(), line_number});
  return stream;
}

std::string decode(const Vocabulary& vocab, std::span<const TokenId> ids) {
  std::string out;
  out.reserve(ids.size());
  for (auto id : ids) {
    auto byte = vocab.byte_of(id);
    if (!byte) throw InputError("cannot decode token id " + std::to_string(id));
    out.push_back(static_cast<char>(*byte));
  }
  return out;
}

TokenStream concatenate(std::span<const TokenStream> streams) {
  TokenStream out;
  for (const auto& s : streams) {
    const std::size_t shift = out.ids.size();
    out.ids.insert(out.ids.end(), s.ids.begin(), s.ids.end());
    for (auto span : s.lines) {
      span.begin += shift;
      span.end += shift;
      out.lines.push_back(span);
    }
  }
  return out;
}

TokenStream mask_lines(const TokenStream& stream, std::span<const std::size_t> line_numbers) {
  std::set<std::size_t> masked(line_numbers.begin(), line_numbers.end());
  TokenStream out;
  out.ids.reserve(stream.ids.size());
  for (const auto& span : stream.lines) {
    if (masked.count(span.line_number)) continue;
    const std::size_t begin = out.ids.size();
    out.ids.insert(out.ids.end(), stream.ids.begin() + static_cast<std::ptrdiff_t>(span.begin),
                   stream.ids.begin() + static_cast<std::ptrdiff_t>(span.end));
    out.lines.push_back({begin, out.ids.size(), span.line_number});
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Label label) noexcept {
  switch (label) {
    case Label::buggy:
      return "buggy";
    case Label::clean:
      return "clean";
    case Label::unlabeled:
      break;
  }
  return "unlabeled";
}

std::optional<Label> parse_label(std::string_view text) noexcept {
  if (text == "buggy") return Label::buggy;
  if (text == "clean") return Label::clean;
  if (text == "unlabeled" || text.empty()) return Label::unlabeled;
  return std::nullopt;
}

std::string CorpusSplit::display_name(const fs::path& file) const {
  if (root.empty()) return file.generic_string();
  auto rel = file.lexically_relative(root);
  if (rel.empty()) return file.generic_string();
  return rel.generic_string();
}

std::vector<std::size_t> CorpusSplit::labeled_lines_of(const fs::path& file) const {
  std::vector<std::size_t> lines;
  for (const auto& t : test_lines) {
    if (t.file == file) lines.push_back(t.line_number);
  }
  std::sort(lines.begin(), lines.end());
  return lines;
}

std::optional<Label> CorpusSplit::label_of(const fs::path& file, std::size_t line) const {
  for (const auto& t : test_lines) {
    if (t.line_number == line && t.file == file) return t.label;
  }
  return std::nullopt;
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

std::size_t count_lines(std::string_view text) {
  auto n = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
  if (!text.empty() && text.back() != '\n') ++n;
  return n;
}

}  // namespace

CorpusSplit load_split(const fs::path& manifest) {
  using Kind = ManifestError::Kind;
  const std::string text = read_file(manifest);
  const std::string where = manifest.string() + ":";

  CorpusSplit split;
  split.root = manifest.parent_path();

  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  std::set<fs::path> local_files;
  std::set<std::pair<fs::path, std::size_t>> labeled;

  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;

    const auto fields = split_tabs(line);
    const std::string at = where + std::to_string(lineno) + ": ";
    const auto role = fields[0];
    if (role == "global" || role == "local") {
      if (fields.size() != 2 || fields[1].empty()) {
        throw ManifestError(Kind::malformed, at + "expected '" + std::string(role) + "<TAB>path'");
      }
      fs::path file = split.root / fs::path(std::string(fields[1]));
      if (!fs::is_regular_file(file)) {
        throw ManifestError(Kind::dangling_file, at + "no such file '" + file.string() + "'");
      }
      if (role == "global") {
        split.global_train.push_back(std::move(file));
      } else {
        local_files.insert(file);
        split.local_train.push_back(std::move(file));
      }
    } else if (auto label = parse_label(role); label && *label != Label::unlabeled) {
      if (fields.size() != 3 || fields[1].empty()) {
        throw ManifestError(Kind::malformed, at + "expected '" + std::string(role) + "<TAB>path<TAB>line'");
      }
      std::size_t number = 0;
      const auto num = fields[2];
      auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), number);
      if (ec != std::errc{} || ptr != num.data() + num.size() || number == 0) {
        throw ManifestError(Kind::malformed, at + "invalid line number '" + std::string(num) + "'");
      }
      split.test_lines.push_back({split.root / fs::path(std::string(fields[1])), number, *label});
    } else {
      throw ManifestError(Kind::malformed, at + "unknown record type '" + std::string(role) + "'");
    }
  }

  std::map<fs::path, std::size_t> line_counts;
  for (const auto& t : split.test_lines) {
    if (!local_files.count(t.file)) {
      throw ManifestError(Kind::dangling_file,
                          where + " label references '" + t.file.string() + "', which is not a local file");
    }
    if (!labeled.insert({t.file, t.line_number}).second) {
      throw ManifestError(Kind::duplicate_label, where + " duplicate label for '" + t.file.string() + "' line " +
                                                     std::to_string(t.line_number));
    }
    auto it = line_counts.find(t.file);
    if (it == line_counts.end()) it = line_counts.emplace(t.file, count_lines(read_file(t.file))).first;
    if (t.line_number > it->second) {
      throw ManifestError(Kind::line_out_of_range, where + " line " + std::to_string(t.line_number) +
                                                       " is past the end of '" + t.file.string() + "' (" +
                                                       std::to_string(it->second) + " lines)");
    }
  }
  return split;
}

void save_split(const fs::path& manifest, const CorpusSplit& split) {
  std::ostringstream out;
  for (const auto& f : split.global_train) out << "global\t" << split.display_name(f) << '\n';
  for (const auto& f : split.local_train) out << "local\t" << split.display_name(f) << '\n';
  for (const auto& t : split.test_lines) {
    out << to_string(t.label) << '\t' << split.display_name(t.file) << '\t' << t.line_number << '\n';
  }
  write_file(manifest, out.str());
}

TokenStream training_stream(const Vocabulary& vocab, const CorpusSplit& split, bool local_role) {
  const auto& files = local_role ? split.local_train : split.global_train;
  std::vector<TokenStream> parts;
  parts.reserve(files.size());
  for (const auto& file : files) {
    TokenStream s = encode(vocab, read_file(file));
    if (local_role) {
      const auto masked = split.labeled_lines_of(file);
      if (!masked.empty()) s = mask_lines(s, masked);
    }
    parts.push_back(std::move(s));
  }
  return concatenate(parts);
}

}  // namespace codelm
