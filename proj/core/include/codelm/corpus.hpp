// SPDX-License-Identifier: Apache-2.0
//
// Byte-level vocabulary, token streams with line boundaries, and the
// tab-separated split manifest that assigns files to the global/local
// training sets and labels individual test lines.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "codelm/error.hpp"

namespace codelm {

using TokenId = std::uint32_t;

/// Bijection between the bytes observed in a training corpus and dense token
/// ids. Ids follow ascending byte value; the unknown token takes the last id.
class Vocabulary {
 public:
  /// Builds from a set of distinct bytes (order and duplicates are ignored).
  static Vocabulary from_bytes(std::span<const std::uint8_t> bytes);
  static Vocabulary from_text(std::string_view text);

  std::size_t size() const noexcept { return id_to_byte_.size() + 1; }
  TokenId unk_id() const noexcept { return static_cast<TokenId>(id_to_byte_.size()); }

  /// Id of `byte`, or unk_id() when the byte was never observed.
  TokenId id_of(std::uint8_t byte) const noexcept { return byte_to_id_[byte]; }
  bool contains(std::uint8_t byte) const noexcept { return byte_to_id_[byte] != unk_id(); }

  /// Byte for `id`; empty for unk_id() and out-of-range ids.
  std::optional<std::uint8_t> byte_of(TokenId id) const noexcept;

  std::span<const std::uint8_t> bytes() const noexcept { return id_to_byte_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) noexcept {
    return a.id_to_byte_ == b.id_to_byte_;
  }

 private:
  std::array<TokenId, 256> byte_to_id_{};
  std::vector<std::uint8_t> id_to_byte_;
};

/// Half-open range of token offsets belonging to one source line. The span
/// includes the line's terminating newline token when there is one.
struct LineSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t line_number = 0;  // 1-based

  std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const LineSpan&, const LineSpan&) = default;
};

struct TokenStream {
  std::vector<TokenId> ids;
  std::vector<LineSpan> lines;

  bool empty() const noexcept { return ids.empty(); }
  std::size_t size() const noexcept { return ids.size(); }
};

/// Reads a whole file as raw bytes. Throws IoError naming the path.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Vocabulary of the distinct bytes present across `files`. Independent of
/// file order. Throws IoError for unreadable files and InputError when every
/// file is empty ("empty corpus").
Vocabulary build_vocabulary(std::span<const std::filesystem::path> files);

/// Maps every byte to its id (unseen bytes to unk) and splits into lines on
/// '\n'. Never fails.
TokenStream encode(const Vocabulary& vocab, std::string_view raw);

/// Inverse of encode for streams free of unk tokens. Throws InputError on
/// unk or out-of-range ids.
std::string decode(const Vocabulary& vocab, std::span<const TokenId> ids);

/// Concatenates streams, renumbering nothing: line numbers keep their
/// per-file values while offsets are shifted.
TokenStream concatenate(std::span<const TokenStream> streams);

/// Copy of `stream` with the listed 1-based lines removed and the rest
/// spliced together.
TokenStream mask_lines(const TokenStream& stream, std::span<const std::size_t> line_numbers);

// ---------------------------------------------------------------------------
// Split manifest

enum class Label { buggy, clean, unlabeled };

std::string_view to_string(Label label) noexcept;
std::optional<Label> parse_label(std::string_view text) noexcept;

struct LabeledLine {
  std::filesystem::path file;
  std::size_t line_number = 0;  // 1-based
  Label label = Label::unlabeled;
};

struct CorpusSplit {
  /// Directory the manifest lives in; relative entries resolve against it.
  std::filesystem::path root;
  std::vector<std::filesystem::path> global_train;
  std::vector<std::filesystem::path> local_train;
  std::vector<LabeledLine> test_lines;

  /// Path relative to root, in generic form. Used for stable report output.
  std::string display_name(const std::filesystem::path& file) const;

  /// Labeled line numbers of `file`, ascending.
  std::vector<std::size_t> labeled_lines_of(const std::filesystem::path& file) const;

  std::optional<Label> label_of(const std::filesystem::path& file, std::size_t line) const;
};

class ManifestError : public FormatError {
 public:
  enum class Kind { malformed, dangling_file, line_out_of_range, duplicate_label };

  ManifestError(Kind kind, const std::string& what) : FormatError(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Parses and validates a manifest. Records are `global<TAB>path`,
/// `local<TAB>path`, `buggy<TAB>path<TAB>line` or `clean<TAB>path<TAB>line`;
/// blank lines and lines starting with '#' are ignored. Labeled files must be
/// listed as local. Throws ManifestError (or IoError if unreadable).
CorpusSplit load_split(const std::filesystem::path& manifest);

/// Writes `split` with paths relative to `split.root`.
void save_split(const std::filesystem::path& manifest, const CorpusSplit& split);

/// Encodes the training files of one role. For the local role the labeled
/// test lines of each file are masked out first.
TokenStream training_stream(const Vocabulary& vocab, const CorpusSplit& split, bool local_role);

}  // namespace codelm
