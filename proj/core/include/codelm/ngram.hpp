// SPDX-License-Identifier: Apache-2.0
//
// Interpolated Witten-Bell n-gram model over token ids.
//
// For a context h with count c(h) and N(h) distinct followers,
//
//   P(w | h) = (c(h, w) + N(h) · P(w | h')) / (c(h) + N(h))
//
// where h' drops the oldest token of h. Unseen contexts defer to h'
// entirely, and the empty context interpolates with the uniform
// distribution 1/V.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "codelm/binary_io.hpp"
#include "codelm/corpus.hpp"

namespace codelm {

inline constexpr std::uint32_t kNgramVersion = 1;
inline constexpr Magic kNgramMagic = {'C', 'L', 'M', 'N', 'G', 'R', 'A', 'M'};

struct NgramFile;

class NgramModel {
 public:
  using Context = std::vector<TokenId>;

  struct ContextLess {
    using is_transparent = void;
    template <class A, class B>
    bool operator()(const A& a, const B& b) const {
      return std::lexicographical_compare(std::begin(a), std::end(a), std::begin(b), std::end(b));
    }
  };

  struct Followers {
    std::uint64_t total = 0;
    std::map<TokenId, std::uint64_t> counts;
  };
  using Table = std::map<Context, Followers, ContextLess>;

  /// Empty model: predicts the uniform distribution everywhere.
  NgramModel(std::size_t order, std::size_t vocab_size);

  /// Counts every k-gram (1 ≤ k ≤ order) in every stream. Throws InputError
  /// when order is 0 or all streams are empty.
  static NgramModel fit(std::span<const TokenStream> streams, std::size_t order, std::size_t vocab_size);

  void add(std::span<const TokenId> ids);

  std::size_t order() const noexcept { return order_; }
  std::size_t vocab_size() const noexcept { return vocab_size_; }
  std::size_t context_count() const noexcept { return table_.size(); }

  /// Counts for an exact context (its length must be < order); null when the
  /// context was never observed.
  const Followers* find(std::span<const TokenId> context) const;
  std::uint64_t count(std::span<const TokenId> context) const;
  std::uint64_t count(std::span<const TokenId> context, TokenId follower) const;

  /// Witten-Bell distribution over the next token. Only the last order-1
  /// tokens of `context` are used; shorter contexts back off naturally.
  void predict(std::span<const TokenId> context, std::span<double> out) const;
  std::vector<double> predict(std::span<const TokenId> context) const;

  /// Weight c(h) / (c(h) + N(h)) given to the context's own counts.
  double self_weight(std::span<const TokenId> context) const;

  const Table& table() const noexcept { return table_; }

  friend bool operator==(const NgramModel& a, const NgramModel& b);
  friend NgramFile read_ngram(std::istream& in, const std::string& context);

 private:
  std::size_t order_;
  std::size_t vocab_size_;
  Table table_;
};

/// Binary table: magic "CLMNGRAM", u32 version, u64 order, vocabulary, u64
/// record count, then per context in sorted order: u32 length, ids (u32),
/// u32 follower count, (u32 id, u64 count) pairs.
void write_ngram(std::ostream& out, const Vocabulary& vocab, const NgramModel& model);

struct NgramFile {
  Vocabulary vocab;
  NgramModel model;
};
NgramFile read_ngram(std::istream& in, const std::string& context = "n-gram table");

void save_ngram(const std::filesystem::path& path, const Vocabulary& vocab, const NgramModel& model);
NgramFile load_ngram(const std::filesystem::path& path);

}  // namespace codelm
