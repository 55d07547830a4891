// SPDX-License-Identifier: Apache-2.0

#include "codelm/ngram.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "codelm/error.hpp"

namespace codelm {

NgramModel::NgramModel(std::size_t order, std::size_t vocab_size) : order_(order), vocab_size_(vocab_size) {
  if (order_ < 1) throw InputError("n-gram order must be >= 1");
  if (vocab_size_ < 1) throw InputError("n-gram vocabulary must be non-empty");
}

NgramModel NgramModel::fit(std::span<const TokenStream> streams, std::size_t order, std::size_t vocab_size) {
  NgramModel model(order, vocab_size);
  bool any = false;
  for (const auto& s : streams) {
    model.add(s.ids);
    any = any || !s.ids.empty();
  }
  if (!any) throw InputError("n-gram fit: no tokens in input streams");
  return model;
}

void NgramModel::add(std::span<const TokenId> ids) {
  for (auto id : ids) {
    if (id >= vocab_size_) throw InputError("n-gram: token id " + std::to_string(id) + " out of range");
  }
  Context key;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const std::size_t max_ctx = std::min(order_ - 1, i);
    for (std::size_t len = 0; len <= max_ctx; ++len) {
      const auto ctx = ids.subspan(i - len, len);
      auto it = table_.find(ctx);
      if (it == table_.end()) {
        key.assign(ctx.begin(), ctx.end());
        it = table_.emplace(key, Followers{}).first;
      }
      ++it->second.total;
      ++it->second.counts[ids[i]];
    }
  }
}

const NgramModel::Followers* NgramModel::find(std::span<const TokenId> context) const {
  auto it = table_.find(context);
  return it == table_.end() ? nullptr : &it->second;
}

std::uint64_t NgramModel::count(std::span<const TokenId> context) const {
  const auto* f = find(context);
  return f ? f->total : 0;
}

std::uint64_t NgramModel::count(std::span<const TokenId> context, TokenId follower) const {
  const auto* f = find(context);
  if (!f) return 0;
  auto it = f->counts.find(follower);
  return it == f->counts.end() ? 0 : it->second;
}

double NgramModel::self_weight(std::span<const TokenId> context) const {
  const auto* f = find(context);
  if (!f) return 0.0;
  const double total = static_cast<double>(f->total);
  return total / (total + static_cast<double>(f->counts.size()));
}

void NgramModel::predict(std::span<const TokenId> context, std::span<double> out) const {
  if (out.size() != vocab_size_) throw InputError("n-gram predict: output size does not match vocabulary");
  std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(vocab_size_));

  const std::size_t usable = std::min(order_ - 1, context.size());
  for (std::size_t len = 0; len <= usable; ++len) {
    const auto* f = find(context.last(len));
    if (f == nullptr) break;  // longer contexts contain this one as a suffix
    const double distinct = static_cast<double>(f->counts.size());
    const double denom = static_cast<double>(f->total) + distinct;
    for (double& p : out) p = distinct * p / denom;
    for (const auto& [token, c] : f->counts) out[token] += static_cast<double>(c) / denom;
  }
}

std::vector<double> NgramModel::predict(std::span<const TokenId> context) const {
  std::vector<double> out(vocab_size_);
  predict(context, out);
  return out;
}

bool operator==(const NgramModel& a, const NgramModel& b) {
  if (a.order_ != b.order_ || a.vocab_size_ != b.vocab_size_ || a.table_.size() != b.table_.size()) return false;
  auto ia = a.table_.begin();
  for (auto ib = b.table_.begin(); ib != b.table_.end(); ++ia, ++ib) {
    if (ia->first != ib->first || ia->second.total != ib->second.total || ia->second.counts != ib->second.counts) {
      return false;
    }
  }
  return true;
}

void write_ngram(std::ostream& out, const Vocabulary& vocab, const NgramModel& model) {
  if (vocab.size() != model.vocab_size()) throw InputError("n-gram: vocabulary size does not match model");
  BinaryWriter w(out);
  w.magic(kNgramMagic);
  w.u32(kNgramVersion);
  w.u64(model.order());
  w.vocabulary(vocab);
  w.u64(model.table().size());
  for (const auto& [ctx, followers] : model.table()) {
    w.u32(static_cast<std::uint32_t>(ctx.size()));
    for (auto id : ctx) w.u32(id);
    w.u32(static_cast<std::uint32_t>(followers.counts.size()));
    for (const auto& [id, c] : followers.counts) {
      w.u32(id);
      w.u64(c);
    }
  }
}

NgramFile read_ngram(std::istream& in, const std::string& context) {
  BinaryReader r(in, context);
  r.expect_magic(kNgramMagic, "n-gram table");
  const auto version = r.u32();
  if (version != kNgramVersion) r.fail("unsupported n-gram table version " + std::to_string(version));
  const auto order = r.u64();
  if (order < 1 || order > 64) r.fail("n-gram order " + std::to_string(order) + " out of range");
  Vocabulary vocab = r.vocabulary();
  NgramModel model(order, vocab.size());
  const auto records = r.u64();

  // Records must be strictly ascending so the table round-trips exactly.
  NgramModel::Context previous;
  auto& table = model.table_;
  for (std::uint64_t i = 0; i < records; ++i) {
    const auto len = r.u32();
    if (len >= order) r.fail("context longer than order - 1");
    NgramModel::Context ctx(len);
    for (auto& id : ctx) {
      id = r.u32();
      if (id >= vocab.size()) r.fail("token id out of range in context");
    }
    if (i > 0 && !(previous < ctx)) r.fail("context records not in sorted order");
    NgramModel::Followers followers;
    const auto n = r.u32();
    for (std::uint32_t k = 0; k < n; ++k) {
      const auto id = r.u32();
      const auto c = r.u64();
      if (id >= vocab.size()) r.fail("token id out of range in follower list");
      if (c == 0) r.fail("zero follower count");
      if (!followers.counts.emplace(id, c).second) r.fail("duplicate follower id");
      followers.total += c;
    }
    if (followers.counts.empty()) r.fail("context with no followers");
    previous = ctx;
    table.emplace_hint(table.end(), std::move(ctx), std::move(followers));
  }
  r.expect_end();
  return {std::move(vocab), std::move(model)};
}

void save_ngram(const std::filesystem::path& path, const Vocabulary& vocab, const NgramModel& model) {
  std::ostringstream buf;
  write_ngram(buf, vocab, model);
  write_file(path, buf.str());
}

NgramFile load_ngram(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return read_ngram(in, path.string());
}

}  // namespace codelm
