// SPDX-License-Identifier: Apache-2.0

#include "codelm/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "codelm/error.hpp"

namespace codelm {

void write_checkpoint(std::ostream& out, const Vocabulary& vocab, const LstmParams& params) {
  const auto& cfg = params.config();
  if (cfg.vocab_size != vocab.size()) throw InputError("checkpoint: vocabulary size does not match model config");
  BinaryWriter w(out);
  w.magic(kLstmMagic);
  w.u32(kCheckpointVersion);
  w.u64(cfg.vocab_size);
  w.u64(cfg.embed_dim);
  w.u64(cfg.hidden_dim);
  w.u64(cfg.num_layers);
  w.u64(cfg.bptt_len);
  w.i64(static_cast<std::int64_t>(cfg.rng_seed));
  w.vocabulary(vocab);
  w.u64(params.size());
  w.f64s(params.flat());
}

LstmCheckpoint read_checkpoint(std::istream& in, const std::string& context) {
  BinaryReader r(in, context);
  r.expect_magic(kLstmMagic, "LSTM checkpoint");
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    r.fail("unsupported checkpoint version " + std::to_string(version) + " (expected " +
           std::to_string(kCheckpointVersion) + ")");
  }
  ModelConfig cfg;
  cfg.vocab_size = r.u64();
  cfg.embed_dim = r.u64();
  cfg.hidden_dim = r.u64();
  cfg.num_layers = r.u64();
  cfg.bptt_len = r.u64();
  cfg.rng_seed = static_cast<std::uint64_t>(r.i64());
  try {
    cfg.validate();
  } catch (const InputError& e) {
    r.fail(e.what());
  }
  // Guard against absurd sizes before allocating.
  if (cfg.vocab_size > 257 || cfg.hidden_dim > (1u << 16) || cfg.embed_dim > (1u << 16) || cfg.num_layers > 64) {
    r.fail("model dimensions out of supported range");
  }
  Vocabulary vocab = r.vocabulary();
  if (vocab.size() != cfg.vocab_size) {
    r.fail("vocabulary has " + std::to_string(vocab.size()) + " ids but config says " +
           std::to_string(cfg.vocab_size));
  }
  LstmParams params(cfg);
  const auto count = r.u64();
  if (count != params.size()) {
    r.fail("parameter count " + std::to_string(count) + " does not match config total " +
           std::to_string(params.size()));
  }
  r.f64s(params.flat());
  r.expect_end();
  return {std::move(vocab), std::move(params)};
}

void save_checkpoint(const std::filesystem::path& path, const Vocabulary& vocab, const LstmParams& params) {
  std::ostringstream buf;
  write_checkpoint(buf, vocab, params);
  write_file(path, buf.str());
}

LstmCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return read_checkpoint(in, path.string());
}

void save_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ostringstream buf;
  BinaryWriter w(buf);
  w.magic(kVocabMagic);
  w.u32(kCheckpointVersion);
  w.vocabulary(vocab);
  write_file(path, buf.str());
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  BinaryReader r(in, path.string());
  r.expect_magic(kVocabMagic, "vocabulary file");
  const auto version = r.u32();
  if (version != kCheckpointVersion) r.fail("unsupported vocabulary version " + std::to_string(version));
  Vocabulary vocab = r.vocabulary();
  r.expect_end();
  return vocab;
}

}  // namespace codelm
