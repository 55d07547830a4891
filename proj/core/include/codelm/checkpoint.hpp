// SPDX-License-Identifier: Apache-2.0
//
// Versioned binary files for trained LSTM models and standalone vocabularies.
//
// LSTM checkpoint layout (all integers and floats little-endian):
//
//   magic      8 bytes  "CLMLSTM\0"
//   version    u32      kCheckpointVersion
//   config     u64 vocab_size, embed_dim, hidden_dim, num_layers, bptt_len;
//              i64 rng_seed
//   vocabulary u32 byte count n, then n ascending byte values
//   params     u64 total value count, then that many f64 in declared order
//
// Loading checks that the vocabulary size matches vocab_size and that the
// value count equals the total implied by the config.

#pragma once

#include <filesystem>
#include <istream>
#include <ostream>

#include "codelm/binary_io.hpp"
#include "codelm/corpus.hpp"
#include "codelm/lstm.hpp"

namespace codelm {

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr Magic kLstmMagic = {'C', 'L', 'M', 'L', 'S', 'T', 'M', '\0'};
inline constexpr Magic kVocabMagic = {'C', 'L', 'M', 'V', 'O', 'C', 'A', 'B'};

struct LstmCheckpoint {
  Vocabulary vocab;
  LstmParams params;
};

void write_checkpoint(std::ostream& out, const Vocabulary& vocab, const LstmParams& params);
LstmCheckpoint read_checkpoint(std::istream& in, const std::string& context = "checkpoint");

void save_checkpoint(const std::filesystem::path& path, const Vocabulary& vocab, const LstmParams& params);
LstmCheckpoint load_checkpoint(const std::filesystem::path& path);

void save_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab);
Vocabulary load_vocabulary(const std::filesystem::path& path);

}  // namespace codelm
