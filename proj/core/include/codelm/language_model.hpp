// SPDX-License-Identifier: Apache-2.0
//
// Common scoring contract for both model families. A language model factors
// P(s_1 … s_N) into next-token conditionals; here it reports, for every
// position t of a sequence, the distribution it assigns to token t given
// tokens 0..t-1. Position 0 gets the model's context-free prediction.

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>

#include "codelm/corpus.hpp"
#include "codelm/lstm.hpp"
#include "codelm/ngram.hpp"

namespace codelm {

using PredictionSink = std::function<void(std::size_t position, std::span<const double> distribution)>;

class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  virtual std::size_t vocab_size() const = 0;

  /// Calls `sink(t, p)` for t = 0 … ids.size()-1, in order, where p predicts
  /// ids[t] from ids[0..t). State starts fresh on every call.
  virtual void predict_sequence(std::span<const TokenId> ids, const PredictionSink& sink) const = 0;
};

class LstmLanguageModel final : public LanguageModel {
 public:
  explicit LstmLanguageModel(LstmParams params) : params_(std::move(params)) {}

  std::size_t vocab_size() const override { return params_.config().vocab_size; }
  void predict_sequence(std::span<const TokenId> ids, const PredictionSink& sink) const override;

  const LstmParams& params() const noexcept { return params_; }

 private:
  LstmParams params_;
};

class NgramLanguageModel final : public LanguageModel {
 public:
  explicit NgramLanguageModel(NgramModel model) : model_(std::move(model)) {}

  std::size_t vocab_size() const override { return model_.vocab_size(); }
  void predict_sequence(std::span<const TokenId> ids, const PredictionSink& sink) const override;

  const NgramModel& model() const noexcept { return model_; }

 private:
  NgramModel model_;
};

struct LoadedModel {
  Vocabulary vocab;
  std::unique_ptr<LanguageModel> model;
};

/// Opens either an LSTM checkpoint or an n-gram table, chosen by magic bytes.
LoadedModel load_language_model(const std::filesystem::path& path);

}  // namespace codelm
