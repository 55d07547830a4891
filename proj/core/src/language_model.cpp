// SPDX-License-Identifier: Apache-2.0

#include "codelm/language_model.hpp"

#include <fstream>
#include <vector>

#include "codelm/checkpoint.hpp"
#include "codelm/error.hpp"

namespace codelm {

void LstmLanguageModel::predict_sequence(std::span<const TokenId> ids, const PredictionSink& sink) const {
  LstmPredictor predictor(params_);
  for (std::size_t t = 0; t < ids.size(); ++t) {
    sink(t, predictor.distribution());
    if (t + 1 < ids.size()) predictor.feed(ids[t]);
  }
}

void NgramLanguageModel::predict_sequence(std::span<const TokenId> ids, const PredictionSink& sink) const {
  std::vector<double> dist(model_.vocab_size());
  for (std::size_t t = 0; t < ids.size(); ++t) {
    model_.predict(ids.first(t), dist);
    sink(t, dist);
  }
}

LoadedModel load_language_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  Magic magic{};
  in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
  if (in.gcount() != static_cast<std::streamsize>(magic.size())) {
    throw FormatError(path.string() + ": file too short to be a model");
  }
  in.seekg(0);
  if (magic == kLstmMagic) {
    auto ckpt = read_checkpoint(in, path.string());
    return {std::move(ckpt.vocab), std::make_unique<LstmLanguageModel>(std::move(ckpt.params))};
  }
  if (magic == kNgramMagic) {
    auto table = read_ngram(in, path.string());
    return {std::move(table.vocab), std::make_unique<NgramLanguageModel>(std::move(table.model))};
  }
  throw FormatError(path.string() + ": not an LSTM checkpoint or n-gram table");
}

}  // namespace codelm
