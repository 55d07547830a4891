// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "codelm/eval.hpp"
#include "codelm/language_model.hpp"
#include "codelm/random.hpp"
#include "codelm/scoring.hpp"

namespace codelm {
namespace {

// Distribution depends only on the previous token.
class BigramTableModel final : public LanguageModel {
 public:
  std::size_t vocab_size() const override { return 4; }
  void predict_sequence(std::span<const TokenId> ids, const PredictionSink& sink) const override {
    static const std::vector<double> first{0.25, 0.25, 0.25, 0.25};
    static const std::vector<std::vector<double>> after{
        {0.25, 0.5, 0.125, 0.125}, {0.1, 0.2, 0.6, 0.1}, {0.5, 0.3, 0.1, 0.1}, {0.25, 0.25, 0.25, 0.25}};
    for (std::size_t t = 0; t < ids.size(); ++t) sink(t, t == 0 ? first : after[ids[t - 1]]);
  }
};

class UniformModel final : public LanguageModel {
 public:
  explicit UniformModel(std::size_t v) : p_(v, 1.0 / static_cast<double>(v)) {}
  std::size_t vocab_size() const override { return p_.size(); }
  void predict_sequence(std::span<const TokenId> ids, const PredictionSink& sink) const override {
    for (std::size_t t = 0; t < ids.size(); ++t) sink(t, p_);
  }

 private:
  std::vector<double> p_;
};

TEST(CharEntropy, Examples) {
  EXPECT_EQ(char_entropy(std::vector<double>{0.25, 0.25, 0.25, 0.25}), 2.0);
  EXPECT_EQ(char_entropy(std::vector<double>{0.0, 1.0, 0.0}), 0.0);
  EXPECT_NEAR(char_entropy(std::vector<double>{0.5, 0.25, 0.25}), 1.5, 1e-15);
  EXPECT_NEAR(char_entropy(std::vector<double>{0.5, 0.5}, std::exp(1.0)), std::log(2.0), 1e-15);
}

TEST(ScoreFile, HandComputedToyFile) {
  const auto vocab = Vocabulary::from_text("ab\n");
  const auto stream = encode(vocab, "ab\nb\naab");
  const BigramTableModel model;
  ScoringConfig cfg;
  // Expected values from tests/oracles/reference_values.py.
  const auto pe = score_file(model, stream, cfg);
  ASSERT_EQ(pe.size(), 3u);
  EXPECT_NEAR(pe[0], 1.752141963894001, 1e-12);
  EXPECT_NEAR(pe[1], 1.7177376486136673, 1e-12);
  EXPECT_NEAR(pe[2], 1.6306337296364457, 1e-12);

  cfg.metric = Metric::cross_entropy;
  const auto ce = score_file(model, stream, cfg);
  EXPECT_NEAR(ce[0], 1.245655198055402, 1e-12);
  EXPECT_NEAR(ce[1], 2.0, 1e-12);
  EXPECT_NEAR(ce[2], 1.3529645630178562, 1e-12);
}

TEST(ScoreFile, UniformModelScoresLog2V) {
  const auto vocab = Vocabulary::from_text("abcdefg\n");
  const auto stream = encode(vocab, "abc\nd\n\nefg");
  const UniformModel model(vocab.size());
  for (auto metric : {Metric::predictive_entropy, Metric::cross_entropy}) {
    ScoringConfig cfg;
    cfg.metric = metric;
    for (double s : score_file(model, stream, cfg)) EXPECT_NEAR(s, std::log2(9.0), 1e-15);
  }
}

TEST(ScoreFile, SingleLineIsMeanOfPositions) {
  const auto vocab = Vocabulary::from_text("ab\n");
  const auto stream = encode(vocab, "abba");
  const BigramTableModel model;
  ScoringConfig cfg;
  cfg.metric = Metric::cross_entropy;
  // a = 1, b = 2: uniform, then after-a row, after-b row twice.
  const double expected = (-std::log2(0.25) - std::log2(0.6) - std::log2(0.1) - std::log2(0.3)) / 4.0;
  EXPECT_NEAR(score_file(model, stream, cfg)[0], expected, 1e-15);
}

TEST(ScoreFile, EmptyStreamRejected) {
  EXPECT_THROW(score_file(UniformModel(3), TokenStream{}, ScoringConfig{}), InputError);
}

TEST(MixScores, Endpoints) {
  const std::vector<double> g{2.0, 0.5, 3.25}, l{1.0, 4.0, 0.0};
  ScoringConfig cfg;
  cfg.lambda = 1.0;
  EXPECT_EQ(mix_scores(g, l, cfg), g);
  cfg.lambda = 0.0;
  EXPECT_EQ(mix_scores(g, l, cfg), l);
  cfg.lambda = 0.5;
  EXPECT_EQ(mix_scores(g, l, cfg)[0], 1.5);
  const std::vector<double> shorter{1.0};
  EXPECT_THROW(mix_scores(g, shorter, cfg), InputError);
  cfg.lambda = 1.5;
  EXPECT_THROW(cfg.validate(), InputError);
}

TEST(MixScores, Monotone) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    ScoringConfig cfg;
    cfg.lambda = rng.uniform01();
    std::vector<double> g{rng.uniform(0, 5)}, l{rng.uniform(0, 5)};
    const double base = mix_scores(g, l, cfg)[0];
    auto g2 = g, l2 = l;
    g2[0] += rng.uniform(0, 1);
    l2[0] += rng.uniform(0, 1);
    EXPECT_GE(mix_scores(g2, l, cfg)[0], base);
    EXPECT_GE(mix_scores(g, l2, cfg)[0], base);
  }
}

TEST(ScoreLines, GlobalOnlyAndMixed) {
  const auto vocab = Vocabulary::from_text("abcdefg\n");
  const auto stream = encode(vocab, "ab\nba\n");
  const BigramTableModel table;
  const UniformModel uniform(4);
  ScoringConfig cfg;
  auto label = [](std::size_t line) { return line == 2 ? Label::buggy : Label::unlabeled; };

  const auto solo = score_lines("f.java", stream, table, nullptr, cfg, label);
  ASSERT_EQ(solo.size(), 2u);
  EXPECT_FALSE(solo[0].h_local.has_value());
  EXPECT_EQ(solo[0].h_total, solo[0].h_global);
  EXPECT_EQ(solo[1].label, Label::buggy);
  EXPECT_EQ(solo[0].char_count, 3u);

  const auto mixed = score_lines("f.java", stream, table, &uniform, cfg, label);
  for (const auto& r : mixed) {
    ASSERT_TRUE(r.h_local.has_value());
    EXPECT_EQ(*r.h_local, 2.0);
    EXPECT_EQ(r.h_total, 0.5 * r.h_global + 0.5 * 2.0);
  }
}

TEST(ScoreCsv, FormatAndRoundTrip) {
  std::vector<LineScore> rows(2);
  rows[0] = {"dir/a,b.java", 3, 1.0 / 3.0, std::nullopt, 1.0 / 3.0, Label::clean, 12};
  rows[1] = {"x.java", 10, 2.0, 1.0, 1.5, Label::buggy, 4};
  std::ostringstream out;
  write_score_csv(out, rows);
  EXPECT_EQ(out.str(),
            "file,line,h_global,h_local,h_total,label,chars\n"
            "\"dir/a,b.java\",3,0.333333,,0.333333,clean,12\n"
            "x.java,10,2.000000,1.000000,1.500000,buggy,4\n");
  std::istringstream in(out.str());
  const auto back = read_score_csv(in);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].file, "dir/a,b.java");
  EXPECT_FALSE(back[0].h_local.has_value());
  EXPECT_EQ(back[0].h_global, 0.333333);
  EXPECT_EQ(back[1], rows[1]);

  std::istringstream bad("file,line\n");
  EXPECT_THROW(read_score_csv(bad), FormatError);
}

TEST(LogBase, AucUnchangedUnderBaseChange) {
  const auto vocab = Vocabulary::from_text("ab\n");
  Rng rng(21);
  std::string text;
  for (int k = 0; k < 300; ++k) text.push_back("ab\n"[rng.below(3)]);
  const auto stream = encode(vocab, text);
  const BigramTableModel model;
  ScoringConfig bits, nats;
  nats.log_base = std::exp(1.0);
  const auto s2 = score_file(model, stream, bits);
  const auto se = score_file(model, stream, nats);
  std::vector<ScoredLabel> a, b;
  for (std::size_t k = 0; k < s2.size(); ++k) {
    const bool buggy = rng.chance(0.5);
    a.push_back({s2[k], buggy});
    b.push_back({se[k], buggy});
  }
  EXPECT_NEAR(auc(a), auc(b), 1e-12);
}

}  // namespace
}  // namespace codelm
