#include "hats/decode_engine.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "hats/json_io.hpp"
#include "hats/logits_source.hpp"

namespace hats {
namespace {

const ToyMarkovModel& corpus_model() {
  static const ToyMarkovModel model = [] {
    ToyMarkovModel m(2, 256);
    m.train(bytes_to_tokens(read_file(HATS_CORPUS)));
    return m;
  }();
  return model;
}

PartitionParams watermark_params(double delta) {
  PartitionParams p;
  p.delta = delta;
  return p;
}

TokenStream prompt_of(std::string_view text) { return TokenStream{bytes_to_tokens(text), 256}; }

// Fixed logits, independent of context.
class FixedSource final : public LogitsSource {
 public:
  explicit FixedSource(std::vector<double> logits) : logits_(std::move(logits)) {}
  std::uint32_t vocab_size() const override { return static_cast<std::uint32_t>(logits_.size()); }
  std::vector<double> next_logits(std::span<const TokenId>) const override { return logits_; }

 private:
  std::vector<double> logits_;
};

TEST(BiasLogits, AppliesPlusMinusDeltaAndMasksRed) {
  const std::vector<double> logits{1.0, 2.0, 3.0};
  const TriPartition part({Label::kGreen, Label::kYellow, Label::kRed});
  const auto out = bias_logits(logits, part, 4.0);
  EXPECT_EQ(out.values[0], 5.0);
  EXPECT_EQ(out.values[1], -2.0);
  EXPECT_EQ(out.values[2], -std::numeric_limits<double>::infinity());
  EXPECT_EQ(out.masked, (std::vector<std::uint8_t>{0, 0, 1}));
  EXPECT_EQ(logits, (std::vector<double>{1.0, 2.0, 3.0}));
}

TEST(BiasLogits, AllYellowIsUniformShift) {
  const std::vector<double> logits{0.5, -1.0, 7.25, 3.0};
  const TriPartition part(std::vector<Label>(4, Label::kYellow));
  const auto out = bias_logits(logits, part, 1.5);
  for (std::size_t k = 0; k < logits.size(); ++k) EXPECT_EQ(out.values[k], logits[k] - 1.5);
}

TEST(BiasLogits, InPlaceAndLengthMismatch) {
  std::vector<double> logits{1.0, 1.0};
  std::vector<std::uint8_t> mask(2);
  bias_logits_inplace(logits, mask, TriPartition({Label::kRed, Label::kGreen}), 2.0);
  EXPECT_EQ(mask, (std::vector<std::uint8_t>{1, 0}));
  EXPECT_EQ(logits[1], 3.0);
  const std::vector<double> wrong{1.0, 2.0, 3.0};
  EXPECT_THROW(bias_logits(wrong, TriPartition({Label::kGreen, Label::kGreen}), 1.0), InputError);
}

TEST(MaskedArgmax, LowestIndexWinsTiesAndRedNeverWins) {
  BiasedLogits b{{2.0, 5.0, 5.0, 9.0}, {0, 0, 0, 1}};
  EXPECT_EQ(masked_argmax(b), 1u);
  BiasedLogits all_masked{{1.0, 2.0}, {1, 1}};
  EXPECT_THROW(masked_argmax(all_masked), std::runtime_error);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> noise(0.0, 3.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> logits(64);
    for (auto& v : logits) v = noise(rng);
    const auto part = tri_partition(ContextSeed{rng()}, [] {
      PartitionParams p;
      p.vocab_size = 64;
      return p;
    }());
    const auto biased = bias_logits(logits, part, 0.5);
    ASSERT_NE(part[masked_argmax(biased)], Label::kRed);
  }
}

TEST(MaskedSoftmax, NormalizedWithZeroRedMass) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> noise(0.0, 2.0);
  PartitionParams p;
  for (double temperature : {0.3, 1.0, 2.5}) {
    for (int trial = 0; trial < 100; ++trial) {
      auto logits = corpus_model().next_logits(std::vector<TokenId>{static_cast<TokenId>(rng() % 256), 'e'});
      for (auto& v : logits) v += noise(rng);
      const auto part = tri_partition(ContextSeed{rng()}, p);
      const auto biased = bias_logits(logits, part, p.delta);
      const auto probs = masked_softmax(biased, temperature);
      ASSERT_NEAR(std::accumulate(probs.begin(), probs.end(), 0.0), 1.0, 1e-9);
      for (std::size_t k = 0; k < probs.size(); ++k) {
        if (part[k] == Label::kRed) ASSERT_EQ(probs[k], 0.0);
      }
    }
  }
}

TEST(ToyMarkovModel, LogitsAreLogProbabilities) {
  const auto& model = corpus_model();
  EXPECT_GT(model.context_count(), 100u);
  for (std::string_view ctx : {"th", "e ", "zq", "", "x"}) {
    const auto logits = model.next_logits(bytes_to_tokens(ctx));
    ASSERT_EQ(logits.size(), 256u);
    double total = 0.0;
    for (double v : logits) total += std::exp(v);
    EXPECT_NEAR(total, 1.0, 1e-9) << ctx;
  }
  const auto uniform = model.next_logits(bytes_to_tokens("x"));
  EXPECT_NEAR(uniform[0], -std::log(256.0), 1e-15);
}

TEST(ToyMarkovModel, AddOneSmoothingCounts) {
  ToyMarkovModel m(1, 4);
  m.train(std::vector<TokenId>{0, 1, 0, 1, 0, 2});
  const auto logits = m.next_logits(std::vector<TokenId>{0});
  // After token 0: counts {1: 2, 2: 1}, total 3, so (c + 1) / (3 + 4).
  EXPECT_NEAR(logits[0], std::log(1.0 / 7.0), 1e-15);
  EXPECT_NEAR(logits[1], std::log(3.0 / 7.0), 1e-15);
  EXPECT_NEAR(logits[2], std::log(2.0 / 7.0), 1e-15);
}

TEST(ToyMarkovModel, JsonRoundTripPreservesLogits) {
  const auto& model = corpus_model();
  const auto copy = ToyMarkovModel::from_json(model.to_json());
  EXPECT_EQ(copy.context_count(), model.context_count());
  for (std::string_view ctx : {"th", "e ", "ng"}) {
    EXPECT_EQ(copy.next_logits(bytes_to_tokens(ctx)), model.next_logits(bytes_to_tokens(ctx)));
  }
  EXPECT_THROW(ToyMarkovModel::from_json("{not json"), IoError);
}

TEST(Generate, StrongBiasSelectsGreen) {
  const auto rec = generate(prompt_of("The river town "), 200, corpus_model(), watermark_params(10.0));
  ASSERT_EQ(rec.completion.size(), 200u);
  const auto green = std::count(rec.labels.begin(), rec.labels.end(), Label::kGreen);
  EXPECT_GE(static_cast<double>(green) / 200.0, 0.9);
  EXPECT_EQ(std::count(rec.labels.begin(), rec.labels.end(), Label::kRed), 0);
}

TEST(Generate, NeverSelectsRedAndIsDeterministic) {
  for (double delta : {0.01, 1.0, 4.0}) {
    const auto a = generate(prompt_of("In the library"), 150, corpus_model(), watermark_params(delta));
    const auto b = generate(prompt_of("In the library"), 150, corpus_model(), watermark_params(delta));
    EXPECT_EQ(a.completion.tokens, b.completion.tokens);
    EXPECT_EQ(std::count(a.labels.begin(), a.labels.end(), Label::kRed), 0);
    for (TokenId t : a.completion.tokens) EXPECT_LT(t, 256u);
  }
}

TEST(Generate, WindowCrossesPromptBoundary) {
  const auto params = watermark_params(2.0);
  for (std::string_view prompt : {"a", "ab", "abc", "The bees"}) {
    const auto rec = generate(prompt_of(prompt), 12, corpus_model(), params);
    const auto stream = rec.full_stream();
    for (std::size_t j = 0; j < rec.completion.size(); ++j) {
      const std::size_t pos = rec.prompt.size() + j;
      const std::size_t first = pos >= params.window_h ? pos - params.window_h : 0;
      const std::vector<TokenId> window(stream.begin() + static_cast<std::ptrdiff_t>(first),
                                        stream.begin() + static_cast<std::ptrdiff_t>(pos));
      const auto part = tri_partition(seed_from_context(window, params.key, 256), params);
      ASSERT_EQ(part[stream[pos]], rec.labels[j]) << prompt << " step " << j;
    }
  }
}

TEST(Generate, EdgeCases) {
  const auto params = watermark_params(4.0);
  EXPECT_TRUE(generate(prompt_of("x"), 0, corpus_model(), params).completion.empty());
  EXPECT_THROW(generate(TokenStream{{}, 256}, 5, corpus_model(), params), InputError);
  PartitionParams small = params;
  small.vocab_size = 128;
  EXPECT_THROW(generate(prompt_of("x"), 5, corpus_model(), small), InputError);
  EXPECT_THROW(generate(TokenStream{{300}, 256}, 5, corpus_model(), params), InputError);
  EXPECT_THROW(generate(prompt_of("x"), 5, corpus_model(), params, DecodeMode::sample(0.0, 1)), InputError);
}

TEST(Generate, GreenCountGrowsWithDelta) {
  const char* prompts[] = {"The ", "A good ", "Water ", "In the ", "Every ", "Bees ", "The old ",
                           "Cities ", "Bread ", "At the ", "Science ", "Mountains ", "Writing ",
                           "The storm ", "The train ", "Learning ", "The museum ", "The small ",
                           "A baker ", "The lighthouse "};
  std::vector<long> totals;
  for (double delta : {1.0, 2.0, 4.0, 8.0}) {
    long green = 0;
    for (const char* p : prompts) {
      const auto rec = generate(prompt_of(p), 100, corpus_model(), watermark_params(delta));
      green += std::count(rec.labels.begin(), rec.labels.end(), Label::kGreen);
    }
    totals.push_back(green);
  }
  for (std::size_t i = 1; i < totals.size(); ++i) EXPECT_GE(totals[i], totals[i - 1]) << "delta index " << i;
}

TEST(Generate, SampleModeReproducibleBySeed) {
  const auto params = watermark_params(2.0);
  const auto a = generate(prompt_of("The fox "), 100, corpus_model(), params, DecodeMode::sample(1.0, 42));
  const auto b = generate(prompt_of("The fox "), 100, corpus_model(), params, DecodeMode::sample(1.0, 42));
  const auto c = generate(prompt_of("The fox "), 100, corpus_model(), params, DecodeMode::sample(1.0, 43));
  EXPECT_EQ(a.completion.tokens, b.completion.tokens);
  EXPECT_NE(a.completion.tokens, c.completion.tokens);
  EXPECT_EQ(std::count(a.labels.begin(), a.labels.end(), Label::kRed), 0);
}

TEST(Perplexity, UniformSourceGivesVocabularySize) {
  const UniformSource uniform(256);
  const auto text = bytes_to_tokens("any text at all");
  EXPECT_NEAR(perplexity(text, uniform).value, 256.0, 1e-9);
}

TEST(Perplexity, SingleTokenAtHalfProbability) {
  const FixedSource coin({std::log(0.5), std::log(0.5)});
  const auto r = perplexity(std::vector<TokenId>{1}, coin);
  EXPECT_NEAR(r.value, 2.0, 1e-12);
  EXPECT_FALSE(r.clamped);
}

TEST(Perplexity, LowerOnTrainingTextThanShuffled) {
  auto text = bytes_to_tokens(read_file(HATS_CORPUS));
  text.resize(std::min<std::size_t>(text.size(), 2000));
  auto shuffled = text;
  std::mt19937_64 rng(9);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  EXPECT_LT(perplexity(text, corpus_model()).value, perplexity(shuffled, corpus_model()).value);
}

TEST(Perplexity, ClampsZeroProbabilityAndFlags) {
  const FixedSource peaked({0.0, -1000.0});
  const auto r = perplexity(std::vector<TokenId>{1}, peaked);
  EXPECT_TRUE(r.clamped);
  EXPECT_NEAR(std::log(r.value), -std::log(1e-300), 1e-9);
  EXPECT_THROW(perplexity(std::vector<TokenId>{}, peaked), InputError);
}

TEST(GenerationRecord, JsonCarriesAllFields) {
  const auto rec = generate(prompt_of("Bread "), 20, corpus_model(), watermark_params(4.0));
  const auto doc = to_json(rec);
  for (const char* field : {"prompt_tokens", "completion_tokens", "params", "per_step_labels"})
    EXPECT_TRUE(doc.contains(field)) << field;
  const auto back = generation_from_json(doc);
  EXPECT_EQ(back.completion.tokens, rec.completion.tokens);
  EXPECT_EQ(back.labels, rec.labels);
  EXPECT_EQ(back.params, rec.params);
}

}  // namespace
}  // namespace hats
