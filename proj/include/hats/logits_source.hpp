#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hats/types.hpp"

namespace hats {

/// Anything that scores the next token. Implementations must be safe for
/// concurrent const use once constructed.
class LogitsSource {
 public:
  virtual ~LogitsSource() = default;
  virtual std::uint32_t vocab_size() const = 0;
  /// Natural-log-scale scores, one per vocabulary entry, all finite.
  virtual std::vector<double> next_logits(std::span<const TokenId> context) const = 0;
};

/// Equal scores for every token.
class UniformSource final : public LogitsSource {
 public:
  explicit UniformSource(std::uint32_t vocab_size);
  std::uint32_t vocab_size() const override { return vocab_size_; }
  std::vector<double> next_logits(std::span<const TokenId> context) const override;

 private:
  std::uint32_t vocab_size_;
};

/// Fixed-order Markov model with add-one smoothing. Logits are exact log
/// probabilities log((count + 1) / (total + V)); contexts shorter than the
/// order, or never seen in training, get the uniform distribution.
class ToyMarkovModel final : public LogitsSource {
 public:
  explicit ToyMarkovModel(std::uint32_t order = 2, std::uint32_t vocab_size = 256);

  void train(std::span<const TokenId> tokens);

  std::uint32_t order() const noexcept { return order_; }
  std::uint32_t vocab_size() const override { return vocab_size_; }
  std::size_t context_count() const noexcept { return rows_.size(); }
  std::vector<double> next_logits(std::span<const TokenId> context) const override;

  /// Sparse JSON form: {"order", "vocab_size", "rows": [{"context": [...], "counts": [[id, n], ...]}]}.
  std::string to_json() const;
  static ToyMarkovModel from_json(std::string_view text);

 private:
  struct Row {
    std::vector<std::uint32_t> counts;
    std::uint64_t total = 0;
  };

  std::uint64_t pack(std::span<const TokenId> gram) const;
  std::vector<TokenId> unpack(std::uint64_t key) const;
  Row& row_for(std::span<const TokenId> gram);

  std::uint32_t order_;
  std::uint32_t vocab_size_;
  std::unordered_map<std::uint64_t, Row> rows_;
};

/// One token per byte, ids 0..255.
std::vector<TokenId> bytes_to_tokens(std::string_view text);
std::string tokens_to_bytes(std::span<const TokenId> tokens);

}  // namespace hats
