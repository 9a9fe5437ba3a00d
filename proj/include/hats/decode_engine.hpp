#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hats/logits_source.hpp"
#include "hats/params.hpp"
#include "hats/prf_partition.hpp"
#include "hats/types.hpp"

namespace hats {

/// Biased scores plus an explicit mask. Masked (Red) entries hold -inf in
/// `values`, but consumers must go by `masked`: argmax and softmax skip them.
struct BiasedLogits {
  std::vector<double> values;
  std::vector<std::uint8_t> masked;

  std::size_t size() const noexcept { return values.size(); }
};

/// Green += delta, Yellow -= delta, Red masked. Throws InputError on length mismatch.
BiasedLogits bias_logits(std::span<const double> logits, const TriPartition& partition, double delta);

/// In-place form; `mask` must have the same length as `logits`.
void bias_logits_inplace(std::span<double> logits, std::span<std::uint8_t> mask,
                         const TriPartition& partition, double delta);

/// Highest unmasked entry, lowest index on ties. Throws if everything is masked.
std::size_t masked_argmax(const BiasedLogits& logits);

/// Softmax over unmasked entries at `temperature`; masked entries get exactly 0.
std::vector<double> masked_softmax(const BiasedLogits& logits, double temperature = 1.0);

struct DecodeMode {
  enum class Kind { kGreedy, kSample };

  Kind kind = Kind::kGreedy;
  double temperature = 1.0;
  std::uint64_t rng_seed = 0;

  static DecodeMode greedy() { return {}; }
  static DecodeMode sample(double temperature, std::uint64_t rng_seed) {
    return {Kind::kSample, temperature, rng_seed};
  }
};

struct GenerationRecord {
  TokenStream prompt;
  TokenStream completion;
  PartitionParams params;
  /// Partition label of each selected completion token.
  std::vector<Label> labels;

  /// prompt followed by completion.
  std::vector<TokenId> full_stream() const;
};

/// Watermarked decoding: each step seeds a partition from the last `window_h`
/// tokens of the growing prompt+completion stream, biases the source's logits,
/// and selects a non-Red token.
GenerationRecord generate(const TokenStream& prompt, std::size_t n_tokens, const LogitsSource& source,
                          const PartitionParams& params, DecodeMode mode = DecodeMode::greedy());

/// Plain decoding with the same selection rule and no watermark, used as the
/// quality baseline.
std::vector<TokenId> generate_unwatermarked(const TokenStream& prompt, std::size_t n_tokens,
                                            const LogitsSource& source,
                                            DecodeMode mode = DecodeMode::greedy());

struct PerplexityResult {
  double value = 0.0;
  std::size_t scored_tokens = 0;
  /// Set when some token probability underflowed to zero and was clamped to 1e-300.
  bool clamped = false;
};

/// exp(-mean log p(x_i | x_<i)) over positions [scored_from, N). Positions
/// before `scored_from` only serve as conditioning context.
PerplexityResult perplexity(std::span<const TokenId> text, const LogitsSource& source,
                            std::size_t scored_from = 0);

}  // namespace hats
