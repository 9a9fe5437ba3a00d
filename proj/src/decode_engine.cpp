#include "hats/decode_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace hats {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_tokens(std::span<const TokenId> tokens, std::uint32_t vocab_size, const char* field) {
  for (TokenId t : tokens) {
    if (t >= vocab_size)
      throw InputError(field, "token id " + std::to_string(t) + " outside vocabulary of size " +
                                  std::to_string(vocab_size));
  }
}

std::vector<double> checked_logits(const LogitsSource& source, std::span<const TokenId> context) {
  auto logits = source.next_logits(context);
  if (logits.size() != source.vocab_size())
    throw std::runtime_error("logits source returned " + std::to_string(logits.size()) +
                             " scores for a vocabulary of " + std::to_string(source.vocab_size()));
  for (double v : logits) {
    if (!std::isfinite(v)) throw std::runtime_error("logits source returned a non-finite score");
  }
  return logits;
}

std::size_t select(const BiasedLogits& biased, const DecodeMode& mode, std::mt19937_64& rng) {
  if (mode.kind == DecodeMode::Kind::kGreedy) return masked_argmax(biased);
  const auto probs = masked_softmax(biased, mode.temperature);
  // Portable draw: top 53 bits of the engine output.
  const double u = to_unit(rng());
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (biased.masked[k]) continue;
    acc += probs[k];
    last = k;
    if (u < acc) return k;
  }
  return last;
}

void check_mode(const DecodeMode& mode) {
  if (mode.kind == DecodeMode::Kind::kSample && !(mode.temperature > 0.0 && std::isfinite(mode.temperature)))
    throw InputError("temperature", "must be positive");
}

}  // namespace

void bias_logits_inplace(std::span<double> logits, std::span<std::uint8_t> mask,
                         const TriPartition& partition, double delta) {
  if (logits.size() != partition.size())
    throw InputError("logits", "length " + std::to_string(logits.size()) + " does not match vocabulary size " +
                                   std::to_string(partition.size()));
  if (mask.size() != logits.size()) throw InputError("mask", "length does not match logits");
  for (std::size_t k = 0; k < logits.size(); ++k) {
    switch (partition[k]) {
      case Label::kGreen:
        logits[k] += delta;
        mask[k] = 0;
        break;
      case Label::kYellow:
        logits[k] -= delta;
        mask[k] = 0;
        break;
      case Label::kRed:
        logits[k] = kNegInf;
        mask[k] = 1;
        break;
    }
  }
}

BiasedLogits bias_logits(std::span<const double> logits, const TriPartition& partition, double delta) {
  BiasedLogits out{std::vector<double>(logits.begin(), logits.end()),
                   std::vector<std::uint8_t>(logits.size(), 0)};
  bias_logits_inplace(out.values, out.masked, partition, delta);
  return out;
}

std::size_t masked_argmax(const BiasedLogits& logits) {
  std::size_t best = logits.size();
  for (std::size_t k = 0; k < logits.size(); ++k) {
    if (logits.masked[k]) continue;
    if (best == logits.size() || logits.values[k] > logits.values[best]) best = k;
  }
  if (best == logits.size()) throw std::runtime_error("every vocabulary entry is masked");
  return best;
}

std::vector<double> masked_softmax(const BiasedLogits& logits, double temperature) {
  const std::size_t top = masked_argmax(logits);
  const double peak = logits.values[top];
  std::vector<double> probs(logits.size(), 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    if (logits.masked[k]) continue;
    probs[k] = std::exp((logits.values[k] - peak) / temperature);
    total += probs[k];
  }
  for (double& p : probs) p /= total;
  return probs;
}

std::vector<TokenId> GenerationRecord::full_stream() const {
  std::vector<TokenId> out(prompt.tokens);
  out.insert(out.end(), completion.tokens.begin(), completion.tokens.end());
  return out;
}

GenerationRecord generate(const TokenStream& prompt, std::size_t n_tokens, const LogitsSource& source,
                          const PartitionParams& params, DecodeMode mode) {
  params.validate();
  check_mode(mode);
  if (prompt.empty()) throw InputError("prompt", "must not be empty");
  if (source.vocab_size() != params.vocab_size)
    throw InputError("vocab_size", "source vocabulary " + std::to_string(source.vocab_size()) +
                                       " differs from params " + std::to_string(params.vocab_size));
  check_tokens(prompt.tokens, params.vocab_size, "prompt");

  GenerationRecord record{prompt, TokenStream{{}, params.vocab_size}, params, {}};
  record.prompt.vocab_size = params.vocab_size;
  record.completion.tokens.reserve(n_tokens);
  record.labels.reserve(n_tokens);

  std::vector<TokenId> stream(prompt.tokens);
  stream.reserve(prompt.size() + n_tokens);
  std::mt19937_64 rng(mode.rng_seed);

  for (std::size_t step = 0; step < n_tokens; ++step) {
    const auto window = context_window(stream, stream.size(), params.window_h);
    const TriPartition partition = tri_partition(seed_from_context_unchecked(window, params.key), params);
    const auto biased = bias_logits(checked_logits(source, stream), partition, params.delta);
    const auto chosen = static_cast<TokenId>(select(biased, mode, rng));

    stream.push_back(chosen);
    record.completion.tokens.push_back(chosen);
    record.labels.push_back(partition[chosen]);
  }
  return record;
}

std::vector<TokenId> generate_unwatermarked(const TokenStream& prompt, std::size_t n_tokens,
                                            const LogitsSource& source, DecodeMode mode) {
  check_mode(mode);
  if (prompt.empty()) throw InputError("prompt", "must not be empty");
  check_tokens(prompt.tokens, source.vocab_size(), "prompt");

  std::vector<TokenId> stream(prompt.tokens);
  std::mt19937_64 rng(mode.rng_seed);
  std::vector<TokenId> completion;
  completion.reserve(n_tokens);
  for (std::size_t step = 0; step < n_tokens; ++step) {
    auto logits = checked_logits(source, stream);
    BiasedLogits plain{std::move(logits), std::vector<std::uint8_t>(source.vocab_size(), 0)};
    const auto chosen = static_cast<TokenId>(select(plain, mode, rng));
    stream.push_back(chosen);
    completion.push_back(chosen);
  }
  return completion;
}

PerplexityResult perplexity(std::span<const TokenId> text, const LogitsSource& source, std::size_t scored_from) {
  if (text.empty()) throw InputError("text", "must contain at least one token");
  if (scored_from >= text.size()) throw InputError("scored_from", "leaves no token to score");
  check_tokens(text, source.vocab_size(), "text");

  PerplexityResult result;
  double nll = 0.0;
  for (std::size_t i = scored_from; i < text.size(); ++i) {
    const auto logits = checked_logits(source, text.first(i));
    const double peak = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - peak);
    double log_p = logits[text[i]] - peak - std::log(sum);
    if (log_p < std::log(1e-300)) {
      log_p = std::log(1e-300);
      result.clamped = true;
    }
    nll -= log_p;
    ++result.scored_tokens;
  }
  result.value = std::exp(nll / static_cast<double>(result.scored_tokens));
  return result;
}

}  // namespace hats
