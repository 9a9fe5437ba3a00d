#pragma once

// Context-seeded pseudorandom tri-partition of the vocabulary.
//
// Every step's partition is a pure function of (left context window, key):
//   seed  = key + sum(hash64(token)) mod 2^64     (order-free aggregation)
//   base  = hash64(seed + tag * kGoldenGamma)     tag 1 = G stream, 2 = YR stream
//   u_k   = top53(hash64(base + k)) * 2^-53
// Index k is GREEN iff u^G_k < gamma_g, otherwise RED iff u^YR_k < gamma_r/(1-gamma_g),
// otherwise YELLOW. Integer paths are bit-exact; the unit conversion is exact.

#include <cstdint>
#include <span>
#include <vector>

#include "hats/params.hpp"
#include "hats/types.hpp"

namespace hats {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 finalizer.
constexpr std::uint64_t hash64(std::uint64_t x) noexcept {
  std::uint64_t z = x + kGoldenGamma;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct ContextSeed {
  std::uint64_t value = 0;
  bool operator==(const ContextSeed&) const = default;
};

enum class StreamTag : std::uint8_t { kGreen = 1, kYellowRed = 2 };

/// Throws InputError if any id is >= vocab_size. An empty window yields `key`.
ContextSeed seed_from_context(std::span<const TokenId> context, std::uint64_t key,
                              std::uint32_t vocab_size);

/// Unchecked variant for callers that already validated the ids.
constexpr ContextSeed seed_from_context_unchecked(std::span<const TokenId> context,
                                                  std::uint64_t key) noexcept {
  std::uint64_t acc = key;
  for (TokenId t : context) acc += hash64(t);
  return ContextSeed{acc};
}

/// Maps the top 53 bits of a 64-bit word onto [0,1) exactly.
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Per-seed, per-stream base word; hoisted so a full partition costs one hash per index.
constexpr std::uint64_t stream_base(ContextSeed seed, StreamTag tag) noexcept {
  return hash64(seed.value + static_cast<std::uint64_t>(tag) * kGoldenGamma);
}

constexpr double uniform_stream(ContextSeed seed, StreamTag tag, std::uint64_t k) noexcept {
  return to_unit(hash64(stream_base(seed, tag) + k));
}

/// Integer-tag entry point; throws InputError unless tag is 1 or 2.
double uniform_stream(ContextSeed seed, int stream_tag, std::uint64_t k);

/// Label of a single index. Detection only needs this, never the full array.
Label label_of(ContextSeed seed, const PartitionParams& params, TokenId k) noexcept;

class TriPartition {
 public:
  TriPartition() = default;
  explicit TriPartition(std::vector<Label> labels) : labels_(std::move(labels)) {}

  std::size_t size() const noexcept { return labels_.size(); }
  Label operator[](std::size_t k) const noexcept { return labels_[k]; }
  std::span<const Label> labels() const noexcept { return labels_; }
  std::size_t count(Label label) const noexcept;

  bool operator==(const TriPartition&) const = default;

 private:
  std::vector<Label> labels_;
};

/// Full partition of [0, params.vocab_size). Validates params.
TriPartition tri_partition(ContextSeed seed, const PartitionParams& params);

/// Left window for 0-based position `pos`: tokens [max(0, pos-h), pos).
inline std::span<const TokenId> context_window(std::span<const TokenId> stream, std::size_t pos,
                                               std::uint32_t window_h) noexcept {
  const std::size_t begin = pos > window_h ? pos - window_h : 0;
  return stream.subspan(begin, pos - begin);
}

}  // namespace hats
