#include "hats/prf_partition.hpp"

#include <algorithm>
#include <string>

namespace hats {

ContextSeed seed_from_context(std::span<const TokenId> context, std::uint64_t key,
                              std::uint32_t vocab_size) {
  for (TokenId t : context) {
    if (t >= vocab_size)
      throw InputError("context", "token id " + std::to_string(t) + " outside vocabulary of size " +
                                      std::to_string(vocab_size));
  }
  return seed_from_context_unchecked(context, key);
}

double uniform_stream(ContextSeed seed, int stream_tag, std::uint64_t k) {
  if (stream_tag != 1 && stream_tag != 2)
    throw InputError("stream_tag", "must be 1 (G) or 2 (YR), got " + std::to_string(stream_tag));
  return uniform_stream(seed, static_cast<StreamTag>(stream_tag), k);
}

Label label_of(ContextSeed seed, const PartitionParams& params, TokenId k) noexcept {
  if (uniform_stream(seed, StreamTag::kGreen, k) < params.gamma_g) return Label::kGreen;
  if (uniform_stream(seed, StreamTag::kYellowRed, k) < params.red_threshold()) return Label::kRed;
  return Label::kYellow;
}

std::size_t TriPartition::count(Label label) const noexcept {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

TriPartition tri_partition(ContextSeed seed, const PartitionParams& params) {
  params.validate();
  const std::uint64_t g_base = stream_base(seed, StreamTag::kGreen);
  const std::uint64_t yr_base = stream_base(seed, StreamTag::kYellowRed);
  const double red_cut = params.red_threshold();

  std::vector<Label> labels(params.vocab_size);
  for (std::uint32_t k = 0; k < params.vocab_size; ++k) {
    if (to_unit(hash64(g_base + k)) < params.gamma_g) {
      labels[k] = Label::kGreen;
    } else if (to_unit(hash64(yr_base + k)) < red_cut) {
      labels[k] = Label::kRed;
    } else {
      labels[k] = Label::kYellow;
    }
  }
  return TriPartition(std::move(labels));
}

}  // namespace hats
