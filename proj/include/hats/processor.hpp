#pragma once

#include <span>

#include "hats/decode_engine.hpp"
#include "hats/detector.hpp"
#include "hats/params.hpp"

namespace hats {

/// A configured engine for external decoding loops: partition + bias for one
/// step, and whole-stream detection. Immutable after construction, so one
/// instance may be shared across threads.
class WatermarkProcessor {
 public:
  explicit WatermarkProcessor(const PartitionParams& params);

  const PartitionParams& params() const noexcept { return params_; }

  /// Partition for the step whose left context ends with `context`; only the
  /// last window_h ids are used.
  TriPartition partition_for(std::span<const TokenId> context) const;

  BiasedLogits bias(std::span<const TokenId> context, std::span<const double> logits) const;

  DetectionReport detect(std::span<const TokenId> tokens) const;

 private:
  PartitionParams params_;
};

}  // namespace hats
