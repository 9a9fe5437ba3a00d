#pragma once

#include <cstdint>

#include "hats/types.hpp"

namespace hats {

/// Watermark configuration shared by the generator and the detector.
///
/// The ratios split every vocabulary into Green/Yellow/Red lists; `delta` is
/// the logit shift applied to Green (+) and Yellow (-) entries; `window_h`
/// tokens of left context seed each step's partition. `lambda_f` weights the
/// Green p-value in the combined score and `alpha` sets the detection level.
///
/// gamma_r = 0 is accepted: it describes the two-list baseline, which is only
/// detectable with lambda_f = 1.
struct PartitionParams {
  double gamma_g = 0.25;
  double gamma_y = 0.65;
  double gamma_r = 0.10;
  double delta = 4.0;
  std::uint32_t window_h = 4;
  std::uint64_t key = 0;
  double lambda_f = 0.5;
  double alpha = 0.01;
  std::uint32_t vocab_size = 256;

  /// Throws InputError naming the first violated field.
  void validate() const;

  /// Threshold on the YR stream selecting Red among non-Green indices.
  double red_threshold() const noexcept { return gamma_r / (1.0 - gamma_g); }

  bool operator==(const PartitionParams&) const = default;
};

}  // namespace hats
