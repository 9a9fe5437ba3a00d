#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hats/params.hpp"
#include "hats/types.hpp"

namespace hats {

enum class Decision : std::uint8_t { kClean = 0, kWatermarked = 1 };

std::string_view to_string(Decision decision) noexcept;

/// Per-position membership of x_i in G(c_i) and R(c_i). Never both set.
struct HitSeries {
  std::vector<std::uint8_t> green;
  std::vector<std::uint8_t> red;

  std::size_t size() const noexcept { return green.size(); }
  std::uint64_t green_hits() const noexcept;
  std::uint64_t red_hits() const noexcept;
};

struct ZScores {
  double z_g = 0.0;
  /// Absent when gamma_r = 0 (no Red list, so the statistic is undefined).
  std::optional<double> z_r;
};

struct FisherOutcome {
  double p_g = 1.0;
  double p_r = 1.0;
  double fisher_score = 0.0;
  double threshold = 0.0;
  Decision decision = Decision::kClean;
};

struct DetectionReport {
  std::uint64_t length = 0;
  std::uint64_t green_hits = 0;
  std::uint64_t red_hits = 0;
  double p_hat_g = 0.0;
  double p_hat_r = 0.0;
  double z_g = 0.0;
  std::optional<double> z_r;
  double p_g = 1.0;
  double p_r = 1.0;
  double fisher_score = 0.0;
  double threshold = 0.0;
  Decision decision = Decision::kClean;
  /// Set when L < kMinConfidentLength; the normal approximation is weak there.
  bool low_confidence = false;
  PartitionParams params;
};

inline constexpr std::uint64_t kMinConfidentLength = 25;
inline constexpr double kPValueFloor = 1e-300;

/// Replays each position's partition from its own left window
/// (x_max(1,i-h) .. x_i-1; empty at i = 1) and records the hits.
HitSeries replay_indicators(std::span<const TokenId> text, const PartitionParams& params);

/// Per-position labels as seen by the detector (same replay as above).
std::vector<Label> replay_labels(std::span<const TokenId> text, const PartitionParams& params);

/// One-sided Green-enrichment and Red-depletion statistics over L = series.size().
ZScores z_statistics(const HitSeries& series, const PartitionParams& params);

/// Weighted Fisher score -2(lambda ln p_g + (1 - lambda) ln p_r).
double fisher_score(double p_g, double p_r, double lambda_f);

/// p-values from the upper normal tail (floored at 1e-300), combined score,
/// and the chi^2_4(1 - alpha) decision.
FisherOutcome fisher_decide(double z_g, std::optional<double> z_r, const PartitionParams& params);

DetectionReport detect(std::span<const TokenId> text, const PartitionParams& params);

}  // namespace hats
