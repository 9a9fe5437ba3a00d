#include "hats/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hats/numerics.hpp"
#include "hats/prf_partition.hpp"

namespace hats {

std::string_view to_string(Decision decision) noexcept {
  return decision == Decision::kWatermarked ? "WATERMARKED" : "CLEAN";
}

std::uint64_t HitSeries::green_hits() const noexcept {
  return std::accumulate(green.begin(), green.end(), std::uint64_t{0});
}

std::uint64_t HitSeries::red_hits() const noexcept {
  return std::accumulate(red.begin(), red.end(), std::uint64_t{0});
}

std::vector<Label> replay_labels(std::span<const TokenId> text, const PartitionParams& params) {
  params.validate();
  if (text.empty()) throw InputError("text", "must contain at least one token");
  for (TokenId t : text) {
    if (t >= params.vocab_size)
      throw InputError("text", "token id " + std::to_string(t) + " outside vocabulary of size " +
                                   std::to_string(params.vocab_size));
  }
  std::vector<Label> labels(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto seed = seed_from_context_unchecked(context_window(text, i, params.window_h), params.key);
    labels[i] = label_of(seed, params, text[i]);
  }
  return labels;
}

HitSeries replay_indicators(std::span<const TokenId> text, const PartitionParams& params) {
  const auto labels = replay_labels(text, params);
  HitSeries series;
  series.green.resize(labels.size());
  series.red.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    series.green[i] = labels[i] == Label::kGreen;
    series.red[i] = labels[i] == Label::kRed;
  }
  return series;
}

ZScores z_statistics(const HitSeries& series, const PartitionParams& params) {
  const auto length = series.size();
  if (length == 0) throw InputError("L", "window length must be positive");
  if (series.red.size() != length) throw InputError("series", "green and red series differ in length");
  const double L = static_cast<double>(length);
  const double gamma_g = params.gamma_g;
  const double gamma_r = params.gamma_r;
  if (!(gamma_g > 0.0 && gamma_g < 1.0)) throw InputError("gamma_g", "must lie in (0,1)");

  ZScores z;
  const double p_hat_g = static_cast<double>(series.green_hits()) / L;
  z.z_g = (p_hat_g - gamma_g) / std::sqrt(gamma_g * (1.0 - gamma_g) / L);
  if (gamma_r > 0.0) {
    if (!(gamma_r < 1.0)) throw InputError("gamma_r", "must lie in [0,1)");
    const double p_hat_r = static_cast<double>(series.red_hits()) / L;
    // Depletion: fewer Red hits than expected is the evidence, hence the sign.
    z.z_r = (gamma_r - p_hat_r) / std::sqrt(gamma_r * (1.0 - gamma_r) / L);
  }
  return z;
}

double fisher_score(double p_g, double p_r, double lambda_f) {
  // + 0.0 folds a -0.0 result (both p-values 1) into +0.0.
  return -2.0 * (lambda_f * std::log(p_g) + (1.0 - lambda_f) * std::log(p_r)) + 0.0;
}

FisherOutcome fisher_decide(double z_g, std::optional<double> z_r, const PartitionParams& params) {
  params.validate();
  if (!z_r && params.lambda_f != 1.0)
    throw InputError("lambda_f", "gamma_r = 0 leaves no Red statistic; only lambda_f = 1 is defined");

  FisherOutcome out;
  out.p_g = std::clamp(numerics::norm_sf(z_g).value(), kPValueFloor, 1.0);
  out.p_r = z_r ? std::clamp(numerics::norm_sf(*z_r).value(), kPValueFloor, 1.0) : 1.0;
  out.fisher_score = fisher_score(out.p_g, out.p_r, params.lambda_f);
  out.threshold = numerics::chi2_4_quantile(1.0 - params.alpha);
  out.decision = out.fisher_score >= out.threshold ? Decision::kWatermarked : Decision::kClean;
  return out;
}

DetectionReport detect(std::span<const TokenId> text, const PartitionParams& params) {
  const HitSeries series = replay_indicators(text, params);
  const ZScores z = z_statistics(series, params);
  const FisherOutcome fisher = fisher_decide(z.z_g, z.z_r, params);

  DetectionReport report;
  report.length = series.size();
  report.green_hits = series.green_hits();
  report.red_hits = series.red_hits();
  report.p_hat_g = static_cast<double>(report.green_hits) / static_cast<double>(report.length);
  report.p_hat_r = static_cast<double>(report.red_hits) / static_cast<double>(report.length);
  report.z_g = z.z_g;
  report.z_r = z.z_r;
  report.p_g = fisher.p_g;
  report.p_r = fisher.p_r;
  report.fisher_score = fisher.fisher_score;
  report.threshold = fisher.threshold;
  report.decision = fisher.decision;
  report.low_confidence = report.length < kMinConfidentLength;
  report.params = params;
  return report;
}

}  // namespace hats
