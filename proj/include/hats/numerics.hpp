#pragma once

#include <cstdint>

namespace hats::numerics {

/// A value in [0,1]. Construction from an out-of-range value throws InputError.
class Probability {
 public:
  constexpr Probability() = default;
  explicit Probability(double value);

  constexpr double value() const noexcept { return value_; }
  constexpr operator double() const noexcept { return value_; }  // NOLINT(google-explicit-constructor)

 private:
  double value_ = 0.0;
};

/// Standard normal CDF. Saturates to exactly 0/1 beyond |z| > 38.
Probability norm_cdf(double z);

/// Upper tail 1 - Phi(z), computed without cancellation for large z.
Probability norm_sf(double z);

/// Closed-form chi-square CDF with four degrees of freedom: 1 - e^{-x/2}(1 + x/2).
double chi2_4_cdf(double x);

/// Survival function e^{-x/2}(1 + x/2).
double chi2_4_sf(double x);

/// Inverse of chi2_4_cdf on (0,1), |F(x) - q| <= 1e-12.
double chi2_4_quantile(double q);

/// Binomial(n, p) probability mass at k.
double binom_pmf(std::uint64_t k, std::uint64_t n, double p);

/// P(X >= k) for X ~ Binomial(n, p).
Probability binom_sf(std::uint64_t k, std::uint64_t n, double p);

}  // namespace hats::numerics
