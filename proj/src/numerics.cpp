#include "hats/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hats/types.hpp"

namespace hats::numerics {

Probability::Probability(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0))
    throw InputError("probability", "value " + std::to_string(value) + " outside [0,1]");
}

namespace {

constexpr double kSaturation = 38.0;

void require_finite(double z) {
  if (!std::isfinite(z)) throw InputError("z", "must be finite");
}

}  // namespace

Probability norm_cdf(double z) {
  require_finite(z);
  if (z > kSaturation) return Probability(1.0);
  if (z < -kSaturation) return Probability(0.0);
  return Probability(0.5 * std::erfc(-z / std::numbers::sqrt2));
}

Probability norm_sf(double z) {
  require_finite(z);
  if (z > kSaturation) return Probability(0.0);
  if (z < -kSaturation) return Probability(1.0);
  return Probability(0.5 * std::erfc(z / std::numbers::sqrt2));
}

double chi2_4_sf(double x) {
  if (x <= 0.0) return 1.0;
  const double y = 0.5 * x;
  return std::exp(-y) * (1.0 + y);
}

double chi2_4_cdf(double x) {
  if (x <= 0.0) return 0.0;
  const double y = 0.5 * x;
  if (y < 0.5) {
    // 1 - e^{-y}(1+y) = sum_{n>=2} (-1)^n (n-1) y^n / n!; avoids cancellation near 0.
    double term = y;  // y^n / n! for n = 1
    double sum = 0.0;
    for (int n = 2; n < 40; ++n) {
      term *= y / n;
      const double add = (n % 2 == 0 ? 1.0 : -1.0) * (n - 1) * term;
      sum += add;
      if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return -std::expm1(-y) - y * std::exp(-y);
}

double chi2_4_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) throw InputError("q", "must lie in (0,1)");
  const double tail = 1.0 - q;

  // Residual in whichever tail is smaller so precision follows the target.
  auto residual = [&](double x) {
    return q <= 0.5 ? chi2_4_cdf(x) - q : tail - chi2_4_sf(x);
  };
  auto density = [](double x) { return 0.25 * x * std::exp(-0.5 * x); };

  double lo = 0.0;
  double hi = 1.0;
  while (residual(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
  }

  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double r = residual(x);
    if (std::abs(r) <= 1e-14 * std::min(q, tail)) break;
    if (r < 0.0) lo = x; else hi = x;
    const double d = density(x);
    double next = d > 0.0 ? x - r / d : lo;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x) break;
    x = next;
  }
  return x;
}

namespace {

constexpr double kLn2Pi = 1.837877066409345483560659472811;

// log(n!) - log(sqrt(2 pi n) (n/e)^n).
double stirlerr(double n) {
  if (n <= 15.0) {
    return std::lgamma(n + 1.0) - (n + 0.5) * std::log(n) + n - 0.5 * kLn2Pi;
  }
  constexpr double s0 = 1.0 / 12.0;
  constexpr double s1 = 1.0 / 360.0;
  constexpr double s2 = 1.0 / 1260.0;
  constexpr double s3 = 1.0 / 1680.0;
  constexpr double s4 = 1.0 / 1188.0;
  const double nn = n * n;
  if (n > 500) return (s0 - s1 / nn) / n;
  if (n > 80) return (s0 - (s1 - s2 / nn) / nn) / n;
  if (n > 35) return (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / n;
  return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n;
}

// Deviance term x log(x/np) + np - x, evaluated by series when x ~ np.
double bd0(double x, double np) {
  if (std::abs(x - np) < 0.1 * (x + np)) {
    double v = (x - np) / (x + np);
    double s = (x - np) * v;
    double ej = 2.0 * x * v;
    v *= v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v;
      const double s1 = s + ej / (2 * j + 1);
      if (s1 == s) return s1;
      s = s1;
    }
    return s;
  }
  return x * std::log(x / np) + np - x;
}

// Loader's saddle-point evaluation of the binomial pmf.
double pmf_raw(double x, double n, double p, double q) {
  if (x == 0.0) {
    if (n == 0.0) return 1.0;
    return std::exp(p < 0.1 ? -bd0(n, n * q) - n * p : n * std::log(q));
  }
  if (x == n) return std::exp(q < 0.1 ? -bd0(n, n * p) - n * q : n * std::log(p));
  const double lc = stirlerr(n) - stirlerr(x) - stirlerr(n - x) - bd0(x, n * p) - bd0(n - x, n * q);
  const double lf = kLn2Pi + std::log(x) + std::log1p(-x / n);
  return std::exp(lc - 0.5 * lf);
}

void check_binom(std::uint64_t k, std::uint64_t n, double p) {
  if (n == 0) throw InputError("n", "must be positive");
  if (k > n) throw InputError("k", "must not exceed n");
  if (!(p > 0.0 && p < 1.0)) throw InputError("p", "must lie in (0,1)");
}

}  // namespace

double binom_pmf(std::uint64_t k, std::uint64_t n, double p) {
  check_binom(k, n, p);
  return pmf_raw(static_cast<double>(k), static_cast<double>(n), p, 1.0 - p);
}

Probability binom_sf(std::uint64_t k, std::uint64_t n, double p) {
  check_binom(k, n, p);
  if (k == 0) return Probability(1.0);
  const double nd = static_cast<double>(n);
  const double q = 1.0 - p;

  // Sum whichever side of the mode is the tail, smallest terms first.
  if (static_cast<double>(k) > nd * p) {
    double sum = 0.0;
    for (std::uint64_t j = n + 1; j-- > k;) sum += pmf_raw(static_cast<double>(j), nd, p, q);
    return Probability(std::clamp(sum, 0.0, 1.0));
  }
  double lower = 0.0;
  for (std::uint64_t j = 0; j < k; ++j) lower += pmf_raw(static_cast<double>(j), nd, p, q);
  return Probability(std::clamp(1.0 - lower, 0.0, 1.0));
}

}  // namespace hats::numerics
