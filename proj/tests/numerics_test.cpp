#include "hats/numerics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "hats/types.hpp"

namespace hats::numerics {
namespace {

// Reference values from tests/data/make_numeric_oracles.py (50-digit mpmath,
// exact rational binomial sums).

TEST(NormCdf, MatchesHighPrecisionValues) {
  struct Case {
    double z, phi;
  };
  const Case cases[] = {
      {0.0, 0.5},
      {1.959964, 0.9750000009035575957},
      {-1.959964, 0.024999999096442404302},
      {1.0, 0.84134474606854294859},
      {-3.0, 0.0013498980316300945267},
      {3.4641016151377544, 0.99973399724743037497},
      {5.0, 0.99999971334842812081},
      {-7.5, 3.1908916729108962278e-14},
      {8.0, 0.9999999999999993779},
      {-8.0, 6.2209605742717841235e-16},
  };
  for (const auto& c : cases) EXPECT_NEAR(norm_cdf(c.z), c.phi, 1e-12) << c.z;
  EXPECT_NEAR(norm_cdf(1.959964), 0.975, 1e-6);
  EXPECT_EQ(norm_cdf(0.0).value(), 0.5);
}

TEST(NormCdf, LowerTailRelativeAccuracy) {
  EXPECT_NEAR(norm_cdf(-7.5) / 3.1908916729108962278e-14, 1.0, 1e-12);
  EXPECT_NEAR(norm_sf(7.5) / 3.1908916729108962278e-14, 1.0, 1e-12);
}

TEST(NormCdf, SymmetryAndMonotone) {
  double prev = 0.0;
  for (double z = -10.0; z <= 10.0; z += 0.05) {
    EXPECT_NEAR(norm_cdf(z) + norm_cdf(-z), 1.0, 1e-12) << z;
    EXPECT_NEAR(norm_sf(z) + norm_sf(-z), 1.0, 1e-12) << z;
    EXPECT_GE(norm_cdf(z).value(), prev);
    prev = norm_cdf(z);
  }
}

TEST(NormCdf, SaturatesAndRejectsNonFinite) {
  EXPECT_EQ(norm_cdf(39.0).value(), 1.0);
  EXPECT_EQ(norm_cdf(-39.0).value(), 0.0);
  EXPECT_EQ(norm_sf(40.0).value(), 0.0);
  EXPECT_THROW(norm_cdf(std::nan("")), InputError);
  EXPECT_THROW(norm_cdf(INFINITY), InputError);
}

TEST(Chi2Quantile, MatchesRootOfClosedForm) {
  struct Case {
    double q, x;
  };
  const Case cases[] = {{0.5, 3.3566939800333213068},
                        {0.9, 7.7794403397348581158},
                        {0.95, 9.4877290367811567517},
                        {0.99, 13.276704135987624539},
                        {0.999, 18.466826952903171461}};
  for (const auto& c : cases) {
    const double x = chi2_4_quantile(c.q);
    EXPECT_NEAR(x, c.x, 1e-9) << c.q;
    EXPECT_NEAR(chi2_4_cdf(x), c.q, 1e-10) << c.q;
  }
  EXPECT_NEAR(chi2_4_quantile(0.99), 13.2767, 1e-4);
}

TEST(Chi2Quantile, StrictlyIncreasingAndTendsToZero) {
  double prev = 0.0;
  for (double q = 1e-6; q < 0.9999; q += 0.001) {
    const double x = chi2_4_quantile(q);
    EXPECT_GT(x, prev);
    EXPECT_NEAR(chi2_4_cdf(x), q, 1e-12);
    prev = x;
  }
  EXPECT_LT(chi2_4_quantile(1e-12), 1e-5);
}

TEST(Chi2Quantile, DomainErrors) {
  EXPECT_THROW(chi2_4_quantile(0.0), InputError);
  EXPECT_THROW(chi2_4_quantile(1.0), InputError);
  EXPECT_THROW(chi2_4_quantile(-0.1), InputError);
}

TEST(Chi2Cdf, SeriesBranchContinuous) {
  // The small-argument series and the direct form must agree at the switch point.
  const double x = 1.0;
  EXPECT_NEAR(chi2_4_cdf(x), 1.0 - std::exp(-0.5) * 1.5, 1e-15);
  EXPECT_NEAR(chi2_4_cdf(std::nextafter(x, 0.0)), chi2_4_cdf(x), 1e-15);
  EXPECT_NEAR(chi2_4_cdf(x) + chi2_4_sf(x), 1.0, 1e-15);
}

TEST(BinomSf, ExactValues) {
  EXPECT_EQ(binom_sf(0, 10, 0.3).value(), 1.0);
  EXPECT_NEAR(binom_sf(3, 4, 0.5), 5.0 / 16.0, 1e-15);

  struct Case {
    std::uint64_t k, n;
    double p, sf;
  };
  const Case cases[] = {
      {40, 100, 0.25, 0.00068659220796299107019},  {63, 250, 0.25, 0.49513258021506435367},
      {80, 250, 0.25, 0.0075800342429644423303},   {100, 250, 0.25, 1.3375727212940597625e-7},
      {1300, 5000, 0.25, 0.05343973010949206017},  {1, 10, 0.1, 0.6513215599},
      {900, 1000, 0.875, 0.0081515089702606543517},
  };
  for (const auto& c : cases) {
    EXPECT_NEAR(binom_sf(c.k, c.n, c.p) / c.sf, 1.0, 1e-12) << c.k << "/" << c.n;
  }
}

TEST(BinomSf, NonIncreasingInK) {
  double prev = 1.0;
  for (std::uint64_t k = 0; k <= 250; ++k) {
    const double v = binom_sf(k, 250, 0.25);
    EXPECT_LE(v, prev + 1e-15) << k;
    prev = v;
  }
  EXPECT_GT(prev, 0.0);
}

TEST(BinomSf, DomainErrors) {
  EXPECT_THROW(binom_sf(5, 4, 0.5), InputError);
  EXPECT_THROW(binom_sf(1, 0, 0.5), InputError);
  EXPECT_THROW(binom_sf(1, 4, 0.0), InputError);
  EXPECT_THROW(binom_sf(1, 4, 1.0), InputError);
}

// The detector's z-form carries no continuity correction, so near the mean
// 1 - Phi(z(k)) misses P(X >= k) by about half the central pmf. Exact-rational
// oracle (n = 250, p = 0.25, k in [42, 83]): max gap 0.024241 at k = 63;
// with the continuity correction (k - 0.5) the max gap is 0.004867.
TEST(BinomSf, NormalApproximationGapMatchesOracle) {
  constexpr std::uint64_t n = 250;
  constexpr double p = 0.25;
  const double mean = n * p;
  const double sigma = std::sqrt(n * p * (1 - p));
  double worst = 0.0, worst_corrected = 0.0;
  std::uint64_t worst_k = 0;
  for (auto k = static_cast<std::uint64_t>(std::ceil(mean - 3 * sigma)); k <= mean + 3 * sigma; ++k) {
    const double z = (static_cast<double>(k) / n - p) / std::sqrt(p * (1 - p) / n);
    const double gap = std::abs(norm_sf(z) - binom_sf(k, n, p));
    if (gap > worst) {
      worst = gap;
      worst_k = k;
    }
    const double zc = (static_cast<double>(k) - 0.5 - mean) / sigma;
    worst_corrected = std::max(worst_corrected, std::abs(norm_sf(zc) - binom_sf(k, n, p)));
  }
  EXPECT_NEAR(worst, 0.024241328291380426, 1e-9);
  EXPECT_EQ(worst_k, 63u);
  EXPECT_NEAR(worst_corrected, 0.004867419784935656, 1e-9);
}

TEST(Probability, RejectsOutOfRange) {
  EXPECT_THROW(Probability(1.5), InputError);
  EXPECT_THROW(Probability(-0.1), InputError);
  EXPECT_THROW(Probability(std::nan("")), InputError);
  EXPECT_EQ(Probability(0.25).value(), 0.25);
}

}  // namespace
}  // namespace hats::numerics
