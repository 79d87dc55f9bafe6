/*
 * Copyright 2026 The gibbs-ibp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include "gibbs_ibp/error.hpp"
#include "gibbs_ibp/special_functions.hpp"
#include "oracles.hpp"

namespace gibbs_ibp {
namespace {

TEST(LogAddExp, HandlesInfinitiesAndLargeArguments) {
  EXPECT_DOUBLE_EQ(log_add_exp(kNegInf, 2.0), 2.0);
  EXPECT_DOUBLE_EQ(log_add_exp(2.0, kNegInf), 2.0);
  EXPECT_EQ(log_add_exp(kNegInf, kNegInf), kNegInf);
  EXPECT_NEAR(log_add_exp(1000.0, 1000.0), 1000.0 + std::log(2.0), 1e-12);
  EXPECT_NEAR(log_add_exp(std::log(2.0), std::log(3.0)), std::log(5.0), 1e-15);
}

TEST(LogSumExp, EmptyAndMixed) {
  EXPECT_EQ(log_sum_exp({}), kNegInf);
  const std::vector<double> x{kNegInf, std::log(1.0), std::log(2.0), std::log(4.0)};
  EXPECT_NEAR(log_sum_exp(x), std::log(7.0), 1e-15);
  const std::vector<double> big{-1e4, -1e4 + std::log(3.0)};
  EXPECT_NEAR(log_sum_exp(big), -1e4 + std::log(4.0), 1e-10);
}

TEST(LogRisingFactorial, MatchesProduct) {
  for (double a : {0.3, 1.0, 2.5, 17.0}) {
    double prod = 1.0;
    for (std::size_t n = 0; n <= 30; ++n) {
      EXPECT_NEAR(log_rising_factorial(a, n), std::log(prod), 1e-12 * std::max(1.0, std::abs(std::log(prod))));
      prod *= a + static_cast<double>(n);
    }
  }
  EXPECT_EQ(log_rising_factorial(0.7, 0), 0.0);
  EXPECT_THROW(log_rising_factorial(0.0, 3), DomainError);
  EXPECT_THROW(log_rising_factorial(-1.0, 3), DomainError);
}

TEST(GfcTable, MatchesHighPrecisionOracle) {
  for (double alpha : {0.1, 0.5, 0.9}) {
    const GfcTable table = build_gfc_table(12, alpha);
    for (int n = 1; n <= 12; ++n) {
      for (int k = 1; k <= n; ++k) {
        const double expected = oracle::gfc(n, k, alpha);
        EXPECT_NEAR(table.value(n, k) / expected, 1.0, 1e-10) << "n=" << n << " k=" << k << " alpha=" << alpha;
      }
    }
  }
}

TEST(GfcTable, SmallValuesByHand) {
  // C(n, n) = alpha^n and C(n, 1) = alpha (1 - alpha)_{n-1}.
  const double alpha = 0.3;
  const GfcTable table = build_gfc_table(8, alpha);
  for (std::size_t n = 1; n <= 8; ++n) {
    EXPECT_NEAR(table.value(n, n), std::pow(alpha, static_cast<double>(n)), 1e-14);
    EXPECT_NEAR(table.log_value(n, 1), std::log(alpha) + log_rising_factorial(1.0 - alpha, n - 1), 1e-12);
  }
  EXPECT_EQ(table.log_value(3, 0), kNegInf);
  EXPECT_EQ(table.log_value(3, 4), kNegInf);
  EXPECT_NEAR(table.log_block_coefficient(5, 2), table.log_value(5, 2) - 2.0 * std::log(alpha), 1e-14);
}

TEST(GfcTable, RowsSumToRisingFactorials) {
  // Defining expansion (x)_n = sum_k C(n,k;alpha) (x/alpha)_k at x = 1.
  const double alpha = 0.4;
  const GfcTable table = build_gfc_table(40, alpha);
  for (std::size_t n = 1; n <= 40; ++n) {
    std::vector<double> terms;
    for (std::size_t k = 1; k <= n; ++k) terms.push_back(table.log_value(n, k) + log_rising_factorial(1.0 / alpha, k));
    EXPECT_NEAR(log_sum_exp(terms), log_rising_factorial(1.0, n), 1e-10 * static_cast<double>(n));
  }
}

TEST(GfcTable, DeepTablesStayFinite) {
  const GfcTable table = build_gfc_table(2000, 0.5);
  for (std::size_t k = 1; k <= 2000; k += 199) EXPECT_TRUE(std::isfinite(table.log_value(2000, k)));
  EXPECT_THROW(table.log_value(2001, 1), TableDepthError);
}

TEST(GfcBruteforce, AgreesWithOracleAndRefusesLargeN) {
  for (double alpha : {0.1, 0.5, 0.9})
    for (int n = 1; n <= 15; ++n)
      for (int k = 1; k <= n; ++k)
        EXPECT_NEAR(gfc_bruteforce(n, k, alpha) / oracle::gfc(n, k, alpha), 1.0, 1e-12)
            << "alpha=" << alpha << " n=" << n << " k=" << k;
  EXPECT_THROW(gfc_bruteforce(16, 3, 0.5), DomainError);
  EXPECT_THROW(build_gfc_table(5, 1.0), DomainError);
  EXPECT_THROW(build_gfc_table(5, 0.0), DomainError);
  EXPECT_THROW(build_gfc_table(0, 0.5), DomainError);
}

TEST(StirlingTable, MatchesIntegerRecursion) {
  const StirlingTable table(20);
  for (int n = 1; n <= 20; ++n)
    for (int k = 1; k <= n; ++k)
      EXPECT_NEAR(std::exp(table.log_value(n, k)) / oracle::stirling_first(n, k), 1.0, 1e-12);
  // Row sums give n!.
  for (std::size_t n = 1; n <= 20; ++n) {
    std::vector<double> row;
    for (std::size_t k = 1; k <= n; ++k) row.push_back(table.log_value(n, k));
    EXPECT_NEAR(log_sum_exp(row), std::lgamma(static_cast<double>(n) + 1.0), 1e-12);
  }
}

TEST(Zolotarev, DerivativeMatchesFiniteDifference) {
  for (double alpha : {0.2, 0.5, 0.8}) {
    for (double u : {0.3, 1.0, 2.0, 2.8}) {
      const double h = 1e-6;
      const double fd = (zolotarev_log_a(alpha, u + h) - zolotarev_log_a(alpha, u - h)) / (2.0 * h);
      EXPECT_NEAR(zolotarev_log_a_derivative(alpha, u), fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(PositiveStableDensity, LevyClosedForm) {
  for (double t : {0.01, 0.1, 0.5, 1.0, 3.0, 100.0})
    EXPECT_NEAR(positive_stable_density(0.5, t) / oracle::levy_density(t), 1.0, 1e-12);
}

TEST(PositiveStableDensity, MatchesSeries) {
  for (double alpha : {0.3, 0.5, 0.7}) {
    for (double t : {0.5, 1.0, 2.0, 5.0}) {
      const double expected = oracle::stable_density_series(alpha, t);
      EXPECT_NEAR(positive_stable_density(alpha, t) / expected, 1.0, 1e-8) << "alpha=" << alpha << " t=" << t;
    }
  }
}

TEST(PositiveStableDensity, IntegratesToOne) {
  // Substitute t = e^u; the mass outside [-8, 20] is below 1e-9 for these alphas.
  for (double alpha : {0.4, 0.6}) {
    const double mass = oracle::simpson(
        [&](double u) { return std::exp(log_positive_stable_density(alpha, std::exp(u)) + u); }, -8.0,
        20.0 / alpha, 20000);
    EXPECT_NEAR(mass, 1.0, 1e-6) << "alpha=" << alpha;
  }
  EXPECT_THROW(positive_stable_density(0.5, 0.0), DomainError);
  EXPECT_THROW(positive_stable_density(1.2, 1.0), DomainError);
}

TEST(UpperIncompleteGamma, MatchesBoost) {
  for (double a : {0.2, 1.0, 3.5, 40.0}) {
    for (double x : {0.0, 0.1, 1.0, 10.0, 200.0}) {
      const double expected = x == 0.0 ? std::lgamma(a) : std::log(boost::math::tgamma(a, x));
      EXPECT_NEAR(log_upper_incomplete_gamma(x, a), expected, 1e-10 * std::max(1.0, std::abs(expected)))
          << "a=" << a << " x=" << x;
    }
  }
  EXPECT_THROW(log_upper_incomplete_gamma(1.0, 0.0), DomainError);
  EXPECT_THROW(log_upper_incomplete_gamma(-1.0, 1.0), DomainError);
}

}  // namespace
}  // namespace gibbs_ibp
