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

#include "gibbs_ibp/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "detail.hpp"
#include "gibbs_ibp/error.hpp"

namespace gibbs_ibp {

namespace {

void require_alpha_open_unit(double alpha, const char* who) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError(std::string(who) + ": alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
}

// Below this many factors, or for large a where lgamma's absolute error
// swamps the difference, the rising factorial is summed term by term.
constexpr std::size_t kDirectRisingTerms = 512;
constexpr double kLargeRisingBase = 1e6;

}  // namespace

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

double log_sum_exp(std::span<const double> x) {
  if (x.empty()) return kNegInf;
  const double m = *std::max_element(x.begin(), x.end());
  if (m == kNegInf) return kNegInf;
  if (std::isinf(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

double log_rising_factorial(double a, std::size_t n) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw DomainError("log_rising_factorial: a must be positive and finite, got " + std::to_string(a));
  }
  if (n == 0) return 0.0;
  if (n <= kDirectRisingTerms || a > kLargeRisingBase) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::log(a + static_cast<double>(i));
    return s;
  }
  return std::lgamma(a + static_cast<double>(n)) - std::lgamma(a);
}

TriangularArray::TriangularArray(std::size_t n_max, double fill)
    : n_max_(n_max), data_(n_max * (n_max + 1) / 2, fill) {}

GfcTable::GfcTable(std::size_t n_max, double alpha)
    : alpha_(alpha), log_alpha_(std::log(alpha)), log_c_(n_max, kNegInf) {
  require_alpha_open_unit(alpha, "build_gfc_table");
  if (n_max == 0) throw DomainError("build_gfc_table: n_max must be positive");
  for (std::size_t j = 1; j <= n_max; ++j) log_c_(j, j) = static_cast<double>(j) * log_alpha_;
  for (std::size_t j = 1; j < n_max; ++j) {
    const double jd = static_cast<double>(j);
    // C(j, 0) = 0 for j >= 1, so the first column only carries the first term.
    log_c_(j + 1, 1) = std::log(jd - alpha) + log_c_(j, 1);
    for (std::size_t k = 2; k <= j; ++k) {
      const double stay = std::log(jd - alpha * static_cast<double>(k)) + log_c_(j, k);
      const double open = log_alpha_ + log_c_(j, k - 1);
      log_c_(j + 1, k) = log_add_exp(stay, open);
    }
  }
}

double GfcTable::log_value(std::size_t n, std::size_t k) const {
  if (n > n_max()) {
    throw TableDepthError("GfcTable: row " + std::to_string(n) + " exceeds depth " + std::to_string(n_max()));
  }
  if (n == 0 && k == 0) return 0.0;
  if (k == 0 || k > n) return kNegInf;
  return log_c_(n, k);
}

double GfcTable::value(std::size_t n, std::size_t k) const { return std::exp(log_value(n, k)); }

double GfcTable::log_block_coefficient(std::size_t n, std::size_t k) const {
  return log_value(n, k) - static_cast<double>(k) * log_alpha_;
}

GfcTable build_gfc_table(std::size_t n_max, double alpha) { return GfcTable(n_max, alpha); }

double gfc_bruteforce(int n, int k, double alpha) {
  if (n > 15) throw DomainError("gfc_bruteforce: explicit sum is limited to n <= 15");
  if (n < 0 || k < 0) throw DomainError("gfc_bruteforce: negative index");
  if (k > n) return 0.0;
  if (n == 0) return k == 0 ? 1.0 : 0.0;
  // The alternating sum cancels up to ~1e13 at small alpha; 50 digits keep
  // the result exact to double precision. alpha converts exactly.
  using Big = boost::multiprecision::cpp_bin_float_50;
  const Big a(alpha);
  Big total = 0;
  Big binom = 1;
  for (int i = 0; i <= k; ++i) {
    if (i > 0) binom = binom * (k - i + 1) / i;
    Big rising = 1;
    const Big base = -a * i;
    for (int m = 0; m < n; ++m) rising *= base + m;
    total += ((i % 2 == 0) ? binom : -binom) * rising;
  }
  Big k_factorial = 1;
  for (int i = 2; i <= k; ++i) k_factorial *= i;
  return static_cast<double>(total / k_factorial);
}

StirlingTable::StirlingTable(std::size_t n_max) : log_s_(n_max, kNegInf) {
  if (n_max == 0) throw DomainError("StirlingTable: n_max must be positive");
  for (std::size_t j = 1; j <= n_max; ++j) log_s_(j, j) = 0.0;
  for (std::size_t j = 1; j < n_max; ++j) {
    const double log_j = std::log(static_cast<double>(j));
    log_s_(j + 1, 1) = log_j + log_s_(j, 1);
    for (std::size_t k = 2; k <= j; ++k) {
      log_s_(j + 1, k) = log_add_exp(log_j + log_s_(j, k), log_s_(j, k - 1));
    }
  }
}

double StirlingTable::log_value(std::size_t n, std::size_t k) const {
  if (n > n_max()) {
    throw TableDepthError("StirlingTable: row " + std::to_string(n) + " exceeds depth " +
                          std::to_string(n_max()));
  }
  if (n == 0 && k == 0) return 0.0;
  if (k == 0 || k > n) return kNegInf;
  return log_s_(n, k);
}

namespace {

double zolotarev_log_a0(double alpha) {
  return (alpha * std::log(alpha) + (1.0 - alpha) * std::log1p(-alpha)) / (1.0 - alpha);
}

// Coefficient b in log A(u) = log A(0) + b u^2 + O(u^4).
double zolotarev_curvature(double alpha) {
  const double beta = 1.0 - alpha;
  return (1.0 - alpha * alpha * alpha - beta * beta * beta) / (6.0 * beta);
}

constexpr double kSmallU = 1e-4;

// log(sin(x) / x) for 0 <= x < pi, accurate to relative precision near 0.
double log_sinc(double x) {
  if (x < 0.1) {
    const double x2 = x * x;
    return -x2 * (1.0 / 6.0 + x2 * (1.0 / 180.0 + x2 * (1.0 / 2835.0 + x2 * (1.0 / 37800.0 + x2 / 467775.0))));
  }
  return std::log(std::sin(x) / x);
}

// log A(u) - log A(0), free of cancellation for small u.
double zolotarev_log_a_excess(double alpha, double u) {
  const double beta = 1.0 - alpha;
  return (alpha * log_sinc(alpha * u) + beta * log_sinc(beta * u) - log_sinc(u)) / beta;
}

}  // namespace

double zolotarev_log_a(double alpha, double u) { return zolotarev_log_a0(alpha) + zolotarev_log_a_excess(alpha, u); }

double zolotarev_log_a_derivative(double alpha, double u) {
  if (u < kSmallU) return 2.0 * zolotarev_curvature(alpha) * u;
  const double beta = 1.0 - alpha;
  return (alpha * alpha / std::tan(alpha * u) + beta * beta / std::tan(beta * u) - 1.0 / std::tan(u)) /
         beta;
}

namespace {

// Solve log A(u) = target on (0, pi); log A is increasing there.
double zolotarev_inverse(double alpha, double target) {
  double lo = 0.0;
  double hi = std::numbers::pi;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (zolotarev_log_a(alpha, mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Far right tail: the series in x = t^-alpha converges fast with no
// cancellation once x is small, where the integral form is very peaked.
constexpr double kSeriesMaxX = 0.1;

double log_stable_density_series(double alpha, double t) {
  const double log_x = -alpha * std::log(t);
  const double lead = std::lgamma(alpha + 1.0) + log_x;
  double sum = std::sin(std::numbers::pi * alpha);
  for (int k = 2; k < 200; ++k) {
    const double kd = static_cast<double>(k);
    const double size = std::exp(std::lgamma(alpha * kd + 1.0) - std::lgamma(kd + 1.0) + kd * log_x - lead);
    const double term = size * std::sin(std::numbers::pi * alpha * kd);
    sum += (k % 2 == 0) ? -term : term;
    if (size < 1e-17 * std::abs(sum)) break;
  }
  return lead + std::log(sum) - std::log(std::numbers::pi) - std::log(t);
}

double log_stable_density_half(double t) {
  return -std::log(2.0 * std::sqrt(std::numbers::pi)) - 1.5 * std::log(t) - 0.25 / t;
}

}  // namespace

double log_positive_stable_density(double alpha, double t) {
  require_alpha_open_unit(alpha, "positive_stable_density");
  if (!(t > 0.0)) throw DomainError("positive_stable_density: t must be positive");
  if (std::isinf(t)) return kNegInf;
  if (alpha == 0.5) return log_stable_density_half(t);
  if (-alpha * std::log(t) <= std::log(kSeriesMaxX)) return log_stable_density_series(alpha, t);

  const double beta = 1.0 - alpha;
  const double log_s = -alpha / beta * std::log(t);
  const double log_a0 = zolotarev_log_a0(alpha);
  // The integrand is A(u) exp(-A(u) s); factor out its value at the mode.
  // The mode sits where A(u) s = 1, or at u = 0 when A(0) s >= 1.
  const double log_a_mode = std::max(log_a0, -log_s);
  const double u_mode = (log_a_mode > log_a0) ? zolotarev_inverse(alpha, log_a_mode) : 0.0;
  const double phi_mode = log_a_mode - std::exp(log_a_mode + log_s);
  // Log integrand relative to the mode, formed without cancellation: with
  // d = log A(u) - log A(mode) it is d - A(mode) s expm1(d). A(mode) s can
  // reach 1e30 for small t, so d is built from the excess over log A(0).
  const double mass_mode = std::exp(log_a_mode + log_s);
  const double excess_mode = log_a_mode - log_a0;
  auto log_ratio = [&](double u) {
    const double d = zolotarev_log_a_excess(alpha, u) - excess_mode;
    return d - mass_mode * std::expm1(d);
  };
  auto integrand = [&](double u) { return std::exp(log_ratio(u)); };

  // Window where the integrand is within e^-60 of its peak.
  constexpr double kDrop = 60.0;
  double right = std::numbers::pi;
  {
    double lo = u_mode;
    double hi = std::numbers::pi * (1.0 - 1e-15);
    if (log_ratio(hi) < -kDrop) {
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (log_ratio(mid) < -kDrop) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      right = hi;
    }
  }
  double left = 0.0;
  if (u_mode > 0.0 && log_ratio(1e-12) < -kDrop) {
    double lo = 1e-12;
    double hi = u_mode;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (log_ratio(mid) < -kDrop) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    left = lo;
  }

  double integral = 0.0;
  if (u_mode > left) {
    integral += detail::integrate_gk(integrand, left, u_mode, 15, 1e-11);
  }
  integral += detail::integrate_gk(integrand, u_mode, right, 15, 1e-11);
  if (!(integral > 0.0)) return kNegInf;
  return std::log(alpha / beta) - std::log(t) / beta - std::log(std::numbers::pi) + phi_mode +
         std::log(integral);
}

double positive_stable_density(double alpha, double t) {
  require_alpha_open_unit(alpha, "positive_stable_density");
  if (!(t > 0.0)) throw DomainError("positive_stable_density: t must be positive");
  return std::exp(log_positive_stable_density(alpha, t));
}

double log_upper_incomplete_gamma(double x, double a) {
  if (!(a > 0.0)) throw DomainError("log_upper_incomplete_gamma: a must be positive");
  if (!(x >= 0.0)) throw DomainError("log_upper_incomplete_gamma: x must be nonnegative");
  if (x == 0.0) return std::lgamma(a);
  const double q = boost::math::gamma_q(a, x);
  if (q > 1e-280) return std::lgamma(a) + std::log(q);
  // Far tail: modified Lentz evaluation of the continued fraction for
  // Gamma(a, x) e^x x^{-a}.
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return -x + a * std::log(x) + std::log(h);
}

}  // namespace gibbs_ibp
