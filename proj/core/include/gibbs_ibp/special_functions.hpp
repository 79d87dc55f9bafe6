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

/**
 * Log-space special functions: rising factorials, generalized factorial
 * coefficients, unsigned Stirling numbers of the first kind, positive
 * stable densities and the upper incomplete gamma function.
 *
 * The combinatorial tables grow super-exponentially, so every entry is
 * stored as a natural logarithm.
 */

#ifndef GIBBS_IBP_SPECIAL_FUNCTIONS_HPP_
#define GIBBS_IBP_SPECIAL_FUNCTIONS_HPP_

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace gibbs_ibp {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)) without overflow; either argument may be -inf.
double log_add_exp(double a, double b);

/// log(sum_i exp(x_i)); -inf for an empty span.
double log_sum_exp(std::span<const double> x);

/// log[(a)_n] = log[Gamma(a + n) / Gamma(a)] for a > 0. Exact (0) at n = 0.
double log_rising_factorial(double a, std::size_t n);

/**
 * Dense lower-triangular array indexed by 1 <= k <= n <= n_max.
 */
class TriangularArray {
 public:
  TriangularArray() = default;
  TriangularArray(std::size_t n_max, double fill);

  std::size_t n_max() const { return n_max_; }

  double& operator()(std::size_t n, std::size_t k) { return data_[index(n, k)]; }
  double operator()(std::size_t n, std::size_t k) const { return data_[index(n, k)]; }

  std::span<const double> row(std::size_t n) const {
    return {data_.data() + index(n, 1), n};
  }
  std::span<double> row(std::size_t n) { return {data_.data() + index(n, 1), n}; }

  const std::vector<double>& raw() const { return data_; }

 private:
  static std::size_t index(std::size_t n, std::size_t k) { return n * (n - 1) / 2 + (k - 1); }

  std::size_t n_max_ = 0;
  std::vector<double> data_;
};

/**
 * Logarithms of the generalized factorial coefficients C(n, k; alpha) for
 * alpha in (0, 1), 1 <= k <= n <= n_max. Built by seeding the diagonal with
 * alpha^j and sweeping C(j+1,k) = (j - alpha k) C(j,k) + alpha C(j,k-1).
 */
class GfcTable {
 public:
  GfcTable() = default;
  GfcTable(std::size_t n_max, double alpha);

  std::size_t n_max() const { return log_c_.n_max(); }
  double alpha() const { return alpha_; }

  /// log C(n, k; alpha); -inf when k = 0 < n or k > n.
  double log_value(std::size_t n, std::size_t k) const;
  double value(std::size_t n, std::size_t k) const;

  /// log[alpha^{-k} C(n, k; alpha)], the factor multiplying V_{n,k} in
  /// the block-count law and in the primitives.
  double log_block_coefficient(std::size_t n, std::size_t k) const;

  const TriangularArray& entries() const { return log_c_; }

 private:
  double alpha_ = 0.5;
  double log_alpha_ = 0.0;
  TriangularArray log_c_;
};

GfcTable build_gfc_table(std::size_t n_max, double alpha);

/// Explicit alternating sum for C(n, k; alpha) in 50-digit arithmetic; a
/// test oracle only, limited to n <= 15.
double gfc_bruteforce(int n, int k, double alpha);

/**
 * Logarithms of the unsigned Stirling numbers of the first kind |s(n, k)|,
 * the alpha -> 0 limit of alpha^{-k} C(n, k; alpha). Used for every
 * Dirichlet-process quantity.
 */
class StirlingTable {
 public:
  StirlingTable() = default;
  explicit StirlingTable(std::size_t n_max);

  std::size_t n_max() const { return log_s_.n_max(); }
  double log_value(std::size_t n, std::size_t k) const;
  double log_block_coefficient(std::size_t n, std::size_t k) const { return log_value(n, k); }

 private:
  TriangularArray log_s_;
};

/// log A(u) for the Zolotarev function
/// A(u) = [sin(alpha u)^alpha sin((1 - alpha) u)^(1 - alpha) / sin u]^(1 / (1 - alpha)).
double zolotarev_log_a(double alpha, double u);

/// d/du log A(u).
double zolotarev_log_a_derivative(double alpha, double u);

/// Density of the positive alpha-stable law with Laplace transform
/// exp(-lambda^alpha). Closed form at alpha = 1/2, the convergent series in
/// t^-alpha for t^alpha >= 10, Zolotarev integral with adaptive
/// Gauss-Kronrod quadrature otherwise.
double positive_stable_density(double alpha, double t);
double log_positive_stable_density(double alpha, double t);

/// log of the upper incomplete gamma function int_x^inf s^{a-1} e^{-s} ds.
double log_upper_incomplete_gamma(double x, double a);

}  // namespace gibbs_ibp

#endif  // GIBBS_IBP_SPECIAL_FUNCTIONS_HPP_
