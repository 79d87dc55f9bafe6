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


// Independent reference computations and goodness-of-fit tests shared by
// the unit and acceptance suites. Nothing here reuses the library's own
// numerics: the oracles work from explicit sums in 50-digit arithmetic or
// from textbook closed forms.

#ifndef GIBBS_IBP_TESTS_ORACLES_HPP_
#define GIBBS_IBP_TESTS_ORACLES_HPP_

#include <cstddef>
#include <functional>
#include <map>
#include <vector>

namespace gibbs_ibp::oracle {

/// C(n, k; alpha) = (1/k!) sum_j (-1)^j binom(k, j) (-j alpha)_n, summed in
/// 50 decimal digits.
double gfc(int n, int k, double alpha);

/// Unsigned Stirling numbers of the first kind by the integer recursion.
double stirling_first(int n, int k);

/// Pitman-Yor Gibbs weight prod_{i<k}(theta + i alpha) / (theta + 1)_{n-1}.
double py_weight(double alpha, double theta, int n, int k);

/// sum_k V_{n+z1,k+z2} alpha^{-k} C(n, k; alpha) with Pitman-Yor weights,
/// in 50 digits (Stirling numbers when alpha = 0).
double py_primitive(double alpha, double theta, int n, int z1, int z2);

/// Positive alpha-stable density from its convergent series
/// (1/pi) sum_k (-1)^{k+1} Gamma(k alpha + 1) / k! sin(k pi alpha) t^{-k alpha - 1},
/// in 50 digits; accurate for t >= 0.3 when alpha <= 0.7.
double stable_density_series(double alpha, double t);

/// Levy density, the alpha = 1/2 case: t^{-3/2} e^{-1/(4t)} / (2 sqrt(pi)).
double levy_density(double t);

/// Kolmogorov-Smirnov statistic of `sample` against a continuous cdf.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Asymptotic p-value with Stephens' small-sample correction.
double ks_pvalue(double d, std::size_t n);

/// Pearson chi-square p-value; cells with expected count below `min_expected`
/// are pooled into their neighbour.
double chi_square_pvalue(const std::vector<double>& observed, const std::vector<double>& expected,
                         double min_expected = 5.0);

/// Total-variation distance between an empirical law and a reference pmf.
double tv_distance(const std::map<std::size_t, double>& empirical, const std::vector<double>& pmf);

/// Poisson pmf at 0..size-1.
std::vector<double> poisson_pmf(double mean, std::size_t size);

/// Composite Simpson integral on [a, b] with `intervals` (rounded up to even).
double simpson(const std::function<double(double)>& f, double a, double b, std::size_t intervals);

}  // namespace gibbs_ibp::oracle

#endif  // GIBBS_IBP_TESTS_ORACLES_HPP_
