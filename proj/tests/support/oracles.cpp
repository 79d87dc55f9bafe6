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


#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/constants/constants.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>

namespace gibbs_ibp::oracle {
namespace {

using Big = boost::multiprecision::cpp_dec_float_50;

Big big_rising(const Big& a, int n) {
  Big out = 1;
  for (int i = 0; i < n; ++i) out *= a + i;
  return out;
}

Big big_binom(int n, int k) {
  Big out = 1;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

Big big_gfc(int n, int k, const Big& alpha) {
  if (n == 0 && k == 0) return 1;
  if (k == 0 || k > n) return 0;
  Big sum = 0;
  for (int j = 0; j <= k; ++j) {
    const Big term = big_binom(k, j) * big_rising(-Big(j) * alpha, n);
    sum += (j % 2 == 0) ? term : Big(-term);
  }
  Big factorial = 1;
  for (int i = 2; i <= k; ++i) factorial *= i;
  return sum / factorial;
}

Big big_stirling(int n, int k) {
  std::vector<std::vector<Big>> s(n + 1, std::vector<Big>(n + 1, Big(0)));
  s[0][0] = 1;
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= i; ++j) s[i][j] = s[i - 1][j - 1] + Big(i - 1) * s[i - 1][j];
  return (k <= n) ? s[n][k] : Big(0);
}

Big big_py_weight(const Big& alpha, const Big& theta, int n, int k) {
  Big num = 1;
  for (int i = 1; i < k; ++i) num *= theta + alpha * i;
  return num / big_rising(theta + 1, n - 1);
}

}  // namespace

double gfc(int n, int k, double alpha) { return static_cast<double>(big_gfc(n, k, Big(alpha))); }

double stirling_first(int n, int k) { return static_cast<double>(big_stirling(n, k)); }

double py_weight(double alpha, double theta, int n, int k) {
  return static_cast<double>(big_py_weight(Big(alpha), Big(theta), n, k));
}

double py_primitive(double alpha, double theta, int n, int z1, int z2) {
  const Big a(alpha);
  const Big t(theta);
  Big sum = 0;
  for (int k = 0; k <= n; ++k) {
    if (k + z2 == 0) continue;
    const Big coef = (alpha == 0.0) ? big_stirling(n, k) : big_gfc(n, k, a) / pow(a, k);
    if (coef == 0) continue;
    sum += big_py_weight(a, t, n + z1, k + z2) * coef;
  }
  return static_cast<double>(sum);
}

double stable_density_series(double alpha, double t) {
  const Big a(alpha);
  const Big x(t);
  const Big pi = boost::math::constants::pi<Big>();
  Big sum = 0;
  for (int k = 1; k < 400; ++k) {
    const Big ka = a * k;
    Big term = boost::multiprecision::tgamma(ka + 1) / boost::multiprecision::tgamma(Big(k + 1)) *
               sin(ka * pi) * pow(x, -ka - 1);
    if (k % 2 == 0) term = -term;
    sum += term;
    if (k > 20 && abs(term) < 1e-40 * abs(sum)) break;
  }
  return static_cast<double>(sum / pi);
}

double levy_density(double t) {
  return std::exp(-1.0 / (4.0 * t)) / (2.0 * std::sqrt(std::numbers::pi) * std::pow(t, 1.5));
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double chi_square_pvalue(const std::vector<double>& observed, const std::vector<double>& expected,
                         double min_expected) {
  if (observed.size() != expected.size()) throw std::invalid_argument("chi_square: size mismatch");
  std::vector<double> obs, exp;
  double o = 0.0, e = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    o += observed[i];
    e += expected[i];
    if (e >= min_expected) {
      obs.push_back(o);
      exp.push_back(e);
      o = e = 0.0;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (exp.empty()) return 1.0;
    obs.back() += o;
    exp.back() += e;
  }
  if (exp.size() < 2) return 1.0;
  double stat = 0.0;
  for (std::size_t i = 0; i < exp.size(); ++i) stat += (obs[i] - exp[i]) * (obs[i] - exp[i]) / exp[i];
  const boost::math::chi_squared dist(static_cast<double>(exp.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

double tv_distance(const std::map<std::size_t, double>& empirical, const std::vector<double>& pmf) {
  double total = 0.0;
  double covered = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    const auto it = empirical.find(k);
    const double q = it == empirical.end() ? 0.0 : it->second;
    total += std::abs(q - pmf[k]);
    covered += pmf[k];
  }
  for (const auto& [k, q] : empirical)
    if (k >= pmf.size()) total += q;
  total += std::max(0.0, 1.0 - covered);
  return 0.5 * total;
}

std::vector<double> poisson_pmf(double mean, std::size_t size) {
  std::vector<double> out(size, 0.0);
  if (!(mean > 0.0)) {
    if (size > 0) out[0] = 1.0;
    return out;
  }
  for (std::size_t k = 0; k < size; ++k)
    out[k] = std::exp(static_cast<double>(k) * std::log(mean) - mean - std::lgamma(static_cast<double>(k) + 1.0));
  return out;
}

double simpson(const std::function<double(double)>& f, double a, double b, std::size_t intervals) {
  intervals += intervals % 2;
  const double h = (b - a) / static_cast<double>(intervals);
  double sum = f(a) + f(b);
  for (std::size_t i = 1; i < intervals; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
  return sum * h / 3.0;
}

}  // namespace gibbs_ibp::oracle
