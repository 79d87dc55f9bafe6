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


#include "gibbs_ibp/ibp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "gibbs_ibp/error.hpp"
#include "gibbs_ibp/stick_breaking.hpp"

namespace gibbs_ibp {

void FeatureAllocation::set(std::size_t i, std::size_t k, bool value) {
  std::uint8_t& cell = columns_[k][i];
  if ((cell != 0) == value) return;
  cell = value ? 1 : 0;
  if (value) {
    ++counts_[k];
  } else {
    --counts_[k];
  }
}

void FeatureAllocation::add_customer() {
  ++n_;
  for (auto& column : columns_) column.push_back(0);
}

std::size_t FeatureAllocation::add_feature(double label) {
  columns_.emplace_back(n_, 0);
  counts_.push_back(0);
  labels_.push_back(label);
  return columns_.size() - 1;
}

void FeatureAllocation::remove_feature(std::size_t k) {
  columns_.erase(columns_.begin() + static_cast<std::ptrdiff_t>(k));
  counts_.erase(counts_.begin() + static_cast<std::ptrdiff_t>(k));
  labels_.erase(labels_.begin() + static_cast<std::ptrdiff_t>(k));
}

namespace {

std::size_t first_row(const std::vector<std::uint8_t>& column) {
  return static_cast<std::size_t>(std::find(column.begin(), column.end(), std::uint8_t{1}) - column.begin());
}

}  // namespace

void FeatureAllocation::canonicalize() {
  std::vector<std::size_t> order;
  std::vector<std::size_t> first(columns_.size());
  for (std::size_t k = 0; k < columns_.size(); ++k) {
    if (counts_[k] == 0) continue;
    first[k] = first_row(columns_[k]);
    order.push_back(k);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return first[a] < first[b]; });
  std::vector<std::vector<std::uint8_t>> columns;
  std::vector<std::size_t> counts;
  std::vector<double> labels;
  for (std::size_t k : order) {
    columns.push_back(std::move(columns_[k]));
    counts.push_back(counts_[k]);
    labels.push_back(labels_[k]);
  }
  columns_ = std::move(columns);
  counts_ = std::move(counts);
  labels_ = std::move(labels);
}

bool FeatureAllocation::is_canonical() const {
  std::size_t previous = 0;
  for (std::size_t k = 0; k < columns_.size(); ++k) {
    if (counts_[k] == 0) return false;
    const std::size_t f = first_row(columns_[k]);
    if (f < previous) return false;
    previous = f;
  }
  return true;
}

FeatureAllocation FeatureAllocation::prefix(std::size_t m) const {
  if (m > n_) throw DomainError("prefix: m exceeds the number of customers");
  FeatureAllocation out(m);
  for (std::size_t k = 0; k < columns_.size(); ++k) {
    const std::size_t j = out.add_feature(labels_[k]);
    for (std::size_t i = 0; i < m; ++i) {
      if (columns_[k][i] != 0) out.set(i, j, true);
    }
  }
  out.canonicalize();
  return out;
}

FeatureAllocation FeatureAllocation::permuted_rows(const std::vector<std::size_t>& perm) const {
  if (perm.size() != n_) throw DomainError("permuted_rows: permutation size mismatch");
  FeatureAllocation out(n_);
  for (std::size_t k = 0; k < columns_.size(); ++k) {
    const std::size_t j = out.add_feature(labels_[k]);
    for (std::size_t i = 0; i < n_; ++i) {
      if (columns_[k][perm[i]] != 0) out.set(i, j, true);
    }
  }
  out.canonicalize();
  return out;
}

FeatureAllocation FeatureAllocation::from_rows(const std::vector<std::vector<int>>& rows) {
  FeatureAllocation out(rows.size());
  const std::size_t k_max = rows.empty() ? 0 : rows.front().size();
  for (std::size_t k = 0; k < k_max; ++k) out.add_feature(0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != k_max) throw DomainError("from_rows: ragged rows");
    for (std::size_t k = 0; k < k_max; ++k) {
      if (rows[i][k] != 0 && rows[i][k] != 1) throw DomainError("from_rows: entries must be 0 or 1");
      if (rows[i][k] != 0) out.set(i, k, true);
    }
  }
  return out;
}

std::vector<std::vector<int>> FeatureAllocation::to_rows() const {
  std::vector<std::vector<int>> rows(n_, std::vector<int>(columns_.size(), 0));
  for (std::size_t k = 0; k < columns_.size(); ++k) {
    for (std::size_t i = 0; i < n_; ++i) rows[i][k] = columns_[k][i];
  }
  return rows;
}

FeatureAllocation simulate_ibp(const PrimitiveCache& cache, double gamma, std::size_t n, Rng& rng) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw DomainError("simulate_ibp: gamma must be >= 0");
  if (n > cache.n()) throw TableDepthError("simulate_ibp: primitive cache shallower than n");
  FeatureAllocation z;
  for (std::size_t m = 0; m < n; ++m) {
    z.add_customer();
    if (m > 0) {
      // Take probabilities depend on (m, S) only; fill them on demand.
      std::vector<double> take(m + 1, -1.0);
      for (std::size_t k = 0; k < z.num_features(); ++k) {
        const std::size_t s = z.count(k);
        if (take[s] < 0.0) take[s] = cache.take_probability(m, s);
        const double p = take[s];
        if (!(p >= 0.0 && p <= 1.0 + 1e-12)) {
          throw NumericError("simulate_ibp: take probability " + std::to_string(p) + " outside [0, 1] at customer " +
                             std::to_string(m + 1));
        }
        if (uniform_open(rng) < p) z.set(m, k, true);
      }
    }
    const std::uint64_t fresh = poisson_variate(gamma * cache.g11(m), rng);
    for (std::uint64_t j = 0; j < fresh; ++j) z.set(m, z.add_feature(uniform_open(rng)), true);
  }
  return z;
}

FeatureAllocation simulate_ibp(const GibbsModel& model, double gamma, std::size_t n, std::uint64_t seed) {
  if (n == 0) return {};
  const PrimitiveCache cache = PrimitiveCache::build(model, n);
  Rng rng = make_stream(seed);
  return simulate_ibp(cache, gamma, n, rng);
}

double log_joint(const FeatureAllocation& allocation, const PrimitiveCache& cache, double gamma) {
  const std::size_t n = allocation.n();
  if (n > cache.n()) throw TableDepthError("log_joint: primitive cache shallower than n");
  if (!(gamma >= 0.0)) throw DomainError("log_joint: gamma must be >= 0");
  std::size_t k_n = 0;
  double value = -gamma * cache.sum_g11(n);
  const double one_minus_alpha = 1.0 - cache.alpha();
  for (std::size_t s : allocation.counts()) {
    if (s == 0) continue;
    ++k_n;
    value += log_rising_factorial(one_minus_alpha, s - 1) + cache.log_g(n - s, s);
  }
  if (k_n > 0) value += static_cast<double>(k_n) * std::log(gamma);
  return value;
}

double log_transition_probability(const FeatureAllocation& allocation, const PrimitiveCache& cache, double gamma) {
  const std::size_t n = allocation.n();
  if (n == 0) throw DomainError("log_transition_probability: empty allocation");
  if (n > cache.n()) throw TableDepthError("log_transition_probability: primitive cache shallower than n");
  const std::size_t last = n - 1;
  const double rate = gamma * cache.g11(last);
  double value = -rate;
  std::size_t fresh = 0;
  for (std::size_t k = 0; k < allocation.num_features(); ++k) {
    const bool taken = allocation(last, k);
    const std::size_t before = allocation.count(k) - (taken ? 1 : 0);
    if (before == 0) {
      if (taken) ++fresh;
      continue;
    }
    const double log_p = cache.log_take_probability(last, before);
    value += taken ? log_p : std::log1p(-std::exp(log_p));
  }
  if (fresh > 0) value += static_cast<double>(fresh) * std::log(rate);
  return value;
}

FeatureStatistics feature_statistics(const FeatureAllocation& allocation) {
  const std::size_t n = allocation.n();
  FeatureStatistics stats;
  stats.k_trajectory.assign(n, 0);
  stats.multiplicity.assign(n, 0);
  std::vector<std::size_t> first_counts(n, 0);
  for (std::size_t k = 0; k < allocation.num_features(); ++k) {
    const std::size_t s = allocation.count(k);
    if (s == 0) continue;
    ++stats.multiplicity[s - 1];
    ++first_counts[first_row(allocation.column(k))];
    stats.frequencies.push_back(static_cast<double>(s) / static_cast<double>(n));
  }
  std::partial_sum(first_counts.begin(), first_counts.end(), stats.k_trajectory.begin());
  return stats;
}

namespace {

// g_m(1,1) for m = 0..n_max-1, by the closed-form ratio for DP and PY, from
// a primitive cache up to depth kCacheDepth and from structural moments
// beyond.
constexpr std::size_t kCacheDepth = 1000;

std::vector<double> g11_sequence(const GibbsModel& model, std::size_t n_max) {
  std::vector<double> g(n_max, 1.0);
  if (model.closed_form()) {
    const double alpha = model.alpha();
    const double theta = model.free_parameter();
    // g_m(1,1) = (theta+alpha)_m / (theta+1)_m.
    double log_g = 0.0;
    for (std::size_t m = 1; m < n_max; ++m) {
      const double md = static_cast<double>(m - 1);
      log_g += std::log((theta + alpha + md) / (theta + 1.0 + md));
      g[m] = std::exp(log_g);
    }
    return g;
  }
  if (n_max > kCacheDepth) return structural_moments(model, n_max);
  const PrimitiveCache cache = PrimitiveCache::build(model, n_max);
  for (std::size_t m = 0; m < n_max; ++m) g[m] = cache.g11(m);
  return g;
}

}  // namespace

std::vector<double> expected_features_trajectory(const GibbsModel& model, double gamma, std::size_t n_max) {
  if (!(gamma >= 0.0)) throw DomainError("expected_features: gamma must be >= 0");
  std::vector<double> out(n_max);
  if (n_max == 0) return out;
  const std::vector<double> g = g11_sequence(model, n_max);
  double sum = 0.0;
  for (std::size_t j = 0; j < n_max; ++j) {
    sum += g[j];
    out[j] = gamma * sum;
  }
  return out;
}

double expected_features(const GibbsModel& model, double gamma, std::size_t n) {
  if (n == 0) return 0.0;
  return expected_features_trajectory(model, gamma, n).back();
}

std::vector<double> expected_singletons_trajectory(const GibbsModel& model, double gamma, std::size_t n_max) {
  if (!(gamma >= 0.0)) throw DomainError("expected_singletons: gamma must be >= 0");
  std::vector<double> out(n_max);
  if (n_max == 0) return out;
  const std::vector<double> g = g11_sequence(model, n_max);
  for (std::size_t j = 0; j < n_max; ++j) out[j] = gamma * static_cast<double>(j + 1) * g[j];
  return out;
}

std::vector<double> expected_multiplicities(const PrimitiveCache& cache, double gamma) {
  const std::size_t n = cache.n();
  std::vector<double> out(n);
  for (std::size_t m = 1; m <= n; ++m) {
    const double log_binom = std::lgamma(static_cast<double>(n + 1)) - std::lgamma(static_cast<double>(m + 1)) -
                             std::lgamma(static_cast<double>(n - m + 1));
    out[m - 1] = gamma * std::exp(log_binom + log_rising_factorial(1.0 - cache.alpha(), m - 1) + cache.log_gs1(m));
  }
  return out;
}

double log_stable_negative_moment_laplace(double alpha, double c) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("stable moment: alpha must lie in (0, 1)");
  if (!(c > 0.0)) throw DomainError("stable moment: c must be positive");
  const double c_alpha = std::pow(c, alpha);
  // exp(c^alpha - (c + u^{1/alpha})^alpha), with the difference formed
  // through expm1/log1p so it stays accurate for small u.
  auto f = [&](double u) {
    if (u <= 0.0) return 1.0;
    const double x = std::pow(u, 1.0 / alpha);
    const double diff = c_alpha * std::expm1(alpha * std::log1p(x / c));
    return std::exp(-diff);
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  const double integral = integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-13);
  return std::log(integral) - std::log(alpha) - std::lgamma(alpha);
}

std::optional<double> powerlaw_constant(const GibbsModel& model) {
  const double alpha = model.alpha();
  const double free = model.free_parameter();
  switch (model.family()) {
    case Family::kDirichlet:
      return std::nullopt;
    case Family::kPitmanYor:
      return std::exp(std::lgamma(free + 1.0) - std::log(alpha) - std::lgamma(free + alpha));
    case Family::kNig: {
      const double r = std::sqrt(free);
      return 2.0 / std::sqrt(std::numbers::pi) * r * std::exp(r) * std::cyl_bessel_k(1.0, r);
    }
    case Family::kNgg:
      return std::exp(log_stable_negative_moment_laplace(alpha, free));
  }
  return std::nullopt;
}

void write_allocation_csv(std::ostream& out, const FeatureAllocation& allocation) {
  out << "customer";
  for (std::size_t k = 0; k < allocation.num_features(); ++k) out << ",dish_" << (k + 1);
  out << '\n';
  if (allocation.num_features() == 0) return;
  for (std::size_t i = 0; i < allocation.n(); ++i) {
    out << (i + 1);
    for (std::size_t k = 0; k < allocation.num_features(); ++k) out << ',' << (allocation(i, k) ? '1' : '0');
    out << '\n';
  }
}

FeatureAllocation read_allocation_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("allocation csv: missing header");
  if (line.rfind("customer", 0) != 0) throw DomainError("allocation csv: header must start with 'customer'");
  const auto k = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  std::vector<std::vector<int>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream fields(line);
    std::string cell;
    std::getline(fields, cell, ',');  // customer index
    std::vector<int> row;
    while (std::getline(fields, cell, ',')) {
      if (cell != "0" && cell != "1") throw DomainError("allocation csv: entries must be 0 or 1");
      row.push_back(cell == "1" ? 1 : 0);
    }
    if (row.size() != k) throw DomainError("allocation csv: row width does not match header");
    rows.push_back(std::move(row));
  }
  return FeatureAllocation::from_rows(rows);
}

}  // namespace gibbs_ibp
