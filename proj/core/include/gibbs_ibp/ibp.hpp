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
 * The Gibbs-type Indian buffet process: sequential simulation, the joint
 * pmf of a feature allocation, feature statistics and power-law constants.
 */

#ifndef GIBBS_IBP_IBP_HPP_
#define GIBBS_IBP_IBP_HPP_

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <vector>

#include "gibbs_ibp/gibbs_weights.hpp"
#include "gibbs_ibp/rng.hpp"

namespace gibbs_ibp {

/**
 * Binary customer-by-dish matrix Z, stored column by column. Dish labels
 * are uniforms on [0, 1] standing in for draws from the (diffuse) base
 * measure; only the combinatorial structure is used downstream.
 */
class FeatureAllocation {
 public:
  FeatureAllocation() = default;
  explicit FeatureAllocation(std::size_t n) : n_(n) {}

  std::size_t n() const { return n_; }
  std::size_t num_features() const { return columns_.size(); }

  bool operator()(std::size_t i, std::size_t k) const { return columns_[k][i] != 0; }
  void set(std::size_t i, std::size_t k, bool value);
  const std::vector<std::uint8_t>& column(std::size_t k) const { return columns_[k]; }

  std::size_t count(std::size_t k) const { return counts_[k]; }
  const std::vector<std::size_t>& counts() const { return counts_; }

  double label(std::size_t k) const { return labels_[k]; }
  const std::vector<double>& labels() const { return labels_; }

  /// Append a customer who takes no dishes.
  void add_customer();
  /// Append an all-zero dish; returns its index.
  std::size_t add_feature(double label = 0.0);
  void remove_feature(std::size_t k);

  /// Drop empty dishes and order the rest by first appearance (ties keep
  /// their current relative order).
  void canonicalize();
  bool is_canonical() const;

  /// The first m customers, canonicalized.
  FeatureAllocation prefix(std::size_t m) const;
  /// Row i of the result is row perm[i] of this allocation; canonicalized.
  FeatureAllocation permuted_rows(const std::vector<std::size_t>& perm) const;

  static FeatureAllocation from_rows(const std::vector<std::vector<int>>& rows);
  std::vector<std::vector<int>> to_rows() const;

  bool operator==(const FeatureAllocation& other) const {
    return n_ == other.n_ && columns_ == other.columns_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::vector<std::uint8_t>> columns_;
  std::vector<std::size_t> counts_;
  std::vector<double> labels_;
};

/// Customer 1 takes Poisson(gamma) dishes; customer m + 1 takes dish k with
/// probability cache.take_probability(m, S_{m,k}) ((S_{m,k} - alpha) g_m(1,0)
/// for DP and PY) and then Poisson(gamma g_m(1,1)) new dishes. Throws NumericError if a take probability leaves [0, 1].
FeatureAllocation simulate_ibp(const PrimitiveCache& cache, double gamma, std::size_t n, Rng& rng);
FeatureAllocation simulate_ibp(const GibbsModel& model, double gamma, std::size_t n, std::uint64_t seed);

/// log p(Z_1..Z_n) with the base-measure differentials omitted:
/// K log gamma - gamma sum_j g_{j-1}(1,1) + sum_k [log (1-alpha)_{S_k-1} + log g_{n-S_k}(S_k,1)].
double log_joint(const FeatureAllocation& allocation, const PrimitiveCache& cache, double gamma);

/// log probability of the last customer's row given the first n - 1 rows:
/// Bernoulli terms for dishes already taken plus the Poisson point-process
/// density K+ log(gamma g_{n-1}(1,1)) - gamma g_{n-1}(1,1) of the dishes
/// the last customer is first to take.
double log_transition_probability(const FeatureAllocation& allocation, const PrimitiveCache& cache, double gamma);

struct FeatureStatistics {
  std::vector<std::size_t> k_trajectory;  ///< K_j, j = 1..n
  std::vector<std::size_t> multiplicity;  ///< K_{n,j}, j = 1..n (index j - 1)
  std::vector<double> frequencies;        ///< S_{n,k} / n per dish
};

FeatureStatistics feature_statistics(const FeatureAllocation& allocation);

/// gamma sum_{j=1}^n g_{j-1}(1,1).
double expected_features(const GibbsModel& model, double gamma, std::size_t n);
/// E[K_j] for j = 1..n_max.
std::vector<double> expected_features_trajectory(const GibbsModel& model, double gamma, std::size_t n_max);
/// E[K_{j,1}] = gamma j g_{j-1}(1,1) for j = 1..n_max.
std::vector<double> expected_singletons_trajectory(const GibbsModel& model, double gamma, std::size_t n_max);
/// E[K_{n,m}] = gamma binom(n,m) (1-alpha)_{m-1} g_{n-m}(m,1), m = 1..n.
std::vector<double> expected_multiplicities(const PrimitiveCache& cache, double gamma);

/// C in E[K_n] ~ gamma C n^alpha; empty for the Dirichlet process.
std::optional<double> powerlaw_constant(const GibbsModel& model);

/// e^{c^alpha} int_0^inf t^{-alpha} e^{-c t} f_alpha(t) dt, evaluated as
/// e^{c^alpha} / (alpha Gamma(alpha)) int_0^inf exp(-(c + u^{1/alpha})^alpha) du.
double log_stable_negative_moment_laplace(double alpha, double c);

/// CSV: header "customer,dish_1,...,dish_K" and one 0/1 row per customer.
/// An allocation without dishes is written as the header line alone.
void write_allocation_csv(std::ostream& out, const FeatureAllocation& allocation);
FeatureAllocation read_allocation_csv(std::istream& in);

}  // namespace gibbs_ibp

#endif  // GIBBS_IBP_IBP_HPP_
