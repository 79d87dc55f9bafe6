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
 * Gibbs weights V_{n,k}, the primitives g_n(z1, z2) built from them, the
 * law of the number of blocks and hyperparameter calibration.
 *
 * Four subclasses are supported: Dirichlet (alpha = 0), Pitman-Yor,
 * normalized generalized gamma (NGG) and its alpha = 1/2 special case,
 * the normalized inverse Gaussian (NIG). NGG uses the convention
 * h(t) = exp(beta^alpha - beta t) for its tilting function.
 */

#ifndef GIBBS_IBP_GIBBS_WEIGHTS_HPP_
#define GIBBS_IBP_GIBBS_WEIGHTS_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "gibbs_ibp/special_functions.hpp"

namespace gibbs_ibp {

struct Dirichlet {
  double theta = 1.0;
};
struct PitmanYor {
  double alpha = 0.5;
  double theta = 1.0;
};
struct NormalizedGeneralizedGamma {
  double alpha = 0.5;
  double beta = 1.0;
};
struct NormalizedInverseGaussian {
  double beta = 1.0;
};

enum class Family { kDirichlet, kPitmanYor, kNgg, kNig };

std::string to_string(Family family);
Family parse_family(const std::string& name);

enum class NggWeightMethod {
  kMonteCarlo,  ///< tilted-stable estimator of the last row, as in the reference scheme
  kQuadrature,  ///< deterministic one-dimensional quadrature of the last row
};

struct McConfig {
  std::uint64_t samples = 100000;
  std::uint64_t seed = 1;
  NggWeightMethod method = NggWeightMethod::kMonteCarlo;
};

class GibbsModel {
 public:
  using Variant = std::variant<Dirichlet, PitmanYor, NormalizedGeneralizedGamma, NormalizedInverseGaussian>;

  GibbsModel(Variant variant, McConfig mc = {});

  static GibbsModel dirichlet(double theta) { return GibbsModel(Dirichlet{theta}); }
  static GibbsModel pitman_yor(double alpha, double theta) { return GibbsModel(PitmanYor{alpha, theta}); }
  static GibbsModel ngg(double alpha, double beta, McConfig mc = {}) {
    return GibbsModel(NormalizedGeneralizedGamma{alpha, beta}, mc);
  }
  static GibbsModel nig(double beta, McConfig mc = {}) {
    return GibbsModel(NormalizedInverseGaussian{beta}, mc);
  }

  const Variant& variant() const { return variant_; }
  const McConfig& mc() const { return mc_; }
  Family family() const;
  std::string family_name() const { return to_string(family()); }

  /// Discount parameter: 0 for DP, 1/2 for NIG.
  double alpha() const;
  /// theta for DP and PY, beta for NGG and NIG.
  double free_parameter() const;
  /// DP and PY weights have closed forms; NGG and NIG do not.
  bool closed_form() const;

  /// Copy with (alpha, theta-or-beta) replaced. alpha is ignored for DP and NIG.
  GibbsModel with_parameters(double alpha, double free) const;
  GibbsModel with_mc(McConfig mc) const;

  /// Human-readable form, e.g. "py(alpha=0.5,theta=1)".
  std::string describe() const;

 private:
  Variant variant_;
  McConfig mc_;
};

struct ClosedFormProvenance {};
struct SeriesProvenance {};
struct QuadratureProvenance {};
struct MonteCarloProvenance {
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  /// log V_{1,1} before normalization; its deviation from 0 is pure MC error.
  double raw_log_v11 = 0.0;
  /// Standard error of the raw V_{1,1}.
  double v11_se = 0.0;
  /// Largest relative standard error among the last-row estimates.
  double max_last_row_rel_se = 0.0;
};
using WeightProvenance =
    std::variant<ClosedFormProvenance, SeriesProvenance, QuadratureProvenance, MonteCarloProvenance>;

/**
 * Triangular array of log V_{n,k}, 1 <= k <= n <= n_max.
 */
struct WeightTable {
  TriangularArray log_v;
  double alpha = 0.0;
  WeightProvenance provenance;

  std::size_t n_max() const { return log_v.n_max(); }
  double log_value(std::size_t n, std::size_t k) const;
  double value(std::size_t n, std::size_t k) const { return std::exp(log_value(n, k)); }
};

WeightTable build_weight_table(const GibbsModel& model, std::size_t n_max);

/// NGG weights from the explicit incomplete-gamma series, evaluated in
/// 100-digit arithmetic. Test oracle only; refuses n_max > 12.
WeightTable ngg_weights_smalln(double alpha, double beta, std::size_t n_max);

struct McRow {
  std::vector<double> log_v;   ///< log V_{n,k}, index k - 1
  std::vector<double> rel_se;  ///< standard error of V_{n,k} divided by the estimate
  std::uint64_t samples = 0;
};

/// Monte-Carlo estimate of row n of the NGG weights. Each k uses its own
/// stream derived from `seed`, so rows are reproducible entry by entry.
McRow ngg_last_row_mc(double alpha, double beta, std::size_t n, std::uint64_t samples, std::uint64_t seed);

/// Row n of the NGG weights by adaptive quadrature of
/// V_{n,k} = e^b (alpha b)^k / Gamma(n) int_0^inf x^{n-1} (1+x)^{k alpha - n} e^{-b (1+x)^alpha} dx,
/// with b = beta^alpha.
std::vector<double> ngg_last_row_quadrature(double alpha, double beta, std::size_t n);

/// Fill rows n-1, ..., 1 from row n by the forward recursion run backwards.
/// With `normalize`, every entry is divided by the resulting V_{1,1}.
WeightTable weight_table_from_last_row(const std::vector<double>& log_last_row, double alpha, bool normalize);

/// Standard errors of every entry of a backward-filled table whose last
/// row has independent estimates with the given relative errors. Entry
/// (n, k) of the result holds the standard error divided by V_{n,k}.
TriangularArray propagate_standard_errors(const WeightTable& unnormalized, const std::vector<double>& last_row_rel_se);

/**
 * The coefficients alpha^{-k} C(n, k; alpha) multiplying V in the primitives
 * and in the block-count law. Unsigned Stirling numbers when alpha = 0.
 */
class BlockCoefficients {
 public:
  BlockCoefficients(std::size_t n_max, double alpha);

  std::size_t n_max() const;
  double alpha() const { return alpha_; }
  /// log[alpha^{-k} C(n, k; alpha)]; 1 at n = k = 0, -inf for k = 0 < n.
  double log_value(std::size_t n, std::size_t k) const;

 private:
  double alpha_;
  std::variant<GfcTable, StirlingTable> table_;
};

/// log g_n(z1, z2) = log sum_k V_{n+z1, k+z2} alpha^{-k} C(n, k; alpha), n >= 1, z2 <= z1.
double log_primitive(const WeightTable& table, const BlockCoefficients& coef, std::size_t n, std::size_t z1,
                     std::size_t z2);
double primitive(const WeightTable& table, const BlockCoefficients& coef, std::size_t n, std::size_t z1,
                 std::size_t z2);

enum class PrimitiveKind { k10, k11 };

/// Pitman-Yor closed forms: g_n(1,0) = 1/(theta+n) and
/// g_n(1,1) = Gamma(theta+1) Gamma(theta+alpha+n) / (Gamma(theta+n+1) Gamma(theta+alpha)).
double py_primitive_closed(double alpha, double theta, std::size_t n, PrimitiveKind which);
double log_py_primitive_closed(double alpha, double theta, std::size_t n, PrimitiveKind which);

/**
 * Every model constant the buffet scheme, the joint pmf and the samplers
 * consume, for datasets of up to n customers.
 */
class PrimitiveCache {
 public:
  static PrimitiveCache build(const GibbsModel& model, std::size_t n);
  /// Reuse a prebuilt table (must cover depth n).
  static PrimitiveCache build(const GibbsModel& model, std::size_t n, std::shared_ptr<const WeightTable> table);

  const GibbsModel& model() const { return model_; }
  double alpha() const { return alpha_; }
  std::size_t n() const { return n_; }

  /// g_m(1,0), 1 <= m <= n - 1.
  double log_g10(std::size_t m) const;
  double g10(std::size_t m) const { return std::exp(log_g10(m)); }
  /// g_m(1,1), 0 <= m <= n - 1, with g_0(1,1) = 1.
  double log_g11(std::size_t m) const;
  double g11(std::size_t m) const { return std::exp(log_g11(m)); }
  /// g_m(s,1) for m >= 0, s >= 1, m + s <= n. At m = 0 this is V_{s,1}.
  double log_g(std::size_t m, std::size_t s) const;
  /// g_{n-s}(s,1), 1 <= s <= n.
  double log_gs1(std::size_t s) const { return log_g(n_ - s, s); }

  /// log Pr{customer m + 1 takes a dish held by s of the first m customers}
  /// = log g(m+1, s+1) - log g(m, s), for 1 <= s <= m < n. For DP and PY this
  /// is (s - alpha) g_m(1,0); in general the ratio of primitives
  /// (s - alpha) g_{m-s}(s+1,1) / g_{m-s}(s,1) is needed, since
  /// V_{m+1,k} / V_{m,k} then depends on k.
  double log_take_probability(std::size_t m, std::size_t s) const;
  double take_probability(std::size_t m, std::size_t s) const { return std::exp(log_take_probability(m, s)); }

  /// sum_{j=1}^{m} g_{j-1}(1,1) for m <= n; the Poisson rate of K_m per unit gamma.
  double sum_g11(std::size_t m) const;
  double sum_g11() const { return sum_g11(n_); }

  const WeightTable& weights() const { return *table_; }
  const BlockCoefficients& coefficients() const { return *coef_; }

  /// git-style SHA-1 of the cached constants, for run manifests.
  std::string content_hash() const;

 private:
  PrimitiveCache(const GibbsModel& model) : model_(model) {}

  GibbsModel model_;
  double alpha_ = 0.0;
  std::size_t n_ = 0;
  std::shared_ptr<const WeightTable> table_;
  std::shared_ptr<const BlockCoefficients> coef_;
  std::vector<double> log_g10_;
  std::vector<double> log_g11_;
  std::vector<double> cumsum_g11_;
  std::vector<double> log_gs1_;
  std::vector<double> log_take_last_;  // log_take_probability(n - 1, s)
};

struct PrimitiveIdentityDefects {
  /// max |g_{m+1}(s,1)/g_m(s,1) + (s - alpha) g_m(s+1,1)/g_m(s,1) - 1|: a
  /// dish either is or is not taken by the next customer. Holds for every
  /// Gibbs-type model.
  double complement = 0.0;
  /// max relative defect of g_m(s+1,1) = g_m(s,1) g_{m+s}(1,0), which holds
  /// exactly only when V_{n+1,k} / V_{n,k} is free of k (DP and PY).
  double product = 0.0;
};

/// Scan all m + s + 1 <= n.
PrimitiveIdentityDefects primitive_identity_defects(const PrimitiveCache& cache);

/// g(n, s) = (1 - alpha)_{s-1} g_{n-s}(s, 1): probability that the block
/// opened at draw n - s + 1 receives every one of the last s draws.
double persistence_probability(const PrimitiveCache& cache, std::size_t n, std::size_t s);

/// Pr{B_n = k} = V_{n,k} alpha^{-k} C(n, k; alpha), k = 1..n. Throws
/// NumericError when the vector does not sum to one within tolerance
/// (1e-8 for closed forms and quadrature; 3 MC standard errors, or 1e-3
/// when no error estimate is available, for Monte-Carlo tables).
std::vector<double> block_count_distribution(const GibbsModel& model, std::size_t n);
std::vector<double> block_count_distribution(const WeightTable& table, const BlockCoefficients& coef,
                                             std::size_t n);

double expected_blocks(const GibbsModel& model, std::size_t n);

struct CalibrationResult {
  GibbsModel model;
  double parameter = 0.0;  ///< fitted theta or beta
  double achieved = 0.0;   ///< E[B_m] at the fitted parameter
  std::size_t m = 50;
  int iterations = 0;
};

/// Bisect the free parameter (theta or beta) so that E[B_m] = target within
/// `tolerance`. NGG and NIG use quadrature weights, which makes the result
/// deterministic. Throws DomainError for unreachable targets.
CalibrationResult calibrate(Family family, double alpha, double target, std::size_t m = 50,
                            double tolerance = 1e-6);

/**
 * Optional on-disk reuse of weight tables keyed by (variant, parameters,
 * n_max, MC configuration). Closed-form tables are cheap and never cached.
 */
std::string weight_cache_key(const GibbsModel& model, std::size_t n_max);
void save_weight_table(const WeightTable& table, const std::string& path);
WeightTable load_weight_table(const std::string& path);
/// Build or fetch from `directory` (empty: no caching).
std::shared_ptr<const WeightTable> cached_weight_table(const GibbsModel& model, std::size_t n_max,
                                                       const std::string& directory);

}  // namespace gibbs_ibp

#endif  // GIBBS_IBP_GIBBS_WEIGHTS_HPP_
