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
 * Stick-breaking and Poisson-superposition constructions of the Gibbs-type
 * beta process for the Dirichlet and Pitman-Yor subclasses, and structural
 * densities for every subclass.
 */

#ifndef GIBBS_IBP_STICK_BREAKING_HPP_
#define GIBBS_IBP_STICK_BREAKING_HPP_

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "gibbs_ibp/gibbs_weights.hpp"
#include "gibbs_ibp/ibp.hpp"
#include "gibbs_ibp/rng.hpp"

namespace gibbs_ibp {

/// Stick fractions W_j ~ beta(a_j, b_j), j = 1, 2, ...: beta(1, theta) for
/// DP and beta(1 - alpha, theta + j alpha) for PY. DomainError for NGG/NIG.
struct StickLaw {
  double alpha = 0.0;
  double theta = 1.0;

  static StickLaw of(const GibbsModel& model);
  double a(std::size_t /*j*/) const { return 1.0 - alpha; }
  double b(std::size_t j) const { return theta + static_cast<double>(j) * alpha; }
};

/// P_i = W_i prod_{j<i} (1 - W_j), i = 1..count.
std::vector<double> sample_sticks(const GibbsModel& model, std::size_t count, Rng& rng);

/// E[prod_{j<=rounds} (1 - W_j)], the expected stick mass left after
/// `rounds` sticks.
double expected_residual_mass(const GibbsModel& model, std::size_t rounds);

/// Smallest I with expected_residual_mass(model, I) < tolerance.
std::size_t truncation_rounds(const GibbsModel& model, double tolerance = 1e-3, std::size_t max_rounds = 10'000'000);

struct Atom {
  double label = 0.0;
  double weight = 0.0;
};

struct TruncatedProcess {
  std::vector<Atom> atoms;
  std::size_t rounds = 0;
  double gamma = 0.0;
};

/// Round i = 1..rounds holds Poisson(gamma) atoms whose weights are
/// independent copies of P_i.
TruncatedProcess construct_truncated(const GibbsModel& model, double gamma, std::size_t rounds, Rng& rng);

/// Customer c takes atom k iff U_{c,k} < p_k. Only dishes taken at least
/// once are kept; the result is canonical.
FeatureAllocation draw_bernoulli(const TruncatedProcess& process, std::size_t n, Rng& rng);

/// Same law as draw_bernoulli(construct_truncated(model, gamma, rounds), n)
/// without materializing atoms no customer takes. Candidate atoms are those
/// with min_c U_c < W_i, which happens with probability
/// q_i = 1 - (b_i)_n / (a_i + b_i)_n given only the round; the remaining
/// factor prod_{j<i} (1 - W_j) is then multiplied in lazily, stopping as
/// soon as the weight falls below min_c U_c.
class ThinnedStickSampler {
 public:
  ThinnedStickSampler(const GibbsModel& model, double gamma, std::size_t rounds, std::size_t n);

  FeatureAllocation operator()(Rng& rng) const;

  /// Expected number of candidate atoms per draw, gamma sum_i q_i.
  double expected_candidates() const { return total_rate_; }
  std::size_t rounds() const { return rounds_; }

 private:
  StickLaw law_;
  double gamma_;
  std::size_t rounds_;
  std::size_t n_;
  double total_rate_ = 0.0;
  std::vector<double> cumulative_q_;                 // size rounds
  std::vector<std::vector<double>> mixture_cdf_;     // per round, size n
};

/// Density of the structural distribution mu_1 at p in (0, 1).
double structural_density(const GibbsModel& model, double p);
double log_structural_density(const GibbsModel& model, double p);

/// E[(1 - P)^m] for P ~ mu_1, m = 0..count-1; this equals g_m(1,1). Beta
/// moments for DP and PY; otherwise one Simpson grid in t = -log p shared
/// by every m, which reaches depths where weight tables are impractical.
std::vector<double> structural_moments(const GibbsModel& model, std::size_t count);

/// Intensity of the depth-n Poisson process in the superposition
/// representation, per unit base-measure mass:
/// Gamma(1+theta)/(Gamma(1-alpha)Gamma(theta+alpha)) p^{-alpha} (1-p)^{theta+alpha+n-1}.
double superposition_intensity(const GibbsModel& model, std::size_t depth, double p);

/// CSV "p,density" over the given grid.
void write_structural_density_csv(std::ostream& out, const GibbsModel& model, std::span<const double> grid);

/// CSV "p,depth,intensity" over grid x depths 0..max_depth.
void write_superposition_csv(std::ostream& out, const GibbsModel& model, std::size_t max_depth,
                             std::span<const double> grid);

}  // namespace gibbs_ibp

#endif  // GIBBS_IBP_STICK_BREAKING_HPP_
