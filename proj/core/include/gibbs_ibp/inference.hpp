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
 * Posterior inference for the linear-Gaussian latent feature model
 * Y = (W o Z) A + E under any Gibbs-type IBP prior. The sampler touches the
 * prior only through a PrimitiveCache.
 */

#ifndef GIBBS_IBP_INFERENCE_HPP_
#define GIBBS_IBP_INFERENCE_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gibbs_ibp/gibbs_weights.hpp"
#include "gibbs_ibp/ibp.hpp"
#include "gibbs_ibp/rng.hpp"

namespace gibbs_ibp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// -(np/2) log 2pi - np log sigma_y - |Y - (W o Z) A|_F^2 / (2 sigma_y^2).
double log_likelihood(const Matrix& y, const FeatureAllocation& z, const Matrix& w, const Matrix& a, double sigma_y);

/// (W o Z) A.
Matrix feature_mean(const FeatureAllocation& z, const Matrix& w, const Matrix& a);

struct Scales {
  double sigma_y = 1.0;
  double sigma_w = 1.0;
  double sigma_a = 1.0;  ///< shared by every column of A
};

struct SyntheticData {
  Matrix y;
  Matrix w;
  Matrix a;
};

/// W_ik ~ N(0, sigma_w^2), A_kj ~ N(0, sigma_a^2), E_ij ~ N(0, sigma_y^2).
SyntheticData synthesize_data(const FeatureAllocation& z_true, std::size_t p, const Scales& scales,
                              std::uint64_t seed);

/// Two dense features splitting the rows alternately, then `singletons`
/// features each held by one row, spread evenly over the rows.
FeatureAllocation dense_plus_singletons_design(std::size_t n, std::size_t singletons);

struct Priors {
  double gamma_shape = 1.0;  ///< lambda_1
  double gamma_rate = 1.0;   ///< lambda_2
  /// Inverse-gamma(shape, scale) on sigma_y^2, sigma_w^2 and every sigma_{A,j}^2.
  double variance_shape = 1.0;
  double variance_scale = 1.0;
};

struct ChainConfig {
  std::size_t iterations = 1000;  ///< sweeps after the initial state
  std::size_t burn_in = 0;
  std::size_t thin = 1;
  std::uint64_t seed = 1;
  Priors priors;
  bool update_gamma = true;
  bool update_model = true;  ///< slice-sample alpha and theta/beta
  bool update_scales = true;
  double slice_width = 1.0;  ///< initial bracket on the log scale
  std::size_t slice_max_steps = 32;
};

struct LatentFactorState {
  FeatureAllocation z;
  Matrix w;  ///< n x K
  Matrix a;  ///< K x p
  double sigma_y = 1.0;
  double sigma_w = 1.0;
  Vector sigma_a;  ///< p
  double gamma = 1.0;
  GibbsModel model = GibbsModel::dirichlet(1.0);
  std::shared_ptr<const PrimitiveCache> cache;
  Rng rng;

  std::size_t n() const { return z.n(); }
  std::size_t p() const { return static_cast<std::size_t>(a.cols()); }
  std::size_t num_features() const { return z.num_features(); }
  /// Throws DomainError when dimensions or scales are inconsistent.
  void validate() const;
};

/// No features, unit scales, the given prior; NGG and NIG weights switch to
/// quadrature. The rng is stream 0 of `seed`.
LatentFactorState initial_state(const Matrix& y, const GibbsModel& model, double gamma, std::uint64_t seed);

/// Pr{Z_ik = 1 | Z_-(i,k)} with S = S_k^{(-i)} > 0, treating row i as the
/// last of n customers; (S - alpha) g_{n-1}(1,0) for DP and PY. Throws
/// NumericError outside [0, 1].
double feature_prior_probability(const PrimitiveCache& cache, std::size_t s_minus_i);

/// Shape and rate of gamma | Z: (lambda_1 + K_n, lambda_2 + sum_j g_{j-1}(1,1)).
std::pair<double, double> gamma_posterior(const PrimitiveCache& cache, std::size_t k, const Priors& priors);

/// One slice-sampling update of x (Neal 2003: stepping out, then shrinkage).
double slice_sample(double x, const std::function<double(double)>& log_density, double width, std::size_t max_steps,
                    Rng& rng);

/// log p(Z | gamma, model) + log p(Y | ...) + Gaussian priors of W and A +
/// priors of gamma, the variances and the model parameters.
double state_log_joint(const LatentFactorState& state, const Matrix& y, const Priors& priors);

/// Individual moves of a sweep, in order.
void resample_features(LatentFactorState& state, const Matrix& y);         // (a)
void resample_singletons(LatentFactorState& state, const Matrix& y);       // (b)
void resample_weights(LatentFactorState& state, const Matrix& y);          // (c)
void resample_gamma(LatentFactorState& state, const Priors& priors);       // (d)
void resample_hyperparameters(LatentFactorState& state, const Matrix& y,  // (e)
                              const ChainConfig& config);

void gibbs_sweep(LatentFactorState& state, const Matrix& y, const ChainConfig& config);

/// Replace y by a draw from p(Y | Z, W, A, sigma_y).
void resample_data(const LatentFactorState& state, Matrix& y);

/// A draw of every latent quantity from the prior, with the model
/// parameters held at state.model; data of shape n x p.
LatentFactorState sample_prior_state(const GibbsModel& model, std::size_t n, std::size_t p, const Priors& priors,
                                     Rng& rng);

struct Sample {
  std::size_t chain = 0;
  std::size_t iteration = 0;
  std::size_t k = 0;
  std::size_t nnz = 0;
  double gamma = 0.0;
  double alpha = 0.0;
  double free_parameter = 0.0;
  double sigma_y = 0.0;
  double sigma_w = 0.0;
  std::vector<double> sigma_a;
  double log_joint = 0.0;
};

Sample summarize(const LatentFactorState& state, const Matrix& y, const Priors& priors, std::size_t chain,
                 std::size_t iteration);

/// Thread-safe; each chain's samples keep their append order.
class SampleArchive {
 public:
  void append(const Sample& sample);
  std::vector<std::size_t> chains() const;
  std::vector<Sample> chain(std::size_t id) const;
  std::size_t size() const;

  /// chain,iteration,K,nnz,gamma,alpha,theta,sigma_y,sigma_w,sigma_a_1..p,log_joint
  void write_csv(std::ostream& out) const;

 private:
  mutable std::mutex mutex_;
  std::map<std::size_t, std::vector<Sample>> samples_;
};

/// Records the initial state as iteration 0, then every thin-th sweep after
/// burn_in. A non-finite log-joint aborts with NumericError.
LatentFactorState run_chain(const Matrix& y, LatentFactorState state, const ChainConfig& config,
                            SampleArchive& archive, std::size_t chain_id = 0);

/// One thread per chain; chain c starts from initial_state with stream c of
/// config.seed.
std::vector<LatentFactorState> run_chains(const Matrix& y, const GibbsModel& model, double gamma,
                                          const ChainConfig& config, std::size_t chains, SampleArchive& archive);

/// JSON manifest: config, seed, model, data shape and the primitive
/// cache's content hash.
void write_manifest(std::ostream& out, const ChainConfig& config, const LatentFactorState& initial,
                    std::size_t chains);

struct GewekeConfig {
  std::size_t n = 8;
  std::size_t p = 4;
  GibbsModel model = GibbsModel::dirichlet(1.0);
  std::size_t rounds = 100000;
  std::uint64_t seed = 1;
  Priors priors;
  std::size_t batches = 50;  ///< batch means for the successive-conditional s.e.
};

struct GewekeStatistic {
  std::string name;
  double marginal_mean = 0.0;
  double successive_mean = 0.0;
  double z = 0.0;
};

/// Compares the marginal-conditional simulator (independent prior draws)
/// with the successive-conditional one (sweep, then redraw Y) on K, nnz,
/// singletons, gamma, log sigma_y, log sigma_w and mean log sigma_A. The
/// model parameters stay fixed.
std::vector<GewekeStatistic> geweke_check(const GewekeConfig& config);

Matrix read_matrix_csv(std::istream& in);
void write_matrix_csv(std::ostream& out, const Matrix& m, const std::string& prefix = "x");

}  // namespace gibbs_ibp

#endif  // GIBBS_IBP_INFERENCE_HPP_
