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


#include "gibbs_ibp/inference.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <thread>

#include <boost/math/special_functions/gamma.hpp>
#include <json.hpp>

#include "detail.hpp"
#include "gibbs_ibp/error.hpp"

namespace gibbs_ibp {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

double log_normal(double x, double sigma) { return -0.5 * kLog2Pi - std::log(sigma) - 0.5 * (x / sigma) * (x / sigma); }

// log density of InvGamma(shape, scale) at the variance v.
double log_inverse_gamma(double v, double shape, double scale) {
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(v) - scale / v;
}

double log_gamma_density(double x, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

Matrix masked_weights(const FeatureAllocation& z, const Matrix& w) {
  Matrix x = Matrix::Zero(w.rows(), w.cols());
  for (std::size_t k = 0; k < z.num_features(); ++k) {
    const auto& column = z.column(k);
    for (std::size_t i = 0; i < z.n(); ++i) {
      if (column[i] != 0) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = w(i, k);
    }
  }
  return x;
}

Vector standard_normal_vector(Eigen::Index size, Rng& rng) {
  Vector v(size);
  for (Eigen::Index i = 0; i < size; ++i) v(i) = normal_variate(rng);
  return v;
}

// Draw from N(P^{-1} b, P^{-1}) given the precision P.
Vector sample_gaussian_precision(const Matrix& precision, const Vector& b, Rng& rng) {
  const Eigen::LLT<Matrix> llt(precision);
  if (llt.info() != Eigen::Success) throw NumericError("posterior precision is not positive definite");
  const Vector mean = llt.solve(b);
  const Vector noise = llt.matrixU().solve(standard_normal_vector(b.size(), rng));
  return mean + noise;
}

void remove_features(LatentFactorState& state, std::vector<std::size_t> drop) {
  if (drop.empty()) return;
  std::sort(drop.begin(), drop.end());
  const auto k_old = static_cast<Eigen::Index>(state.num_features());
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < k_old; ++k) {
    if (!std::binary_search(drop.begin(), drop.end(), static_cast<std::size_t>(k))) keep.push_back(k);
  }
  Matrix w(state.w.rows(), static_cast<Eigen::Index>(keep.size()));
  Matrix a(static_cast<Eigen::Index>(keep.size()), state.a.cols());
  for (std::size_t j = 0; j < keep.size(); ++j) {
    w.col(static_cast<Eigen::Index>(j)) = state.w.col(keep[j]);
    a.row(static_cast<Eigen::Index>(j)) = state.a.row(keep[j]);
  }
  for (auto it = drop.rbegin(); it != drop.rend(); ++it) state.z.remove_feature(*it);
  state.w = std::move(w);
  state.a = std::move(a);
}

// Order dishes by first appearance, moving W columns and A rows with Z.
// Same stable sort as FeatureAllocation::canonicalize; no dish is empty here.
void canonicalize_state(LatentFactorState& state) {
  if (state.z.is_canonical()) return;
  const std::size_t k_n = state.num_features();
  std::vector<std::size_t> first(k_n, state.n());
  for (std::size_t k = 0; k < k_n; ++k) {
    for (std::size_t i = 0; i < state.n(); ++i) {
      if (state.z(i, k)) {
        first[k] = i;
        break;
      }
    }
  }
  std::vector<std::size_t> order(k_n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return first[a] < first[b]; });
  Matrix w(state.w.rows(), state.w.cols());
  Matrix a(state.a.rows(), state.a.cols());
  for (std::size_t j = 0; j < k_n; ++j) {
    w.col(static_cast<Eigen::Index>(j)) = state.w.col(static_cast<Eigen::Index>(order[j]));
    a.row(static_cast<Eigen::Index>(j)) = state.a.row(static_cast<Eigen::Index>(order[j]));
  }
  state.z.canonicalize();
  state.w = std::move(w);
  state.a = std::move(a);
}

// Parameters slice-sampled on the log scale: (alpha, theta + alpha) for PY,
// theta for DP, (alpha, beta) for NGG and beta for NIG.
struct ModelCoordinates {
  std::vector<double> values;
};

ModelCoordinates to_coordinates(const GibbsModel& model) {
  switch (model.family()) {
    case Family::kDirichlet:
      return {{std::log(model.free_parameter())}};
    case Family::kPitmanYor:
      return {{std::log(model.alpha()), std::log(model.free_parameter() + model.alpha())}};
    case Family::kNgg:
      return {{std::log(model.alpha()), std::log(model.free_parameter())}};
    case Family::kNig:
      return {{std::log(model.free_parameter())}};
  }
  return {};
}

GibbsModel from_coordinates(const GibbsModel& model, const std::vector<double>& x) {
  switch (model.family()) {
    case Family::kDirichlet:
    case Family::kNig:
      return model.with_parameters(model.alpha(), std::exp(x[0]));
    case Family::kPitmanYor: {
      const double alpha = std::exp(x[0]);
      return model.with_parameters(alpha, std::exp(x[1]) - alpha);
    }
    case Family::kNgg:
      return model.with_parameters(std::exp(x[0]), std::exp(x[1]));
  }
  return model;
}

// Log prior density of the coordinates, Jacobian included: alpha ~ U(0,1);
// theta (DP), theta + alpha (PY) and beta ~ gamma(1,1).
double log_coordinate_prior(Family family, const std::vector<double>& x) {
  auto log_alpha = [](double u) { return u < 0.0 ? u : kNegInf; };
  auto log_gamma11 = [](double u) { return u - std::exp(u); };
  switch (family) {
    case Family::kDirichlet:
    case Family::kNig:
      return log_gamma11(x[0]);
    case Family::kPitmanYor:
    case Family::kNgg:
      return log_alpha(x[0]) + log_gamma11(x[1]);
  }
  return kNegInf;
}

double log_model_prior(const GibbsModel& model) {
  const double alpha = model.alpha();
  const double free = model.free_parameter();
  switch (model.family()) {
    case Family::kDirichlet:
    case Family::kNig:
      return -free;
    case Family::kPitmanYor:
      return -(free + alpha);
    case Family::kNgg:
      return -free;
  }
  return kNegInf;
}

GibbsModel inference_model(const GibbsModel& model) {
  if (model.closed_form()) return model;
  McConfig mc = model.mc();
  mc.method = NggWeightMethod::kQuadrature;
  return model.with_mc(mc);
}

}  // namespace

Matrix feature_mean(const FeatureAllocation& z, const Matrix& w, const Matrix& a) {
  if (static_cast<std::size_t>(w.rows()) != z.n() || static_cast<std::size_t>(w.cols()) != z.num_features() ||
      a.rows() != w.cols()) {
    throw DomainError("feature_mean: inconsistent dimensions");
  }
  if (z.num_features() == 0) return Matrix::Zero(w.rows(), a.cols());
  return masked_weights(z, w) * a;
}

double log_likelihood(const Matrix& y, const FeatureAllocation& z, const Matrix& w, const Matrix& a, double sigma_y) {
  if (!(sigma_y > 0.0)) throw DomainError("log_likelihood: sigma_y must be positive");
  if (static_cast<std::size_t>(y.rows()) != z.n() || y.cols() != a.cols()) {
    throw DomainError("log_likelihood: data shape does not match the state");
  }
  const double np = static_cast<double>(y.size());
  const double ss = (y - feature_mean(z, w, a)).squaredNorm();
  return -0.5 * np * kLog2Pi - np * std::log(sigma_y) - ss / (2.0 * sigma_y * sigma_y);
}

SyntheticData synthesize_data(const FeatureAllocation& z_true, std::size_t p, const Scales& scales,
                              std::uint64_t seed) {
  Rng rng = make_stream(seed);
  const auto n = static_cast<Eigen::Index>(z_true.n());
  const auto k = static_cast<Eigen::Index>(z_true.num_features());
  const auto pp = static_cast<Eigen::Index>(p);
  SyntheticData data;
  data.w = Matrix(n, k);
  data.a = Matrix(k, pp);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) data.w(i, j) = scales.sigma_w * normal_variate(rng);
  }
  for (Eigen::Index j = 0; j < pp; ++j) {
    for (Eigen::Index i = 0; i < k; ++i) data.a(i, j) = scales.sigma_a * normal_variate(rng);
  }
  data.y = feature_mean(z_true, data.w, data.a);
  for (Eigen::Index j = 0; j < pp; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) data.y(i, j) += scales.sigma_y * normal_variate(rng);
  }
  return data;
}

FeatureAllocation dense_plus_singletons_design(std::size_t n, std::size_t singletons) {
  if (n < 2) throw DomainError("design: need at least two rows");
  FeatureAllocation z(n);
  const std::size_t even = z.add_feature(0.0);
  const std::size_t odd = z.add_feature(0.0);
  for (std::size_t i = 0; i < n; ++i) z.set(i, i % 2 == 0 ? even : odd, true);
  if (singletons >= n) throw DomainError("design: more singletons than rows after the first");
  // Singletons start at row 1 so the two dense dishes stay first in order.
  for (std::size_t j = 0; j < singletons; ++j) {
    const std::size_t row = 1 + j * (n - 1) / singletons;
    z.set(row, z.add_feature(0.0), true);
  }
  z.canonicalize();
  return z;
}

void LatentFactorState::validate() const {
  const auto k = static_cast<Eigen::Index>(z.num_features());
  if (w.rows() != static_cast<Eigen::Index>(z.n()) || w.cols() != k || a.rows() != k || sigma_a.size() != a.cols()) {
    throw DomainError("LatentFactorState: inconsistent dimensions");
  }
  if (!(sigma_y > 0.0 && sigma_w > 0.0 && gamma > 0.0 && (sigma_a.array() > 0.0).all())) {
    throw DomainError("LatentFactorState: scales must be positive");
  }
  if (!cache || cache->n() != z.n()) throw DomainError("LatentFactorState: primitive cache does not match n");
}

LatentFactorState initial_state(const Matrix& y, const GibbsModel& model, double gamma, std::uint64_t seed) {
  if (y.rows() == 0) throw DomainError("initial_state: no data");
  LatentFactorState state;
  state.z = FeatureAllocation(static_cast<std::size_t>(y.rows()));
  state.w = Matrix(y.rows(), 0);
  state.a = Matrix(0, y.cols());
  state.sigma_a = Vector::Ones(y.cols());
  state.gamma = gamma;
  state.model = inference_model(model);
  state.cache = std::make_shared<const PrimitiveCache>(PrimitiveCache::build(state.model, state.z.n()));
  state.rng = make_stream(seed);
  return state;
}

double feature_prior_probability(const PrimitiveCache& cache, std::size_t s_minus_i) {
  const std::size_t n = cache.n();
  if (n < 2) throw DomainError("feature_prior_probability: needs n >= 2");
  const double p = cache.take_probability(n - 1, s_minus_i);
  if (!(p >= 0.0 && p <= 1.0)) {
    throw NumericError("feature_prior_probability: " + detail::format_double(p) +
                       " outside [0, 1]; the primitive cache is corrupt");
  }
  return p;
}

std::pair<double, double> gamma_posterior(const PrimitiveCache& cache, std::size_t k, const Priors& priors) {
  return {priors.gamma_shape + static_cast<double>(k), priors.gamma_rate + cache.sum_g11()};
}

double slice_sample(double x, const std::function<double(double)>& log_density, double width, std::size_t max_steps,
                    Rng& rng) {
  const double f0 = log_density(x);
  if (!std::isfinite(f0)) throw NumericError("slice_sample: starting point has zero density");
  const double level = f0 - exponential(rng);
  double left = x - width * uniform_open(rng);
  double right = left + width;
  auto steps_left = static_cast<std::size_t>(static_cast<double>(max_steps) * uniform_open(rng));
  std::size_t steps_right = max_steps > 0 ? max_steps - 1 - std::min(steps_left, max_steps - 1) : 0;
  while (steps_left > 0 && log_density(left) > level) {
    left -= width;
    --steps_left;
  }
  while (steps_right > 0 && log_density(right) > level) {
    right += width;
    --steps_right;
  }
  for (;;) {
    const double candidate = left + (right - left) * uniform_open(rng);
    if (log_density(candidate) > level) return candidate;
    if (candidate < x) {
      left = candidate;
    } else {
      right = candidate;
    }
    if (right - left < 1e-14 * (1.0 + std::fabs(x))) return x;
  }
}

double state_log_joint(const LatentFactorState& state, const Matrix& y, const Priors& priors) {
  double value = log_joint(state.z, *state.cache, state.gamma);
  value += log_likelihood(y, state.z, state.w, state.a, state.sigma_y);
  for (Eigen::Index k = 0; k < state.w.cols(); ++k) {
    for (Eigen::Index i = 0; i < state.w.rows(); ++i) value += log_normal(state.w(i, k), state.sigma_w);
  }
  for (Eigen::Index j = 0; j < state.a.cols(); ++j) {
    for (Eigen::Index k = 0; k < state.a.rows(); ++k) value += log_normal(state.a(k, j), state.sigma_a(j));
    value += log_inverse_gamma(state.sigma_a(j) * state.sigma_a(j), priors.variance_shape, priors.variance_scale);
  }
  value += log_inverse_gamma(state.sigma_y * state.sigma_y, priors.variance_shape, priors.variance_scale);
  value += log_inverse_gamma(state.sigma_w * state.sigma_w, priors.variance_shape, priors.variance_scale);
  value += log_gamma_density(state.gamma, priors.gamma_shape, priors.gamma_rate);
  value += log_model_prior(state.model);
  return value;
}

void resample_features(LatentFactorState& state, const Matrix& y) {
  const std::size_t n = state.n();
  if (n < 2 || state.num_features() == 0) return;
  Matrix residual = y - feature_mean(state.z, state.w, state.a);
  const double inv_var_y = 1.0 / (state.sigma_y * state.sigma_y);
  const double inv_var_w = 1.0 / (state.sigma_w * state.sigma_w);
  const double log_sigma_w = std::log(state.sigma_w);
  const std::size_t k_n = state.num_features();
  std::vector<double> a_norm2(k_n);
  for (std::size_t k = 0; k < k_n; ++k) a_norm2[k] = state.a.row(static_cast<Eigen::Index>(k)).squaredNorm();
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (std::size_t k = 0; k < k_n; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      const bool current = state.z(i, k);
      const std::size_t s_minus = state.z.count(k) - (current ? 1 : 0);
      if (s_minus == 0) continue;
      const double prior = feature_prior_probability(*state.cache, s_minus);
      if (current) residual.row(ii) += state.w(ii, kk) * state.a.row(kk);
      // W_ik is integrated against its N(0, sigma_w^2) prior, so (Z_ik, W_ik)
      // move as one block.
      const double precision = a_norm2[k] * inv_var_y + inv_var_w;
      const double h = state.a.row(kk).dot(residual.row(ii)) * inv_var_y;
      bool take;
      if (prior <= 0.0) {
        take = false;
      } else if (prior >= 1.0) {
        take = true;
      } else {
        const double log_odds = std::log(prior) - std::log1p(-prior) - log_sigma_w - 0.5 * std::log(precision) +
                                0.5 * h * h / precision;
        take = std::log(uniform_open(state.rng)) < -std::log1p(std::exp(-log_odds));
      }
      if (take) {
        state.w(ii, kk) = h / precision + normal_variate(state.rng) / std::sqrt(precision);
        residual.row(ii) -= state.w(ii, kk) * state.a.row(kk);
      } else {
        state.w(ii, kk) = state.sigma_w * normal_variate(state.rng);
      }
      state.z.set(i, k, take);
    }
  }
}

void resample_singletons(LatentFactorState& state, const Matrix& y) {
  const std::size_t n = state.n();
  if (n == 0) return;
  const double rate = state.gamma * state.cache->g11(n - 1);
  const double inv_2var_y = 0.5 / (state.sigma_y * state.sigma_y);
  const Eigen::Index p = y.cols();
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    Matrix mean_row = Matrix::Zero(1, p);
    Matrix base_row = Matrix::Zero(1, p);
    std::vector<std::size_t> singles;
    for (std::size_t k = 0; k < state.num_features(); ++k) {
      if (!state.z(i, k)) continue;
      const auto kk = static_cast<Eigen::Index>(k);
      const Matrix contribution = state.w(ii, kk) * state.a.row(kk);
      mean_row += contribution;
      if (state.z.count(k) == 1) {
        singles.push_back(k);
      } else {
        base_row += contribution;
      }
    }
    const std::uint64_t fresh = poisson_variate(rate, state.rng);
    const auto kf = static_cast<Eigen::Index>(fresh);
    Vector w_new(kf);
    Matrix a_new(kf, p);
    Matrix proposed_row = base_row;
    for (Eigen::Index j = 0; j < kf; ++j) {
      w_new(j) = state.sigma_w * normal_variate(state.rng);
      for (Eigen::Index c = 0; c < p; ++c) a_new(j, c) = state.sigma_a(c) * normal_variate(state.rng);
      proposed_row += w_new(j) * a_new.row(j);
    }
    const double current_ss = (y.row(ii) - mean_row).squaredNorm();
    const double proposed_ss = (y.row(ii) - proposed_row).squaredNorm();
    const double log_accept = (current_ss - proposed_ss) * inv_2var_y;
    if (log_accept < 0.0 && std::log(uniform_open(state.rng)) >= log_accept) continue;
    remove_features(state, singles);
    const auto k_old = state.w.cols();
    state.w.conservativeResize(Eigen::NoChange, k_old + kf);
    state.a.conservativeResize(k_old + kf, Eigen::NoChange);
    for (Eigen::Index j = 0; j < kf; ++j) {
      const std::size_t k = state.z.add_feature(uniform_open(state.rng));
      state.z.set(i, k, true);
      for (Eigen::Index r = 0; r < state.w.rows(); ++r) {
        state.w(r, k_old + j) = r == ii ? w_new(j) : state.sigma_w * normal_variate(state.rng);
      }
      state.a.row(k_old + j) = a_new.row(j);
    }
  }
}

void resample_weights(LatentFactorState& state, const Matrix& y) {
  const Eigen::Index n = y.rows();
  const Eigen::Index p = y.cols();
  const auto k_n = static_cast<Eigen::Index>(state.num_features());
  if (k_n == 0) return;
  const double inv_var_y = 1.0 / (state.sigma_y * state.sigma_y);
  const double inv_var_w = 1.0 / (state.sigma_w * state.sigma_w);
  // W, row by row, over the features the row holds.
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<Eigen::Index> active;
    for (Eigen::Index k = 0; k < k_n; ++k) {
      if (state.z(static_cast<std::size_t>(i), static_cast<std::size_t>(k))) {
        active.push_back(k);
      } else {
        state.w(i, k) = state.sigma_w * normal_variate(state.rng);
      }
    }
    if (active.empty()) continue;
    const auto m = static_cast<Eigen::Index>(active.size());
    Matrix b(m, p);
    for (Eigen::Index j = 0; j < m; ++j) b.row(j) = state.a.row(active[static_cast<std::size_t>(j)]);
    Matrix precision = b * b.transpose() * inv_var_y;
    precision.diagonal().array() += inv_var_w;
    const Vector draw = sample_gaussian_precision(precision, b * y.row(i).transpose() * inv_var_y, state.rng);
    for (Eigen::Index j = 0; j < m; ++j) state.w(i, active[static_cast<std::size_t>(j)]) = draw(j);
  }
  // A, column by column.
  const Matrix x = masked_weights(state.z, state.w);
  const Matrix gram = x.transpose() * x * inv_var_y;
  const Matrix xty = x.transpose() * y * inv_var_y;
  for (Eigen::Index j = 0; j < p; ++j) {
    Matrix precision = gram;
    precision.diagonal().array() += 1.0 / (state.sigma_a(j) * state.sigma_a(j));
    state.a.col(j) = sample_gaussian_precision(precision, xty.col(j), state.rng);
  }
}

void resample_gamma(LatentFactorState& state, const Priors& priors) {
  const auto [shape, rate] = gamma_posterior(*state.cache, state.num_features(), priors);
  state.gamma = gamma_variate(shape, state.rng) / rate;
}

void resample_hyperparameters(LatentFactorState& state, const Matrix& y, const ChainConfig& config) {
  const Priors& priors = config.priors;
  const double a0 = priors.variance_shape;
  const double b0 = priors.variance_scale;
  // Target of u = log sigma for a Gaussian scale with `count` observations
  // of sum of squares `ss` under InvGamma(a0, b0) on sigma^2.
  auto scale_update = [&](double sigma, double count, double ss) {
    auto log_density = [&](double u) {
      const double inv_v = std::exp(-2.0 * u);
      return -(count + 2.0 * a0) * u - (0.5 * ss + b0) * inv_v;
    };
    return std::exp(slice_sample(std::log(sigma), log_density, config.slice_width, config.slice_max_steps, state.rng));
  };
  if (config.update_scales) {
    const double ss_y = (y - feature_mean(state.z, state.w, state.a)).squaredNorm();
    state.sigma_y = scale_update(state.sigma_y, static_cast<double>(y.size()), ss_y);
    state.sigma_w = scale_update(state.sigma_w, static_cast<double>(state.w.size()), state.w.squaredNorm());
    for (Eigen::Index j = 0; j < state.a.cols(); ++j) {
      state.sigma_a(j) =
          scale_update(state.sigma_a(j), static_cast<double>(state.a.rows()), state.a.col(j).squaredNorm());
    }
  }
  if (!config.update_model) return;
  const std::size_t n = state.n();
  std::vector<double> x = to_coordinates(state.model).values;
  for (std::size_t c = 0; c < x.size(); ++c) {
    auto log_density = [&](double value) {
      std::vector<double> trial = x;
      trial[c] = value;
      const double prior = log_coordinate_prior(state.model.family(), trial);
      if (!std::isfinite(prior)) return kNegInf;
      try {
        const PrimitiveCache cache = PrimitiveCache::build(from_coordinates(state.model, trial), n);
        return prior + log_joint(state.z, cache, state.gamma);
      } catch (const NumericError&) {
        // Weights that cannot be evaluated are treated as outside the support.
        return kNegInf;
      } catch (const DomainError&) {
        return kNegInf;
      }
    };
    x[c] = slice_sample(x[c], log_density, config.slice_width, config.slice_max_steps, state.rng);
  }
  state.model = from_coordinates(state.model, x);
  state.cache = std::make_shared<const PrimitiveCache>(PrimitiveCache::build(state.model, n));
}

void gibbs_sweep(LatentFactorState& state, const Matrix& y, const ChainConfig& config) {
  resample_features(state, y);
  resample_singletons(state, y);
  canonicalize_state(state);
  resample_weights(state, y);
  if (config.update_gamma) resample_gamma(state, config.priors);
  resample_hyperparameters(state, y, config);
}

void resample_data(const LatentFactorState& state, Matrix& y) {
  Rng& rng = const_cast<Rng&>(state.rng);
  y = feature_mean(state.z, state.w, state.a);
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    for (Eigen::Index i = 0; i < y.rows(); ++i) y(i, j) += state.sigma_y * normal_variate(rng);
  }
}

LatentFactorState sample_prior_state(const GibbsModel& model, std::size_t n, std::size_t p, const Priors& priors,
                                     Rng& rng) {
  auto inverse_gamma_sd = [&]() {
    return std::sqrt(priors.variance_scale / gamma_variate(priors.variance_shape, rng));
  };
  LatentFactorState state;
  state.model = inference_model(model);
  state.cache = std::make_shared<const PrimitiveCache>(PrimitiveCache::build(state.model, n));
  state.gamma = gamma_variate(priors.gamma_shape, rng) / priors.gamma_rate;
  state.sigma_y = inverse_gamma_sd();
  state.sigma_w = inverse_gamma_sd();
  const auto pp = static_cast<Eigen::Index>(p);
  state.sigma_a = Vector(pp);
  for (Eigen::Index j = 0; j < pp; ++j) state.sigma_a(j) = inverse_gamma_sd();
  state.z = simulate_ibp(*state.cache, state.gamma, n, rng);
  const auto k = static_cast<Eigen::Index>(state.z.num_features());
  state.w = Matrix(static_cast<Eigen::Index>(n), k);
  for (Eigen::Index c = 0; c < k; ++c) {
    for (Eigen::Index i = 0; i < state.w.rows(); ++i) state.w(i, c) = state.sigma_w * normal_variate(rng);
  }
  state.a = Matrix(k, pp);
  for (Eigen::Index j = 0; j < pp; ++j) {
    for (Eigen::Index c = 0; c < k; ++c) state.a(c, j) = state.sigma_a(j) * normal_variate(rng);
  }
  state.rng = rng;
  return state;
}

Sample summarize(const LatentFactorState& state, const Matrix& y, const Priors& priors, std::size_t chain,
                 std::size_t iteration) {
  Sample s;
  s.chain = chain;
  s.iteration = iteration;
  s.k = state.num_features();
  for (std::size_t c : state.z.counts()) s.nnz += c;
  s.gamma = state.gamma;
  s.alpha = state.model.alpha();
  s.free_parameter = state.model.free_parameter();
  s.sigma_y = state.sigma_y;
  s.sigma_w = state.sigma_w;
  s.sigma_a.assign(state.sigma_a.data(), state.sigma_a.data() + state.sigma_a.size());
  s.log_joint = state_log_joint(state, y, priors);
  return s;
}

void SampleArchive::append(const Sample& sample) {
  const std::lock_guard<std::mutex> lock(mutex_);
  samples_[sample.chain].push_back(sample);
}

std::vector<std::size_t> SampleArchive::chains() const {
  const std::lock_guard<std::mutex> lock(mutex_);
  std::vector<std::size_t> ids;
  for (const auto& [id, samples] : samples_) ids.push_back(id);
  return ids;
}

std::vector<Sample> SampleArchive::chain(std::size_t id) const {
  const std::lock_guard<std::mutex> lock(mutex_);
  const auto it = samples_.find(id);
  return it == samples_.end() ? std::vector<Sample>{} : it->second;
}

std::size_t SampleArchive::size() const {
  const std::lock_guard<std::mutex> lock(mutex_);
  std::size_t total = 0;
  for (const auto& [id, samples] : samples_) total += samples.size();
  return total;
}

void SampleArchive::write_csv(std::ostream& out) const {
  const std::lock_guard<std::mutex> lock(mutex_);
  std::size_t p = 0;
  for (const auto& [id, samples] : samples_) {
    if (!samples.empty()) p = std::max(p, samples.front().sigma_a.size());
  }
  out << "chain,iteration,K,nnz,gamma,alpha,theta,sigma_y,sigma_w";
  for (std::size_t j = 0; j < p; ++j) out << ",sigma_a_" << (j + 1);
  out << ",log_joint\n";
  using detail::format_double;
  for (const auto& [id, samples] : samples_) {
    for (const Sample& s : samples) {
      out << s.chain << ',' << s.iteration << ',' << s.k << ',' << s.nnz << ',' << format_double(s.gamma) << ','
          << format_double(s.alpha) << ',' << format_double(s.free_parameter) << ',' << format_double(s.sigma_y)
          << ',' << format_double(s.sigma_w);
      for (double v : s.sigma_a) out << ',' << format_double(v);
      out << ',' << format_double(s.log_joint) << '\n';
    }
  }
}

LatentFactorState run_chain(const Matrix& y, LatentFactorState state, const ChainConfig& config,
                            SampleArchive& archive, std::size_t chain_id) {
  state.validate();
  if (config.thin == 0) throw DomainError("run_chain: thin must be positive");
  archive.append(summarize(state, y, config.priors, chain_id, 0));
  for (std::size_t t = 1; t <= config.iterations; ++t) {
    gibbs_sweep(state, y, config);
    const bool keep = t > config.burn_in && (t - config.burn_in) % config.thin == 0;
    if (!keep) continue;
    const Sample sample = summarize(state, y, config.priors, chain_id, t);
    if (!std::isfinite(sample.log_joint)) {
      std::ostringstream message;
      message << "run_chain: non-finite log-joint at chain " << chain_id << " iteration " << t << " (K=" << sample.k
              << ", gamma=" << sample.gamma << ", sigma_y=" << sample.sigma_y << ", sigma_w=" << sample.sigma_w
              << ", " << state.model.describe() << ")";
      throw NumericError(message.str());
    }
    archive.append(sample);
  }
  return state;
}

std::vector<LatentFactorState> run_chains(const Matrix& y, const GibbsModel& model, double gamma,
                                          const ChainConfig& config, std::size_t chains, SampleArchive& archive) {
  std::vector<LatentFactorState> finals(chains);
  std::vector<std::exception_ptr> errors(chains);
  std::vector<std::thread> workers;
  for (std::size_t c = 0; c < chains; ++c) {
    workers.emplace_back([&, c] {
      try {
        LatentFactorState state = initial_state(y, model, gamma, config.seed);
        state.rng = make_stream(config.seed, c);
        finals[c] = run_chain(y, std::move(state), config, archive, c);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& worker : workers) worker.join();
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
  return finals;
}

void write_manifest(std::ostream& out, const ChainConfig& config, const LatentFactorState& initial,
                    std::size_t chains) {
  nlohmann::ordered_json manifest;
  manifest["model"] = initial.model.describe();
  manifest["family"] = initial.model.family_name();
  manifest["alpha"] = initial.model.alpha();
  manifest["free_parameter"] = initial.model.free_parameter();
  manifest["gamma"] = initial.gamma;
  manifest["n"] = initial.n();
  manifest["p"] = initial.p();
  manifest["chains"] = chains;
  manifest["seed"] = config.seed;
  manifest["config"] = {{"iterations", config.iterations},
                        {"burn_in", config.burn_in},
                        {"thin", config.thin},
                        {"update_gamma", config.update_gamma},
                        {"update_model", config.update_model},
                        {"update_scales", config.update_scales},
                        {"slice_width", config.slice_width},
                        {"slice_max_steps", config.slice_max_steps},
                        {"priors",
                         {{"gamma_shape", config.priors.gamma_shape},
                          {"gamma_rate", config.priors.gamma_rate},
                          {"variance_shape", config.priors.variance_shape},
                          {"variance_scale", config.priors.variance_scale}}}};
  manifest["primitive_cache_sha1"] = initial.cache ? initial.cache->content_hash() : "";
  out << manifest.dump(2) << '\n';
}

std::vector<GewekeStatistic> geweke_check(const GewekeConfig& config) {
  if (config.rounds < config.batches || config.batches < 2) throw DomainError("geweke_check: too few rounds");
  static const char* const kNames[] = {"K",         "nnz",         "singletons",         "gamma",
                                       "log_sigma_y", "log_sigma_w", "mean_log_sigma_a"};
  constexpr std::size_t kStats = 7;
  auto statistics = [](const LatentFactorState& s) {
    std::array<double, kStats> out{};
    double nnz = 0.0;
    double singles = 0.0;
    for (std::size_t c : s.z.counts()) {
      nnz += static_cast<double>(c);
      singles += c == 1 ? 1.0 : 0.0;
    }
    out[0] = static_cast<double>(s.num_features());
    out[1] = nnz;
    out[2] = singles;
    out[3] = s.gamma;
    out[4] = std::log(s.sigma_y);
    out[5] = std::log(s.sigma_w);
    out[6] = s.sigma_a.array().log().mean();
    return out;
  };
  const std::size_t rounds = config.rounds;
  std::vector<std::array<double, kStats>> marginal(rounds);
  std::vector<std::array<double, kStats>> successive(rounds);
  Rng rng = make_stream(config.seed, 0);
  for (std::size_t r = 0; r < rounds; ++r) {
    marginal[r] = statistics(sample_prior_state(config.model, config.n, config.p, config.priors, rng));
  }
  ChainConfig chain;
  chain.priors = config.priors;
  chain.update_model = false;
  Rng chain_rng = make_stream(config.seed, 1);
  LatentFactorState state = sample_prior_state(config.model, config.n, config.p, config.priors, chain_rng);
  Matrix y;
  resample_data(state, y);
  for (std::size_t r = 0; r < rounds; ++r) {
    gibbs_sweep(state, y, chain);
    resample_data(state, y);
    successive[r] = statistics(state);
  }
  std::vector<GewekeStatistic> out;
  const std::size_t batch = rounds / config.batches;
  for (std::size_t s = 0; s < kStats; ++s) {
    double m1 = 0.0;
    double q1 = 0.0;
    for (const auto& row : marginal) {
      m1 += row[s];
      q1 += row[s] * row[s];
    }
    m1 /= static_cast<double>(rounds);
    const double var1 = (q1 / static_cast<double>(rounds) - m1 * m1) / static_cast<double>(rounds);
    // Batch means for the autocorrelated chain.
    std::vector<double> means(config.batches, 0.0);
    for (std::size_t b = 0; b < config.batches; ++b) {
      for (std::size_t r = b * batch; r < (b + 1) * batch; ++r) means[b] += successive[r][s];
      means[b] /= static_cast<double>(batch);
    }
    double m2 = 0.0;
    for (double m : means) m2 += m;
    m2 /= static_cast<double>(config.batches);
    double var2 = 0.0;
    for (double m : means) var2 += (m - m2) * (m - m2);
    var2 /= static_cast<double>(config.batches - 1) * static_cast<double>(config.batches);
    out.push_back({kNames[s], m1, m2, (m1 - m2) / std::sqrt(var1 + var2)});
  }
  return out;
}

Matrix read_matrix_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("matrix csv: missing header");
  const auto cols = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ',') + 1);
  std::vector<double> values;
  Eigen::Index rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream fields(line);
    std::string cell;
    Eigen::Index count = 0;
    while (std::getline(fields, cell, ',')) {
      double v = 0.0;
      const auto result = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (result.ec != std::errc() || result.ptr != cell.data() + cell.size()) {
        throw DomainError("matrix csv: bad number '" + cell + "'");
      }
      values.push_back(v);
      ++count;
    }
    if (count != cols) throw DomainError("matrix csv: row width does not match header");
    ++rows;
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  }
  return m;
}

void write_matrix_csv(std::ostream& out, const Matrix& m, const std::string& prefix) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j > 0 ? "," : "") << prefix << (j + 1);
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j > 0 ? "," : "") << detail::format_double(m(i, j));
    out << '\n';
  }
}

}  // namespace gibbs_ibp
