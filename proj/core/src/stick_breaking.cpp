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


#include "gibbs_ibp/stick_breaking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "gibbs_ibp/error.hpp"
#include "gibbs_ibp/special_functions.hpp"
#include "detail.hpp"

namespace gibbs_ibp {

StickLaw StickLaw::of(const GibbsModel& model) {
  switch (model.family()) {
    case Family::kDirichlet:
      return {0.0, model.free_parameter()};
    case Family::kPitmanYor:
      return {model.alpha(), model.free_parameter()};
    default:
      throw DomainError("stick-breaking is only available for the dp and py families, not " + model.family_name());
  }
}

std::vector<double> sample_sticks(const GibbsModel& model, std::size_t count, Rng& rng) {
  const StickLaw law = StickLaw::of(model);
  std::vector<double> sticks(count);
  double remaining = 1.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double w = beta_variate(law.a(i + 1), law.b(i + 1), rng);
    sticks[i] = w * remaining;
    remaining *= 1.0 - w;
  }
  return sticks;
}

double expected_residual_mass(const GibbsModel& model, std::size_t rounds) {
  const StickLaw law = StickLaw::of(model);
  double log_mass = 0.0;
  for (std::size_t j = 1; j <= rounds; ++j) log_mass += std::log(law.b(j) / (law.a(j) + law.b(j)));
  return std::exp(log_mass);
}

std::size_t truncation_rounds(const GibbsModel& model, double tolerance, std::size_t max_rounds) {
  if (!(tolerance > 0.0 && tolerance < 1.0)) throw DomainError("truncation_rounds: tolerance must lie in (0, 1)");
  const StickLaw law = StickLaw::of(model);
  const double log_tol = std::log(tolerance);
  double log_mass = 0.0;
  for (std::size_t i = 1; i <= max_rounds; ++i) {
    log_mass += std::log(law.b(i) / (law.a(i) + law.b(i)));
    if (log_mass < log_tol) return i;
  }
  throw NumericError("truncation_rounds: residual mass still above tolerance after " + std::to_string(max_rounds) +
                     " rounds");
}

TruncatedProcess construct_truncated(const GibbsModel& model, double gamma, std::size_t rounds, Rng& rng) {
  if (!(gamma >= 0.0)) throw DomainError("construct_truncated: gamma must be >= 0");
  const StickLaw law = StickLaw::of(model);
  TruncatedProcess process;
  process.rounds = rounds;
  process.gamma = gamma;
  for (std::size_t i = 1; i <= rounds; ++i) {
    const std::uint64_t count = poisson_variate(gamma, rng);
    for (std::uint64_t c = 0; c < count; ++c) {
      // Each atom gets its own independent copy of P_i.
      double p = beta_variate(law.a(i), law.b(i), rng);
      for (std::size_t j = 1; j < i; ++j) p *= 1.0 - beta_variate(law.a(j), law.b(j), rng);
      process.atoms.push_back({uniform_open(rng), p});
    }
  }
  return process;
}

FeatureAllocation draw_bernoulli(const TruncatedProcess& process, std::size_t n, Rng& rng) {
  FeatureAllocation z(n);
  for (const Atom& atom : process.atoms) {
    std::size_t k = z.num_features();
    bool added = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (uniform_open(rng) >= atom.weight) continue;
      if (!added) {
        k = z.add_feature(atom.label);
        added = true;
      }
      z.set(i, k, true);
    }
  }
  z.canonicalize();
  return z;
}

ThinnedStickSampler::ThinnedStickSampler(const GibbsModel& model, double gamma, std::size_t rounds, std::size_t n)
    : law_(StickLaw::of(model)), gamma_(gamma), rounds_(rounds), n_(n) {
  if (!(gamma >= 0.0)) throw DomainError("ThinnedStickSampler: gamma must be >= 0");
  if (n == 0) return;
  cumulative_q_.resize(rounds);
  mixture_cdf_.resize(rounds);
  for (std::size_t r = 0; r < rounds; ++r) {
    const double a = law_.a(r + 1);
    const double b = law_.b(r + 1);
    // q = 1 - E(1 - W)^n.
    const double q = -std::expm1(log_rising_factorial(b, n) - log_rising_factorial(a + b, n));
    total_rate_ += gamma * q;
    cumulative_q_[r] = total_rate_;
    // Given a candidate, W ~ sum_m B(a+1, b+m) beta(a+1, b+m), m < n.
    std::vector<double>& cdf = mixture_cdf_[r];
    cdf.resize(n);
    double w = 1.0;
    double total = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      total += w;
      cdf[m] = total;
      const double md = static_cast<double>(m);
      w *= (b + md) / (a + b + md + 1.0);
    }
    for (double& c : cdf) c /= total;
  }
}

FeatureAllocation ThinnedStickSampler::operator()(Rng& rng) const {
  FeatureAllocation z(n_);
  if (n_ == 0 || rounds_ == 0) return z;
  const std::uint64_t candidates = poisson_variate(total_rate_, rng);
  const double nd = static_cast<double>(n_);
  for (std::uint64_t c = 0; c < candidates; ++c) {
    const double u = uniform_open(rng) * total_rate_;
    const auto r = static_cast<std::size_t>(std::upper_bound(cumulative_q_.begin(), cumulative_q_.end(), u) -
                                            cumulative_q_.begin());
    const std::size_t round = std::min(r, rounds_ - 1) + 1;
    const std::vector<double>& cdf = mixture_cdf_[round - 1];
    const auto m = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), uniform_open(rng)) - cdf.begin());
    const double w =
        beta_variate(law_.a(round) + 1.0, law_.b(round) + static_cast<double>(std::min(m, n_ - 1)), rng);
    // Smallest of the n uniforms, conditioned to fall below w.
    const double f_w = -std::expm1(nd * std::log1p(-w));
    const double u_min = -std::expm1(std::log1p(-uniform_open(rng) * f_w) / nd);
    double p = w;
    bool taken = true;
    for (std::size_t j = 1; j < round && taken; ++j) {
      p *= 1.0 - beta_variate(law_.a(j), law_.b(j), rng);
      taken = p > u_min;
    }
    if (!taken) continue;
    const std::size_t k = z.add_feature(uniform_open(rng));
    const auto first = static_cast<std::size_t>(uniform_open(rng) * nd);
    const double rest = (p - u_min) / (1.0 - u_min);
    for (std::size_t i = 0; i < n_; ++i) {
      if (i == first || uniform_open(rng) < rest) z.set(i, k, true);
    }
  }
  z.canonicalize();
  return z;
}

namespace {

void check_unit_interval(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("p must lie in (0, 1)");
}

// log K_1(x); the large-x branch avoids underflow of cyl_bessel_k.
double log_bessel_k1(double x) {
  if (x < 500.0) return std::log(std::cyl_bessel_k(1.0, x));
  const double inv = 1.0 / x;
  return 0.5 * std::log(std::numbers::pi / (2.0 * x)) - x +
         std::log1p(inv * (0.375 + inv * (-0.1171875 + inv * 0.1025390625)));
}

}  // namespace

double log_structural_density(const GibbsModel& model, double p) {
  check_unit_interval(p);
  const double alpha = model.alpha();
  const double free = model.free_parameter();
  switch (model.family()) {
    case Family::kDirichlet:
    case Family::kPitmanYor: {
      const double a = 1.0 - alpha;
      const double b = free + alpha;
      return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(p) +
             (b - 1.0) * std::log1p(-p);
    }
    case Family::kNig: {
      const double r = std::sqrt(free);
      return r + std::log(r) - std::log(std::numbers::pi) - 0.5 * std::log(p) - std::log1p(-p) +
             log_bessel_k1(std::sqrt(free / (1.0 - p)));
    }
    case Family::kNgg: {
      const double c = free / (1.0 - p);
      return std::log(alpha) - std::lgamma(1.0 - alpha) - alpha * std::log(p) + (alpha - 1.0) * std::log1p(-p) +
             std::pow(free, alpha) - std::pow(c, alpha) + log_stable_negative_moment_laplace(alpha, c);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double structural_density(const GibbsModel& model, double p) { return std::exp(log_structural_density(model, p)); }

std::vector<double> structural_moments(const GibbsModel& model, std::size_t count) {
  std::vector<double> out(count, 1.0);
  if (count == 0) return out;
  if (model.closed_form()) {
    const double alpha = model.alpha();
    const double theta = model.free_parameter();
    for (std::size_t m = 1; m < count; ++m) {
      const double md = static_cast<double>(m - 1);
      out[m] = out[m - 1] * (theta + alpha + md) / (theta + 1.0 + md);
    }
    return out;
  }
  // The density times dp/dt decays like e^{-(1 - alpha) t}.
  const double alpha = model.alpha();
  const double t_max = (40.0 + std::log(static_cast<double>(count))) / (1.0 - alpha);
  constexpr double kStep = 0.01;
  auto intervals = static_cast<std::size_t>(std::ceil(t_max / kStep));
  intervals += intervals % 2;
  const double h = t_max / static_cast<double>(intervals);
  std::vector<double> log_base(intervals + 1, kNegInf);  // log of Simpson weight * density * p
  std::vector<double> log_one_minus_p(intervals + 1, kNegInf);
  for (std::size_t j = 1; j <= intervals; ++j) {
    const double t = h * static_cast<double>(j);
    const double p = std::exp(-t);
    if (!(p < 1.0)) continue;
    const double weight = (j == intervals) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
    log_base[j] = std::log(weight * h / 3.0) + log_structural_density(model, p) - t;
    log_one_minus_p[j] = std::log(-std::expm1(-t));
  }
  // m = 0 is the total mass, one by definition.
  std::vector<double> terms(intervals + 1);
  for (std::size_t m = 1; m < count; ++m) {
    const double md = static_cast<double>(m);
    for (std::size_t j = 0; j <= intervals; ++j) terms[j] = log_base[j] + md * log_one_minus_p[j];
    out[m] = std::exp(log_sum_exp(terms));
  }
  return out;
}

double superposition_intensity(const GibbsModel& model, std::size_t depth, double p) {
  check_unit_interval(p);
  const StickLaw law = StickLaw::of(model);
  const double alpha = law.alpha;
  const double theta = law.theta;
  const double log_c = std::lgamma(1.0 + theta) - std::lgamma(1.0 - alpha) - std::lgamma(theta + alpha);
  return std::exp(log_c - alpha * std::log(p) + (theta + alpha + static_cast<double>(depth) - 1.0) * std::log1p(-p));
}

void write_structural_density_csv(std::ostream& out, const GibbsModel& model, std::span<const double> grid) {
  out << "p,density\n";
  for (double p : grid) out << detail::format_double(p) << ',' << detail::format_double(structural_density(model, p)) << '\n';
}

void write_superposition_csv(std::ostream& out, const GibbsModel& model, std::size_t max_depth,
                             std::span<const double> grid) {
  out << "p,depth,intensity\n";
  for (double p : grid) {
    for (std::size_t d = 0; d <= max_depth; ++d) {
      out << detail::format_double(p) << ',' << d << ',' << detail::format_double(superposition_intensity(model, d, p)) << '\n';
    }
  }
}

}  // namespace gibbs_ibp
