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


#include "gibbs_ibp/stable_sampling.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "gibbs_ibp/error.hpp"
#include "gibbs_ibp/special_functions.hpp"

namespace gibbs_ibp {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("stable sampling: alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
}

constexpr double kPi = std::numbers::pi;

}  // namespace

double sample_positive_stable(double alpha, Rng& rng) {
  check_alpha(alpha);
  const double u = kPi * uniform_open(rng);
  const double e = exponential(rng);
  return std::exp((1.0 - alpha) / alpha * (zolotarev_log_a(alpha, u) - std::log(e)));
}

TiltedStableSampler::TiltedStableSampler(TiltedStableSpec spec, Method method) : spec_(spec) {
  check_alpha(spec.alpha);
  if (!(spec.tilt >= 0.0) || !std::isfinite(spec.tilt)) {
    throw DomainError("tilted stable: tilt must be finite and nonnegative");
  }
  inverse_gamma_path_ = method == Method::kAuto && spec.alpha == 0.5;
  const double alpha = spec.alpha;
  c_ = spec.tilt * (1.0 - alpha) / alpha;
  log_a0_ = zolotarev_log_a(alpha, 0.0);
  if (c_ == 0.0) {
    u0_ = kPi;
    flat_mass_ = kPi;
    return;
  }
  // h(u) = -c (log A(u) - log A(0)); pick u0 with h(u0) = -1.
  const double target = log_a0_ + 1.0 / c_;
  double lo = 0.0;
  double hi = kPi;
  for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (zolotarev_log_a(alpha, mid) < target ? lo : hi) = mid;
  }
  u0_ = 0.5 * (lo + hi);
  flat_mass_ = u0_;
  slope_ = -c_ * zolotarev_log_a_derivative(alpha, u0_);
  const double width = kPi - u0_;
  if (slope_ < 0.0) {
    tail_mass_ = std::exp(-1.0) * -std::expm1(slope_ * width) / -slope_;
  } else {
    tail_mass_ = std::exp(-1.0) * width;
  }
}

double TiltedStableSampler::expected_trials() const {
  if (c_ == 0.0) return 1.0;
  // Normalizer of exp(h) on (0, pi) by a fixed-grid midpoint rule.
  constexpr int kGrid = 20000;
  double mass = 0.0;
  for (int i = 0; i < kGrid; ++i) {
    const double u = (i + 0.5) * kPi / kGrid;
    mass += std::exp(-c_ * (zolotarev_log_a(spec_.alpha, u) - log_a0_));
  }
  mass *= kPi / kGrid;
  return (flat_mass_ + tail_mass_) / mass;
}

double TiltedStableSampler::sample_u(Rng& rng) const {
  if (c_ == 0.0) return kPi * uniform_open(rng);
  const double total = flat_mass_ + tail_mass_;
  for (;;) {
    double u;
    double log_envelope;
    if (uniform_open(rng) * total < flat_mass_) {
      u = u0_ * uniform_open(rng);
      log_envelope = 0.0;
    } else {
      const double width = kPi - u0_;
      double offset;
      if (slope_ < 0.0) {
        // Exponential with rate -slope truncated to [0, width].
        const double v = uniform_open(rng);
        offset = std::log1p(v * std::expm1(slope_ * width)) / slope_;
      } else {
        offset = width * uniform_open(rng);
      }
      u = u0_ + offset;
      log_envelope = -1.0 + slope_ * offset;
    }
    if (!(u > 0.0 && u < kPi)) continue;
    const double h = -c_ * (zolotarev_log_a(spec_.alpha, u) - log_a0_);
    if (std::log(uniform_open(rng)) < h - log_envelope) return u;
  }
}

double TiltedStableSampler::log_sample(Rng& rng) const {
  if (inverse_gamma_path_) {
    // At alpha = 1/2, T = 1 / (4 G) with G ~ Gamma(1/2); the tilt shifts
    // the shape to 1/2 + s.
    return std::log(0.25) - std::log(gamma_variate(0.5 + spec_.tilt, rng));
  }
  const double u = sample_u(rng);
  const double e = gamma_variate(1.0 + c_, rng);
  const double alpha = spec_.alpha;
  return (1.0 - alpha) / alpha * (zolotarev_log_a(alpha, u) - std::log(e));
}

double TiltedStableSampler::operator()(Rng& rng) const { return std::exp(log_sample(rng)); }

double sample_tilted_stable(const TiltedStableSpec& spec, Rng& rng) {
  return TiltedStableSampler(spec)(rng);
}

}  // namespace gibbs_ibp
