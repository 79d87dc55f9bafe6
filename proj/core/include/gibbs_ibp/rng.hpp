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

#ifndef GIBBS_IBP_RNG_HPP_
#define GIBBS_IBP_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

namespace gibbs_ibp {

using Rng = std::mt19937_64;

/// Independent stream `stream` derived from a master seed.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

/// Uniform on the open interval (0, 1).
inline double uniform_open(Rng& rng) {
  // 53 random bits shifted by half an ulp keeps both endpoints out.
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double exponential(Rng& rng) { return -std::log(uniform_open(rng)); }

inline double normal_variate(Rng& rng) { return boost::random::normal_distribution<double>()(rng); }

/// Marsaglia-Tsang squeeze; shapes below one are boosted by U^{1/shape}.
inline double gamma_variate(double shape, Rng& rng) {
  double scale = 1.0;
  if (shape < 1.0) {
    scale = std::exp(std::log(uniform_open(rng)) / shape);
    shape += 1.0;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = normal_variate(rng);
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = uniform_open(rng);
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 || std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v * scale;
  }
}

inline double beta_variate(double a, double b, Rng& rng) {
  const double x = gamma_variate(a, rng);
  const double y = gamma_variate(b, rng);
  return x / (x + y);
}

inline std::uint64_t poisson_variate(double mean, Rng& rng) {
  if (!(mean > 0.0)) return 0;
  return boost::random::poisson_distribution<std::uint64_t, double>(mean)(rng);
}

}  // namespace gibbs_ibp

#endif  // GIBBS_IBP_RNG_HPP_
