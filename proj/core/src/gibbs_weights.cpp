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


#include "gibbs_ibp/gibbs_weights.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "detail.hpp"
#include "gibbs_ibp/error.hpp"
#include "gibbs_ibp/rng.hpp"
#include "gibbs_ibp/stable_sampling.hpp"

namespace gibbs_ibp {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string num(double x) { return detail::format_double(x); }

void require(bool condition, const std::string& message) {
  if (!condition) throw DomainError(message);
}

}  // namespace

std::string to_string(Family family) {
  switch (family) {
    case Family::kDirichlet:
      return "dp";
    case Family::kPitmanYor:
      return "py";
    case Family::kNgg:
      return "ngg";
    case Family::kNig:
      return "nig";
  }
  return "unknown";
}

Family parse_family(const std::string& name) {
  if (name == "dp") return Family::kDirichlet;
  if (name == "py") return Family::kPitmanYor;
  if (name == "ngg") return Family::kNgg;
  if (name == "nig") return Family::kNig;
  throw DomainError("unknown model family '" + name + "' (expected dp, py, ngg or nig)");
}

GibbsModel::GibbsModel(Variant variant, McConfig mc) : variant_(variant), mc_(mc) {
  std::visit(Overloaded{
                 [](const Dirichlet& m) { require(m.theta > 0.0 && std::isfinite(m.theta), "dp: theta must be > 0"); },
                 [](const PitmanYor& m) {
                   require(m.alpha > 0.0 && m.alpha < 1.0, "py: alpha must lie in (0, 1)");
                   require(m.theta > -m.alpha && std::isfinite(m.theta), "py: theta must exceed -alpha");
                 },
                 [](const NormalizedGeneralizedGamma& m) {
                   require(m.alpha > 0.0 && m.alpha < 1.0, "ngg: alpha must lie in (0, 1)");
                   require(m.beta > 0.0 && std::isfinite(m.beta), "ngg: beta must be > 0");
                 },
                 [](const NormalizedInverseGaussian& m) {
                   require(m.beta > 0.0 && std::isfinite(m.beta), "nig: beta must be > 0");
                 },
             },
             variant_);
  require(mc_.samples >= 1, "mc: samples must be positive");
}

Family GibbsModel::family() const {
  return std::visit(Overloaded{
                        [](const Dirichlet&) { return Family::kDirichlet; },
                        [](const PitmanYor&) { return Family::kPitmanYor; },
                        [](const NormalizedGeneralizedGamma&) { return Family::kNgg; },
                        [](const NormalizedInverseGaussian&) { return Family::kNig; },
                    },
                    variant_);
}

double GibbsModel::alpha() const {
  return std::visit(Overloaded{
                        [](const Dirichlet&) { return 0.0; },
                        [](const PitmanYor& m) { return m.alpha; },
                        [](const NormalizedGeneralizedGamma& m) { return m.alpha; },
                        [](const NormalizedInverseGaussian&) { return 0.5; },
                    },
                    variant_);
}

double GibbsModel::free_parameter() const {
  return std::visit(Overloaded{
                        [](const Dirichlet& m) { return m.theta; },
                        [](const PitmanYor& m) { return m.theta; },
                        [](const NormalizedGeneralizedGamma& m) { return m.beta; },
                        [](const NormalizedInverseGaussian& m) { return m.beta; },
                    },
                    variant_);
}

bool GibbsModel::closed_form() const {
  const Family f = family();
  return f == Family::kDirichlet || f == Family::kPitmanYor;
}

GibbsModel GibbsModel::with_parameters(double alpha, double free) const {
  switch (family()) {
    case Family::kDirichlet:
      return GibbsModel(Dirichlet{free}, mc_);
    case Family::kPitmanYor:
      return GibbsModel(PitmanYor{alpha, free}, mc_);
    case Family::kNgg:
      return GibbsModel(NormalizedGeneralizedGamma{alpha, free}, mc_);
    case Family::kNig:
      return GibbsModel(NormalizedInverseGaussian{free}, mc_);
  }
  throw DomainError("with_parameters: unknown family");
}

GibbsModel GibbsModel::with_mc(McConfig mc) const { return GibbsModel(variant_, mc); }

std::string GibbsModel::describe() const {
  return std::visit(Overloaded{
                        [](const Dirichlet& m) { return "dp(theta=" + num(m.theta) + ")"; },
                        [](const PitmanYor& m) {
                          return "py(alpha=" + num(m.alpha) + ",theta=" + num(m.theta) + ")";
                        },
                        [](const NormalizedGeneralizedGamma& m) {
                          return "ngg(alpha=" + num(m.alpha) + ",beta=" + num(m.beta) + ")";
                        },
                        [](const NormalizedInverseGaussian& m) { return "nig(beta=" + num(m.beta) + ")"; },
                    },
                    variant_);
}

double WeightTable::log_value(std::size_t n, std::size_t k) const {
  if (n > n_max()) {
    throw TableDepthError("WeightTable: row " + std::to_string(n) + " exceeds depth " + std::to_string(n_max()));
  }
  if (k == 0 || k > n) return kNegInf;
  return log_v(n, k);
}

namespace {

WeightTable closed_form_table(double alpha, double theta, std::size_t n_max) {
  WeightTable table{TriangularArray(n_max, kNegInf), alpha, ClosedFormProvenance{}};
  // log prod_{l=1}^{k-1} (theta + l alpha); for alpha = 0 this is (k-1) log theta.
  std::vector<double> head(n_max + 1, 0.0);
  for (std::size_t k = 2; k <= n_max; ++k) {
    head[k] = head[k - 1] + std::log(theta + static_cast<double>(k - 1) * alpha);
  }
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double denom = log_rising_factorial(theta + 1.0, n - 1);
    for (std::size_t k = 1; k <= n; ++k) table.log_v(n, k) = head[k] - denom;
  }
  return table;
}

// Linear functional mapping row n_max onto V_{1,1}: the coefficients are
// alpha^{-k} C(n_max, k; alpha), since every row's block-count sum equals V_{1,1}.
double v11_standard_error(const std::vector<double>& log_row, const std::vector<double>& rel_se, double alpha) {
  const std::size_t n = log_row.size();
  const BlockCoefficients coef(n, alpha);
  double log_var = kNegInf;
  for (std::size_t k = 1; k <= n; ++k) {
    if (rel_se[k - 1] <= 0.0) continue;
    log_var = log_add_exp(log_var, 2.0 * (coef.log_value(n, k) + log_row[k - 1] + std::log(rel_se[k - 1])));
  }
  return std::exp(0.5 * log_var);
}

}  // namespace

WeightTable build_weight_table(const GibbsModel& model, std::size_t n_max) {
  if (n_max == 0) throw DomainError("build_weight_table: n_max must be positive");
  switch (model.family()) {
    case Family::kDirichlet:
      return closed_form_table(0.0, model.free_parameter(), n_max);
    case Family::kPitmanYor:
      return closed_form_table(model.alpha(), model.free_parameter(), n_max);
    case Family::kNgg:
    case Family::kNig:
      break;
  }
  const double alpha = model.alpha();
  const double beta = model.free_parameter();
  const McConfig& mc = model.mc();
  if (mc.method == NggWeightMethod::kQuadrature) {
    WeightTable table = weight_table_from_last_row(ngg_last_row_quadrature(alpha, beta, n_max), alpha, true);
    table.provenance = QuadratureProvenance{};
    return table;
  }
  const McRow row = ngg_last_row_mc(alpha, beta, n_max, mc.samples, mc.seed);
  WeightTable table = weight_table_from_last_row(row.log_v, alpha, false);
  MonteCarloProvenance provenance;
  provenance.samples = mc.samples;
  provenance.seed = mc.seed;
  provenance.raw_log_v11 = table.log_v(1, 1);
  provenance.v11_se = v11_standard_error(row.log_v, row.rel_se, alpha);
  provenance.max_last_row_rel_se = *std::max_element(row.rel_se.begin(), row.rel_se.end());
  const double shift = table.log_v(1, 1);
  for (std::size_t n = 1; n <= n_max; ++n) {
    for (double& v : table.log_v.row(n)) v -= shift;
  }
  table.provenance = provenance;
  return table;
}

namespace {

using Mp = boost::multiprecision::cpp_bin_float_50;

// Gamma(a; x) for any real a and x > 0, by the downward recurrence
// Gamma(a; x) = (Gamma(a+1; x) - x^a e^{-x}) / a from a point with a > 0
// (or from E_1(x) = Gamma(0; x) when a is a nonpositive integer).
Mp upper_gamma_any(const Mp& a, const Mp& x) {
  if (a > 0) return boost::math::tgamma(a, x);
  const Mp steps = ceil(-a);
  Mp top = a + steps;
  Mp g = (top == 0) ? Mp(boost::math::expint(1, x)) : Mp(boost::math::tgamma(top, x));
  const Mp ex = exp(-x);
  for (long i = 0; i < steps.convert_to<long>(); ++i) {
    top -= 1;
    g = (g - pow(x, top) * ex) / top;
  }
  return g;
}

}  // namespace

WeightTable ngg_weights_smalln(double alpha, double beta, std::size_t n_max) {
  if (n_max > 12) throw DomainError("ngg_weights_smalln: n_max > 12 is beyond the alternating series' reach");
  if (n_max == 0) throw DomainError("ngg_weights_smalln: n_max must be positive");
  require(alpha > 0.0 && alpha < 1.0, "ngg_weights_smalln: alpha must lie in (0, 1)");
  require(beta > 0.0, "ngg_weights_smalln: beta must be positive");
  const Mp a(alpha);
  const Mp b = pow(Mp(beta), a);  // series parameter b = beta^alpha
  WeightTable table{TriangularArray(n_max, kNegInf), alpha, SeriesProvenance{}};
  for (std::size_t n = 1; n <= n_max; ++n) {
    for (std::size_t k = 1; k <= n; ++k) {
      Mp sum = 0;
      Mp binom = 1;
      for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) binom = binom * Mp(n - i) / Mp(i);
        const Mp shape = Mp(k) - Mp(i) / a;
        Mp term = binom * pow(b, Mp(i) / a) * upper_gamma_any(shape, b);
        sum += (i % 2 == 0) ? term : Mp(-term);
      }
      const Mp v = exp(b) * pow(a, Mp(k - 1)) / boost::math::tgamma(Mp(n)) * sum;
      if (!(v > 0)) throw NumericError("ngg_weights_smalln: nonpositive weight from the series");
      table.log_v(n, k) = static_cast<double>(log(v));
    }
  }
  return table;
}

McRow ngg_last_row_mc(double alpha, double beta, std::size_t n, std::uint64_t samples, std::uint64_t seed) {
  require(alpha > 0.0 && alpha < 1.0, "ngg_last_row_mc: alpha must lie in (0, 1)");
  require(beta > 0.0, "ngg_last_row_mc: beta must be positive");
  require(n >= 1, "ngg_last_row_mc: n must be positive");
  require(samples >= 10000, "ngg_last_row_mc: at least 10^4 samples are required");
  McRow row;
  row.samples = samples;
  row.log_v.resize(n);
  row.rel_se.resize(n);
  const double beta_alpha = std::pow(beta, alpha);
  const double log_beta = std::log(beta);
  const double nd = static_cast<double>(n);
  for (std::size_t k = 1; k <= n; ++k) {
    const double ka = static_cast<double>(k) * alpha;
    const TiltedStableSampler sampler({alpha, ka});
    Rng rng = make_stream(seed, k);
    // Streaming log-mean-exp with a running maximum.
    double shift = kNegInf;
    double s1 = 0.0;
    double s2 = 0.0;
    for (std::uint64_t i = 0; i < samples; ++i) {
      const double log_x = sampler.log_sample(rng);
      const double g1 = gamma_variate(ka, rng);
      const double g2 = gamma_variate(nd - ka, rng);
      const double log_y = std::log(g1) - std::log(g1 + g2);
      const double t = beta_alpha - std::exp(log_beta + log_x - log_y);
      if (!(t > shift)) {
        const double w = std::exp(t - shift);
        s1 += w;
        s2 += w * w;
      } else {
        const double r = std::exp(shift - t);
        s1 = s1 * r + 1.0;
        s2 = s2 * r * r + 1.0;
        shift = t;
      }
    }
    const double count = static_cast<double>(samples);
    const double mean = s1 / count;
    if (!(mean > 0.0) || !std::isfinite(shift)) {
      throw NumericError("ngg_last_row_mc: every weight underflowed at n=" + std::to_string(n) +
                         ", k=" + std::to_string(k));
    }
    const double var = std::max(0.0, (s2 / count - mean * mean) * count / (count - 1.0));
    row.rel_se[k - 1] = std::sqrt(var / count) / mean;
    row.log_v[k - 1] = static_cast<double>(k - 1) * std::log(alpha) + std::lgamma(static_cast<double>(k)) -
                       std::lgamma(nd) + shift + std::log(mean);
  }
  return row;
}

namespace {

double softplus(double u) { return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }
double logistic(double u) { return u > 0.0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u)); }

// log of int_0^inf x^{n-1} (1+x)^{k alpha - n} e^{-b (1+x)^alpha} dx in u = log x,
// where the log-integrand is concave.
double ngg_log_integral(double n, double k, double alpha, double b) {
  const double ka = k * alpha;
  auto psi = [&](double u) {
    const double sp = softplus(u);
    return n * u + (ka - n) * sp - b * std::exp(alpha * sp);
  };
  auto dpsi = [&](double u) {
    const double s = logistic(u);
    return n - (n - ka) * s - b * alpha * std::exp(alpha * softplus(u)) * s;
  };
  auto d2psi = [&](double u) {
    const double s = logistic(u);
    return -(n - ka) * s * (1.0 - s) - b * alpha * std::exp(alpha * softplus(u)) * s * (alpha * s + 1.0 - s);
  };
  double lo = -40.0;
  while (dpsi(lo) <= 0.0) lo -= 40.0;
  double hi = 1.0;
  while (dpsi(hi) >= 0.0) {
    hi = 2.0 * hi + 1.0;
    if (hi > 1e6) throw NumericError("ngg quadrature: could not bracket the mode");
  }
  double mode = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double g = dpsi(mode);
    if (g > 0.0) {
      lo = mode;
    } else {
      hi = mode;
    }
    double next = mode - g / d2psi(mode);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - mode) < 1e-13 * (1.0 + std::fabs(mode))) {
      mode = next;
      break;
    }
    mode = next;
  }
  const double peak = psi(mode);
  const double scale = 1.0 / std::sqrt(-d2psi(mode));
  constexpr double kDrop = 60.0;
  double left = scale;
  while (psi(mode - left) > peak - kDrop) left *= 2.0;
  double right = scale;
  while (psi(mode + right) > peak - kDrop) right *= 2.0;
  auto f = [&](double u) { return std::exp(psi(u) - peak); };
  const double integral =
      detail::integrate_gk(f, mode - left, mode, 10, 1e-12) + detail::integrate_gk(f, mode, mode + right, 10, 1e-12);
  return peak + std::log(integral);
}

}  // namespace

std::vector<double> ngg_last_row_quadrature(double alpha, double beta, std::size_t n) {
  require(alpha > 0.0 && alpha < 1.0, "ngg quadrature: alpha must lie in (0, 1)");
  require(beta > 0.0, "ngg quadrature: beta must be positive");
  require(n >= 1, "ngg quadrature: n must be positive");
  const double b = std::pow(beta, alpha);
  const double nd = static_cast<double>(n);
  std::vector<double> row(n);
  for (std::size_t k = 1; k <= n; ++k) {
    const double kd = static_cast<double>(k);
    row[k - 1] = b + kd * std::log(alpha * b) - std::lgamma(nd) + ngg_log_integral(nd, kd, alpha, b);
  }
  return row;
}

WeightTable weight_table_from_last_row(const std::vector<double>& log_last_row, double alpha, bool normalize) {
  const std::size_t n_max = log_last_row.size();
  if (n_max == 0) throw DomainError("weight_table_from_last_row: empty row");
  WeightTable table{TriangularArray(n_max, kNegInf), alpha, QuadratureProvenance{}};
  std::copy(log_last_row.begin(), log_last_row.end(), table.log_v.row(n_max).begin());
  for (std::size_t n = n_max - 1; n >= 1; --n) {
    for (std::size_t k = 1; k <= n; ++k) {
      const double stay = std::log(static_cast<double>(n) - alpha * static_cast<double>(k)) + table.log_v(n + 1, k);
      table.log_v(n, k) = log_add_exp(stay, table.log_v(n + 1, k + 1));
    }
  }
  if (normalize) {
    const double shift = table.log_v(1, 1);
    for (std::size_t n = 1; n <= n_max; ++n) {
      for (double& v : table.log_v.row(n)) v -= shift;
    }
  }
  return table;
}

TriangularArray propagate_standard_errors(const WeightTable& unnormalized, const std::vector<double>& last_row_rel_se) {
  const std::size_t n_max = unnormalized.n_max();
  if (last_row_rel_se.size() != n_max) throw DomainError("propagate_standard_errors: row size mismatch");
  const double alpha = unnormalized.alpha;
  TriangularArray log_var(n_max, kNegInf);
  TriangularArray coef(n_max, kNegInf);
  for (std::size_t j = 1; j <= n_max; ++j) {
    if (last_row_rel_se[j - 1] <= 0.0) continue;
    // Coefficients of V_{n_max, j} in every entry, by the same backward sweep.
    for (std::size_t k = 1; k <= n_max; ++k) coef(n_max, k) = (k == j) ? 0.0 : kNegInf;
    for (std::size_t n = n_max - 1; n >= 1; --n) {
      for (std::size_t k = 1; k <= n; ++k) {
        coef(n, k) = log_add_exp(std::log(static_cast<double>(n) - alpha * static_cast<double>(k)) + coef(n + 1, k),
                                 coef(n + 1, k + 1));
      }
    }
    const double log_sd_j = unnormalized.log_v(n_max, j) + std::log(last_row_rel_se[j - 1]);
    for (std::size_t n = 1; n <= n_max; ++n) {
      for (std::size_t k = 1; k <= n; ++k) {
        if (coef(n, k) == kNegInf) continue;
        log_var(n, k) = log_add_exp(log_var(n, k), 2.0 * (coef(n, k) + log_sd_j));
      }
    }
  }
  TriangularArray rel(n_max, 0.0);
  for (std::size_t n = 1; n <= n_max; ++n) {
    for (std::size_t k = 1; k <= n; ++k) {
      rel(n, k) = log_var(n, k) == kNegInf ? 0.0 : std::exp(0.5 * log_var(n, k) - unnormalized.log_v(n, k));
    }
  }
  return rel;
}

BlockCoefficients::BlockCoefficients(std::size_t n_max, double alpha)
    : alpha_(alpha),
      table_(alpha == 0.0 ? std::variant<GfcTable, StirlingTable>(StirlingTable(std::max<std::size_t>(n_max, 1)))
                          : std::variant<GfcTable, StirlingTable>(GfcTable(std::max<std::size_t>(n_max, 1), alpha))) {}

std::size_t BlockCoefficients::n_max() const {
  return std::visit([](const auto& t) { return t.n_max(); }, table_);
}

double BlockCoefficients::log_value(std::size_t n, std::size_t k) const {
  return std::visit([&](const auto& t) { return t.log_block_coefficient(n, k); }, table_);
}

double log_primitive(const WeightTable& table, const BlockCoefficients& coef, std::size_t n, std::size_t z1,
                     std::size_t z2) {
  if (n == 0) throw DomainError("primitive: g_0 is defined only through the g_0(s,1) proviso");
  if (z2 > z1) throw DomainError("primitive: z2 > z1 would need weights with more blocks than customers");
  if (table.n_max() < n + z1) {
    throw TableDepthError("primitive: weight table depth " + std::to_string(table.n_max()) + " < " +
                          std::to_string(n + z1));
  }
  if (coef.n_max() < n) {
    throw TableDepthError("primitive: coefficient table depth " + std::to_string(coef.n_max()) + " < " +
                          std::to_string(n));
  }
  std::vector<double> terms;
  terms.reserve(n);
  for (std::size_t k = 1; k <= n; ++k) {
    terms.push_back(table.log_v(n + z1, k + z2) + coef.log_value(n, k));
  }
  return log_sum_exp(terms);
}

double primitive(const WeightTable& table, const BlockCoefficients& coef, std::size_t n, std::size_t z1,
                 std::size_t z2) {
  return std::exp(log_primitive(table, coef, n, z1, z2));
}

double log_py_primitive_closed(double alpha, double theta, std::size_t n, PrimitiveKind which) {
  require(alpha >= 0.0 && alpha < 1.0, "py_primitive_closed: alpha must lie in [0, 1)");
  require(theta > -alpha && (alpha > 0.0 || theta > 0.0), "py_primitive_closed: theta must exceed -alpha");
  if (which == PrimitiveKind::k10) {
    require(n >= 1, "py_primitive_closed: g_0(1,0) is undefined");
    return -std::log(theta + static_cast<double>(n));
  }
  return log_rising_factorial(theta + alpha, n) - log_rising_factorial(theta + 1.0, n);
}

double py_primitive_closed(double alpha, double theta, std::size_t n, PrimitiveKind which) {
  return std::exp(log_py_primitive_closed(alpha, theta, n, which));
}

PrimitiveCache PrimitiveCache::build(const GibbsModel& model, std::size_t n) {
  if (n == 0) throw DomainError("PrimitiveCache: n must be positive");
  return build(model, n, std::make_shared<const WeightTable>(build_weight_table(model, n)));
}

PrimitiveCache PrimitiveCache::build(const GibbsModel& model, std::size_t n, std::shared_ptr<const WeightTable> table) {
  if (n == 0) throw DomainError("PrimitiveCache: n must be positive");
  if (!table || table->n_max() < n) throw TableDepthError("PrimitiveCache: weight table too shallow");
  PrimitiveCache cache(model);
  cache.alpha_ = model.alpha();
  cache.n_ = n;
  cache.table_ = std::move(table);
  cache.coef_ = std::make_shared<const BlockCoefficients>(n, cache.alpha_);
  const double alpha = cache.alpha_;
  const double theta = model.free_parameter();
  const bool closed = model.closed_form();
  cache.log_g10_.assign(n, kNegInf);
  cache.log_g11_.assign(n, 0.0);
  for (std::size_t m = 1; m < n; ++m) {
    if (closed) {
      cache.log_g10_[m] = log_py_primitive_closed(alpha, theta, m, PrimitiveKind::k10);
      cache.log_g11_[m] = log_py_primitive_closed(alpha, theta, m, PrimitiveKind::k11);
    } else {
      cache.log_g10_[m] = log_primitive(*cache.table_, *cache.coef_, m, 1, 0);
      cache.log_g11_[m] = log_primitive(*cache.table_, *cache.coef_, m, 1, 1);
    }
  }
  cache.cumsum_g11_.assign(n + 1, 0.0);
  for (std::size_t m = 1; m <= n; ++m) {
    cache.cumsum_g11_[m] = cache.cumsum_g11_[m - 1] + std::exp(cache.log_g11_[m - 1]);
  }
  cache.log_gs1_.assign(n + 1, kNegInf);
  for (std::size_t s = 1; s <= n; ++s) cache.log_gs1_[s] = cache.log_g(n - s, s);
  cache.log_take_last_.assign(n, kNegInf);
  for (std::size_t s = 1; s + 1 <= n; ++s) cache.log_take_last_[s] = cache.log_take_probability(n - 1, s);
  return cache;
}

double PrimitiveCache::log_take_probability(std::size_t m, std::size_t s) const {
  if (s == 0 || s > m) throw DomainError("PrimitiveCache: take probability needs 1 <= s <= m");
  if (m >= n_) throw TableDepthError("PrimitiveCache: take probability needs m < n");
  if (m + 1 == n_ && !log_take_last_.empty() && log_take_last_[s] != kNegInf) return log_take_last_[s];
  const double log_s = std::log(static_cast<double>(s) - alpha_);
  if (model_.closed_form()) return log_s + log_g10_[m];
  return log_s + log_g(m - s, s + 1) - log_g(m - s, s);
}

PrimitiveIdentityDefects primitive_identity_defects(const PrimitiveCache& cache) {
  PrimitiveIdentityDefects out;
  const std::size_t n = cache.n();
  const double alpha = cache.alpha();
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t s = 1; m + s + 1 <= n; ++s) {
      const double base = cache.log_g(m, s);
      const double next = cache.log_g(m, s + 1);
      const double stay = std::exp(cache.log_g(m + 1, s) - base);
      const double take = (static_cast<double>(s) - alpha) * std::exp(next - base);
      out.complement = std::max(out.complement, std::fabs(stay + take - 1.0));
      if (m + s >= 1 && m + s < n) {
        out.product = std::max(out.product, std::fabs(std::expm1(next - base - cache.log_g10(m + s))));
      }
    }
  }
  return out;
}

double PrimitiveCache::log_g10(std::size_t m) const {
  if (m == 0) throw DomainError("PrimitiveCache: g_0(1,0) is undefined");
  if (m >= n_) throw TableDepthError("PrimitiveCache: g_m(1,0) needs m < n");
  return log_g10_[m];
}

double PrimitiveCache::log_g11(std::size_t m) const {
  if (m >= n_) throw TableDepthError("PrimitiveCache: g_m(1,1) needs m < n");
  return log_g11_[m];
}

double PrimitiveCache::log_g(std::size_t m, std::size_t s) const {
  if (s == 0) throw DomainError("PrimitiveCache: g_m(s,1) needs s >= 1");
  if (m + s > n_) throw TableDepthError("PrimitiveCache: g_m(s,1) needs m + s <= n");
  if (m + s == n_ && !log_gs1_.empty() && log_gs1_[s] != kNegInf) return log_gs1_[s];
  // g_0(s,1) is the k = 0 term alone: V_{s,1} alpha^0 C(0,0) = V_{s,1}.
  if (m == 0) return table_->log_v(s, 1);
  return log_primitive(*table_, *coef_, m, s, 1);
}

double PrimitiveCache::sum_g11(std::size_t m) const {
  if (m > n_) throw TableDepthError("PrimitiveCache: sum_g11 beyond n");
  return cumsum_g11_[m];
}

std::string PrimitiveCache::content_hash() const {
  std::ostringstream out;
  out << model_.describe() << "\nn=" << n_ << "\n";
  auto emit = [&](const char* name, const std::vector<double>& values, std::size_t first) {
    out << name;
    for (std::size_t i = first; i < values.size(); ++i) out << ' ' << detail::format_double(values[i]);
    out << '\n';
  };
  emit("log_g10", log_g10_, 1);
  emit("log_g11", log_g11_, 0);
  emit("log_gs1", log_gs1_, 1);
  return detail::git_blob_sha1(out.str());
}

double persistence_probability(const PrimitiveCache& cache, std::size_t n, std::size_t s) {
  if (s == 0 || s > n) throw DomainError("persistence_probability: need n >= s >= 1");
  if (n > cache.n()) throw TableDepthError("persistence_probability: n beyond cache depth");
  return std::exp(log_rising_factorial(1.0 - cache.alpha(), s - 1) + cache.log_g(n - s, s));
}

std::vector<double> block_count_distribution(const WeightTable& table, const BlockCoefficients& coef, std::size_t n) {
  if (n == 0) throw DomainError("block_count_distribution: n must be positive");
  if (table.n_max() < n || coef.n_max() < n) throw TableDepthError("block_count_distribution: tables too shallow");
  std::vector<double> p(n);
  double total = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    p[k - 1] = std::exp(table.log_v(n, k) + coef.log_value(n, k));
    total += p[k - 1];
  }
  double tolerance = 1e-8;
  if (const auto* mc = std::get_if<MonteCarloProvenance>(&table.provenance)) {
    tolerance = std::max(tolerance, mc->v11_se > 0.0 ? 3.0 * mc->v11_se : 1e-3);
  }
  if (!(std::fabs(total - 1.0) <= tolerance)) {
    throw NumericError("block_count_distribution: probabilities sum to " + num(total) + " at n=" + std::to_string(n));
  }
  return p;
}

std::vector<double> block_count_distribution(const GibbsModel& model, std::size_t n) {
  const WeightTable table = build_weight_table(model, n);
  const BlockCoefficients coef(n, model.alpha());
  return block_count_distribution(table, coef, n);
}

double expected_blocks(const GibbsModel& model, std::size_t n) {
  const std::vector<double> p = block_count_distribution(model, n);
  double e = 0.0;
  for (std::size_t k = 1; k <= n; ++k) e += static_cast<double>(k) * p[k - 1];
  return e;
}

CalibrationResult calibrate(Family family, double alpha, double target, std::size_t m, double tolerance) {
  if (m == 0) throw DomainError("calibrate: m must be positive");
  if (!(target > 1.0 && target < static_cast<double>(m))) {
    throw DomainError("calibrate: target E[B_" + std::to_string(m) + "] = " + num(target) +
                      " is outside the open range (1, " + std::to_string(m) + ")");
  }
  McConfig quad;
  quad.method = NggWeightMethod::kQuadrature;
  // Parameterize by x = log(theta + alpha) for PY (theta > -alpha) and x = log(free) otherwise.
  auto make = [&](double x) -> GibbsModel {
    switch (family) {
      case Family::kDirichlet:
        return GibbsModel::dirichlet(std::exp(x));
      case Family::kPitmanYor:
        return GibbsModel::pitman_yor(alpha, std::exp(x) - alpha);
      case Family::kNgg:
        return GibbsModel::ngg(alpha, std::exp(x), quad);
      case Family::kNig:
        return GibbsModel::nig(std::exp(x), quad);
    }
    throw DomainError("calibrate: unknown family");
  };
  double lo = std::log(1e-10);
  double hi = std::log(1e10);
  if (family == Family::kNgg) {
    // Work in b = beta^alpha, whose useful range does not depend on alpha.
    lo = std::log(1e-8) / alpha;
    hi = std::log(1e5) / alpha;
  }
  double f_lo = expected_blocks(make(lo), m);
  double f_hi = expected_blocks(make(hi), m);
  if (target < f_lo || target > f_hi) {
    throw DomainError("calibrate: target " + num(target) + " unreachable; E[B_" + std::to_string(m) +
                      "] ranges over [" + num(f_lo) + ", " + num(f_hi) + "] for this family");
  }
  CalibrationResult result{make(0.5 * (lo + hi)), 0.0, 0.0, m, 0};
  for (int it = 1; it <= 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const GibbsModel model = make(mid);
    const double f = expected_blocks(model, m);
    result = CalibrationResult{model, model.free_parameter(), f, m, it};
    if (std::fabs(f - target) < tolerance || hi - lo < 1e-15) break;
    if (f < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return result;
}

}  // namespace gibbs_ibp
