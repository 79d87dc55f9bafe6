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

// gibbs-ibp: simulation, primitives, power-law statistics, calibration and
// posterior inference for Gibbs-type Indian buffet processes.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gibbs_ibp/error.hpp"
#include "gibbs_ibp/gibbs_weights.hpp"
#include "gibbs_ibp/ibp.hpp"
#include "gibbs_ibp/inference.hpp"
#include "gibbs_ibp/stick_breaking.hpp"

#ifndef GIBBS_IBP_VERSION
#define GIBBS_IBP_VERSION "unknown"
#endif

namespace {

namespace fs = std::filesystem;
using gibbs_ibp::GibbsModel;
using Json = nlohmann::ordered_json;

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  std::array<char, 64> buf{};
  const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), result.ptr);
}

// Options shared by every subcommand. They live on the top-level app so a
// single config file can carry them regardless of the subcommand.
struct CommonOptions {
  std::string model = "dp";
  double alpha = 0.5;
  double theta = 1.0;
  double beta = 1.0;
  std::uint64_t mc_samples = 100000;
  std::uint64_t mc_seed = 1;
  std::string ngg_weights = "auto";  // auto: subcommand default
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::string cache_dir;
};

gibbs_ibp::NggWeightMethod parse_method(const std::string& name) {
  if (name == "mc") return gibbs_ibp::NggWeightMethod::kMonteCarlo;
  if (name == "quadrature") return gibbs_ibp::NggWeightMethod::kQuadrature;
  throw UsageError("unknown --ngg-weights '" + name + "' (expected mc or quadrature)");
}

GibbsModel make_model(const std::string& family, double alpha, double free, const gibbs_ibp::McConfig& mc) {
  switch (gibbs_ibp::parse_family(family)) {
    case gibbs_ibp::Family::kDirichlet:
      return GibbsModel::dirichlet(free);
    case gibbs_ibp::Family::kPitmanYor:
      return GibbsModel::pitman_yor(alpha, free);
    case gibbs_ibp::Family::kNgg:
      return GibbsModel::ngg(alpha, free, mc);
    case gibbs_ibp::Family::kNig:
      return GibbsModel::nig(free, mc);
  }
  throw UsageError("unknown model '" + family + "'");
}

gibbs_ibp::McConfig mc_config(const CommonOptions& opt, gibbs_ibp::NggWeightMethod fallback) {
  gibbs_ibp::McConfig mc;
  mc.samples = opt.mc_samples;
  mc.seed = opt.mc_seed;
  mc.method = opt.ngg_weights == "auto" ? fallback : parse_method(opt.ngg_weights);
  return mc;
}

GibbsModel model_from(const CommonOptions& opt, gibbs_ibp::NggWeightMethod fallback) {
  const auto family = gibbs_ibp::parse_family(opt.model);
  const bool uses_theta = family == gibbs_ibp::Family::kDirichlet || family == gibbs_ibp::Family::kPitmanYor;
  return make_model(opt.model, opt.alpha, uses_theta ? opt.theta : opt.beta, mc_config(opt, fallback));
}

// "dp:THETA", "py:ALPHA:THETA", "ngg:ALPHA:BETA", "nig:BETA".
GibbsModel parse_model_spec(const std::string& spec, const gibbs_ibp::McConfig& mc) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  auto number = [&](std::size_t i) {
    try {
      std::size_t used = 0;
      const double x = std::stod(parts.at(i), &used);
      if (used != parts[i].size()) throw std::invalid_argument("trailing characters");
      return x;
    } catch (const std::exception&) {
      throw UsageError("malformed model spec '" + spec + "'");
    }
  };
  if (parts.empty()) throw UsageError("empty model spec");
  const auto family = gibbs_ibp::parse_family(parts[0]);
  const bool two = family == gibbs_ibp::Family::kPitmanYor || family == gibbs_ibp::Family::kNgg;
  if (parts.size() != (two ? 3u : 2u)) throw UsageError("malformed model spec '" + spec + "'");
  return two ? make_model(parts[0], number(1), number(2), mc) : make_model(parts[0], 0.0, number(1), mc);
}

std::string cache_directory(const CommonOptions& opt) {
  if (const char* env = std::getenv("GIBBS_IBP_CACHE_DIR"); env != nullptr && *env != '\0') return env;
  return opt.cache_dir;
}

std::shared_ptr<const gibbs_ibp::PrimitiveCache> primitive_cache(const GibbsModel& model, std::size_t n,
                                                                 const CommonOptions& opt) {
  auto table = gibbs_ibp::cached_weight_table(model, n, cache_directory(opt));
  return std::make_shared<const gibbs_ibp::PrimitiveCache>(gibbs_ibp::PrimitiveCache::build(model, n, table));
}

class RunOutput {
 public:
  RunOutput(const CLI::App& app, const CommonOptions& opt, const std::string& subcommand)
      : dir_(opt.out_dir), subcommand_(subcommand) {
    fs::create_directories(dir_);
    // Keep the shared options and those of the active subcommand only.
    std::istringstream all(app.config_to_str(true, false));
    const std::string prefix = subcommand + ".";
    for (std::string line; std::getline(all, line);) {
      const auto key = line.substr(0, line.find('='));
      if (key.find('.') == std::string::npos || key.rfind(prefix, 0) == 0) config_ += line + '\n';
    }
    manifest_["tool"] = "gibbs-ibp";
    manifest_["version"] = GIBBS_IBP_VERSION;
    manifest_["subcommand"] = subcommand;
    manifest_["seed"] = opt.seed;
  }

  std::ofstream open(const std::string& name) {
    std::ofstream out(dir_ / name);
    if (!out) throw UsageError("cannot write " + (dir_ / name).string());
    out.precision(17);
    outputs_.push_back(name);
    return out;
  }

  Json& manifest() { return manifest_; }

  // run.ini replays the run through --config; manifest.json records it.
  void finish() {
    {
      std::ofstream ini(dir_ / "run.ini");
      ini << config_;
    }
    manifest_["outputs"] = outputs_;
    manifest_["config"] = config_;
    std::ofstream out(dir_ / "manifest.json");
    out << manifest_.dump(2) << '\n';
  }

 private:
  fs::path dir_;
  std::string subcommand_;
  std::string config_;
  Json manifest_;
  std::vector<std::string> outputs_;
};

gibbs_ibp::Matrix read_data(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open data file '" + path + "'");
  return gibbs_ibp::read_matrix_csv(in);
}

// ---------------------------------------------------------------------------

struct SimulateOptions {
  double gamma = 1.0;
  std::size_t n = 10;
};

void run_simulate(const CLI::App& app, const CommonOptions& opt, const SimulateOptions& sim) {
  if (sim.n == 0) throw UsageError("--n must be positive");
  if (!(sim.gamma >= 0.0)) throw UsageError("--gamma must be non-negative");
  const auto model = model_from(opt, gibbs_ibp::NggWeightMethod::kMonteCarlo);
  const auto cache = primitive_cache(model, sim.n, opt);
  auto rng = gibbs_ibp::make_stream(opt.seed);
  const auto z = gibbs_ibp::simulate_ibp(*cache, sim.gamma, sim.n, rng);
  const auto stats = gibbs_ibp::feature_statistics(z);

  RunOutput run(app, opt, "simulate");
  {
    auto out = run.open("allocation.csv");
    gibbs_ibp::write_allocation_csv(out, z);
  }
  {
    auto out = run.open("statistics.csv");
    out << "j,K_j,multiplicity\n";
    for (std::size_t j = 1; j <= sim.n; ++j)
      out << j << ',' << stats.k_trajectory[j - 1] << ',' << stats.multiplicity[j - 1] << '\n';
  }
  run.manifest()["model"] = model.describe();
  run.manifest()["primitive_cache_sha1"] = cache->content_hash();
  run.manifest()["K"] = z.num_features();
  run.finish();
}

struct PrimitivesOptions {
  std::size_t n = 10;
};

void run_primitives(const CLI::App& app, const CommonOptions& opt, const PrimitivesOptions& prim) {
  if (prim.n == 0) throw UsageError("--n must be positive");
  const auto model = model_from(opt, gibbs_ibp::NggWeightMethod::kMonteCarlo);
  const auto cache = primitive_cache(model, prim.n, opt);
  RunOutput run(app, opt, "primitives");
  {
    auto out = run.open("primitives.csv");
    out << "m,g10,g11,s,gs1\n";
    for (std::size_t m = 0; m < prim.n; ++m) {
      // g_0(1,0) would need V_{1,0}, which is not defined.
      const double g10 = m == 0 ? std::numeric_limits<double>::quiet_NaN() : cache->g10(m);
      const std::size_t s = m + 1;
      out << m << ',' << fmt(g10) << ',' << fmt(cache->g11(m)) << ',' << s << ',' << fmt(std::exp(cache->log_gs1(s)))
          << '\n';
    }
  }
  run.manifest()["model"] = model.describe();
  run.manifest()["primitive_cache_sha1"] = cache->content_hash();
  run.finish();
}

struct StatsOptions {
  std::vector<std::string> models;
  bool calibrated = false;
  double gamma = 1.0;
  std::size_t n_max = 1000;
};

// The comparison behind the asymptotics plot: PY(0.5) and NGG(0.75) fitted
// to E[B_50] = 25, DP at the PY theta and NIG at beta = 1.
std::vector<GibbsModel> calibrated_models(const gibbs_ibp::McConfig& mc) {
  using gibbs_ibp::Family;
  const auto py = gibbs_ibp::calibrate(Family::kPitmanYor, 0.5, 25.0);
  const auto ngg = gibbs_ibp::calibrate(Family::kNgg, 0.75, 25.0);
  return {GibbsModel::dirichlet(py.parameter), py.model, ngg.model, GibbsModel::nig(1.0, mc)};
}

void run_stats(const CLI::App& app, const CommonOptions& opt, const StatsOptions& st) {
  if (st.n_max == 0) throw UsageError("--n-max must be positive");
  if (!(st.gamma > 0.0)) throw UsageError("--gamma must be positive");
  const auto mc = mc_config(opt, gibbs_ibp::NggWeightMethod::kQuadrature);
  std::vector<GibbsModel> models;
  if (st.calibrated) models = calibrated_models(mc);
  for (const auto& spec : st.models) models.push_back(parse_model_spec(spec, mc));
  if (models.empty()) models.push_back(model_from(opt, gibbs_ibp::NggWeightMethod::kQuadrature));

  struct Rows {
    std::vector<double> k, k1;
    double limit = std::numeric_limits<double>::quiet_NaN();
    std::exception_ptr error;
  };
  std::vector<Rows> rows(models.size());
  {
    std::vector<std::jthread> workers;
    for (std::size_t i = 0; i < models.size(); ++i) {
      workers.emplace_back([&, i] {
        try {
          rows[i].k = gibbs_ibp::expected_features_trajectory(models[i], st.gamma, st.n_max);
          rows[i].k1 = gibbs_ibp::expected_singletons_trajectory(models[i], st.gamma, st.n_max);
          // DP grows like theta log n rather than a power of n.
          const auto c = gibbs_ibp::powerlaw_constant(models[i]);
          rows[i].limit = c ? *c : models[i].free_parameter();
        } catch (...) {
          rows[i].error = std::current_exception();
        }
      });
    }
  }
  for (const auto& r : rows)
    if (r.error) std::rethrow_exception(r.error);

  RunOutput run(app, opt, "stats");
  {
    auto out = run.open("stats.csv");
    out << "model,n,expected_K,expected_K1,scaled_K,limit\n";
    for (std::size_t i = 0; i < models.size(); ++i) {
      const double alpha = models[i].alpha();
      const std::string name = '"' + models[i].describe() + '"';
      for (std::size_t n = 1; n <= st.n_max; ++n) {
        const double nn = static_cast<double>(n);
        const double rate = alpha > 0.0 ? std::pow(nn, alpha) : std::log(nn);
        const double scaled = rate > 0.0 ? rows[i].k[n - 1] / (st.gamma * rate)
                                         : std::numeric_limits<double>::quiet_NaN();
        out << name << ',' << n << ',' << fmt(rows[i].k[n - 1]) << ',' << fmt(rows[i].k1[n - 1]) << ','
            << fmt(scaled) << ',' << fmt(rows[i].limit) << '\n';
      }
    }
  }
  Json described = Json::array();
  for (const auto& m : models) described.push_back(m.describe());
  run.manifest()["models"] = described;
  run.finish();
}

struct CalibrateOptions {
  double target = 25.0;
  std::size_t m = 50;
  double tolerance = 1e-6;
};

void run_calibrate(const CLI::App& app, const CommonOptions& opt, const CalibrateOptions& cal) {
  const auto family = gibbs_ibp::parse_family(opt.model);
  const auto result = gibbs_ibp::calibrate(family, opt.alpha, cal.target, cal.m, cal.tolerance);
  const bool uses_theta = family == gibbs_ibp::Family::kDirichlet || family == gibbs_ibp::Family::kPitmanYor;
  Json j;
  j["family"] = gibbs_ibp::to_string(family);
  j["alpha"] = result.model.alpha();
  j["parameter_name"] = uses_theta ? "theta" : "beta";
  j["parameter"] = result.parameter;
  j["target"] = cal.target;
  j["m"] = result.m;
  j["achieved"] = result.achieved;
  j["iterations"] = result.iterations;
  j["model"] = result.model.describe();

  RunOutput run(app, opt, "calibrate");
  {
    auto out = run.open("calibration.json");
    out << j.dump(2) << '\n';
  }
  run.manifest()["model"] = result.model.describe();
  run.finish();
  std::cout << j.dump(2) << '\n';
}

struct ChainOptions {
  double gamma = 1.0;
  std::size_t iterations = 1000;
  std::size_t burn_in = 0;
  std::size_t thin = 1;
  std::size_t chains = 1;
  bool fixed_gamma = false;
  bool fixed_model = false;
  bool fixed_scales = false;
  double gamma_shape = 1.0;
  double gamma_rate = 1.0;
  double variance_shape = 1.0;
  double variance_scale = 1.0;

  gibbs_ibp::Priors priors() const {
    gibbs_ibp::Priors p;
    p.gamma_shape = gamma_shape;
    p.gamma_rate = gamma_rate;
    p.variance_shape = variance_shape;
    p.variance_scale = variance_scale;
    return p;
  }
};

struct FitOptions {
  std::string data;
};

void run_fit(const CLI::App& app, const CommonOptions& opt, const ChainOptions& ch, const FitOptions& fit) {
  if (ch.thin == 0 || ch.chains == 0) throw UsageError("--thin and --chains must be positive");
  const auto y = read_data(fit.data);
  const auto model = model_from(opt, gibbs_ibp::NggWeightMethod::kQuadrature);
  gibbs_ibp::ChainConfig config;
  config.iterations = ch.iterations;
  config.burn_in = ch.burn_in;
  config.thin = ch.thin;
  config.seed = opt.seed;
  config.priors = ch.priors();
  config.update_gamma = !ch.fixed_gamma;
  config.update_model = !ch.fixed_model;
  config.update_scales = !ch.fixed_scales;

  gibbs_ibp::SampleArchive archive;
  gibbs_ibp::run_chains(y, model, ch.gamma, config, ch.chains, archive);

  RunOutput run(app, opt, "fit");
  {
    auto out = run.open("samples.csv");
    archive.write_csv(out);
  }
  std::ostringstream chain_manifest;
  gibbs_ibp::write_manifest(chain_manifest, config, gibbs_ibp::initial_state(y, model, ch.gamma, opt.seed),
                            ch.chains);
  run.manifest()["data"] = fit.data;
  run.manifest()["chain"] = Json::parse(chain_manifest.str());
  run.finish();
}

struct SynthesizeOptions {
  std::size_t n = 100;
  std::size_t p = 20;
  std::size_t singletons = 8;
  double sigma_y = 1.0;
  double sigma_w = 1.0;
  double sigma_a = 1.0;
};

void run_synthesize(const CLI::App& app, const CommonOptions& opt, const SynthesizeOptions& syn) {
  if (syn.n < 2 || syn.p == 0) throw UsageError("--n must be at least 2 and --p positive");
  const auto z = gibbs_ibp::dense_plus_singletons_design(syn.n, syn.singletons);
  const auto data = gibbs_ibp::synthesize_data(z, syn.p, {syn.sigma_y, syn.sigma_w, syn.sigma_a}, opt.seed);
  RunOutput run(app, opt, "synthesize");
  {
    auto out = run.open("data.csv");
    gibbs_ibp::write_matrix_csv(out, data.y, "y");
  }
  {
    auto out = run.open("truth_allocation.csv");
    gibbs_ibp::write_allocation_csv(out, z);
  }
  {
    auto out = run.open("truth_weights.csv");
    gibbs_ibp::write_matrix_csv(out, data.w, "w");
  }
  {
    auto out = run.open("truth_loadings.csv");
    gibbs_ibp::write_matrix_csv(out, data.a, "a");
  }
  run.manifest()["K"] = z.num_features();
  run.finish();
}

struct GewekeOptions {
  std::size_t n = 8;
  std::size_t p = 4;
  std::size_t rounds = 100000;
  std::size_t batches = 50;
};

void run_geweke(const CLI::App& app, const CommonOptions& opt, const ChainOptions& ch, const GewekeOptions& gw) {
  gibbs_ibp::GewekeConfig config;
  config.n = gw.n;
  config.p = gw.p;
  config.model = model_from(opt, gibbs_ibp::NggWeightMethod::kQuadrature);
  config.rounds = gw.rounds;
  config.seed = opt.seed;
  config.priors = ch.priors();
  config.batches = gw.batches;
  const auto stats = gibbs_ibp::geweke_check(config);

  RunOutput run(app, opt, "geweke");
  {
    auto out = run.open("geweke.csv");
    out << "statistic,marginal_mean,successive_mean,z\n";
    for (const auto& s : stats)
      out << s.name << ',' << fmt(s.marginal_mean) << ',' << fmt(s.successive_mean) << ',' << fmt(s.z) << '\n';
  }
  std::printf("%-18s %14s %14s %8s\n", "statistic", "marginal", "successive", "z");
  for (const auto& s : stats)
    std::printf("%-18s %14.6g %14.6g %8.3f\n", s.name.c_str(), s.marginal_mean, s.successive_mean, s.z);
  run.manifest()["model"] = config.model.describe();
  run.finish();
}

struct StructuralOptions {
  std::size_t grid = 999;
  std::size_t max_depth = 10;
};

void run_structural(const CLI::App& app, const CommonOptions& opt, const StructuralOptions& so) {
  if (so.grid == 0) throw UsageError("--grid must be positive");
  const auto model = model_from(opt, gibbs_ibp::NggWeightMethod::kQuadrature);
  std::vector<double> grid(so.grid);
  for (std::size_t i = 0; i < so.grid; ++i)
    grid[i] = static_cast<double>(i + 1) / static_cast<double>(so.grid + 1);
  RunOutput run(app, opt, "structural");
  {
    auto out = run.open("structural.csv");
    gibbs_ibp::write_structural_density_csv(out, model, grid);
  }
  // The superposition representation is specific to the stick-breaking families.
  if (model.closed_form()) {
    auto out = run.open("superposition.csv");
    gibbs_ibp::write_superposition_csv(out, model, so.max_depth, grid);
  }
  run.manifest()["model"] = model.describe();
  run.finish();
}

void add_chain_options(CLI::App* sub, ChainOptions& ch) {
  sub->add_option("--gamma-shape", ch.gamma_shape, "Gamma prior shape for gamma")->capture_default_str();
  sub->add_option("--gamma-rate", ch.gamma_rate, "Gamma prior rate for gamma")->capture_default_str();
  sub->add_option("--variance-shape", ch.variance_shape, "Inverse-gamma shape for the variances")
      ->capture_default_str();
  sub->add_option("--variance-scale", ch.variance_scale, "Inverse-gamma scale for the variances")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gibbs-type Indian buffet processes: simulation, primitives and inference"};
  app.set_version_flag("--version", GIBBS_IBP_VERSION);
  app.set_config("--config", "", "Read options from a key=value file (as written to run.ini)");
  app.require_subcommand(1);
  app.fallthrough();

  CommonOptions opt;
  const std::vector<std::string> families{"dp", "py", "ngg", "nig"};
  app.add_option("--model", opt.model, "Model family")->check(CLI::IsMember(families))->capture_default_str();
  app.add_option("--alpha", opt.alpha, "Discount (py, ngg)")->capture_default_str();
  app.add_option("--theta", opt.theta, "Concentration (dp, py)")->capture_default_str();
  app.add_option("--beta", opt.beta, "Tilting parameter (ngg, nig)")->capture_default_str();
  app.add_option("--mc-samples", opt.mc_samples, "Monte-Carlo samples for ngg/nig weights")->capture_default_str();
  app.add_option("--mc-seed", opt.mc_seed, "Seed of the Monte-Carlo weight estimator")->capture_default_str();
  app.add_option("--ngg-weights", opt.ngg_weights, "ngg/nig weights: mc, quadrature or auto")
      ->check(CLI::IsMember({"auto", "mc", "quadrature"}))
      ->capture_default_str();
  app.add_option("--seed", opt.seed, "Master seed")->capture_default_str();
  app.add_option("--out-dir", opt.out_dir, "Output directory")->capture_default_str();
  app.add_option("--cache-dir", opt.cache_dir, "Weight-table cache (GIBBS_IBP_CACHE_DIR overrides)");

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Draw a feature allocation from the buffet scheme");
  simulate->add_option("--gamma", sim.gamma, "Mass parameter")->capture_default_str();
  simulate->add_option("--n", sim.n, "Customers")->capture_default_str();

  PrimitivesOptions prim;
  auto* primitives = app.add_subcommand("primitives", "Tabulate g_m(1,0), g_m(1,1) and g_{n-s}(s,1)");
  primitives->add_option("--n", prim.n, "Depth")->capture_default_str();

  StatsOptions st;
  auto* stats = app.add_subcommand("stats", "Expected feature counts and power-law constants");
  stats->add_option("--models", st.models, "Model specs: dp:THETA, py:ALPHA:THETA, ngg:ALPHA:BETA, nig:BETA");
  stats->add_flag("--calibrated", st.calibrated, "Add py(0.5) and ngg(0.75) fitted to E[B_50] = 25, dp at the py theta, nig(1)");
  stats->add_option("--gamma", st.gamma, "Mass parameter")->capture_default_str();
  stats->add_option("--n-max", st.n_max, "Largest n")->capture_default_str();

  CalibrateOptions cal;
  auto* calibrate = app.add_subcommand("calibrate", "Fit theta or beta to a target E[B_m] with --alpha fixed");
  calibrate->add_option("--target", cal.target, "Target expected block count")->capture_default_str();
  calibrate->add_option("--m", cal.m, "Sample size of the target")->capture_default_str();
  calibrate->add_option("--tolerance", cal.tolerance, "Absolute tolerance on E[B_m]")->capture_default_str();

  ChainOptions ch;
  FitOptions fo;
  auto* fit = app.add_subcommand("fit", "Posterior inference for the linear-Gaussian latent feature model");
  fit->add_option("--data", fo.data, "Data matrix CSV (header row, n rows of p values)")->required();
  fit->add_option("--gamma", ch.gamma, "Initial mass parameter")->capture_default_str();
  fit->add_option("--iterations", ch.iterations, "Sweeps")->capture_default_str();
  fit->add_option("--burn-in", ch.burn_in, "Sweeps discarded before recording")->capture_default_str();
  fit->add_option("--thin", ch.thin, "Record every thin-th sweep")->capture_default_str();
  fit->add_option("--chains", ch.chains, "Independent chains, one thread each")->capture_default_str();
  fit->add_flag("--fixed-gamma", ch.fixed_gamma, "Hold gamma at its initial value");
  fit->add_flag("--fixed-model", ch.fixed_model, "Hold the model parameters fixed");
  fit->add_flag("--fixed-scales", ch.fixed_scales, "Hold the noise and prior scales fixed");
  add_chain_options(fit, ch);

  SynthesizeOptions syn;
  auto* synthesize = app.add_subcommand("synthesize", "Dense-plus-singletons synthetic data set");
  synthesize->add_option("--n", syn.n, "Rows")->capture_default_str();
  synthesize->add_option("--p", syn.p, "Columns")->capture_default_str();
  synthesize->add_option("--singletons", syn.singletons, "Features held by one row")->capture_default_str();
  synthesize->add_option("--sigma-y", syn.sigma_y, "Noise scale")->capture_default_str();
  synthesize->add_option("--sigma-w", syn.sigma_w, "Weight scale")->capture_default_str();
  synthesize->add_option("--sigma-a", syn.sigma_a, "Loading scale")->capture_default_str();

  GewekeOptions gw;
  auto* geweke = app.add_subcommand("geweke", "Joint-distribution test of the posterior sampler");
  geweke->add_option("--n", gw.n, "Rows")->capture_default_str();
  geweke->add_option("--p", gw.p, "Columns")->capture_default_str();
  geweke->add_option("--rounds", gw.rounds, "Draws from each simulator")->capture_default_str();
  geweke->add_option("--batches", gw.batches, "Batches for the successive-conditional s.e.")
      ->capture_default_str();
  add_chain_options(geweke, ch);

  StructuralOptions so;
  auto* structural = app.add_subcommand("structural", "Structural density and superposition intensities");
  structural->add_option("--grid", so.grid, "Interior grid points on (0, 1)")->capture_default_str();
  structural->add_option("--max-depth", so.max_depth, "Deepest superposition layer")->capture_default_str();

  for (auto* sub : app.get_subcommands({})) sub->configurable();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*simulate) run_simulate(app, opt, sim);
    if (*primitives) run_primitives(app, opt, prim);
    if (*stats) run_stats(app, opt, st);
    if (*calibrate) run_calibrate(app, opt, cal);
    if (*fit) run_fit(app, opt, ch, fo);
    if (*synthesize) run_synthesize(app, opt, syn);
    if (*geweke) run_geweke(app, opt, ch, gw);
    if (*structural) run_structural(app, opt, so);
  } catch (const gibbs_ibp::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const gibbs_ibp::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const gibbs_ibp::TableDepthError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
