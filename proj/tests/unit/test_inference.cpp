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


#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <gtest/gtest.h>
#include <json.hpp>

#include "gibbs_ibp/error.hpp"
#include "gibbs_ibp/inference.hpp"
#include "gibbs_ibp/special_functions.hpp"
#include "oracles.hpp"

namespace gibbs_ibp {
namespace {

TEST(Likelihood, MatchesHandComputation) {
  const auto z = FeatureAllocation::from_rows({{1, 0}, {1, 1}});
  Matrix w(2, 2);
  w << 2.0, 9.0, -1.0, 0.5;
  Matrix a(2, 1);
  a << 1.0, 4.0;
  Matrix y(2, 1);
  y << 2.5, 0.0;
  // Means: row 1 = 2 * 1 = 2; row 2 = -1 * 1 + 0.5 * 4 = 1.
  const Matrix mean = feature_mean(z, w, a);
  EXPECT_DOUBLE_EQ(mean(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(mean(1, 0), 1.0);
  const double sigma = 0.5;
  const double expected = -std::log(2.0 * std::numbers::pi) - 2.0 * std::log(sigma) - (0.25 + 1.0) / (2.0 * sigma * sigma);
  EXPECT_NEAR(log_likelihood(y, z, w, a, sigma), expected, 1e-14);
  EXPECT_THROW(log_likelihood(y, z, w, a, 0.0), DomainError);
  EXPECT_THROW(log_likelihood(Matrix(3, 1), z, w, a, 1.0), DomainError);
}

TEST(Design, DensePlusSingletons) {
  const auto z = dense_plus_singletons_design(100, 8);
  ASSERT_EQ(z.num_features(), 10u);
  EXPECT_EQ(z.count(0), 50u);
  EXPECT_EQ(z.count(1), 50u);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_NE(z(i, 0), z(i, 1));
  for (std::size_t k = 2; k < 10; ++k) EXPECT_EQ(z.count(k), 1u);
  EXPECT_TRUE(z.is_canonical());
  EXPECT_THROW(dense_plus_singletons_design(1, 0), DomainError);
  EXPECT_THROW(dense_plus_singletons_design(4, 5), DomainError);
}

TEST(Design, SyntheticDataIsReproducible) {
  const auto z = dense_plus_singletons_design(20, 3);
  const auto a = synthesize_data(z, 6, Scales{}, 4);
  const auto b = synthesize_data(z, 6, Scales{}, 4);
  EXPECT_EQ(a.y.rows(), 20);
  EXPECT_EQ(a.y.cols(), 6);
  EXPECT_EQ(a.w.cols(), 5);
  EXPECT_EQ(a.a.rows(), 5);
  EXPECT_TRUE(a.y.isApprox(b.y, 0.0));
  EXPECT_FALSE(a.y.isApprox(synthesize_data(z, 6, Scales{}, 5).y));
}

TEST(Priors, FeaturePriorAndGammaPosterior) {
  const auto cache = PrimitiveCache::build(GibbsModel::pitman_yor(0.5, 1.0), 10);
  for (std::size_t s = 1; s < 10; ++s)
    EXPECT_DOUBLE_EQ(feature_prior_probability(cache, s), cache.take_probability(9, s));
  // PY: (s - alpha) / (theta + n - 1).
  EXPECT_NEAR(feature_prior_probability(cache, 3), 2.5 / 10.0, 1e-14);
  Priors priors;
  priors.gamma_shape = 2.0;
  priors.gamma_rate = 3.0;
  const auto [shape, rate] = gamma_posterior(cache, 7, priors);
  EXPECT_DOUBLE_EQ(shape, 9.0);
  EXPECT_NEAR(rate, 3.0 + cache.sum_g11(10), 1e-14);
}

TEST(SliceSampler, LeavesNormalInvariant) {
  Rng rng = make_stream(2);
  auto log_density = [](double x) { return -0.5 * (x - 1.0) * (x - 1.0) / 4.0; };
  double x = 1.0;
  std::vector<double> draws;
  for (int i = 0; i < 60000; ++i) {
    x = slice_sample(x, log_density, 1.0, 32, rng);
    if (i % 6 == 0) draws.push_back(x);
  }
  const boost::math::normal dist(1.0, 2.0);
  const double d = oracle::ks_statistic(draws, [&](double v) { return boost::math::cdf(dist, v); });
  EXPECT_GT(oracle::ks_pvalue(d, draws.size()), 1e-3);
  EXPECT_THROW(slice_sample(0.0, [](double) { return kNegInf; }, 1.0, 8, rng), NumericError);
}

TEST(GammaUpdate, DrawsFromConjugatePosterior) {
  const auto model = GibbsModel::pitman_yor(0.3, 2.0);
  Priors priors;
  Rng rng = make_stream(3);
  LatentFactorState state = sample_prior_state(model, 12, 3, priors, rng);
  const auto [shape, rate] = gamma_posterior(*state.cache, state.num_features(), priors);
  std::vector<double> draws;
  for (int i = 0; i < 20000; ++i) {
    resample_gamma(state, priors);
    draws.push_back(state.gamma);
  }
  const boost::math::gamma_distribution<double> dist(shape, 1.0 / rate);
  const double d = oracle::ks_statistic(draws, [&](double v) { return boost::math::cdf(dist, v); });
  EXPECT_GT(oracle::ks_pvalue(d, draws.size()), 1e-3);
}

TEST(State, InitialAndPriorStatesAreValid) {
  const Matrix y = Matrix::Zero(6, 3);
  const auto init = initial_state(y, GibbsModel::ngg(0.5, 1.0), 2.0, 1);
  EXPECT_NO_THROW(init.validate());
  EXPECT_EQ(init.num_features(), 0u);
  EXPECT_EQ(init.p(), 3u);
  // NGG inference always runs on deterministic quadrature weights.
  EXPECT_TRUE(std::holds_alternative<QuadratureProvenance>(init.cache->weights().provenance));
  EXPECT_TRUE(std::isfinite(state_log_joint(init, y, Priors{})));

  Rng rng = make_stream(9);
  auto prior = sample_prior_state(GibbsModel::dirichlet(1.0), 8, 4, Priors{}, rng);
  EXPECT_NO_THROW(prior.validate());
  EXPECT_EQ(prior.w.rows(), 8);
  EXPECT_EQ(static_cast<std::size_t>(prior.w.cols()), prior.num_features());
  prior.sigma_y = -1.0;
  EXPECT_THROW(prior.validate(), DomainError);
  EXPECT_THROW(initial_state(Matrix(0, 2), GibbsModel::dirichlet(1.0), 1.0, 1), DomainError);
}

TEST(Sweep, KeepsStateConsistent) {
  const auto z = dense_plus_singletons_design(20, 2);
  const auto data = synthesize_data(z, 5, Scales{}, 11);
  ChainConfig config;
  auto state = initial_state(data.y, GibbsModel::pitman_yor(0.5, 1.0), 1.0, 3);
  for (int i = 0; i < 30; ++i) {
    gibbs_sweep(state, data.y, config);
    ASSERT_NO_THROW(state.validate());
    ASSERT_TRUE(state.z.is_canonical());
    ASSERT_TRUE(std::isfinite(state_log_joint(state, data.y, config.priors)));
    ASSERT_GT(state.model.alpha(), 0.0);
    ASSERT_LT(state.model.alpha(), 1.0);
  }
  EXPECT_GT(state.num_features(), 0u);
}

TEST(Chains, ArchiveLayoutAndDeterminism) {
  const auto z = dense_plus_singletons_design(16, 2);
  const auto data = synthesize_data(z, 4, Scales{}, 5);
  ChainConfig config;
  config.iterations = 20;
  config.burn_in = 5;
  config.thin = 3;
  config.seed = 8;
  SampleArchive first, second;
  run_chains(data.y, GibbsModel::dirichlet(1.0), 1.0, config, 2, first);
  run_chains(data.y, GibbsModel::dirichlet(1.0), 1.0, config, 2, second);
  EXPECT_EQ(first.chains(), (std::vector<std::size_t>{0, 1}));
  const auto chain = first.chain(0);
  // Iteration 0, then 8, 11, 14, 17, 20.
  ASSERT_EQ(chain.size(), 6u);
  EXPECT_EQ(chain[0].iteration, 0u);
  EXPECT_EQ(chain[1].iteration, 8u);
  EXPECT_EQ(chain.back().iteration, 20u);
  std::ostringstream a, b;
  first.write_csv(a);
  second.write_csv(b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')),
            "chain,iteration,K,nnz,gamma,alpha,theta,sigma_y,sigma_w,sigma_a_1,sigma_a_2,sigma_a_3,sigma_a_4,log_joint");
  EXPECT_NE(first.chain(0).back().log_joint, first.chain(1).back().log_joint);

  config.thin = 0;
  SampleArchive bad;
  EXPECT_THROW(run_chain(data.y, initial_state(data.y, GibbsModel::dirichlet(1.0), 1.0, 1), config, bad),
               DomainError);
}

TEST(Chains, ManifestRecordsConfiguration) {
  const Matrix y = Matrix::Zero(5, 2);
  ChainConfig config;
  config.seed = 77;
  std::ostringstream out;
  write_manifest(out, config, initial_state(y, GibbsModel::pitman_yor(0.5, 1.0), 1.0, 77), 3);
  const auto j = nlohmann::json::parse(out.str());
  EXPECT_EQ(j["seed"], 77);
  EXPECT_EQ(j["chains"], 3);
  EXPECT_EQ(j["family"], "py");
  EXPECT_EQ(j["primitive_cache_sha1"].get<std::string>().size(), 40u);
}

TEST(Geweke, ShortRunAgrees) {
  GewekeConfig config;
  config.rounds = 20000;
  config.batches = 40;
  config.seed = 4;
  const auto stats = geweke_check(config);
  ASSERT_GE(stats.size(), 6u);
  for (const auto& s : stats) EXPECT_LT(std::abs(s.z), 4.5) << s.name;
  config.rounds = 10;
  EXPECT_THROW(geweke_check(config), DomainError);
}

TEST(MatrixCsv, RoundTripAndErrors) {
  Matrix m(2, 3);
  m << 1.0, -2.5, 1e-300, 0.1, 3.0, 7.0;
  std::ostringstream out;
  write_matrix_csv(out, m, "y");
  EXPECT_EQ(out.str().substr(0, 9), "y1,y2,y3\n");
  std::istringstream in(out.str());
  const Matrix back = read_matrix_csv(in);
  EXPECT_TRUE(back.isApprox(m, 0.0));
  std::istringstream empty("");
  EXPECT_THROW(read_matrix_csv(empty), DomainError);
  std::istringstream ragged("a,b\n1,2\n3\n");
  EXPECT_THROW(read_matrix_csv(ragged), DomainError);
  std::istringstream junk("a\nfoo\n");
  EXPECT_THROW(read_matrix_csv(junk), DomainError);
}

}  // namespace
}  // namespace gibbs_ibp
