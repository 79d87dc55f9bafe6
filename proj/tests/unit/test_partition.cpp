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
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "gibbs_ibp/error.hpp"
#include "gibbs_ibp/gibbs_weights.hpp"
#include "gibbs_ibp/partition.hpp"
#include "gibbs_ibp/special_functions.hpp"
#include "oracles.hpp"

namespace gibbs_ibp {
namespace {

// Every set partition of {0..n-1} as a restricted growth string.
void for_each_partition(std::size_t n, const std::function<void(const std::vector<std::size_t>&)>& visit) {
  std::vector<std::size_t> labels(n, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t blocks) {
    if (i == n) {
      visit(labels);
      return;
    }
    for (std::size_t b = 0; b <= blocks; ++b) {
      labels[i] = b;
      rec(i + 1, std::max(blocks, b + 1));
    }
  };
  rec(1, 1);
}

std::vector<std::size_t> sizes_of(const std::vector<std::size_t>& labels) {
  std::vector<std::size_t> sizes;
  for (std::size_t b : labels) {
    if (b >= sizes.size()) sizes.resize(b + 1, 0);
    ++sizes[b];
  }
  return sizes;
}

McConfig quadrature() {
  McConfig mc;
  mc.method = NggWeightMethod::kQuadrature;
  return mc;
}

TEST(Eppf, SumsToOneOverAllPartitions) {
  for (const auto& model : {GibbsModel::dirichlet(1.3), GibbsModel::pitman_yor(0.4, 0.7),
                            GibbsModel::ngg(0.5, 1.0, quadrature()), GibbsModel::nig(2.0, quadrature())}) {
    for (std::size_t n = 1; n <= 7; ++n) {
      double total = 0.0;
      for_each_partition(n, [&](const auto& labels) { total += std::exp(log_eppf(model, sizes_of(labels))); });
      EXPECT_NEAR(total, 1.0, 1e-10) << model.describe() << " n=" << n;
    }
  }
}

TEST(Eppf, PitmanYorProductForm) {
  const double alpha = 0.3, theta = 2.0;
  const auto model = GibbsModel::pitman_yor(alpha, theta);
  const std::vector<std::vector<std::size_t>> cases{{1}, {3, 1}, {2, 2, 1}, {5, 1, 1, 4}};
  for (const auto& sizes : cases) {
    int n = 0;
    double log_expected = 0.0;
    for (std::size_t s : sizes) {
      n += static_cast<int>(s);
      log_expected += log_rising_factorial(1.0 - alpha, s - 1);
    }
    log_expected += std::log(oracle::py_weight(alpha, theta, n, static_cast<int>(sizes.size())));
    EXPECT_NEAR(log_eppf(model, sizes), log_expected, 1e-12);
  }
  EXPECT_THROW(log_eppf(model, {}), DomainError);
  EXPECT_THROW(log_eppf(model, {2, 0}), DomainError);
}

TEST(Eppf, SymmetricInBlockOrder) {
  const auto model = GibbsModel::ngg(0.6, 0.8, quadrature());
  EXPECT_DOUBLE_EQ(log_eppf(model, {3, 1, 2}), log_eppf(model, {1, 2, 3}));
}

TEST(Urn, ExactPartitionLawAtFour) {
  for (const auto& model : {GibbsModel::pitman_yor(0.5, 1.0), GibbsModel::ngg(0.5, 1.0, quadrature())}) {
    const WeightTable table = build_weight_table(model, 4);
    std::map<std::vector<std::size_t>, std::size_t> index;
    std::vector<double> expected;
    for_each_partition(4, [&](const auto& labels) {
      index[labels] = expected.size();
      expected.push_back(std::exp(log_eppf(table, sizes_of(labels))));
    });
    ASSERT_EQ(expected.size(), 15u);
    const std::size_t draws = 60000;
    std::vector<double> observed(expected.size(), 0.0);
    Rng rng = make_stream(21);
    UrnDiagnostics diag;
    for (std::size_t i = 0; i < draws; ++i) observed[index.at(sample_partition(table, 4, rng, &diag).labels)] += 1.0;
    for (double& e : expected) e *= static_cast<double>(draws);
    EXPECT_GT(oracle::chi_square_pvalue(observed, expected), 1e-3) << model.describe();
    EXPECT_EQ(diag.steps, 3 * draws);
    EXPECT_LT(diag.max_defect, 1e-10);
  }
}

TEST(Urn, BlockCountLaw) {
  const auto model = GibbsModel::pitman_yor(0.6, 2.0);
  const std::size_t n = 25;
  const WeightTable table = build_weight_table(model, n);
  const auto pmf = block_count_distribution(model, n);
  const std::size_t draws = 40000;
  std::vector<double> observed(n, 0.0);
  Rng rng = make_stream(4);
  for (std::size_t i = 0; i < draws; ++i) {
    const auto state = sample_partition(table, n, rng);
    ASSERT_EQ(state.n, n);
    ++observed[state.num_blocks() - 1];
  }
  std::vector<double> expected(n);
  for (std::size_t k = 0; k < n; ++k) expected[k] = pmf[k] * static_cast<double>(draws);
  EXPECT_GT(oracle::chi_square_pvalue(observed, expected), 1e-3);
}

TEST(Urn, StateIsConsistentAndDeterministic) {
  const auto a = sample_partition(GibbsModel::dirichlet(2.0), 40, 9);
  const auto b = sample_partition(GibbsModel::dirichlet(2.0), 40, 9);
  EXPECT_EQ(a.labels, b.labels);
  std::vector<std::size_t> sizes(a.num_blocks(), 0);
  std::size_t next = 0;
  for (std::size_t label : a.labels) {
    ASSERT_LE(label, next);  // blocks appear in order
    if (label == next) ++next;
    ++sizes[label];
  }
  EXPECT_EQ(sizes, a.block_sizes);
}

TEST(Urn, RefusesShallowTables) {
  const WeightTable table = build_weight_table(GibbsModel::dirichlet(1.0), 3);
  Rng rng = make_stream(1);
  EXPECT_THROW(sample_partition(table, 5, rng), TableDepthError);
}

TEST(Urn, MonteCarloTablesRenormalize) {
  McConfig mc;
  mc.samples = 100000;
  const WeightTable table = build_weight_table(GibbsModel::ngg(0.5, 1.0, mc), 20);
  Rng rng = make_stream(2);
  UrnDiagnostics diag;
  for (int i = 0; i < 100; ++i) sample_partition(table, 20, rng, &diag);
  EXPECT_LT(diag.max_defect, 1e-3);
}

TEST(PartitionCsv, OneBasedRows) {
  PartitionState state;
  state.n = 3;
  state.labels = {0, 1, 0};
  state.block_sizes = {2, 1};
  std::ostringstream out;
  write_partition_csv(out, state);
  EXPECT_EQ(out.str(), "customer,block\n1,1\n2,2\n3,1\n");
}

}  // namespace
}  // namespace gibbs_ibp
