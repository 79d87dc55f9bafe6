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


#include <benchmark/benchmark.h>

#include "gibbs_ibp/gibbs_weights.hpp"
#include "gibbs_ibp/special_functions.hpp"

namespace gibbs_ibp {
namespace {

void BM_GfcTable(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_gfc_table(n, 0.5));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GfcTable)->RangeMultiplier(4)->Range(16, 1024)->Complexity(benchmark::oNSquared);

void BM_PitmanYorTable(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto model = GibbsModel::pitman_yor(0.5, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(build_weight_table(model, n));
}
BENCHMARK(BM_PitmanYorTable)->RangeMultiplier(4)->Range(16, 1024);

void BM_NggQuadratureTable(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  McConfig mc;
  mc.method = NggWeightMethod::kQuadrature;
  const auto model = GibbsModel::ngg(0.5, 1.0, mc);
  for (auto _ : state) benchmark::DoNotOptimize(build_weight_table(model, n));
}
BENCHMARK(BM_NggQuadratureTable)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_NggMonteCarloTable(benchmark::State& state) {
  McConfig mc;
  mc.samples = static_cast<std::size_t>(state.range(0));
  const auto model = GibbsModel::ngg(0.5, 1.0, mc);
  for (auto _ : state) benchmark::DoNotOptimize(build_weight_table(model, 50));
}
BENCHMARK(BM_NggMonteCarloTable)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_PrimitiveCache(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto model = GibbsModel::pitman_yor(0.5, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(PrimitiveCache::build(model, n));
}
BENCHMARK(BM_PrimitiveCache)->RangeMultiplier(4)->Range(16, 1024);

void BM_PositiveStableDensity(benchmark::State& state) {
  double t = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_positive_stable_density(0.7, t));
    t = t < 1e3 ? t * 1.1 : 0.01;
  }
}
BENCHMARK(BM_PositiveStableDensity);

}  // namespace
}  // namespace gibbs_ibp
