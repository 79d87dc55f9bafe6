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

#include "gibbs_ibp/ibp.hpp"
#include "gibbs_ibp/rng.hpp"
#include "gibbs_ibp/stable_sampling.hpp"
#include "gibbs_ibp/stick_breaking.hpp"

namespace gibbs_ibp {
namespace {

void BM_TiltedStable(benchmark::State& state) {
  const TiltedStableSampler sampler({0.01 * static_cast<double>(state.range(0)), 3.0});
  Rng rng = make_stream(1);
  for (auto _ : state) benchmark::DoNotOptimize(sampler(rng));
}
BENCHMARK(BM_TiltedStable)->Arg(30)->Arg(50)->Arg(70)->Arg(90);

void BM_SimulateIbp(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto cache = PrimitiveCache::build(GibbsModel::pitman_yor(0.5, 1.0), n);
  Rng rng = make_stream(2);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_ibp(cache, 5.0, n, rng));
}
BENCHMARK(BM_SimulateIbp)->RangeMultiplier(4)->Range(16, 1024);

void BM_ThinnedSticks(benchmark::State& state) {
  const std::size_t n = 20;
  const auto model = GibbsModel::pitman_yor(0.5, 1.0);
  const ThinnedStickSampler sampler(model, 1.0, truncation_rounds(model, 1e-3 / static_cast<double>(n)), n);
  Rng rng = make_stream(3);
  for (auto _ : state) benchmark::DoNotOptimize(sampler(rng));
}
BENCHMARK(BM_ThinnedSticks);

void BM_LogJoint(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto cache = PrimitiveCache::build(GibbsModel::pitman_yor(0.5, 1.0), n);
  Rng rng = make_stream(4);
  const auto z = simulate_ibp(cache, 5.0, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(log_joint(z, cache, 5.0));
}
BENCHMARK(BM_LogJoint)->RangeMultiplier(4)->Range(16, 1024);

}  // namespace
}  // namespace gibbs_ibp
