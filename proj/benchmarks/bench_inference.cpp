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

#include "gibbs_ibp/inference.hpp"

namespace gibbs_ibp {
namespace {

void BM_GibbsSweep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto z = dense_plus_singletons_design(n, 8);
  const auto data = synthesize_data(z, 20, Scales{}, 5);
  ChainConfig config;
  config.seed = 5;
  auto chain_state = initial_state(data.y, GibbsModel::pitman_yor(0.5, 1.0), 1.0, config.seed);
  for (auto _ : state) gibbs_sweep(chain_state, data.y, config);
}
BENCHMARK(BM_GibbsSweep)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace gibbs_ibp
