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


#include "gibbs_ibp/partition.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "gibbs_ibp/error.hpp"

namespace gibbs_ibp {

void urn_step(PartitionState& state, const WeightTable& table, Rng& rng, UrnDiagnostics* diagnostics) {
  const std::size_t n = state.n;
  if (n == 0) {
    state.n = 1;
    state.block_sizes.assign(1, 1);
    state.labels.assign(1, 0);
    return;
  }
  if (table.n_max() < n + 1) {
    throw TableDepthError("urn_step: weight table depth " + std::to_string(table.n_max()) + " < " +
                          std::to_string(n + 1));
  }
  const std::size_t b = state.num_blocks();
  const double alpha = table.alpha;
  const double log_vnb = table.log_v(n, b);
  const double stay_scale = std::exp(table.log_v(n + 1, b) - log_vnb);
  const double p_new = (b + 1 <= n + 1) ? std::exp(table.log_v(n + 1, b + 1) - log_vnb) : 0.0;
  // Existing blocks jointly receive (n - alpha b) times the common ratio.
  const double p_old = stay_scale * (static_cast<double>(n) - alpha * static_cast<double>(b));
  const double total = p_old + p_new;
  const double defect = std::fabs(total - 1.0);
  const bool monte_carlo = std::holds_alternative<MonteCarloProvenance>(table.provenance);
  if (!(defect <= (monte_carlo ? 1e-3 : 1e-10))) {
    throw NumericError("urn_step: step probabilities sum to " + std::to_string(total) + " at n=" + std::to_string(n));
  }
  if (diagnostics != nullptr) {
    diagnostics->max_defect = std::max(diagnostics->max_defect, defect);
    ++diagnostics->steps;
  }
  std::size_t block;
  if (uniform_open(rng) * total < p_new) {
    block = b;
    state.block_sizes.push_back(0);
  } else {
    // Block k with probability proportional to N_k - alpha: propose by
    // picking a uniform earlier customer (proportional to N_k) and accept
    // with probability (N_k - alpha) / N_k >= 1 - alpha.
    for (;;) {
      const auto i = static_cast<std::size_t>(uniform_open(rng) * static_cast<double>(n));
      const std::size_t k = state.labels[std::min(i, n - 1)];
      const double size = static_cast<double>(state.block_sizes[k]);
      if (alpha == 0.0 || uniform_open(rng) * size < size - alpha) {
        block = k;
        break;
      }
    }
  }
  ++state.block_sizes[block];
  state.labels.push_back(block);
  state.n = n + 1;
}

PartitionState sample_partition(const WeightTable& table, std::size_t n, Rng& rng, UrnDiagnostics* diagnostics) {
  PartitionState state;
  state.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) urn_step(state, table, rng, diagnostics);
  return state;
}

PartitionState sample_partition(const GibbsModel& model, std::size_t n, std::uint64_t seed) {
  if (n == 0) return {};
  const WeightTable table = build_weight_table(model, n);
  Rng rng = make_stream(seed);
  return sample_partition(table, n, rng);
}

double log_eppf(const WeightTable& table, const std::vector<std::size_t>& block_sizes) {
  if (block_sizes.empty()) throw DomainError("log_eppf: empty composition");
  std::size_t n = 0;
  double log_p = 0.0;
  for (std::size_t size : block_sizes) {
    if (size == 0) throw DomainError("log_eppf: block sizes must be positive");
    n += size;
    if (size > 1) log_p += log_rising_factorial(1.0 - table.alpha, size - 1);
  }
  return table.log_value(n, block_sizes.size()) + log_p;
}

double log_eppf(const GibbsModel& model, const std::vector<std::size_t>& block_sizes) {
  if (block_sizes.empty()) throw DomainError("log_eppf: empty composition");
  for (std::size_t size : block_sizes) {
    if (size == 0) throw DomainError("log_eppf: block sizes must be positive");
  }
  const std::size_t n = std::accumulate(block_sizes.begin(), block_sizes.end(), std::size_t{0});
  return log_eppf(build_weight_table(model, n), block_sizes);
}

void write_partition_csv(std::ostream& out, const PartitionState& state) {
  out << "customer,block\n";
  for (std::size_t i = 0; i < state.labels.size(); ++i) out << (i + 1) << ',' << (state.labels[i] + 1) << '\n';
}

}  // namespace gibbs_ibp
