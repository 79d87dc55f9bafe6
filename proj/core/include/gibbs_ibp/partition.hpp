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


/**
 * Gibbs-type exchangeable partitions: the sequential urn scheme and the
 * EPPF V_{n,k} prod_l (1 - alpha)_{n_l - 1}.
 */

#ifndef GIBBS_IBP_PARTITION_HPP_
#define GIBBS_IBP_PARTITION_HPP_

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <vector>

#include "gibbs_ibp/gibbs_weights.hpp"
#include "gibbs_ibp/rng.hpp"

namespace gibbs_ibp {

/// Blocks are numbered by order of appearance, starting at 0.
struct PartitionState {
  std::size_t n = 0;
  std::vector<std::size_t> block_sizes;
  std::vector<std::size_t> labels;  ///< block of each customer

  std::size_t num_blocks() const { return block_sizes.size(); }
};

struct UrnDiagnostics {
  /// Largest |sum of step probabilities - 1| seen before normalization.
  double max_defect = 0.0;
  std::size_t steps = 0;
};

/// Seat customer n + 1. Step probabilities are checked against 1 to 1e-10
/// for exact tables; Monte-Carlo tables are renormalized instead and only
/// rejected beyond 1e-3.
void urn_step(PartitionState& state, const WeightTable& table, Rng& rng, UrnDiagnostics* diagnostics = nullptr);

PartitionState sample_partition(const GibbsModel& model, std::size_t n, std::uint64_t seed);
PartitionState sample_partition(const WeightTable& table, std::size_t n, Rng& rng,
                                UrnDiagnostics* diagnostics = nullptr);

/// log of the EPPF at the composition `block_sizes` (any order).
double log_eppf(const GibbsModel& model, const std::vector<std::size_t>& block_sizes);
double log_eppf(const WeightTable& table, const std::vector<std::size_t>& block_sizes);

/// CSV with header "customer,block", 1-based.
void write_partition_csv(std::ostream& out, const PartitionState& state);

}  // namespace gibbs_ibp

#endif  // GIBBS_IBP_PARTITION_HPP_
