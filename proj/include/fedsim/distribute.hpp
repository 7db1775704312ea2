/**
 * Copyright 2026 The fedsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FEDSIM_DISTRIBUTE_HPP
#define FEDSIM_DISTRIBUTE_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedsim/data.hpp"

namespace fedsim {

/// Client id -> record indices into a source container.
struct DistributionPlan {
  std::vector<std::vector<std::size_t>> assignments;
  /// K x C count matrix derived from the source labels.
  Eigen::MatrixXi label_histogram;
  /// Dirichlet only: number of label draws redirected because supply ran out.
  std::int64_t reassigned = 0;

  std::size_t num_clients() const noexcept { return assignments.size(); }
  /// Number of non-zero cells in row k of the histogram.
  int distinct_labels(std::size_t client) const;
};

/// Builds the histogram for `assignments` against `source`.
DistributionPlan make_plan(std::vector<std::vector<std::size_t>> assignments,
                           const DataContainer& source);

/// Checks disjointness, index validity and histogram consistency. Returns an
/// empty string when the plan is valid, otherwise the first violation.
std::string validate_plan(const DistributionPlan& plan, const DataContainer& source);

DistributionPlan distribute_shard(const DataContainer& data, int shard_size, int shards_per_client,
                                  std::uint64_t seed);

DistributionPlan distribute_label(const DataContainer& data, int labels_per_client,
                                  int records_per_client, int num_clients, std::uint64_t seed);

DistributionPlan distribute_unique(const DataContainer& data, std::optional<int> records_per_client,
                                   std::uint64_t seed);

DistributionPlan distribute_dirichlet(const DataContainer& data, double alpha, int num_clients,
                                      int records_per_client, std::uint64_t seed);

/// One symmetric Dirichlet(alpha * 1_C) draw.
Eigen::VectorXd sample_dirichlet(int num_classes, double alpha, std::uint64_t seed);

/// Integer counts summing to `total` by largest-remainder rounding of
/// `proportions * total`. Ties go to the lowest index.
std::vector<std::int64_t> largest_remainder(const Eigen::VectorXd& proportions, std::int64_t total);

/// CSV of the K x C histogram with a `label_0,...,label_{C-1}` header.
std::string export_heatmap(const DistributionPlan& plan);

}  // namespace fedsim

#endif  // FEDSIM_DISTRIBUTE_HPP
