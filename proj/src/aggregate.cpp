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

#include "fedsim/aggregate.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "fedsim/errors.hpp"

namespace fedsim {

ParamVector aggregate_fedavg(std::span<const ClientUpdate> updates) {
  if (updates.empty()) throw ArgumentError("aggregate_fedavg: no updates");
  std::vector<std::size_t> order(updates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return updates[a].client_id < updates[b].client_id;
  });

  const auto& first = updates[order.front()].params;
  std::int64_t total = 0;
  for (const auto& u : updates) {
    if (!u.params.same_shape(first)) throw ShapeError("aggregate_fedavg: updates have different shapes");
    if (u.sample_count < 1) throw ArgumentError("aggregate_fedavg: sample_count must be >= 1");
    total += u.sample_count;
  }

  Eigen::VectorXd sum = Eigen::VectorXd::Zero(first.size());
  Eigen::VectorXd lo = first.values();
  Eigen::VectorXd hi = first.values();
  for (std::size_t i : order) {
    const auto& v = updates[i].params.values();
    const double weight = static_cast<double>(updates[i].sample_count) / static_cast<double>(total);
    sum += weight * v;
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  // Weights sum to 1 only up to rounding; the exact mean is inside [lo, hi].
  sum = sum.cwiseMax(lo).cwiseMin(hi);
  return {std::move(sum), first.shape()};
}

}  // namespace fedsim
