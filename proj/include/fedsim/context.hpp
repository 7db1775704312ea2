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

#ifndef FEDSIM_CONTEXT_HPP
#define FEDSIM_CONTEXT_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "fedsim/client_manager.hpp"
#include "fedsim/model.hpp"

namespace fedsim {

struct RoundRecord {
  std::int64_t round = 0;  ///< 1-based; round 0 is reserved for selector initialization
  std::vector<ClientId> selected_ids;
  Metrics global_metrics;
  std::int64_t bytes_up = 0;
  std::int64_t bytes_down = 0;
  double wall_time = 0.0;  ///< seconds

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

/// Execution state of a federation. `round` counts completed rounds and
/// always equals history.size(). Every random stream is derived from `seed`
/// and the round number, so the seed is the whole RNG state.
struct FLContext {
  std::int64_t round = 0;
  ParamVector global_params;
  std::vector<RoundRecord> history;
  std::uint64_t seed = 0;

  std::int64_t cumulative_bytes() const;
  const RoundRecord* last() const { return history.empty() ? nullptr : &history.back(); }
};

struct StopCriteria {
  std::int64_t max_rounds = 1;
  std::optional<double> target_accuracy;
  std::optional<double> target_loss;

  void validate() const;
};

/// True once max_rounds rounds are done or the last round met a target.
bool check_stop(const FLContext& ctx, const StopCriteria& stop);

}  // namespace fedsim

#endif  // FEDSIM_CONTEXT_HPP
