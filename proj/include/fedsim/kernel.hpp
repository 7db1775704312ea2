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

#ifndef FEDSIM_KERNEL_HPP
#define FEDSIM_KERNEL_HPP

#include <cstdint>
#include <optional>

#include "fedsim/aggregate.hpp"
#include "fedsim/client_manager.hpp"
#include "fedsim/context.hpp"
#include "fedsim/data.hpp"
#include "fedsim/events.hpp"
#include "fedsim/selectors.hpp"

namespace fedsim {

struct RunOptions {
  /// Digest of the run configuration, forwarded in FederationStarted.
  std::uint64_t config_digest = 0;
  /// Continue from a checkpointed context instead of fresh parameters.
  std::optional<FLContext> resume;
};

/// Drives select -> broadcast -> train -> aggregate -> evaluate rounds until
/// `stop` fires. Rounds are numbered from 1. A failing component aborts the
/// run: FederationFinished{kFailed} is broadcast and the error rethrown.
FLContext run_federated(const ModelSpec& spec, const ClientRegistry& clients, const DataContainer& test_data,
                        ClientSelector& selector, ClientManager& manager, Aggregator& aggregator,
                        const StopCriteria& stop, EventBus& bus, std::uint64_t seed, RunOptions options = {});

/// The global model every fresh run starts from.
ParamVector initial_global(const ModelSpec& spec, std::uint64_t seed);

}  // namespace fedsim

#endif  // FEDSIM_KERNEL_HPP
