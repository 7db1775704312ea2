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

#ifndef FEDSIM_CLIENT_MANAGER_HPP
#define FEDSIM_CLIENT_MANAGER_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fedsim/data.hpp"
#include "fedsim/model.hpp"
#include "fedsim/worker_pool.hpp"

namespace fedsim {

using ClientId = int;

/// Bytes per encoded parameter (little-endian IEEE-754 double).
inline constexpr std::int64_t kBytesPerParam = 8;

inline std::int64_t payload_bytes(Index param_count) { return param_count * kBytesPerParam; }

struct SimClient {
  ClientId id = 0;
  std::shared_ptr<const DataContainer> data;
  TrainConfig train_cfg;
};

using ClientRegistry = std::vector<SimClient>;

struct ClientUpdate {
  ClientId client_id = 0;
  ParamVector params;
  std::int64_t sample_count = 0;
  std::int64_t bytes_payload = 0;
};

/// Seed used for one client's local training in one round.
std::uint64_t client_seed(std::uint64_t round_seed, ClientId id);

/// Trains one client from `global`.
ClientUpdate train_client(const SimClient& client, const ParamVector& global, const ModelSpec& spec,
                          std::uint64_t round_seed);

/// CL-Manager protocol: trains the selected clients from the global snapshot
/// and returns their updates sorted by client id. Implementations must give
/// identical results for identical inputs.
class ClientManager {
 public:
  virtual ~ClientManager() = default;

  virtual std::vector<ClientUpdate> dispatch(std::span<const SimClient* const> selected,
                                             const ParamVector& global, const ModelSpec& spec,
                                             std::uint64_t round_seed) = 0;

  virtual std::string name() const = 0;
};

class SequentialManager final : public ClientManager {
 public:
  std::vector<ClientUpdate> dispatch(std::span<const SimClient* const> selected, const ParamVector& global,
                                     const ModelSpec& spec, std::uint64_t round_seed) override;
  std::string name() const override { return "sequential"; }
};

class ParallelManager final : public ClientManager {
 public:
  explicit ParallelManager(std::size_t workers);

  std::vector<ClientUpdate> dispatch(std::span<const SimClient* const> selected, const ParamVector& global,
                                     const ModelSpec& spec, std::uint64_t round_seed) override;
  std::string name() const override { return "parallel"; }
  std::size_t workers() const noexcept { return pool_.size(); }

 private:
  WorkerPool pool_;
};

/// Resolves ids against a registry whose entry i has id i.
std::vector<const SimClient*> lookup_clients(const ClientRegistry& registry, std::span<const ClientId> ids);

}  // namespace fedsim

#endif  // FEDSIM_CLIENT_MANAGER_HPP
