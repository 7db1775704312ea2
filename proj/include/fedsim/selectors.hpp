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

#ifndef FEDSIM_SELECTORS_HPP
#define FEDSIM_SELECTORS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedsim/client_manager.hpp"
#include "fedsim/random.hpp"

namespace fedsim {

/// `cr` distinct ids drawn uniformly without replacement, sorted ascending.
std::vector<ClientId> select_random(std::span<const ClientId> pool, int cr, Rng& rng);

enum class SelectorKind { kRandom, kCluster };

struct SelectorState {
  SelectorKind kind = SelectorKind::kRandom;
  int client_ratio = 1;
  int k = 1;
  /// Cluster index per client id (Cluster only).
  std::vector<int> cluster_of;

  std::vector<std::vector<ClientId>> members() const;
};

struct ClusterOptions {
  int max_iters = 100;
  /// Local training used by the initialization round. Empty: one full-batch
  /// epoch at each client's own learning rate.
  std::optional<TrainConfig> init_train;
  /// Reduce flattened weights to this many principal components before K-Means.
  std::optional<int> pca_dims;
};

/// Initialization round: every client trains once from `init_params` through
/// `manager`; K-Means over the flattened results assigns each client a cluster.
SelectorState cluster_init(const ClientRegistry& clients, const ModelSpec& spec, const ParamVector& init_params,
                           int k, ClientManager& manager, std::uint64_t seed,
                           const ClusterOptions& options = {});

/// floor(cr/k) per cluster, plus one for each of the first (cr mod k)
/// clusters in shuffled order. Clusters short of their quota give all their
/// members and the deficit is drawn uniformly from the remaining clients.
std::vector<ClientId> select_clustered(const SelectorState& state, int cr, Rng& rng);

struct SelectorInit {
  const ClientRegistry& clients;
  const ModelSpec& spec;
  const ParamVector& init_params;
  ClientManager& manager;
  std::uint64_t seed;
};

class ClientSelector {
 public:
  virtual ~ClientSelector() = default;
  /// Runs before the first round (also on resume).
  virtual void initialize(const SelectorInit&) {}
  virtual std::vector<ClientId> select(std::span<const ClientId> pool, std::uint64_t round_seed) = 0;
  virtual std::string name() const = 0;
};

class RandomSelector final : public ClientSelector {
 public:
  explicit RandomSelector(int cr);
  std::vector<ClientId> select(std::span<const ClientId> pool, std::uint64_t round_seed) override;
  std::string name() const override { return "random"; }

 private:
  int cr_;
};

class ClusterSelector final : public ClientSelector {
 public:
  ClusterSelector(int cr, int k, ClusterOptions options = {});
  void initialize(const SelectorInit& init) override;
  std::vector<ClientId> select(std::span<const ClientId> pool, std::uint64_t round_seed) override;
  std::string name() const override { return "cluster"; }

  const SelectorState& state() const noexcept { return state_; }

 private:
  int cr_;
  int k_;
  ClusterOptions options_;
  SelectorState state_;
  bool initialized_ = false;
};

}  // namespace fedsim

#endif  // FEDSIM_SELECTORS_HPP
