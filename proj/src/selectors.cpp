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

#include "fedsim/selectors.hpp"

#include <algorithm>
#include <numeric>

#include "fedsim/errors.hpp"
#include "fedsim/linalg.hpp"

namespace fedsim {

namespace {

// Moves `count` uniformly chosen elements to the front (partial Fisher-Yates).
template <typename T>
void partial_shuffle(std::vector<T>& items, std::size_t count, Rng& rng) {
  for (std::size_t i = 0; i < count && i + 1 < items.size(); ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, items.size() - 1);
    std::swap(items[i], items[pick(rng)]);
  }
}

}  // namespace

std::vector<ClientId> select_random(std::span<const ClientId> pool, int cr, Rng& rng) {
  if (cr < 1) throw ArgumentError("client ratio must be >= 1");
  if (static_cast<std::size_t>(cr) > pool.size()) {
    throw ArgumentError("client ratio " + std::to_string(cr) + " exceeds pool of " + std::to_string(pool.size()));
  }
  std::vector<ClientId> items(pool.begin(), pool.end());
  partial_shuffle(items, static_cast<std::size_t>(cr), rng);
  items.resize(static_cast<std::size_t>(cr));
  std::sort(items.begin(), items.end());
  return items;
}

std::vector<std::vector<ClientId>> SelectorState::members() const {
  std::vector<std::vector<ClientId>> out(static_cast<std::size_t>(k));
  for (std::size_t id = 0; id < cluster_of.size(); ++id) {
    out.at(static_cast<std::size_t>(cluster_of[id])).push_back(static_cast<ClientId>(id));
  }
  return out;
}

SelectorState cluster_init(const ClientRegistry& clients, const ModelSpec& spec, const ParamVector& init_params,
                           int k, ClientManager& manager, std::uint64_t seed, const ClusterOptions& options) {
  if (k < 1 || static_cast<std::size_t>(k) > clients.size()) {
    throw ArgumentError("cluster k must lie in [1, number of clients]");
  }
  ClientRegistry round_zero = clients;
  for (auto& c : round_zero) {
    if (options.init_train) {
      c.train_cfg = *options.init_train;
    } else {
      c.train_cfg.epochs = 1;
      c.train_cfg.batch_size.reset();
    }
  }
  std::vector<const SimClient*> all;
  all.reserve(round_zero.size());
  for (const auto& c : round_zero) all.push_back(&c);
  const auto updates = manager.dispatch(all, init_params, spec, derive_seed(seed, Stream::kCluster));

  Eigen::MatrixXd weights(static_cast<Index>(updates.size()), init_params.size());
  for (std::size_t i = 0; i < updates.size(); ++i) {
    weights.row(static_cast<Index>(i)) = updates[i].params.values().transpose();
  }
  if (options.pca_dims) weights = principal_components(weights, *options.pca_dims).projections;

  const auto km = kmeans(weights, k, options.max_iters, derive_seed(seed, Stream::kCluster, 1));
  SelectorState state;
  state.kind = SelectorKind::kCluster;
  state.k = k;
  state.cluster_of.resize(clients.size());
  for (std::size_t i = 0; i < updates.size(); ++i) {
    state.cluster_of[static_cast<std::size_t>(updates[i].client_id)] = static_cast<int>(km.assignments[i]);
  }
  return state;
}

std::vector<ClientId> select_clustered(const SelectorState& state, int cr, Rng& rng) {
  if (state.kind != SelectorKind::kCluster || state.cluster_of.empty()) {
    throw ArgumentError("select_clustered needs an initialized cluster state");
  }
  if (cr < 1 || static_cast<std::size_t>(cr) > state.cluster_of.size()) {
    throw ArgumentError("client ratio " + std::to_string(cr) + " outside [1, " +
                        std::to_string(state.cluster_of.size()) + "]");
  }
  auto groups = state.members();
  std::vector<std::size_t> cluster_order(groups.size());
  std::iota(cluster_order.begin(), cluster_order.end(), std::size_t{0});
  std::shuffle(cluster_order.begin(), cluster_order.end(), rng);

  const int k = state.k;
  std::vector<bool> taken(state.cluster_of.size(), false);
  std::vector<ClientId> chosen;
  std::size_t deficit = 0;
  for (std::size_t pos = 0; pos < cluster_order.size(); ++pos) {
    auto& group = groups[cluster_order[pos]];
    const auto quota = static_cast<std::size_t>(cr / k + (static_cast<int>(pos) < cr % k ? 1 : 0));
    const auto take = std::min(quota, group.size());
    deficit += quota - take;
    partial_shuffle(group, take, rng);
    for (std::size_t i = 0; i < take; ++i) {
      chosen.push_back(group[i]);
      taken[static_cast<std::size_t>(group[i])] = true;
    }
  }
  if (deficit > 0) {
    std::vector<ClientId> rest;
    for (std::size_t id = 0; id < taken.size(); ++id) {
      if (!taken[id]) rest.push_back(static_cast<ClientId>(id));
    }
    partial_shuffle(rest, deficit, rng);
    chosen.insert(chosen.end(), rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(deficit));
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

RandomSelector::RandomSelector(int cr) : cr_(cr) {
  if (cr < 1) throw ArgumentError("selector.cr must be >= 1");
}

std::vector<ClientId> RandomSelector::select(std::span<const ClientId> pool, std::uint64_t round_seed) {
  Rng rng(round_seed);
  return select_random(pool, cr_, rng);
}

ClusterSelector::ClusterSelector(int cr, int k, ClusterOptions options)
    : cr_(cr), k_(k), options_(std::move(options)) {
  if (cr < 1) throw ArgumentError("selector.cr must be >= 1");
  if (k < 1) throw ArgumentError("selector.k must be >= 1");
}

void ClusterSelector::initialize(const SelectorInit& init) {
  state_ = cluster_init(init.clients, init.spec, init.init_params, k_, init.manager, init.seed, options_);
  state_.client_ratio = cr_;
  initialized_ = true;
}

std::vector<ClientId> ClusterSelector::select(std::span<const ClientId> pool, std::uint64_t round_seed) {
  if (!initialized_) throw ArgumentError("cluster selector used before initialization");
  if (pool.size() != state_.cluster_of.size()) {
    throw ArgumentError("cluster selector pool changed since initialization");
  }
  Rng rng(round_seed);
  return select_clustered(state_, cr_, rng);
}

}  // namespace fedsim
