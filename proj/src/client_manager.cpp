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

#include "fedsim/client_manager.hpp"

#include <algorithm>
#include <exception>
#include <set>

#include "fedsim/errors.hpp"
#include "fedsim/random.hpp"

namespace fedsim {

namespace {

void check_selection(std::span<const SimClient* const> selected) {
  if (selected.empty()) throw ArgumentError("dispatch: no clients selected");
  std::set<ClientId> ids;
  for (const auto* c : selected) {
    if (c == nullptr) throw ArgumentError("dispatch: null client");
    if (!ids.insert(c->id).second) throw ArgumentError("dispatch: duplicate client id " + std::to_string(c->id));
  }
}

void sort_by_id(std::vector<ClientUpdate>& updates) {
  std::sort(updates.begin(), updates.end(),
            [](const ClientUpdate& a, const ClientUpdate& b) { return a.client_id < b.client_id; });
}

[[noreturn]] void raise_failures(std::span<const SimClient* const> selected,
                                 const std::vector<std::exception_ptr>& errors) {
  std::vector<int> failed;
  std::string detail;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    failed.push_back(selected[i]->id);
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      detail += " [client " + std::to_string(selected[i]->id) + ": " + e.what() + "]";
    } catch (...) {
      detail += " [client " + std::to_string(selected[i]->id) + ": unknown error]";
    }
  }
  std::sort(failed.begin(), failed.end());
  std::string ids;
  for (int id : failed) ids += (ids.empty() ? "" : ",") + std::to_string(id);
  throw DispatchError(std::move(failed), "client training failed for ids " + ids + ":" + detail);
}

}  // namespace

std::uint64_t client_seed(std::uint64_t round_seed, ClientId id) {
  return derive_seed({round_seed, static_cast<std::uint64_t>(id)});
}

ClientUpdate train_client(const SimClient& client, const ParamVector& global, const ModelSpec& spec,
                          std::uint64_t round_seed) {
  auto result = train(global, spec, *client.data, client.train_cfg, client_seed(round_seed, client.id));
  ClientUpdate update;
  update.client_id = client.id;
  update.bytes_payload = payload_bytes(result.params.size());
  update.params = std::move(result.params);
  update.sample_count = result.sample_count;
  return update;
}

std::vector<ClientUpdate> SequentialManager::dispatch(std::span<const SimClient* const> selected,
                                                      const ParamVector& global, const ModelSpec& spec,
                                                      std::uint64_t round_seed) {
  check_selection(selected);
  std::vector<ClientUpdate> updates(selected.size());
  std::vector<std::exception_ptr> errors(selected.size());
  bool failed = false;
  for (std::size_t i = 0; i < selected.size(); ++i) {
    try {
      updates[i] = train_client(*selected[i], global, spec, round_seed);
    } catch (...) {
      errors[i] = std::current_exception();
      failed = true;
    }
  }
  if (failed) raise_failures(selected, errors);
  sort_by_id(updates);
  return updates;
}

ParallelManager::ParallelManager(std::size_t workers) : pool_(workers) {}

std::vector<ClientUpdate> ParallelManager::dispatch(std::span<const SimClient* const> selected,
                                                    const ParamVector& global, const ModelSpec& spec,
                                                    std::uint64_t round_seed) {
  check_selection(selected);
  std::vector<ClientUpdate> updates(selected.size());
  const auto errors = pool_.run(selected.size(), [&](std::size_t i) {
    updates[i] = train_client(*selected[i], global, spec, round_seed);
  });
  if (std::any_of(errors.begin(), errors.end(), [](const auto& e) { return e != nullptr; })) {
    raise_failures(selected, errors);
  }
  sort_by_id(updates);
  return updates;
}

std::vector<const SimClient*> lookup_clients(const ClientRegistry& registry, std::span<const ClientId> ids) {
  std::vector<const SimClient*> out;
  out.reserve(ids.size());
  for (ClientId id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= registry.size() ||
        registry[static_cast<std::size_t>(id)].id != id) {
      throw ArgumentError("unknown client id " + std::to_string(id));
    }
    out.push_back(&registry[static_cast<std::size_t>(id)]);
  }
  return out;
}

}  // namespace fedsim
