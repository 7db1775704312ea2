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

#include "fedsim/kernel.hpp"

#include <chrono>
#include <numeric>

#include "fedsim/errors.hpp"
#include "fedsim/random.hpp"

namespace fedsim {

ParamVector initial_global(const ModelSpec& spec, std::uint64_t seed) {
  return init_params(spec, derive_seed(seed, Stream::kInit));
}

FLContext run_federated(const ModelSpec& spec, const ClientRegistry& clients, const DataContainer& test_data,
                        ClientSelector& selector, ClientManager& manager, Aggregator& aggregator,
                        const StopCriteria& stop, EventBus& bus, std::uint64_t seed, RunOptions options) {
  spec.validate();
  stop.validate();
  if (clients.empty()) throw ArgumentError("federation needs at least one client");
  for (std::size_t i = 0; i < clients.size(); ++i) {
    if (clients[i].id != static_cast<ClientId>(i)) throw ArgumentError("client registry ids must be 0..K-1 in order");
    if (!clients[i].data || clients[i].data->empty()) {
      throw EmptyDatasetError("client " + std::to_string(i) + " has no data");
    }
  }
  if (test_data.empty()) throw EmptyDatasetError("test set is empty");

  const ParamVector initial = initial_global(spec, seed);
  FLContext ctx;
  if (options.resume) {
    ctx = std::move(*options.resume);
    if (ctx.seed != seed) throw ArgumentError("resumed context was produced with a different seed");
    if (!ctx.global_params.same_shape(initial)) throw ShapeError("resumed parameters do not match the model spec");
    if (static_cast<std::int64_t>(ctx.history.size()) != ctx.round) {
      throw ArgumentError("resumed context history length differs from its round counter");
    }
  } else {
    ctx.seed = seed;
    ctx.global_params = initial;
  }

  std::vector<ClientId> pool(clients.size());
  std::iota(pool.begin(), pool.end(), 0);
  const std::int64_t model_bytes = payload_bytes(spec.param_count());

  bus.broadcast(FederationStarted{options.config_digest, ctx.round}, ctx);
  try {
    selector.initialize({clients, spec, initial, manager, seed});
    while (!check_stop(ctx, stop)) {
      const auto started = std::chrono::steady_clock::now();
      const std::int64_t round = ctx.round + 1;
      const auto r = static_cast<std::uint64_t>(round);
      bus.broadcast(RoundStarted{round}, ctx);

      auto ids = selector.select(pool, derive_seed(seed, Stream::kSelect, r));
      if (ids.empty()) throw ArgumentError("selector returned no clients");
      bus.broadcast(TrainersSelected{round, ids}, ctx);

      const auto selected = lookup_clients(clients, ids);
      const auto updates = manager.dispatch(selected, ctx.global_params, spec, derive_seed(seed, Stream::kTrain, r));
      if (updates.size() != ids.size()) throw ArgumentError("client manager returned a wrong number of updates");

      RoundRecord record;
      record.round = round;
      record.selected_ids = ids;
      record.bytes_down = static_cast<std::int64_t>(ids.size()) * model_bytes;
      for (const auto& u : updates) {
        record.bytes_up += u.bytes_payload;
        bus.broadcast(ClientTrained{round, u.client_id, u.sample_count, u.bytes_payload, &u.params}, ctx);
      }

      ParamVector next = aggregator.aggregate(updates);
      if (!next.same_shape(ctx.global_params)) throw ShapeError("aggregator changed the model shape");
      ctx.global_params = std::move(next);
      bus.broadcast(UpdatesAggregated{round, &ctx.global_params}, ctx);

      record.global_metrics = evaluate(ctx.global_params, spec, test_data);
      record.wall_time =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      ctx.history.push_back(std::move(record));
      ctx.round = round;
      bus.broadcast(RoundFinished{round, ctx.history.back().global_metrics, ctx.cumulative_bytes()}, ctx);
    }
  } catch (const std::exception& e) {
    FederationFinished done{ctx.round, std::nullopt, Outcome::kFailed, e.what()};
    if (const auto* last = ctx.last()) done.final_metrics = last->global_metrics;
    bus.broadcast(done, ctx);
    throw;
  }

  FederationFinished done{ctx.round, std::nullopt, Outcome::kCompleted, {}};
  if (const auto* last = ctx.last()) done.final_metrics = last->global_metrics;
  bus.broadcast(done, ctx);
  return ctx;
}

}  // namespace fedsim
