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

#include "fedsim/events.hpp"

#include <iostream>

#include "fedsim/errors.hpp"

namespace fedsim {

std::int64_t FLContext::cumulative_bytes() const {
  std::int64_t total = 0;
  for (const auto& r : history) total += r.bytes_up + r.bytes_down;
  return total;
}

void StopCriteria::validate() const {
  if (max_rounds < 1) throw ArgumentError("stop.max_rounds must be >= 1");
  if (target_accuracy && !(*target_accuracy >= 0.0 && *target_accuracy <= 1.0)) {
    throw ArgumentError("stop.target_accuracy must lie in [0, 1]");
  }
  if (target_loss && !(*target_loss >= 0.0)) throw ArgumentError("stop.target_loss must be >= 0");
}

bool check_stop(const FLContext& ctx, const StopCriteria& stop) {
  if (ctx.round >= stop.max_rounds) return true;
  const RoundRecord* last = ctx.last();
  if (last == nullptr) return false;
  if (stop.target_accuracy && last->global_metrics.accuracy >= *stop.target_accuracy) return true;
  if (stop.target_loss && last->global_metrics.loss <= *stop.target_loss) return true;
  return false;
}

std::string_view event_name(const Event& event) {
  struct Visitor {
    std::string_view operator()(const FederationStarted&) const { return "federation_started"; }
    std::string_view operator()(const RoundStarted&) const { return "round_started"; }
    std::string_view operator()(const TrainersSelected&) const { return "trainers_selected"; }
    std::string_view operator()(const ClientTrained&) const { return "client_trained"; }
    std::string_view operator()(const UpdatesAggregated&) const { return "updates_aggregated"; }
    std::string_view operator()(const RoundFinished&) const { return "round_finished"; }
    std::string_view operator()(const FederationFinished&) const { return "federation_finished"; }
  };
  return std::visit(Visitor{}, event);
}

EventBus::EventBus() : errors_(&std::cerr) {}

void EventBus::add(std::shared_ptr<Subscriber> subscriber) {
  if (started_) throw ArgumentError("subscribers must be registered before the federation starts");
  if (!subscriber) throw ArgumentError("null subscriber");
  entries_.push_back({std::move(subscriber), true});
}

void EventBus::broadcast(const Event& event, const FLContext& ctx) {
  if (std::holds_alternative<FederationStarted>(event)) started_ = true;
  for (auto& entry : entries_) {
    if (!entry.enabled) continue;
    try {
      entry.subscriber->on_event(event, ctx);
    } catch (const std::exception& e) {
      entry.enabled = false;
      *errors_ << "warning: subscriber '" << entry.subscriber->name() << "' failed on "
               << event_name(event) << " and was disabled: " << e.what() << '\n';
    } catch (...) {
      entry.enabled = false;
      *errors_ << "warning: subscriber '" << entry.subscriber->name() << "' failed on "
               << event_name(event) << " and was disabled\n";
    }
  }
}

}  // namespace fedsim
