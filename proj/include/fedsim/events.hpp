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

#ifndef FEDSIM_EVENTS_HPP
#define FEDSIM_EVENTS_HPP

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fedsim/context.hpp"

namespace fedsim {

struct FederationStarted {
  std::uint64_t config_digest = 0;
  std::int64_t start_round = 0;  ///< completed rounds at start; non-zero on resume
};

struct RoundStarted {
  std::int64_t round = 0;
};

struct TrainersSelected {
  std::int64_t round = 0;
  std::vector<ClientId> ids;
};

/// `params` points at the client's update and is valid only during delivery.
struct ClientTrained {
  std::int64_t round = 0;
  ClientId client_id = 0;
  std::int64_t sample_count = 0;
  std::int64_t bytes_payload = 0;
  const ParamVector* params = nullptr;
};

/// `global` points at the freshly aggregated model, valid during delivery.
struct UpdatesAggregated {
  std::int64_t round = 0;
  const ParamVector* global = nullptr;
};

struct RoundFinished {
  std::int64_t round = 0;
  Metrics metrics;
  std::int64_t cumulative_bytes = 0;
};

enum class Outcome { kCompleted, kFailed };

struct FederationFinished {
  std::int64_t total_rounds = 0;
  std::optional<Metrics> final_metrics;
  Outcome outcome = Outcome::kCompleted;
  std::string error;
};

using Event = std::variant<FederationStarted, RoundStarted, TrainersSelected, ClientTrained,
                           UpdatesAggregated, RoundFinished, FederationFinished>;

std::string_view event_name(const Event& event);

/// Receives workflow broadcasts. Subscribers observe; they never see mutable
/// state.
class Subscriber {
 public:
  virtual ~Subscriber() = default;
  virtual std::string name() const = 0;
  virtual void on_event(const Event& event, const FLContext& ctx) = 0;
};

/// Synchronous, in-order broadcast. A subscriber that throws is reported on
/// the error stream and skipped for the rest of the run.
class EventBus {
 public:
  EventBus();

  /// Throws ArgumentError once FederationStarted has been broadcast.
  void add(std::shared_ptr<Subscriber> subscriber);
  void broadcast(const Event& event, const FLContext& ctx);

  std::size_t size() const noexcept { return entries_.size(); }
  bool enabled(std::size_t i) const { return entries_.at(i).enabled; }
  bool started() const noexcept { return started_; }
  void set_error_stream(std::ostream& os) { errors_ = &os; }

 private:
  struct Entry {
    std::shared_ptr<Subscriber> subscriber;
    bool enabled = true;
  };
  std::vector<Entry> entries_;
  std::ostream* errors_;
  bool started_ = false;
};

}  // namespace fedsim

#endif  // FEDSIM_EVENTS_HPP
