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

#ifndef FEDSIM_AGGREGATE_HPP
#define FEDSIM_AGGREGATE_HPP

#include <span>
#include <string>

#include "fedsim/client_manager.hpp"

namespace fedsim {

/// Sample-count weighted coordinate mean (FedAvg). Updates are summed in
/// ascending client-id order, so the result does not depend on input order,
/// and each coordinate is kept inside the [min, max] of its inputs.
ParamVector aggregate_fedavg(std::span<const ClientUpdate> updates);

class Aggregator {
 public:
  virtual ~Aggregator() = default;
  virtual ParamVector aggregate(std::span<const ClientUpdate> updates) = 0;
  virtual std::string name() const = 0;
};

class FedAvgAggregator final : public Aggregator {
 public:
  ParamVector aggregate(std::span<const ClientUpdate> updates) override { return aggregate_fedavg(updates); }
  std::string name() const override { return "fedavg"; }
};

}  // namespace fedsim

#endif  // FEDSIM_AGGREGATE_HPP
