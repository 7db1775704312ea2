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

#ifndef FEDSIM_EXPERIMENT_HPP
#define FEDSIM_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fedsim/aggregate.hpp"
#include "fedsim/context.hpp"
#include "fedsim/distribute.hpp"
#include "fedsim/errors.hpp"
#include "fedsim/events.hpp"
#include "fedsim/selectors.hpp"

namespace fedsim {

/// Invalid run configuration; `field()` is the dotted path of the culprit.
class ConfigError : public ArgumentError {
 public:
  ConfigError(std::string field, const std::string& message)
      : ArgumentError(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct SyntheticSource {
  int num_classes = 10;
  int per_class = 600;
  int dim = 20;
  double separation = 3.0;
};

struct IdxSource {
  std::filesystem::path images;
  std::filesystem::path labels;
  /// When both are set they form the test set and test_fraction is unused.
  std::optional<std::filesystem::path> test_images;
  std::optional<std::filesystem::path> test_labels;
};

struct CsvSource {
  std::filesystem::path path;
};

using DatasetConfig = std::variant<SyntheticSource, IdxSource, CsvSource>;

struct ShardConfig {
  int shard_size = 300;
  int shards_per_client = 2;
};
struct LabelConfig {
  int labels_per_client = 10;
  int records_per_client = 600;
  int num_clients = 20;
};
struct UniqueConfig {
  std::optional<int> records_per_client;
};
struct DirichletConfig {
  double alpha = 0.5;
  int num_clients = 20;
  int records_per_client = 600;
};

using DistributorConfig = std::variant<ShardConfig, LabelConfig, UniqueConfig, DirichletConfig>;

struct ModelConfig {
  ModelKind kind = ModelKind::kLogisticRegression;
  std::vector<Index> hidden;
};

struct SelectorConfig {
  SelectorKind kind = SelectorKind::kRandom;
  int cr = 10;
  int k = 1;
  ClusterOptions cluster;
};

struct ManagerConfig {
  bool parallel = false;
  int workers = 1;
};

struct LoggerSubscriberConfig {};
struct MetricsSubscriberConfig {
  std::filesystem::path path = "metrics.jsonl";
  bool wall_time = false;
};
struct CheckpointSubscriberConfig {
  std::filesystem::path path = "checkpoint.bin";
  std::int64_t interval = 1;
};
struct BandwidthSubscriberConfig {
  std::optional<std::filesystem::path> path;
};
struct DivergenceSubscriberConfig {
  std::int64_t interval = 1;
  Index dims = 2;
  std::optional<std::filesystem::path> dir;
};

using SubscriberConfig = std::variant<LoggerSubscriberConfig, MetricsSubscriberConfig, CheckpointSubscriberConfig,
                                      BandwidthSubscriberConfig, DivergenceSubscriberConfig>;

struct RunConfig {
  std::uint64_t seed = 0;
  DatasetConfig dataset = SyntheticSource{};
  double test_fraction = 0.2;
  DistributorConfig distributor = DirichletConfig{};
  ModelConfig model;
  TrainConfig train;
  SelectorConfig selector;
  ManagerConfig manager;
  StopCriteria stop;
  std::vector<SubscriberConfig> subscribers;
};

/// Parses and range-checks a configuration object. Relative input paths are
/// resolved against `base_dir`. Throws ConfigError.
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
/// Throws ConfigError (field "config") when the file is missing or not JSON.
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON form; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const RunConfig& config);

/// Hash of the canonical JSON without `stop` and `subscribers`, which may
/// change between a run and its resumption.
std::uint64_t config_digest(const RunConfig& config);

/// Output paths are relative to $FEDSIM_OUTPUT_DIR when set.
std::filesystem::path resolve_output(const std::filesystem::path& path);

struct Experiment {
  ModelSpec spec;
  std::shared_ptr<const DataContainer> train;
  DataContainer test;
  DistributionPlan plan;
  ClientRegistry clients;
};

/// Loads data, splits it, distributes the training part and builds clients.
/// Throws ConfigError for selector settings the client pool cannot honour.
Experiment prepare_experiment(const RunConfig& config);

/// Training split and plan only; used by the distribute command.
std::pair<DataContainer, DistributionPlan> prepare_distribution(const RunConfig& config);

std::unique_ptr<ClientSelector> make_selector(const RunConfig& config);
std::unique_ptr<ClientManager> make_manager(const RunConfig& config);

/// Registers the configured subscribers on `bus`.
void attach_subscribers(const RunConfig& config, EventBus& bus, std::ostream& log);

/// Full run (or resumption) of a prepared experiment.
FLContext execute(const RunConfig& config, const Experiment& experiment, EventBus& bus,
                  std::optional<FLContext> resume = std::nullopt);

}  // namespace fedsim

#endif  // FEDSIM_EXPERIMENT_HPP
