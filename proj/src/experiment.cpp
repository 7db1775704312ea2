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

#include "fedsim/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <fstream>

#include "fedsim/client_manager.hpp"
#include "fedsim/kernel.hpp"
#include "fedsim/random.hpp"
#include "fedsim/subscribers.hpp"

namespace fedsim {

namespace {

using nlohmann::json;

// Strict accessor over one JSON object; every error names the dotted field.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "config" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const json& raw(const std::string& key) const {
    if (!j_.contains(key)) throw ConfigError(field(key), "missing");
    return j_.at(key);
  }
  Section sub(const std::string& key) const { return {raw(key), field(key)}; }

  template <typename T>
  T get(const std::string& key) const {
    try {
      return raw(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(field(key), "wrong type");
    }
  }
  template <typename T>
  T get(const std::string& key, T fallback) const {
    return has(key) ? get<T>(key) : fallback;
  }
  template <typename T>
  std::optional<T> optional(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return get<T>(key);
  }
  int positive(const std::string& key, std::optional<int> fallback = std::nullopt) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      throw ConfigError(field(key), "missing");
    }
    const auto v = get<std::int64_t>(key);
    if (v < 1 || v > std::numeric_limits<int>::max()) throw ConfigError(field(key), "must be a positive integer");
    return static_cast<int>(v);
  }
  void only(std::initializer_list<const char*> allowed) const {
    for (const auto& [key, value] : j_.items()) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) throw ConfigError(field(key), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
};

std::filesystem::path input_path(const Section& s, const std::string& key, const std::filesystem::path& base) {
  std::filesystem::path p = s.get<std::string>(key);
  if (p.is_relative() && !base.empty()) p = base / p;
  if (!std::filesystem::exists(p)) throw ConfigError(s.field(key), "file not found: " + p.string());
  return p;
}

TrainConfig parse_train(const Section& s) {
  s.only({"epochs", "batch_size", "learning_rate"});
  TrainConfig t;
  t.epochs = s.positive("epochs", 1);
  if (s.has("batch_size")) t.batch_size = s.positive("batch_size");
  t.learning_rate = s.get<double>("learning_rate");
  if (!(t.learning_rate > 0.0 && t.learning_rate <= 1.0)) {
    throw ConfigError(s.field("learning_rate"), "must lie in (0, 1]");
  }
  return t;
}

json train_json(const TrainConfig& t) {
  return {{"epochs", t.epochs},
          {"batch_size", t.batch_size ? json(*t.batch_size) : json(nullptr)},
          {"learning_rate", t.learning_rate}};
}

json optional_path(const std::optional<std::filesystem::path>& p) {
  return p ? json(p->string()) : json(nullptr);
}

struct DatasetJson {
  json operator()(const SyntheticSource& s) const {
    return {{"type", "synthetic"}, {"num_classes", s.num_classes}, {"per_class", s.per_class}, {"dim", s.dim},
            {"separation", s.separation}};
  }
  json operator()(const IdxSource& s) const {
    return {{"type", "idx"}, {"images", s.images.string()}, {"labels", s.labels.string()},
            {"test_images", optional_path(s.test_images)}, {"test_labels", optional_path(s.test_labels)}};
  }
  json operator()(const CsvSource& s) const { return {{"type", "csv"}, {"path", s.path.string()}}; }
};

struct DistributorJson {
  json operator()(const ShardConfig& d) const {
    return {{"type", "shard"}, {"shard_size", d.shard_size}, {"shards_per_client", d.shards_per_client}};
  }
  json operator()(const LabelConfig& d) const {
    return {{"type", "label"}, {"labels_per_client", d.labels_per_client},
            {"records_per_client", d.records_per_client}, {"num_clients", d.num_clients}};
  }
  json operator()(const UniqueConfig& d) const {
    return {{"type", "unique"},
            {"records_per_client", d.records_per_client ? json(*d.records_per_client) : json(nullptr)}};
  }
  json operator()(const DirichletConfig& d) const {
    return {{"type", "dirichlet"}, {"alpha", d.alpha}, {"num_clients", d.num_clients},
            {"records_per_client", d.records_per_client}};
  }
};

struct SubscriberJson {
  json operator()(const LoggerSubscriberConfig&) const { return {{"type", "logger"}}; }
  json operator()(const MetricsSubscriberConfig& s) const {
    return {{"type", "metrics"}, {"path", s.path.string()}, {"wall_time", s.wall_time}};
  }
  json operator()(const CheckpointSubscriberConfig& s) const {
    return {{"type", "checkpoint"}, {"path", s.path.string()}, {"interval", s.interval}};
  }
  json operator()(const BandwidthSubscriberConfig& s) const { return {{"type", "bandwidth"}, {"path", optional_path(s.path)}}; }
  json operator()(const DivergenceSubscriberConfig& s) const {
    return {{"type", "divergence"}, {"interval", s.interval}, {"dims", s.dims}, {"dir", optional_path(s.dir)}};
  }
};

DatasetConfig parse_dataset(const Section& s, const std::filesystem::path& base) {
  const auto type = s.get<std::string>("type");
  if (type == "synthetic") {
    s.only({"type", "num_classes", "per_class", "dim", "separation"});
    SyntheticSource d;
    d.num_classes = s.positive("num_classes", d.num_classes);
    if (d.num_classes < 2) throw ConfigError(s.field("num_classes"), "must be >= 2");
    d.per_class = s.positive("per_class", d.per_class);
    d.dim = s.positive("dim", d.dim);
    d.separation = s.get<double>("separation", d.separation);
    if (!(d.separation > 0.0)) throw ConfigError(s.field("separation"), "must be > 0");
    return d;
  }
  if (type == "idx") {
    s.only({"type", "images", "labels", "test_images", "test_labels"});
    IdxSource d;
    d.images = input_path(s, "images", base);
    d.labels = input_path(s, "labels", base);
    if (s.has("test_images") != s.has("test_labels")) {
      throw ConfigError(s.field("test_images"), "test_images and test_labels go together");
    }
    if (s.has("test_images")) {
      d.test_images = input_path(s, "test_images", base);
      d.test_labels = input_path(s, "test_labels", base);
    }
    return d;
  }
  if (type == "csv") {
    s.only({"type", "path"});
    return CsvSource{input_path(s, "path", base)};
  }
  throw ConfigError(s.field("type"), "unknown dataset type '" + type + "'");
}

DistributorConfig parse_distributor(const Section& s) {
  const auto type = s.get<std::string>("type");
  if (type == "shard") {
    s.only({"type", "shard_size", "shards_per_client"});
    return ShardConfig{s.positive("shard_size"), s.positive("shards_per_client")};
  }
  if (type == "label") {
    s.only({"type", "labels_per_client", "records_per_client", "num_clients"});
    LabelConfig d{s.positive("labels_per_client"), s.positive("records_per_client"), s.positive("num_clients")};
    if (d.records_per_client < d.labels_per_client) {
      throw ConfigError(s.field("records_per_client"), "must be >= labels_per_client");
    }
    return d;
  }
  if (type == "unique") {
    s.only({"type", "records_per_client"});
    UniqueConfig d;
    if (s.has("records_per_client")) d.records_per_client = s.positive("records_per_client");
    return d;
  }
  if (type == "dirichlet") {
    s.only({"type", "alpha", "num_clients", "records_per_client"});
    DirichletConfig d{s.get<double>("alpha"), s.positive("num_clients"), s.positive("records_per_client")};
    if (!(d.alpha > 0.0) || !std::isfinite(d.alpha)) throw ConfigError(s.field("alpha"), "must be > 0");
    return d;
  }
  throw ConfigError(s.field("type"), "unknown distributor type '" + type + "'");
}

SubscriberConfig parse_subscriber(const Section& s) {
  const auto type = s.get<std::string>("type");
  if (type == "logger") {
    s.only({"type"});
    return LoggerSubscriberConfig{};
  }
  if (type == "metrics") {
    s.only({"type", "path", "wall_time"});
    return MetricsSubscriberConfig{s.get<std::string>("path", "metrics.jsonl"), s.get<bool>("wall_time", false)};
  }
  if (type == "checkpoint") {
    s.only({"type", "path", "interval"});
    return CheckpointSubscriberConfig{s.get<std::string>("path", "checkpoint.bin"), s.positive("interval", 1)};
  }
  if (type == "bandwidth") {
    s.only({"type", "path"});
    BandwidthSubscriberConfig b;
    if (s.has("path")) b.path = s.get<std::string>("path");
    return b;
  }
  if (type == "divergence") {
    s.only({"type", "interval", "dims", "dir"});
    DivergenceSubscriberConfig d;
    d.interval = s.positive("interval", 1);
    d.dims = s.positive("dims", 2);
    if (s.has("dir")) d.dir = s.get<std::string>("dir");
    return d;
  }
  throw ConfigError(s.field("type"), "unknown subscriber type '" + type + "'");
}

std::optional<int> fixed_client_count(const DistributorConfig& d) {
  if (const auto* l = std::get_if<LabelConfig>(&d)) return l->num_clients;
  if (const auto* r = std::get_if<DirichletConfig>(&d)) return r->num_clients;
  return std::nullopt;
}

void check_pool(const SelectorConfig& s, std::size_t clients) {
  if (static_cast<std::size_t>(s.cr) > clients) {
    throw ConfigError("selector.cr", "client ratio " + std::to_string(s.cr) + " exceeds the " +
                                         std::to_string(clients) + " available clients");
  }
  if (s.kind == SelectorKind::kCluster && static_cast<std::size_t>(s.k) > clients) {
    throw ConfigError("selector.k", "cluster count " + std::to_string(s.k) + " exceeds the " +
                                        std::to_string(clients) + " available clients");
  }
}

}  // namespace

RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  const Section root(j, "");
  root.only({"seed", "dataset", "test_fraction", "distributor", "model", "train", "selector", "manager", "stop",
             "subscribers"});
  RunConfig c;
  if (root.has("seed")) {
    const auto& seed = root.raw("seed");
    if (!seed.is_number_integer()) throw ConfigError("seed", "must be an integer");
    c.seed = seed.is_number_unsigned() ? seed.get<std::uint64_t>() : static_cast<std::uint64_t>(seed.get<std::int64_t>());
  }
  c.dataset = parse_dataset(root.sub("dataset"), base_dir);
  c.test_fraction = root.get<double>("test_fraction", c.test_fraction);
  if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0)) throw ConfigError("test_fraction", "must lie in (0, 1)");
  c.distributor = parse_distributor(root.sub("distributor"));

  const auto model = root.sub("model");
  model.only({"kind", "hidden"});
  const auto kind = model.get<std::string>("kind", "logistic_regression");
  if (kind == "logistic_regression") {
    c.model.kind = ModelKind::kLogisticRegression;
    if (model.has("hidden") && !model.get<std::vector<Index>>("hidden").empty()) {
      throw ConfigError("model.hidden", "logistic regression has no hidden layers");
    }
  } else if (kind == "mlp") {
    c.model.kind = ModelKind::kMLP;
    c.model.hidden = model.get<std::vector<Index>>("hidden", {});
    if (c.model.hidden.empty()) throw ConfigError("model.hidden", "an MLP needs at least one hidden layer");
    for (Index h : c.model.hidden) {
      if (h < 1) throw ConfigError("model.hidden", "layer widths must be positive");
    }
  } else {
    throw ConfigError("model.kind", "unknown model kind '" + kind + "'");
  }

  c.train = parse_train(root.sub("train"));

  const auto sel = root.sub("selector");
  const auto sel_type = sel.get<std::string>("type");
  c.selector.cr = sel.positive("cr");
  if (sel_type == "random") {
    sel.only({"type", "cr"});
    c.selector.kind = SelectorKind::kRandom;
  } else if (sel_type == "cluster") {
    sel.only({"type", "cr", "k", "max_iters", "init_train", "pca_dims"});
    c.selector.kind = SelectorKind::kCluster;
    c.selector.k = sel.positive("k");
    c.selector.cluster.max_iters = sel.positive("max_iters", 100);
    if (sel.has("init_train")) c.selector.cluster.init_train = parse_train(sel.sub("init_train"));
    if (sel.has("pca_dims")) c.selector.cluster.pca_dims = sel.positive("pca_dims");
  } else {
    throw ConfigError("selector.type", "unknown selector type '" + sel_type + "'");
  }

  if (root.has("manager")) {
    const auto man = root.sub("manager");
    const auto type = man.get<std::string>("type");
    if (type == "sequential") {
      man.only({"type"});
    } else if (type == "parallel") {
      man.only({"type", "workers"});
      c.manager.parallel = true;
      c.manager.workers = man.positive("workers");
    } else {
      throw ConfigError("manager.type", "unknown manager type '" + type + "'");
    }
  }

  const auto stop = root.sub("stop");
  stop.only({"max_rounds", "target_accuracy", "target_loss"});
  c.stop.max_rounds = stop.positive("max_rounds");
  c.stop.target_accuracy = stop.optional<double>("target_accuracy");
  c.stop.target_loss = stop.optional<double>("target_loss");
  if (c.stop.target_accuracy && !(*c.stop.target_accuracy >= 0.0 && *c.stop.target_accuracy <= 1.0)) {
    throw ConfigError("stop.target_accuracy", "must lie in [0, 1]");
  }
  if (c.stop.target_loss && !(*c.stop.target_loss >= 0.0)) throw ConfigError("stop.target_loss", "must be >= 0");

  if (root.has("subscribers")) {
    const auto& subs = root.raw("subscribers");
    if (!subs.is_array()) throw ConfigError("subscribers", "expected a list");
    for (std::size_t i = 0; i < subs.size(); ++i) {
      c.subscribers.push_back(parse_subscriber(Section(subs[i], "subscribers[" + std::to_string(i) + "]")));
    }
  }

  if (const auto n = fixed_client_count(c.distributor)) check_pool(c.selector, static_cast<std::size_t>(*n));
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j, path.parent_path());
}

nlohmann::json to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["dataset"] = std::visit(DatasetJson{}, c.dataset);
  j["test_fraction"] = c.test_fraction;
  j["distributor"] = std::visit(DistributorJson{}, c.distributor);
  if (c.model.kind == ModelKind::kLogisticRegression) {
    j["model"] = {{"kind", "logistic_regression"}};
  } else {
    j["model"] = {{"kind", "mlp"}, {"hidden", c.model.hidden}};
  }
  j["train"] = train_json(c.train);
  if (c.selector.kind == SelectorKind::kRandom) {
    j["selector"] = {{"type", "random"}, {"cr", c.selector.cr}};
  } else {
    const auto& o = c.selector.cluster;
    j["selector"] = {{"type", "cluster"},
                     {"cr", c.selector.cr},
                     {"k", c.selector.k},
                     {"max_iters", o.max_iters},
                     {"init_train", o.init_train ? train_json(*o.init_train) : json(nullptr)},
                     {"pca_dims", o.pca_dims ? json(*o.pca_dims) : json(nullptr)}};
  }
  j["manager"] = c.manager.parallel ? json{{"type", "parallel"}, {"workers", c.manager.workers}}
                                    : json{{"type", "sequential"}};
  j["stop"] = {{"max_rounds", c.stop.max_rounds},
               {"target_accuracy", c.stop.target_accuracy ? json(*c.stop.target_accuracy) : json(nullptr)},
               {"target_loss", c.stop.target_loss ? json(*c.stop.target_loss) : json(nullptr)}};
  j["subscribers"] = json::array();
  for (const auto& s : c.subscribers) j["subscribers"].push_back(std::visit(SubscriberJson{}, s));
  return j;
}

std::uint64_t config_digest(const RunConfig& config) {
  json j = to_json(config);
  j.erase("stop");
  j.erase("subscribers");
  const std::string canonical = j.dump();
  return fnv1a64(canonical.data(), canonical.size());
}

std::filesystem::path resolve_output(const std::filesystem::path& path) {
  if (path.is_absolute()) return path;
  if (const char* dir = std::getenv("FEDSIM_OUTPUT_DIR"); dir != nullptr && *dir != '\0') {
    return std::filesystem::path(dir) / path;
  }
  return path;
}

namespace {

struct LoadedData {
  DataContainer train;
  DataContainer test;
};

LoadedData load_data(const RunConfig& config) {
  const auto split = [&](const DataContainer& all) {
    auto [train, test] = train_test_split(all, config.test_fraction, derive_seed(config.seed, Stream::kSplit));
    return LoadedData{std::move(train), std::move(test)};
  };
  if (const auto* s = std::get_if<SyntheticSource>(&config.dataset)) {
    return split(generate_synthetic(s->num_classes, s->per_class, s->dim, derive_seed(config.seed, Stream::kData),
                                    s->separation));
  }
  if (const auto* s = std::get_if<IdxSource>(&config.dataset)) {
    if (s->test_images) return {load_idx(s->images, s->labels), load_idx(*s->test_images, *s->test_labels)};
    return split(load_idx(s->images, s->labels));
  }
  return split(load_csv(std::get<CsvSource>(config.dataset).path));
}

DistributionPlan distribute(const RunConfig& config, const DataContainer& train) {
  const auto seed = derive_seed(config.seed, Stream::kDistribute);
  return std::visit(
      [&](const auto& d) -> DistributionPlan {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ShardConfig>) {
          return distribute_shard(train, d.shard_size, d.shards_per_client, seed);
        } else if constexpr (std::is_same_v<T, LabelConfig>) {
          return distribute_label(train, d.labels_per_client, d.records_per_client, d.num_clients, seed);
        } else if constexpr (std::is_same_v<T, UniqueConfig>) {
          return distribute_unique(train, d.records_per_client, seed);
        } else {
          return distribute_dirichlet(train, d.alpha, d.num_clients, d.records_per_client, seed);
        }
      },
      config.distributor);
}

}  // namespace

std::pair<DataContainer, DistributionPlan> prepare_distribution(const RunConfig& config) {
  auto data = load_data(config);
  auto plan = distribute(config, data.train);
  return {std::move(data.train), std::move(plan)};
}

Experiment prepare_experiment(const RunConfig& config) {
  auto data = load_data(config);
  Experiment e;
  e.plan = distribute(config, data.train);
  check_pool(config.selector, e.plan.num_clients());

  const int classes = std::max({data.train.num_classes(), data.test.num_classes(), 2});
  e.spec.kind = config.model.kind;
  e.spec.input_dim = data.train.dim();
  e.spec.hidden_dims = config.model.hidden;
  e.spec.num_classes = classes;
  e.spec.validate();

  for (std::size_t k = 0; k < e.plan.num_clients(); ++k) {
    SimClient client;
    client.id = static_cast<ClientId>(k);
    client.data = std::make_shared<const DataContainer>(data.train.subset(e.plan.assignments[k]));
    client.train_cfg = config.train;
    e.clients.push_back(std::move(client));
  }
  e.train = std::make_shared<const DataContainer>(std::move(data.train));
  e.test = std::move(data.test);
  return e;
}

std::unique_ptr<ClientSelector> make_selector(const RunConfig& config) {
  if (config.selector.kind == SelectorKind::kCluster) {
    return std::make_unique<ClusterSelector>(config.selector.cr, config.selector.k, config.selector.cluster);
  }
  return std::make_unique<RandomSelector>(config.selector.cr);
}

std::unique_ptr<ClientManager> make_manager(const RunConfig& config) {
  if (config.manager.parallel) return std::make_unique<ParallelManager>(static_cast<std::size_t>(config.manager.workers));
  return std::make_unique<SequentialManager>();
}

void attach_subscribers(const RunConfig& config, EventBus& bus, std::ostream& log) {
  const auto digest = config_digest(config);
  for (const auto& s : config.subscribers) {
    std::visit(
        [&](const auto& sub) {
          using T = std::decay_t<decltype(sub)>;
          if constexpr (std::is_same_v<T, LoggerSubscriberConfig>) {
            bus.add(std::make_shared<ConsoleLogger>(log));
          } else if constexpr (std::is_same_v<T, MetricsSubscriberConfig>) {
            bus.add(std::make_shared<MetricsStore>(resolve_output(sub.path), sub.wall_time));
          } else if constexpr (std::is_same_v<T, CheckpointSubscriberConfig>) {
            bus.add(std::make_shared<CheckpointWriter>(resolve_output(sub.path), sub.interval, digest));
          } else if constexpr (std::is_same_v<T, BandwidthSubscriberConfig>) {
            if (sub.path) {
              bus.add(std::make_shared<BandwidthAccountant>(resolve_output(*sub.path)));
            } else {
              bus.add(std::make_shared<BandwidthAccountant>());
            }
          } else {
            DivergenceOptions options;
            options.interval = sub.interval;
            options.dims = sub.dims;
            if (sub.dir) options.out_dir = resolve_output(*sub.dir);
            bus.add(std::make_shared<DivergenceAnalyzer>(options));
          }
        },
        s);
  }
}

FLContext execute(const RunConfig& config, const Experiment& experiment, EventBus& bus,
                  std::optional<FLContext> resume) {
  auto selector = make_selector(config);
  auto manager = make_manager(config);
  FedAvgAggregator aggregator;
  RunOptions options;
  options.config_digest = config_digest(config);
  options.resume = std::move(resume);
  return run_federated(experiment.spec, experiment.clients, experiment.test, *selector, *manager, aggregator,
                       config.stop, bus, config.seed, std::move(options));
}

}  // namespace fedsim
