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

#ifndef FEDSIM_SUBSCRIBERS_HPP
#define FEDSIM_SUBSCRIBERS_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedsim/events.hpp"

namespace fedsim {

/// Human-readable per-round progress lines.
class ConsoleLogger final : public Subscriber {
 public:
  explicit ConsoleLogger(std::ostream& out) : out_(&out) {}
  std::string name() const override { return "logger"; }
  void on_event(const Event& event, const FLContext& ctx) override;

 private:
  std::ostream* out_;
};

/// One parsed metrics JSON line.
struct MetricsLine {
  std::int64_t round = 0;
  double accuracy = 0.0;
  double loss = 0.0;
  std::vector<ClientId> selected;
  std::int64_t bytes_cumulative = 0;
  std::optional<double> wall_time;
};

std::string format_metrics_line(const RoundRecord& record, std::int64_t bytes_cumulative, bool with_wall_time);
/// Throws FormatError when the line is not a metrics object.
MetricsLine parse_metrics_line(std::string_view line);

/// Appends one JSON object per finished round to a JSON-lines file, flushing
/// after each. A fresh run truncates the file; a resumed run keeps the lines
/// up to its start round and appends from there.
class MetricsStore final : public Subscriber {
 public:
  explicit MetricsStore(std::filesystem::path path, bool with_wall_time = false);
  std::string name() const override { return "metrics"; }
  void on_event(const Event& event, const FLContext& ctx) override;

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  bool with_wall_time_;
  std::ofstream out_;
};

/// Saves the context every `interval` rounds. A `{round}` token in the path
/// is replaced by the round number; otherwise the file is overwritten.
class CheckpointWriter final : public Subscriber {
 public:
  CheckpointWriter(std::filesystem::path path, std::int64_t interval, std::uint64_t config_digest);
  std::string name() const override { return "checkpoint"; }
  void on_event(const Event& event, const FLContext& ctx) override;

  std::filesystem::path path_for(std::int64_t round) const;
  const std::vector<std::filesystem::path>& written() const noexcept { return written_; }

 private:
  std::string pattern_;
  std::int64_t interval_;
  std::uint64_t digest_;
  std::vector<std::filesystem::path> written_;
};

struct BandwidthEntry {
  std::int64_t round = 0;
  std::int64_t bytes_up = 0;
  std::int64_t bytes_down = 0;
  std::int64_t cumulative = 0;
};

/// Byte ledger: downlink is the global model sent to every selected client,
/// uplink the sum of client payloads.
class BandwidthAccountant final : public Subscriber {
 public:
  BandwidthAccountant() = default;
  explicit BandwidthAccountant(std::filesystem::path csv_path) : csv_path_(std::move(csv_path)) {}
  std::string name() const override { return "bandwidth"; }
  void on_event(const Event& event, const FLContext& ctx) override;

  std::int64_t total() const noexcept { return cumulative_; }
  const std::vector<BandwidthEntry>& ledger() const noexcept { return ledger_; }

 private:
  std::optional<std::filesystem::path> csv_path_;
  std::int64_t cumulative_ = 0;
  BandwidthEntry current_;
  std::vector<BandwidthEntry> ledger_;
};

struct DivergenceReport {
  std::int64_t round = 0;
  std::vector<ClientId> client_ids;
  Eigen::MatrixXd projected;  ///< K x d
  Eigen::VectorXd explained_variance;
  double mean_pairwise_distance = 0.0;
};

/// PCA projection of the clients' flattened weights plus the mean pairwise
/// Euclidean distance of the raw weights.
DivergenceReport analyze_divergence(std::int64_t round, std::span<const ParamVector> client_params,
                                    Eigen::Index dims, std::vector<ClientId> client_ids = {});

struct DivergenceOptions {
  std::int64_t interval = 1;  ///< analyse rounds 1, 1 + interval, ...
  Eigen::Index dims = 2;
  std::optional<std::filesystem::path> out_dir;  ///< round_<r>.csv and summary.csv
};

class DivergenceAnalyzer final : public Subscriber {
 public:
  explicit DivergenceAnalyzer(DivergenceOptions options);
  std::string name() const override { return "divergence"; }
  void on_event(const Event& event, const FLContext& ctx) override;

  bool analyses(std::int64_t round) const noexcept;
  const std::vector<DivergenceReport>& reports() const noexcept { return reports_; }

 private:
  DivergenceOptions options_;
  bool active_ = false;
  std::vector<ParamVector> buffer_;
  std::vector<ClientId> ids_;
  std::vector<DivergenceReport> reports_;
};

/// Keeps a copy of every event; payload pointers are cleared.
class EventRecorder final : public Subscriber {
 public:
  std::string name() const override { return "recorder"; }
  void on_event(const Event& event, const FLContext& ctx) override;

  const std::vector<Event>& events() const noexcept { return events_; }
  std::vector<std::string_view> names() const;

 private:
  std::vector<Event> events_;
};

}  // namespace fedsim

#endif  // FEDSIM_SUBSCRIBERS_HPP
