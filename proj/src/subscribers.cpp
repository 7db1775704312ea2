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

#include "fedsim/subscribers.hpp"

#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "fedsim/checkpoint.hpp"
#include "fedsim/errors.hpp"
#include "fedsim/linalg.hpp"

namespace fedsim {

void ConsoleLogger::on_event(const Event& event, const FLContext& ctx) {
  auto& out = *out_;
  if (const auto* e = std::get_if<FederationStarted>(&event)) {
    out << "federation started";
    if (e->start_round > 0) out << " (resuming after round " << e->start_round << ")";
    out << '\n';
  } else if (const auto* e = std::get_if<RoundFinished>(&event)) {
    const auto* last = ctx.last();
    out << "round " << std::setw(4) << e->round << "  acc " << std::fixed << std::setprecision(4)
        << e->metrics.accuracy << "  loss " << e->metrics.loss << std::defaultfloat << "  clients "
        << (last ? last->selected_ids.size() : 0) << "  bytes " << e->cumulative_bytes << '\n';
  } else if (const auto* e = std::get_if<FederationFinished>(&event)) {
    out << "federation finished after " << e->total_rounds << " rounds: "
        << (e->outcome == Outcome::kCompleted ? "completed" : "failed: " + e->error) << '\n';
  }
}

std::string format_metrics_line(const RoundRecord& record, std::int64_t bytes_cumulative, bool with_wall_time) {
  nlohmann::ordered_json j;
  j["round"] = record.round;
  j["accuracy"] = record.global_metrics.accuracy;
  j["loss"] = record.global_metrics.loss;
  j["selected"] = record.selected_ids;
  j["bytes_cumulative"] = bytes_cumulative;
  if (with_wall_time) j["wall_time"] = record.wall_time;
  return j.dump();
}

MetricsLine parse_metrics_line(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("not JSON: ") + e.what());
  }
  try {
    MetricsLine m;
    m.round = j.at("round").get<std::int64_t>();
    m.accuracy = j.at("accuracy").get<double>();
    m.loss = j.at("loss").get<double>();
    m.selected = j.at("selected").get<std::vector<ClientId>>();
    m.bytes_cumulative = j.at("bytes_cumulative").get<std::int64_t>();
    if (j.contains("wall_time")) m.wall_time = j.at("wall_time").get<double>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad metrics record: ") + e.what());
  }
}

MetricsStore::MetricsStore(std::filesystem::path path, bool with_wall_time)
    : path_(std::move(path)), with_wall_time_(with_wall_time) {}

void MetricsStore::on_event(const Event& event, const FLContext& ctx) {
  if (const auto* e = std::get_if<FederationStarted>(&event)) {
    std::vector<std::string> kept;
    if (e->start_round > 0) {
      std::ifstream in(path_);
      for (std::string line; std::getline(in, line);) {
        if (line.empty()) continue;
        try {
          if (parse_metrics_line(line).round <= e->start_round) kept.push_back(line);
        } catch (const FormatError&) {
        }
      }
    }
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    out_.open(path_, std::ios::out | std::ios::trunc);
    if (!out_) throw Error("cannot open metrics file " + path_.string());
    for (const auto& line : kept) out_ << line << '\n';
    out_.flush();
    return;
  }
  if (const auto* e = std::get_if<RoundFinished>(&event)) {
    const auto* last = ctx.last();
    if (last == nullptr || last->round != e->round) throw Error("metrics store: context out of step");
    out_ << format_metrics_line(*last, e->cumulative_bytes, with_wall_time_) << '\n';
    out_.flush();
    if (!out_) throw Error("write to " + path_.string() + " failed");
    return;
  }
  if (std::holds_alternative<FederationFinished>(event)) out_.close();
}

CheckpointWriter::CheckpointWriter(std::filesystem::path path, std::int64_t interval, std::uint64_t config_digest)
    : pattern_(path.string()), interval_(interval), digest_(config_digest) {
  if (interval < 1) throw ArgumentError("checkpoint interval must be >= 1");
}

std::filesystem::path CheckpointWriter::path_for(std::int64_t round) const {
  std::string p = pattern_;
  const auto pos = p.find("{round}");
  if (pos != std::string::npos) p.replace(pos, 7, std::to_string(round));
  return p;
}

void CheckpointWriter::on_event(const Event& event, const FLContext& ctx) {
  const auto* e = std::get_if<RoundFinished>(&event);
  if (e == nullptr || e->round % interval_ != 0) return;
  const auto path = path_for(e->round);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  save_checkpoint(path, ctx, digest_);
  written_.push_back(path);
}

void BandwidthAccountant::on_event(const Event& event, const FLContext& ctx) {
  if (const auto* e = std::get_if<FederationStarted>(&event)) {
    cumulative_ = ctx.cumulative_bytes();
    ledger_.clear();
    if (csv_path_) {
      std::ofstream out(*csv_path_, e->start_round > 0 ? std::ios::app : std::ios::trunc);
      if (!out) throw Error("cannot open bandwidth file " + csv_path_->string());
      if (e->start_round == 0) out << "round,bytes_up,bytes_down,bytes_cumulative\n";
    }
  } else if (const auto* e = std::get_if<TrainersSelected>(&event)) {
    current_ = {e->round, 0, static_cast<std::int64_t>(e->ids.size()) * payload_bytes(ctx.global_params.size()), 0};
  } else if (const auto* e = std::get_if<ClientTrained>(&event)) {
    current_.bytes_up += e->bytes_payload;
  } else if (const auto* e = std::get_if<RoundFinished>(&event)) {
    cumulative_ += current_.bytes_up + current_.bytes_down;
    current_.cumulative = cumulative_;
    ledger_.push_back(current_);
    if (cumulative_ != e->cumulative_bytes) {
      throw Error("bandwidth ledger " + std::to_string(cumulative_) + " disagrees with kernel total " +
                  std::to_string(e->cumulative_bytes));
    }
    if (csv_path_) {
      std::ofstream out(*csv_path_, std::ios::app);
      out << current_.round << ',' << current_.bytes_up << ',' << current_.bytes_down << ',' << current_.cumulative
          << '\n';
    }
  }
}

DivergenceReport analyze_divergence(std::int64_t round, std::span<const ParamVector> client_params,
                                    Eigen::Index dims, std::vector<ClientId> client_ids) {
  if (client_params.size() < 2) throw ArgumentError("divergence analysis needs at least two clients");
  const Eigen::Index k = static_cast<Eigen::Index>(client_params.size());
  const Eigen::Index p = client_params.front().size();
  Eigen::MatrixXd weights(k, p);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!client_params[static_cast<std::size_t>(i)].same_shape(client_params.front())) {
      throw ShapeError("divergence analysis: client parameter shapes differ");
    }
    weights.row(i) = client_params[static_cast<std::size_t>(i)].values().transpose();
  }
  if (client_ids.empty()) {
    for (Eigen::Index i = 0; i < k; ++i) client_ids.push_back(static_cast<ClientId>(i));
  }
  const auto pca = principal_components(weights, dims);
  DivergenceReport report;
  report.round = round;
  report.client_ids = std::move(client_ids);
  report.projected = pca.projections;
  report.explained_variance = pca.explained_variance;
  report.mean_pairwise_distance = mean_pairwise_distance(weights);
  return report;
}

DivergenceAnalyzer::DivergenceAnalyzer(DivergenceOptions options) : options_(std::move(options)) {
  if (options_.interval < 1) throw ArgumentError("divergence interval must be >= 1");
  if (options_.dims < 1) throw ArgumentError("divergence dims must be >= 1");
}

bool DivergenceAnalyzer::analyses(std::int64_t round) const noexcept {
  return round >= 1 && (round - 1) % options_.interval == 0;
}

void DivergenceAnalyzer::on_event(const Event& event, const FLContext&) {
  if (const auto* e = std::get_if<FederationStarted>(&event)) {
    if (options_.out_dir) {
      std::filesystem::create_directories(*options_.out_dir);
      const auto summary = *options_.out_dir / "summary.csv";
      if (e->start_round == 0 || !std::filesystem::exists(summary)) {
        std::ofstream(summary, std::ios::trunc) << "round,mean_pairwise_distance\n";
      }
    }
  } else if (const auto* e = std::get_if<RoundStarted>(&event)) {
    active_ = analyses(e->round);
    buffer_.clear();
    ids_.clear();
  } else if (const auto* e = std::get_if<ClientTrained>(&event)) {
    if (active_ && e->params != nullptr) {
      buffer_.push_back(*e->params);
      ids_.push_back(e->client_id);
    }
  } else if (const auto* e = std::get_if<UpdatesAggregated>(&event)) {
    if (!active_) return;
    active_ = false;
    auto report = analyze_divergence(e->round, buffer_, options_.dims, ids_);
    buffer_.clear();
    if (options_.out_dir) {
      std::ofstream out(*options_.out_dir / ("round_" + std::to_string(e->round) + ".csv"), std::ios::trunc);
      out << "client_id";
      for (Eigen::Index c = 0; c < report.projected.cols(); ++c) out << ",c" << (c + 1);
      out << '\n' << std::setprecision(17);
      for (Eigen::Index i = 0; i < report.projected.rows(); ++i) {
        out << report.client_ids[static_cast<std::size_t>(i)];
        for (Eigen::Index c = 0; c < report.projected.cols(); ++c) out << ',' << report.projected(i, c);
        out << '\n';
      }
      std::ofstream(*options_.out_dir / "summary.csv", std::ios::app)
          << std::setprecision(17) << report.round << ',' << report.mean_pairwise_distance << '\n';
    }
    reports_.push_back(std::move(report));
  }
}

void EventRecorder::on_event(const Event& event, const FLContext&) {
  Event copy = event;
  if (auto* e = std::get_if<ClientTrained>(&copy)) e->params = nullptr;
  if (auto* e = std::get_if<UpdatesAggregated>(&copy)) e->global = nullptr;
  events_.push_back(std::move(copy));
}

std::vector<std::string_view> EventRecorder::names() const {
  std::vector<std::string_view> out;
  out.reserve(events_.size());
  for (const auto& e : events_) out.push_back(event_name(e));
  return out;
}

}  // namespace fedsim
