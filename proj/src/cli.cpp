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

#include "fedsim/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "fedsim/checkpoint.hpp"
#include "fedsim/experiment.hpp"
#include "fedsim/subscribers.hpp"

namespace fedsim::cli {

namespace {

RunConfig load_with_override(const std::string& path, const std::vector<unsigned long long>& seed_override) {
  RunConfig config = load_config(path);
  if (!seed_override.empty()) config.seed = seed_override.back();
  return config;
}

// Maps library exceptions onto exit codes.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "error: invalid configuration: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const DigestMismatchError& e) {
    err << "error: " << e.what() << '\n';
    return kDigestMismatch;
  } catch (const FormatError& e) {
    err << "error: format: " << e.what() << '\n';
    return kRuntimeError;
  } catch (const InsufficientDataError& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

}  // namespace

int cmd_run(const std::string& config_path, const std::vector<unsigned long long>& seed_override,
            std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig config = load_with_override(config_path, seed_override);
    const Experiment experiment = prepare_experiment(config);
    EventBus bus;
    bus.set_error_stream(err);
    attach_subscribers(config, bus, out);
    const FLContext ctx = execute(config, experiment, bus);
    out << "completed " << ctx.round << " rounds\n";
    return static_cast<int>(kOk);
  });
}

int cmd_resume(const std::string& checkpoint_path, const std::string& config_path,
               const std::vector<unsigned long long>& seed_override, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig config = load_with_override(config_path, seed_override);
    FLContext saved = resume_checkpoint(checkpoint_path, config_digest(config));
    if (check_stop(saved, config.stop)) {
      out << "checkpoint already satisfies the stop criteria after " << saved.round << " rounds\n";
      return static_cast<int>(kOk);
    }
    const Experiment experiment = prepare_experiment(config);
    EventBus bus;
    bus.set_error_stream(err);
    attach_subscribers(config, bus, out);
    const FLContext ctx = execute(config, experiment, bus, std::move(saved));
    out << "completed " << ctx.round << " rounds\n";
    return static_cast<int>(kOk);
  });
}

int cmd_distribute(const std::string& config_path, const std::string& out_csv,
                   const std::vector<unsigned long long>& seed_override, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig config = load_with_override(config_path, seed_override);
    const auto [train, plan] = prepare_distribution(config);
    const auto path = resolve_output(out_csv);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw Error("cannot write " + path.string());
    file << export_heatmap(plan);
    if (!file) throw Error("write to " + path.string() + " failed");
    out << "clients: " << plan.num_clients() << "\nlabels: " << train.num_classes() << "\nwrote " << path.string()
        << '\n';
    if (plan.reassigned > 0) out << "reassigned records: " << plan.reassigned << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_inspect(const std::string& metrics_path, const std::string& csv_path, std::ostream& out, std::ostream& err) {
  std::ifstream in(metrics_path);
  if (!in) {
    err << "error: cannot open " << metrics_path << '\n';
    return kRuntimeError;
  }
  std::vector<MetricsLine> rows;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      rows.push_back(parse_metrics_line(line));
    } catch (const FormatError& e) {
      err << "error: " << metrics_path << ": line " << line_no << ": " << e.what() << '\n';
      return kRuntimeError;
    }
  }
  if (rows.empty()) {
    err << "error: " << metrics_path << ": no metric records\n";
    return kRuntimeError;
  }
  const auto best = std::max_element(rows.begin(), rows.end(), [](const MetricsLine& a, const MetricsLine& b) {
    return a.accuracy < b.accuracy;
  });
  out << "rounds: " << rows.size() << '\n'
      << std::setprecision(6) << "final accuracy: " << rows.back().accuracy << '\n'
      << "final loss: " << rows.back().loss << '\n'
      << "best round: " << best->round << " (accuracy " << best->accuracy << ")\n"
      << "cumulative bytes: " << rows.back().bytes_cumulative << '\n';
  if (!csv_path.empty()) {
    std::ofstream csv(csv_path, std::ios::trunc);
    if (!csv) {
      err << "error: cannot write " << csv_path << '\n';
      return kRuntimeError;
    }
    csv << "round,accuracy,loss,bytes_cumulative\n" << std::setprecision(17);
    for (const auto& r : rows) csv << r.round << ',' << r.accuracy << ',' << r.loss << ',' << r.bytes_cumulative << '\n';
  }
  return kOk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"fedsim: federated learning simulator", "fedsim"};
  app.require_subcommand(1);
  std::vector<unsigned long long> seed;
  std::string config, checkpoint, out_csv, metrics, inspect_csv;

  auto* run = app.add_subcommand("run", "run a federation from a JSON config");
  run->add_option("config", config, "run configuration")->required();
  run->add_option("--seed", seed, "override the config seed")->expected(1);

  auto* resume = app.add_subcommand("resume", "continue a federation from a checkpoint");
  resume->add_option("checkpoint", checkpoint, "checkpoint file")->required();
  resume->add_option("config", config, "run configuration")->required();
  resume->add_option("--seed", seed, "override the config seed")->expected(1);

  auto* distribute = app.add_subcommand("distribute", "write the client x label heatmap CSV");
  distribute->add_option("config", config, "run configuration")->required();
  distribute->add_option("out", out_csv, "output CSV")->required();
  distribute->add_option("--seed", seed, "override the config seed")->expected(1);

  auto* inspect = app.add_subcommand("inspect", "summarize a metrics JSON-lines file");
  inspect->add_option("metrics", metrics, "metrics file")->required();
  inspect->add_option("--csv", inspect_csv, "also write a per-round CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kInvalidConfig;
  }

  if (*run) return cmd_run(config, seed, out, err);
  if (*resume) return cmd_resume(checkpoint, config, seed, out, err);
  if (*distribute) return cmd_distribute(config, out_csv, seed, out, err);
  return cmd_inspect(metrics, inspect_csv, out, err);
}

}  // namespace fedsim::cli
