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

#include "fedsim/distribute.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fedsim/errors.hpp"
#include "fedsim/random.hpp"

namespace fedsim {

namespace {

// Record indices grouped by label, each group in ascending index order.
std::vector<std::vector<std::size_t>> indices_by_label(const DataContainer& data) {
  std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(data.num_classes()));
  for (std::size_t i = 0; i < data.labels().size(); ++i) {
    groups[static_cast<std::size_t>(data.labels()[i])].push_back(i);
  }
  return groups;
}

Eigen::VectorXd sample_dirichlet(int num_classes, double alpha, Rng& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  Eigen::VectorXd p(num_classes);
  for (int c = 0; c < num_classes; ++c) p[c] = gamma(rng);
  const double total = p.sum();
  if (total > 0.0 && std::isfinite(total)) return p / total;
  // Every draw underflowed (tiny alpha): the limit is a single random label.
  p.setZero();
  p[std::uniform_int_distribution<int>(0, num_classes - 1)(rng)] = 1.0;
  return p;
}

}  // namespace

int DistributionPlan::distinct_labels(std::size_t client) const {
  return static_cast<int>((label_histogram.row(static_cast<Eigen::Index>(client)).array() > 0).count());
}

DistributionPlan make_plan(std::vector<std::vector<std::size_t>> assignments,
                           const DataContainer& source) {
  DistributionPlan plan;
  plan.label_histogram = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(assignments.size()),
                                               source.num_classes());
  for (std::size_t k = 0; k < assignments.size(); ++k) {
    for (std::size_t idx : assignments[k]) {
      if (idx >= source.labels().size()) throw ArgumentError("plan index out of range");
      ++plan.label_histogram(static_cast<Eigen::Index>(k), source.labels()[idx]);
    }
  }
  plan.assignments = std::move(assignments);
  return plan;
}

std::string validate_plan(const DistributionPlan& plan, const DataContainer& source) {
  const auto n = source.labels().size();
  const auto k = static_cast<Eigen::Index>(plan.assignments.size());
  if (plan.label_histogram.rows() != k || plan.label_histogram.cols() != source.num_classes()) {
    return "histogram dimensions do not match K x C";
  }
  std::vector<bool> seen(n, false);
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(k, source.num_classes());
  for (Eigen::Index c = 0; c < k; ++c) {
    for (std::size_t idx : plan.assignments[static_cast<std::size_t>(c)]) {
      if (idx >= n) return "client " + std::to_string(c) + " holds out-of-range index " + std::to_string(idx);
      if (seen[idx]) return "index " + std::to_string(idx) + " assigned twice";
      seen[idx] = true;
      ++counts(c, source.labels()[idx]);
    }
  }
  if (counts != plan.label_histogram) return "histogram does not match assignments";
  return {};
}

DistributionPlan distribute_shard(const DataContainer& data, int shard_size, int shards_per_client,
                                  std::uint64_t seed) {
  if (shard_size < 1) throw ArgumentError("shard_size must be >= 1");
  if (shards_per_client < 1) throw ArgumentError("shards_per_client must be >= 1");

  // Consecutive same-label slices; each label's tail shorter than a shard is dropped.
  std::vector<std::vector<std::size_t>> shards;
  for (const auto& group : indices_by_label(data)) {
    const std::size_t size = static_cast<std::size_t>(shard_size);
    for (std::size_t start = 0; start + size <= group.size(); start += size) {
      shards.emplace_back(group.begin() + static_cast<std::ptrdiff_t>(start),
                          group.begin() + static_cast<std::ptrdiff_t>(start + size));
    }
  }
  if (shards.size() < static_cast<std::size_t>(shards_per_client)) {
    throw InsufficientDataError("shard distribution: only " + std::to_string(shards.size()) +
                                " shards of size " + std::to_string(shard_size) + " but " +
                                std::to_string(shards_per_client) + " required per client");
  }
  Rng rng(seed);
  std::shuffle(shards.begin(), shards.end(), rng);

  const std::size_t per = static_cast<std::size_t>(shards_per_client);
  const std::size_t clients = shards.size() / per;
  std::vector<std::vector<std::size_t>> assignments(clients);
  for (std::size_t k = 0; k < clients; ++k) {
    for (std::size_t s = 0; s < per; ++s) {
      const auto& shard = shards[k * per + s];
      assignments[k].insert(assignments[k].end(), shard.begin(), shard.end());
    }
  }
  return make_plan(std::move(assignments), data);
}

DistributionPlan distribute_label(const DataContainer& data, int labels_per_client,
                                  int records_per_client, int num_clients, std::uint64_t seed) {
  const int classes = data.num_classes();
  if (labels_per_client < 1 || labels_per_client > classes) {
    throw ArgumentError("labels_per_client must lie in [1, " + std::to_string(classes) + "]");
  }
  if (num_clients < 1) throw ArgumentError("num_clients must be >= 1");
  if (records_per_client < labels_per_client) {
    throw ArgumentError("records_per_client must be >= labels_per_client");
  }

  Rng rng(seed);
  std::vector<int> label_order(static_cast<std::size_t>(classes));
  std::iota(label_order.begin(), label_order.end(), 0);
  std::shuffle(label_order.begin(), label_order.end(), rng);

  // (label, count) demands per client.
  std::vector<std::vector<std::pair<int, std::size_t>>> demand(static_cast<std::size_t>(num_clients));
  std::vector<std::size_t> total_demand(static_cast<std::size_t>(classes), 0);
  for (int k = 0; k < num_clients; ++k) {
    for (int j = 0; j < labels_per_client; ++j) {
      const int label = label_order[static_cast<std::size_t>((k * labels_per_client + j) % classes)];
      const auto count = static_cast<std::size_t>(records_per_client / labels_per_client +
                                                  (j < records_per_client % labels_per_client ? 1 : 0));
      demand[static_cast<std::size_t>(k)].emplace_back(label, count);
      total_demand[static_cast<std::size_t>(label)] += count;
    }
  }

  auto pools = indices_by_label(data);
  for (int c = 0; c < classes; ++c) {
    const auto supply = pools[static_cast<std::size_t>(c)].size();
    if (total_demand[static_cast<std::size_t>(c)] > supply) {
      throw InsufficientDataError("label distribution: label " + std::to_string(c) + " needs " +
                                  std::to_string(total_demand[static_cast<std::size_t>(c)]) +
                                  " records but only " + std::to_string(supply) + " exist");
    }
    std::shuffle(pools[static_cast<std::size_t>(c)].begin(), pools[static_cast<std::size_t>(c)].end(), rng);
  }

  std::vector<std::size_t> cursor(static_cast<std::size_t>(classes), 0);
  std::vector<std::vector<std::size_t>> assignments(static_cast<std::size_t>(num_clients));
  for (std::size_t k = 0; k < assignments.size(); ++k) {
    for (auto [label, count] : demand[k]) {
      const auto& pool = pools[static_cast<std::size_t>(label)];
      auto& pos = cursor[static_cast<std::size_t>(label)];
      assignments[k].insert(assignments[k].end(), pool.begin() + static_cast<std::ptrdiff_t>(pos),
                            pool.begin() + static_cast<std::ptrdiff_t>(pos + count));
      pos += count;
    }
  }
  return make_plan(std::move(assignments), data);
}

DistributionPlan distribute_unique(const DataContainer& data, std::optional<int> records_per_client,
                                   std::uint64_t seed) {
  if (records_per_client && *records_per_client < 1) {
    throw ArgumentError("records_per_client must be >= 1");
  }
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> assignments;
  auto groups = indices_by_label(data);
  for (std::size_t c = 0; c < groups.size(); ++c) {
    auto& group = groups[c];
    if (group.empty()) continue;
    if (records_per_client) {
      const auto want = static_cast<std::size_t>(*records_per_client);
      if (want > group.size()) {
        throw InsufficientDataError("unique distribution: label " + std::to_string(c) + " has " +
                                    std::to_string(group.size()) + " records, " +
                                    std::to_string(want) + " requested");
      }
      std::shuffle(group.begin(), group.end(), rng);
      group.resize(want);
      std::sort(group.begin(), group.end());
    }
    assignments.push_back(std::move(group));
  }
  return make_plan(std::move(assignments), data);
}

Eigen::VectorXd sample_dirichlet(int num_classes, double alpha, std::uint64_t seed) {
  if (!(alpha > 0.0)) throw ArgumentError("dirichlet alpha must be > 0");
  if (num_classes < 1) throw ArgumentError("dirichlet needs at least one class");
  Rng rng(seed);
  return sample_dirichlet(num_classes, alpha, rng);
}

std::vector<std::int64_t> largest_remainder(const Eigen::VectorXd& proportions, std::int64_t total) {
  const auto n = static_cast<std::size_t>(proportions.size());
  std::vector<std::int64_t> counts(n);
  std::vector<double> remainder(n);
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double exact = proportions[static_cast<Eigen::Index>(i)] * static_cast<double>(total);
    counts[i] = static_cast<std::int64_t>(std::floor(exact));
    remainder[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t r = 0; assigned < total && n > 0; ++r, ++assigned) ++counts[order[r % n]];
  return counts;
}

DistributionPlan distribute_dirichlet(const DataContainer& data, double alpha, int num_clients,
                                      int records_per_client, std::uint64_t seed) {
  if (!(alpha > 0.0)) throw ArgumentError("dirichlet alpha must be > 0");
  if (num_clients < 1) throw ArgumentError("num_clients must be >= 1");
  if (records_per_client < 1) throw ArgumentError("records_per_client must be >= 1");
  const auto demand = static_cast<std::int64_t>(num_clients) * records_per_client;
  if (demand > data.size()) {
    throw InsufficientDataError("dirichlet distribution: " + std::to_string(demand) +
                                " records requested but only " + std::to_string(data.size()) + " exist");
  }

  Rng rng(seed);
  auto pools = indices_by_label(data);
  for (auto& pool : pools) std::shuffle(pool.begin(), pool.end(), rng);
  const int classes = data.num_classes();
  std::vector<std::int64_t> remaining(static_cast<std::size_t>(classes));
  for (int c = 0; c < classes; ++c) remaining[static_cast<std::size_t>(c)] = static_cast<std::int64_t>(pools[static_cast<std::size_t>(c)].size());
  std::vector<std::size_t> cursor(static_cast<std::size_t>(classes), 0);

  std::vector<std::vector<std::size_t>> assignments(static_cast<std::size_t>(num_clients));
  std::int64_t reassigned = 0;
  for (auto& client : assignments) {
    const Eigen::VectorXd p = sample_dirichlet(classes, alpha, rng);
    std::vector<std::int64_t> take = largest_remainder(p, records_per_client);
    std::int64_t deficit = 0;
    for (std::size_t c = 0; c < take.size(); ++c) {
      const auto granted = std::min(take[c], remaining[c]);
      deficit += take[c] - granted;
      take[c] = granted;
      remaining[c] -= granted;
    }
    while (deficit > 0) {
      const auto richest = static_cast<std::size_t>(
          std::max_element(remaining.begin(), remaining.end()) - remaining.begin());
      if (remaining[richest] == 0) break;
      const auto extra = std::min(deficit, remaining[richest]);
      take[richest] += extra;
      remaining[richest] -= extra;
      deficit -= extra;
      reassigned += extra;
    }
    for (std::size_t c = 0; c < take.size(); ++c) {
      const auto& pool = pools[c];
      client.insert(client.end(), pool.begin() + static_cast<std::ptrdiff_t>(cursor[c]),
                    pool.begin() + static_cast<std::ptrdiff_t>(cursor[c] + static_cast<std::size_t>(take[c])));
      cursor[c] += static_cast<std::size_t>(take[c]);
    }
  }
  auto plan = make_plan(std::move(assignments), data);
  plan.reassigned = reassigned;
  return plan;
}

std::string export_heatmap(const DistributionPlan& plan) {
  std::ostringstream out;
  const auto& h = plan.label_histogram;
  for (Eigen::Index c = 0; c < h.cols(); ++c) out << (c ? "," : "") << "label_" << c;
  out << '\n';
  for (Eigen::Index k = 0; k < h.rows(); ++k) {
    for (Eigen::Index c = 0; c < h.cols(); ++c) out << (c ? "," : "") << h(k, c);
    out << '\n';
  }
  return out.str();
}

}  // namespace fedsim
