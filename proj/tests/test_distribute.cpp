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

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "fedsim/distribute.hpp"
#include "fedsim/errors.hpp"
#include "test_util.hpp"

using namespace fedsim;
using fedsim::testing::labels_only;

namespace {

std::set<int> label_set(const DistributionPlan& plan, std::size_t k) {
  std::set<int> s;
  for (Eigen::Index c = 0; c < plan.label_histogram.cols(); ++c) {
    if (plan.label_histogram(static_cast<Eigen::Index>(k), c) > 0) s.insert(static_cast<int>(c));
  }
  return s;
}

// Uneven label supply so that remainders and exhaustion paths are exercised.
DataContainer uneven(int classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> y;
  for (int c = 0; c < classes; ++c) {
    y.insert(y.end(), static_cast<std::size_t>(std::uniform_int_distribution<int>(40, 160)(rng)), c);
  }
  std::shuffle(y.begin(), y.end(), rng);
  return {Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(y.size()), 1), std::move(y), classes};
}

}  // namespace

TEST_SUITE("distribute") {
  TEST_CASE("validator catches overlap, range and histogram faults") {
    const auto data = labels_only(2, 3);
    auto plan = make_plan({{0, 1}, {3, 4}}, data);
    CHECK(validate_plan(plan, data).empty());
    auto overlap = make_plan({{0, 1}, {1, 4}}, data);
    CHECK_FALSE(validate_plan(overlap, data).empty());
    plan.label_histogram(0, 0) += 1;
    CHECK_FALSE(validate_plan(plan, data).empty());
    DistributionPlan bad{{{0}, {99}}, Eigen::MatrixXi::Zero(2, 2), 0};
    CHECK_FALSE(validate_plan(bad, data).empty());
    CHECK_THROWS_AS(make_plan({{99}}, data), ArgumentError);
  }

  TEST_CASE("shard: 60k records in 300-record shards") {
    const auto data = labels_only(10, 6000);
    const auto s2 = distribute_shard(data, 300, 2, 1);
    CHECK(s2.num_clients() == 100);
    const auto s5 = distribute_shard(data, 300, 5, 1);
    CHECK(s5.num_clients() == 40);
    for (const auto* plan : {&s2, &s5}) {
      CHECK(validate_plan(*plan, data).empty());
      const auto per = plan == &s2 ? 2 : 5;
      for (std::size_t k = 0; k < plan->num_clients(); ++k) {
        CHECK(plan->assignments[k].size() == static_cast<std::size_t>(300 * per));
        CHECK(plan->distinct_labels(k) <= per);
      }
    }
  }

  TEST_CASE("shard: degenerate and error cases") {
    const auto one = labels_only(1, 10);
    const auto plan = distribute_shard(one, 10, 1, 0);
    REQUIRE(plan.num_clients() == 1);
    CHECK(plan.assignments[0].size() == 10);

    // Tails shorter than a shard are dropped per label.
    const auto data = labels_only(3, 25);
    const auto p = distribute_shard(data, 10, 2, 0);
    CHECK(p.num_clients() == 3);
    CHECK(validate_plan(p, data).empty());

    CHECK_THROWS_AS(distribute_shard(one, 10, 2, 0), InsufficientDataError);
    CHECK_THROWS_AS(distribute_shard(one, 0, 1, 0), ArgumentError);
  }

  TEST_CASE("label: IID and single-label layouts over 20 clients of 600") {
    const auto data = labels_only(10, 1200);
    const auto iid = distribute_label(data, 10, 600, 20, 3);
    CHECK(validate_plan(iid, data).empty());
    CHECK((iid.label_histogram.array() == 60).all());

    const auto single = distribute_label(data, 1, 600, 20, 3);
    CHECK(validate_plan(single, data).empty());
    for (std::size_t k = 0; k < 20; ++k) {
      CHECK(single.distinct_labels(k) == 1);
      CHECK(single.label_histogram.row(static_cast<Eigen::Index>(k)).maxCoeff() == 600);
    }
  }

  TEST_CASE("label: one client taking a whole label") {
    const auto data = uneven(4, 7);
    const auto counts = data.label_counts();
    // The first label in the shuffled order is unknown up front; try each size.
    bool matched = false;
    for (int c = 0; c < 4; ++c) {
      try {
        const auto plan = distribute_label(data, 1, static_cast<int>(counts[static_cast<std::size_t>(c)]), 1, 11);
        auto got = plan.assignments[0];
        std::sort(got.begin(), got.end());
        const int label = data.labels()[got[0]];
        std::vector<std::size_t> expected;
        for (std::size_t i = 0; i < data.labels().size(); ++i) {
          if (data.labels()[i] == label) expected.push_back(i);
        }
        if (expected.size() == got.size()) {
          CHECK(got == expected);
          matched = true;
        }
      } catch (const InsufficientDataError&) {
      }
    }
    CHECK(matched);
  }

  TEST_CASE("label: supply errors name the label") {
    const auto data = labels_only(3, 10);
    try {
      distribute_label(data, 1, 10, 4, 0);
      FAIL("expected InsufficientDataError");
    } catch (const InsufficientDataError& e) {
      CHECK(std::string(e.what()).find("label ") != std::string::npos);
    }
    CHECK_THROWS_AS(distribute_label(data, 4, 10, 1, 0), ArgumentError);
  }

  TEST_CASE("unique: one client per label") {
    const auto data = labels_only(10, 30);
    const auto plan = distribute_unique(data, std::nullopt, 0);
    CHECK(plan.num_clients() == 10);
    CHECK(validate_plan(plan, data).empty());
    for (std::size_t i = 0; i < 10; ++i) {
      CHECK(plan.distinct_labels(i) == 1);
      for (std::size_t j = i + 1; j < 10; ++j) {
        const auto a = label_set(plan, i), b = label_set(plan, j);
        std::vector<int> common;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
        CHECK(common.empty());
      }
    }

    const auto small = distribute_unique(labels_only(2, 5), std::nullopt, 0);
    REQUIRE(small.num_clients() == 2);
    CHECK(small.assignments[0].size() == 5);
    CHECK(small.assignments[1].size() == 5);

    const auto sampled = distribute_unique(data, 12, 4);
    CHECK(validate_plan(sampled, data).empty());
    for (const auto& a : sampled.assignments) CHECK(a.size() == 12);
    CHECK_THROWS_AS(distribute_unique(data, 31, 0), InsufficientDataError);
  }

  TEST_CASE("largest remainder rounding") {
    Eigen::VectorXd p(2);
    p << 0.1, 0.9;
    CHECK(largest_remainder(p, 600) == std::vector<std::int64_t>{60, 540});
    p << 0.85, 0.15;
    CHECK(largest_remainder(p, 600) == std::vector<std::int64_t>{510, 90});
    Eigen::VectorXd thirds = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
    CHECK(largest_remainder(thirds, 10) == std::vector<std::int64_t>{4, 3, 3});

    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
      const auto q = sample_dirichlet(10, 0.3 + trial * 0.05, rng());
      CHECK(q.sum() == doctest::Approx(1.0).epsilon(1e-12));
      const auto counts = largest_remainder(q, 777);
      CHECK(std::accumulate(counts.begin(), counts.end(), std::int64_t{0}) == 777);
      for (std::size_t c = 0; c < counts.size(); ++c) {
        CHECK(std::abs(static_cast<double>(counts[c]) - q[static_cast<Eigen::Index>(c)] * 777) < 1.0);
      }
    }
  }

  TEST_CASE("dirichlet: totals, supply limits and concentration") {
    const auto data = labels_only(10, 1200);
    const auto plan = distribute_dirichlet(data, 0.5, 20, 600, 5);
    CHECK(validate_plan(plan, data).empty());
    for (const auto& a : plan.assignments) CHECK(a.size() == 600);

    // Supply pressure forces reassignment but still fills every client.
    const auto tight = distribute_dirichlet(labels_only(4, 100), 0.2, 8, 50, 1);
    CHECK(validate_plan(tight, labels_only(4, 100)).empty());
    for (const auto& a : tight.assignments) CHECK(a.size() == 50);

    CHECK_THROWS_AS(distribute_dirichlet(data, 1.0, 21, 600, 0), InsufficientDataError);
    CHECK_THROWS_AS(distribute_dirichlet(data, 0.0, 2, 6, 0), ArgumentError);
  }

  TEST_CASE("dirichlet: concentration controls label coverage") {
    const auto data = labels_only(10, 2000);
    int wide_trials = 0;
    double mean_high = 0.0, mean_low = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto high = distribute_dirichlet(data, 10.0, 20, 600, seed);
      const auto low = distribute_dirichlet(data, 0.5, 20, 600, seed);
      bool all_wide = true;
      for (std::size_t k = 0; k < 20; ++k) {
        // Recount from raw labels rather than trusting the histogram.
        std::set<int> seen;
        for (auto i : high.assignments[k]) seen.insert(data.labels()[i]);
        all_wide = all_wide && seen.size() >= 8;
        mean_high += static_cast<double>(seen.size());
        seen.clear();
        for (auto i : low.assignments[k]) seen.insert(data.labels()[i]);
        mean_low += static_cast<double>(seen.size());
      }
      wide_trials += all_wide ? 1 : 0;
    }
    CHECK(wide_trials >= 95);
    CHECK(mean_low < mean_high);
  }

  TEST_CASE("heatmap export") {
    const auto data = labels_only(2, 3);
    const auto plan = distribute_unique(data, std::nullopt, 0);
    const auto csv = export_heatmap(plan);
    CHECK(csv == "label_0,label_1\n3,0\n0,3\n");
    CHECK(export_heatmap(plan) == csv);

    const auto big = distribute_dirichlet(labels_only(5, 100), 1.0, 6, 40, 2);
    std::istringstream lines(export_heatmap(big));
    std::string line;
    std::getline(lines, line);
    CHECK(line == "label_0,label_1,label_2,label_3,label_4");
    std::size_t k = 0;
    while (std::getline(lines, line)) {
      std::istringstream cells(line);
      std::string cell;
      long sum = 0;
      while (std::getline(cells, cell, ',')) sum += std::stol(cell);
      CHECK(sum == static_cast<long>(big.assignments[k++].size()));
    }
    CHECK(k == 6);
  }

  TEST_CASE("every distributor is valid and deterministic across seeds") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      const auto data = uneven(6, seed);
      const DistributionPlan plans[] = {
          distribute_shard(data, 20, 2, seed),
          distribute_label(data, 2, 40, 5, seed),
          distribute_unique(data, 30, seed),
          distribute_dirichlet(data, 0.7, 8, 50, seed),
      };
      for (const auto& plan : plans) CHECK(validate_plan(plan, data).empty());
      CHECK(distribute_dirichlet(data, 0.7, 8, 50, seed).assignments == plans[3].assignments);
      CHECK(distribute_label(data, 2, 40, 5, seed).assignments == plans[1].assignments);
      CHECK(distribute_shard(data, 20, 2, seed).assignments == plans[0].assignments);
      for (std::size_t k = 0; k < plans[1].num_clients(); ++k) CHECK(plans[1].distinct_labels(k) == 2);
    }
  }
}
