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

#include <cmath>
#include <random>

#include "fedsim/data.hpp"
#include "fedsim/errors.hpp"
#include "fedsim/model.hpp"

using namespace fedsim;

namespace {

ParamVector random_params(const ModelSpec& spec, std::mt19937_64& rng, double scale = 0.5) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::VectorXd v(spec.param_count());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
  return {v, spec.layer_shapes()};
}

// Independent logistic-regression gradient: explicit loops over the
// column-major (classes x (d+1)) layout, bias in the last column.
Eigen::VectorXd hand_gradient(const Eigen::VectorXd& w, const Eigen::MatrixXd& x, const std::vector<int>& y,
                              int classes) {
  const auto n = x.rows();
  const auto d = x.cols();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(w.size());
  auto at = [&](Eigen::Index c, Eigen::Index j) { return w[j * classes + c]; };
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> z(static_cast<std::size_t>(classes));
    double zmax = -1e300;
    for (int c = 0; c < classes; ++c) {
      double s = at(c, d);
      for (Eigen::Index j = 0; j < d; ++j) s += at(c, j) * x(i, j);
      z[static_cast<std::size_t>(c)] = s;
      zmax = std::max(zmax, s);
    }
    double denom = 0.0;
    for (double& s : z) denom += std::exp(s - zmax);
    for (int c = 0; c < classes; ++c) {
      const double p = std::exp(z[static_cast<std::size_t>(c)] - zmax) / denom;
      const double delta = (p - (y[static_cast<std::size_t>(i)] == c ? 1.0 : 0.0)) / static_cast<double>(n);
      for (Eigen::Index j = 0; j < d; ++j) g[j * classes + c] += delta * x(i, j);
      g[d * classes + c] += delta;
    }
  }
  return g;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("parameter counts follow the layer shapes") {
    CHECK(init_params(ModelSpec::logistic_regression(784, 10), 0).size() == 7850);
    CHECK(init_params(ModelSpec::mlp(4, {5}, 3), 1).size() == 43);
    const auto shapes = ModelSpec::mlp(4, {5}, 3).layer_shapes();
    REQUIRE(shapes.size() == 2);
    CHECK(shapes[0] == LayerShape{5, 5});
    CHECK(shapes[1] == LayerShape{3, 6});
  }

  TEST_CASE("init_params is deterministic, small and has zero biases") {
    const auto spec = ModelSpec::mlp(6, {4, 3}, 5);
    const auto a = init_params(spec, 7);
    const auto b = init_params(spec, 7);
    CHECK(a == b);
    CHECK_FALSE(a == init_params(spec, 8));
    CHECK(a.values().cwiseAbs().maxCoeff() <= 0.05);
    for (std::size_t l = 0; l < a.num_layers(); ++l) {
      const auto layer = a.layer(l);
      CHECK(layer.col(layer.cols() - 1).isZero(0.0));
    }
  }

  TEST_CASE("ParamVector rejects bad lengths and non-finite values") {
    const auto shape = ModelSpec::logistic_regression(2, 2).layer_shapes();
    CHECK_THROWS_AS(ParamVector(Eigen::VectorXd::Zero(5), shape), ShapeError);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(6);
    v[3] = std::nan("");
    CHECK_THROWS_AS(ParamVector(v, shape), ArgumentError);
    v[3] = INFINITY;
    CHECK_THROWS_AS(ParamVector(v, shape), ArgumentError);
  }

  TEST_CASE("forward with zero parameters is uniform") {
    const auto spec = ModelSpec::logistic_regression(3, 10);
    const ParamVector zero(Eigen::VectorXd::Zero(spec.param_count()), spec.layer_shapes());
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 3);
    const auto p = forward(zero, spec, x);
    CHECK(p.rows() == 4);
    CHECK(((p.array() - 0.1).abs() < 1e-15).all());
  }

  TEST_CASE("forward follows the dominant logit") {
    const auto spec = ModelSpec::logistic_regression(2, 4);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(spec.param_count());
    v[2 * 4 + 2] = 10.0;  // bias of class 2
    const ParamVector params(v, spec.layer_shapes());
    Eigen::MatrixXd x(1, 2);
    x << 0.3, -0.7;
    Eigen::Index arg = 0;
    forward(params, spec, x).row(0).maxCoeff(&arg);
    CHECK(arg == 2);
  }

  TEST_CASE("forward rows are probability vectors") {
    std::mt19937_64 rng(11);
    const ModelSpec specs[] = {ModelSpec::logistic_regression(5, 3), ModelSpec::mlp(5, {7}, 4),
                               ModelSpec::mlp(5, {6, 3}, 2)};
    for (int trial = 0; trial < 100; ++trial) {
      const auto& spec = specs[trial % 3];
      const auto params = random_params(spec, rng, 2.0);
      const Eigen::MatrixXd x = 3.0 * Eigen::MatrixXd::Random(8, 5);
      const auto p = forward(params, spec, x);
      CHECK(((p.rowwise().sum().array() - 1.0).abs() <= 1e-9).all());
      CHECK((p.array() > 0.0).all());
      CHECK((p.array() < 1.0).all());
    }
  }

  TEST_CASE("forward rejects a feature width mismatch") {
    const auto spec = ModelSpec::logistic_regression(3, 2);
    CHECK_THROWS_AS(forward(init_params(spec, 0), spec, Eigen::MatrixXd::Zero(2, 4)), ShapeError);
  }

  TEST_CASE("analytic gradient matches central finite differences") {
    std::mt19937_64 rng(2024);
    const ModelSpec specs[] = {ModelSpec::logistic_regression(4, 3), ModelSpec::mlp(3, {5}, 4),
                               ModelSpec::mlp(4, {3, 4}, 3), ModelSpec::logistic_regression(6, 2)};
    int cases = 0;
    for (int trial = 0; trial < 24; ++trial, ++cases) {
      const auto& spec = specs[trial % 4];
      const auto params = random_params(spec, rng);
      const Eigen::MatrixXd x = Eigen::MatrixXd::Random(1, spec.input_dim);
      const std::vector<int> y{std::uniform_int_distribution<int>(0, static_cast<int>(spec.num_classes) - 1)(rng)};
      const auto [value, grad] = loss_and_gradient(params, spec, x, y);
      CHECK(value == doctest::Approx(loss(params, spec, x, y)).epsilon(1e-14));

      Eigen::VectorXd numeric(grad.size());
      const double h = 1e-6;
      for (Eigen::Index i = 0; i < grad.size(); ++i) {
        Eigen::VectorXd plus = params.values(), minus = params.values();
        plus[i] += h;
        minus[i] -= h;
        numeric[i] = (loss(ParamVector(plus, params.shape()), spec, x, y) -
                      loss(ParamVector(minus, params.shape()), spec, x, y)) / (2 * h);
      }
      const double rel = (grad - numeric).norm() / std::max({grad.norm(), numeric.norm(), 1e-12});
      CHECK(rel <= 1e-5);
    }
    CHECK(cases >= 20);
  }

  TEST_CASE("full-batch step matches the hand-coded gradient oracle and lowers the loss") {
    Eigen::MatrixXd x(2, 2);
    x << 1.0, 2.0, -1.5, -0.5;
    const std::vector<int> y{0, 1};
    const DataContainer data(x, y, 2);
    const auto spec = ModelSpec::logistic_regression(2, 2);
    const auto start = init_params(spec, 3);
    const TrainConfig cfg{1, std::nullopt, 0.5};

    const auto result = train(start, spec, data, cfg, 99);
    const Eigen::VectorXd expected = start.values() - 0.5 * hand_gradient(start.values(), x, y, 2);
    CHECK((result.params.values() - expected).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(result.sample_count == 2);
    CHECK(loss(result.params, spec, x, y) < loss(start, spec, x, y));
  }

  TEST_CASE("zero learning rate leaves parameters untouched") {
    const auto data = generate_synthetic(3, 10, 4, 5);
    const auto spec = ModelSpec::mlp(4, {3}, 3);
    const auto start = init_params(spec, 1);
    const auto result = train(start, spec, data, {3, 4, 0.0}, 17);
    CHECK(result.params == start);
  }

  TEST_CASE("train is deterministic and does not modify its input") {
    const auto data = generate_synthetic(4, 25, 5, 8);
    const auto spec = ModelSpec::mlp(5, {6}, 4);
    const auto start = init_params(spec, 2);
    const auto copy = start;
    const TrainConfig cfg{3, 7, 0.2};
    const auto a = train(start, spec, data, cfg, 123);
    const auto b = train(start, spec, data, cfg, 123);
    CHECK(a.params == b.params);
    CHECK(start == copy);
    CHECK_FALSE(train(start, spec, data, cfg, 124).params == a.params);
  }

  TEST_CASE("small full-batch steps never increase a convex loss") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      const auto data = generate_synthetic(3, 20, 4, 100 + static_cast<std::uint64_t>(trial), 1.0);
      const auto spec = ModelSpec::logistic_regression(4, 3);
      const auto start = random_params(spec, rng);
      const auto next = train(start, spec, data, {1, std::nullopt, 1e-3}, 0).params;
      CHECK(loss(next, spec, data.features(), data.labels()) <= loss(start, spec, data.features(), data.labels()));
    }
  }

  TEST_CASE("train rejects an empty container") {
    const auto spec = ModelSpec::logistic_regression(2, 2);
    const DataContainer empty(Eigen::MatrixXd(0, 2), {}, 2);
    CHECK_THROWS_AS(train(init_params(spec, 0), spec, empty, {}, 0), EmptyDatasetError);
    CHECK_THROWS_AS(evaluate(init_params(spec, 0), spec, empty), EmptyDatasetError);
  }

  TEST_CASE("evaluate: perfect classifier and uniform predictor") {
    const auto data = generate_synthetic(10, 30, 10, 4);
    const auto spec = ModelSpec::logistic_regression(10, 10);

    const ParamVector zero(Eigen::VectorXd::Zero(spec.param_count()), spec.layer_shapes());
    const auto uniform = evaluate(zero, spec, data);
    CHECK(uniform.accuracy == doctest::Approx(0.1));
    CHECK(uniform.loss == doctest::Approx(std::log(10.0)).epsilon(1e-12));
    CHECK(uniform.sample_count == data.size());

    // Features one-hot on the label: a large identity weight classifies every row.
    Eigen::MatrixXd x = Eigen::MatrixXd::Identity(10, 10);
    std::vector<int> y(10);
    for (int i = 0; i < 10; ++i) y[static_cast<std::size_t>(i)] = i;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(spec.param_count());
    for (int c = 0; c < 10; ++c) v[c * 10 + c] = 20.0;
    const auto m = evaluate(ParamVector(v, spec.layer_shapes()), spec, DataContainer(x, y, 10));
    CHECK(m.accuracy == 1.0);
    CHECK(m.loss < 1e-6);
  }
}
