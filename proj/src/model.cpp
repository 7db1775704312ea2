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

#include "fedsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fedsim/data.hpp"
#include "fedsim/errors.hpp"
#include "fedsim/random.hpp"

namespace fedsim {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void check_params(const ParamVector& params, const ModelSpec& spec) {
  if (params.shape() != spec.layer_shapes()) {
    throw ShapeError("parameter shape does not match the model spec");
  }
}

void check_features(const ModelSpec& spec, Index cols) {
  if (cols != spec.input_dim) {
    throw ShapeError("feature width " + std::to_string(cols) + " != model input_dim " +
                     std::to_string(spec.input_dim));
  }
}

void check_labels(const ModelSpec& spec, const std::vector<int>& labels, Index rows) {
  if (static_cast<Index>(labels.size()) != rows) {
    throw ShapeError("label count does not match feature rows");
  }
  for (int y : labels) {
    if (y < 0 || y >= spec.num_classes) {
      throw ArgumentError("label " + std::to_string(y) + " outside [0, num_classes)");
    }
  }
}

// Affine map of one layer: A * W^T + 1 b^T.
MatrixXd affine(const Eigen::Map<const MatrixXd>& layer, const Eigen::Ref<const MatrixXd>& input) {
  const Index in = layer.cols() - 1;
  MatrixXd z = input * layer.leftCols(in).transpose();
  z.rowwise() += layer.col(in).transpose();
  return z;
}

// Row-wise log-softmax, in place.
void log_softmax_rows(MatrixXd& z) {
  VectorXd row_max = z.rowwise().maxCoeff();
  z.colwise() -= row_max;
  VectorXd lse = z.array().exp().rowwise().sum().log().matrix();
  z.colwise() -= lse;
}

// Forward pass keeping every layer input. activations[0] is the feature
// matrix; the returned matrix holds output log-probabilities.
MatrixXd forward_pass(const ParamVector& params, const Eigen::Ref<const MatrixXd>& features,
                      std::vector<MatrixXd>* activations) {
  MatrixXd a = features;
  const std::size_t last = params.num_layers() - 1;
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    MatrixXd z = affine(params.layer(l), a);
    if (activations != nullptr) activations->push_back(std::move(a));
    if (l == last) {
      log_softmax_rows(z);
      return z;
    }
    a = z.array().tanh().matrix();
  }
  return a;
}

double mean_cross_entropy(const MatrixXd& log_probs, const std::vector<int>& labels) {
  double total = 0.0;
  for (Index i = 0; i < log_probs.rows(); ++i) total -= log_probs(i, labels[static_cast<std::size_t>(i)]);
  return total / static_cast<double>(log_probs.rows());
}

std::vector<Index> layer_offsets(const std::vector<LayerShape>& shape) {
  std::vector<Index> offsets(shape.size() + 1, 0);
  for (std::size_t l = 0; l < shape.size(); ++l) offsets[l + 1] = offsets[l] + shape[l].size();
  return offsets;
}

}  // namespace

void ModelSpec::validate() const {
  if (input_dim <= 0) throw ArgumentError("model.input_dim must be positive");
  if (num_classes < 2) throw ArgumentError("model.num_classes must be >= 2");
  if (kind == ModelKind::kLogisticRegression && !hidden_dims.empty()) {
    throw ArgumentError("logistic regression takes no hidden layers");
  }
  if (kind == ModelKind::kMLP && hidden_dims.empty()) {
    throw ArgumentError("MLP needs at least one hidden layer");
  }
  for (Index h : hidden_dims) {
    if (h <= 0) throw ArgumentError("model.hidden_dims entries must be positive");
  }
}

std::vector<LayerShape> ModelSpec::layer_shapes() const {
  std::vector<LayerShape> shapes;
  Index in = input_dim;
  for (Index h : hidden_dims) {
    shapes.push_back({h, in + 1});
    in = h;
  }
  shapes.push_back({num_classes, in + 1});
  return shapes;
}

Index ModelSpec::param_count() const {
  Index n = 0;
  for (const auto& s : layer_shapes()) n += s.size();
  return n;
}

ParamVector::ParamVector(Eigen::VectorXd values, std::vector<LayerShape> shape)
    : values_(std::move(values)), shape_(std::move(shape)) {
  Index expected = 0;
  for (const auto& s : shape_) {
    if (s.rows <= 0 || s.cols <= 0) throw ShapeError("layer dimensions must be positive");
    expected += s.size();
  }
  if (expected != values_.size()) {
    throw ShapeError("parameter length " + std::to_string(values_.size()) +
                     " does not match shape total " + std::to_string(expected));
  }
  if (!values_.allFinite()) throw ArgumentError("parameter vector contains non-finite values");
}

Eigen::Map<const Eigen::MatrixXd> ParamVector::layer(std::size_t l) const {
  Index offset = 0;
  for (std::size_t i = 0; i < l; ++i) offset += shape_[i].size();
  return {values_.data() + offset, shape_.at(l).rows, shape_.at(l).cols};
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ArgumentError("train.epochs must be >= 1");
  if (batch_size && *batch_size < 1) throw ArgumentError("train.batch_size must be >= 1");
  if (!(learning_rate >= 0.0 && learning_rate <= 1.0)) {
    throw ArgumentError("train.learning_rate must lie in [0, 1]");
  }
}

ParamVector init_params(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  const auto shapes = spec.layer_shapes();
  Eigen::VectorXd values = Eigen::VectorXd::Zero(spec.param_count());
  Rng rng(seed);
  std::uniform_real_distribution<double> uniform(-0.05, 0.05);
  Index offset = 0;
  for (const auto& s : shapes) {
    // Column-major block: the first (cols - 1) columns are weights.
    const Index weights = s.rows * (s.cols - 1);
    for (Index i = 0; i < weights; ++i) values[offset + i] = uniform(rng);
    offset += s.size();
  }
  return {std::move(values), shapes};
}

Eigen::MatrixXd forward(const ParamVector& params, const ModelSpec& spec,
                        const Eigen::Ref<const Eigen::MatrixXd>& features) {
  check_params(params, spec);
  check_features(spec, features.cols());
  return forward_pass(params, features, nullptr).array().exp().matrix();
}

double loss(const ParamVector& params, const ModelSpec& spec,
            const Eigen::Ref<const Eigen::MatrixXd>& features, const std::vector<int>& labels) {
  check_params(params, spec);
  check_features(spec, features.cols());
  check_labels(spec, labels, features.rows());
  if (features.rows() == 0) throw EmptyDatasetError("loss of an empty batch");
  return mean_cross_entropy(forward_pass(params, features, nullptr), labels);
}

std::pair<double, Eigen::VectorXd> loss_and_gradient(const ParamVector& params, const ModelSpec& spec,
                                                      const Eigen::Ref<const Eigen::MatrixXd>& features,
                                                      const std::vector<int>& labels) {
  check_params(params, spec);
  check_features(spec, features.cols());
  check_labels(spec, labels, features.rows());
  const Index n = features.rows();
  if (n == 0) throw EmptyDatasetError("gradient of an empty batch");

  std::vector<MatrixXd> inputs;
  inputs.reserve(params.num_layers());
  MatrixXd log_probs = forward_pass(params, features, &inputs);
  const double value = mean_cross_entropy(log_probs, labels);

  // dL/dZ at the output: (softmax - onehot) / n.
  MatrixXd dz = log_probs.array().exp().matrix();
  for (Index i = 0; i < n; ++i) dz(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
  dz /= static_cast<double>(n);

  Eigen::VectorXd grad(params.size());
  const auto offsets = layer_offsets(params.shape());
  for (std::size_t l = params.num_layers(); l-- > 0;) {
    const auto& s = params.shape()[l];
    const Index in = s.cols - 1;
    Eigen::Map<MatrixXd> g(grad.data() + offsets[l], s.rows, s.cols);
    g.leftCols(in).noalias() = dz.transpose() * inputs[l];
    g.col(in) = dz.colwise().sum().transpose();
    if (l > 0) {
      MatrixXd da = dz * params.layer(l).leftCols(in);
      dz = da.array() * (1.0 - inputs[l].array().square());
    }
  }
  return {value, std::move(grad)};
}

TrainResult train(const ParamVector& params, const ModelSpec& spec, const DataContainer& data,
                  const TrainConfig& cfg, std::uint64_t seed) {
  check_params(params, spec);
  cfg.validate();
  if (data.empty()) throw EmptyDatasetError("cannot train on an empty container");
  check_features(spec, data.dim());

  const Index n = data.size();
  const Index batch = std::min(cfg.batch_size.value_or(n), n);
  Eigen::VectorXd values = params.values();
  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);

  Eigen::MatrixXd batch_x;
  std::vector<int> batch_y;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (batch == n) {
      // Full batch: the order of rows only perturbs summation order.
      ParamVector current(values, params.shape());
      auto [value, grad] = loss_and_gradient(current, spec, data.features(), data.labels());
      values -= cfg.learning_rate * grad;
      continue;
    }
    std::shuffle(order.begin(), order.end(), rng);
    for (Index start = 0; start < n; start += batch) {
      const Index len = std::min(batch, n - start);
      batch_x.resize(len, data.dim());
      batch_y.resize(static_cast<std::size_t>(len));
      for (Index i = 0; i < len; ++i) {
        const auto row = order[static_cast<std::size_t>(start + i)];
        batch_x.row(i) = data.features().row(static_cast<Index>(row));
        batch_y[static_cast<std::size_t>(i)] = data.labels()[row];
      }
      ParamVector current(values, params.shape());
      auto [value, grad] = loss_and_gradient(current, spec, batch_x, batch_y);
      values -= cfg.learning_rate * grad;
    }
  }
  return {ParamVector(std::move(values), params.shape()), static_cast<std::int64_t>(n)};
}

Metrics evaluate(const ParamVector& params, const ModelSpec& spec, const DataContainer& data) {
  check_params(params, spec);
  if (data.empty()) throw EmptyDatasetError("cannot evaluate on an empty container");
  check_features(spec, data.dim());
  check_labels(spec, data.labels(), data.size());

  const MatrixXd log_probs = forward_pass(params, data.features(), nullptr);
  std::int64_t correct = 0;
  for (Index i = 0; i < log_probs.rows(); ++i) {
    Index best = 0;
    for (Index c = 1; c < log_probs.cols(); ++c) {
      if (log_probs(i, c) > log_probs(i, best)) best = c;
    }
    if (best == data.labels()[static_cast<std::size_t>(i)]) ++correct;
  }
  Metrics m;
  m.sample_count = data.size();
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.sample_count);
  m.loss = mean_cross_entropy(log_probs, data.labels());
  return m;
}

}  // namespace fedsim
