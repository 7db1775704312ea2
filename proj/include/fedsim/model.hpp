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

#ifndef FEDSIM_MODEL_HPP
#define FEDSIM_MODEL_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace fedsim {

class DataContainer;

using Index = Eigen::Index;

enum class ModelKind { kLogisticRegression, kMLP };

/// Dimensions of one dense layer. `cols` includes the trailing bias column.
struct LayerShape {
  Index rows = 0;
  Index cols = 0;

  Index size() const noexcept { return rows * cols; }
  friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

struct ModelSpec {
  ModelKind kind = ModelKind::kLogisticRegression;
  Index input_dim = 0;
  std::vector<Index> hidden_dims;
  Index num_classes = 2;

  static ModelSpec logistic_regression(Index input_dim, Index num_classes) {
    return {ModelKind::kLogisticRegression, input_dim, {}, num_classes};
  }
  static ModelSpec mlp(Index input_dim, std::vector<Index> hidden, Index num_classes) {
    return {ModelKind::kMLP, input_dim, std::move(hidden), num_classes};
  }

  /// Throws ArgumentError when the fields violate their ranges.
  void validate() const;

  std::vector<LayerShape> layer_shapes() const;
  Index param_count() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Flat model parameters plus the per-layer shape descriptor. Immutable once
/// constructed; the constructor rejects length mismatches and non-finite
/// values. Layer l occupies a contiguous column-major rows x cols block whose
/// last column holds the biases.
class ParamVector {
 public:
  ParamVector() = default;
  ParamVector(Eigen::VectorXd values, std::vector<LayerShape> shape);

  const Eigen::VectorXd& values() const noexcept { return values_; }
  const std::vector<LayerShape>& shape() const noexcept { return shape_; }
  Index size() const noexcept { return values_.size(); }
  std::size_t num_layers() const noexcept { return shape_.size(); }

  /// Read-only view of layer `l` as a rows x cols matrix.
  Eigen::Map<const Eigen::MatrixXd> layer(std::size_t l) const;

  bool same_shape(const ParamVector& other) const noexcept { return shape_ == other.shape_; }

  friend bool operator==(const ParamVector& a, const ParamVector& b) {
    return a.shape_ == b.shape_ && a.values_ == b.values_;
  }

 private:
  Eigen::VectorXd values_;
  std::vector<LayerShape> shape_;
};

struct TrainConfig {
  int epochs = 1;
  std::optional<Index> batch_size;  ///< empty: full batch
  double learning_rate = 0.1;

  /// Accepts learning_rate in [0, 1]; zero is allowed so that a frozen
  /// update can be requested explicitly.
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct Metrics {
  double accuracy = 0.0;
  double loss = 0.0;
  std::int64_t sample_count = 0;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// Weights uniform in [-0.05, 0.05], biases zero.
ParamVector init_params(const ModelSpec& spec, std::uint64_t seed);

/// Row-wise softmax class probabilities, N x num_classes.
Eigen::MatrixXd forward(const ParamVector& params, const ModelSpec& spec,
                        const Eigen::Ref<const Eigen::MatrixXd>& features);

/// Mean softmax cross-entropy over the rows and its gradient with respect to
/// the flat parameter vector.
std::pair<double, Eigen::VectorXd> loss_and_gradient(const ParamVector& params, const ModelSpec& spec,
                                                      const Eigen::Ref<const Eigen::MatrixXd>& features,
                                                      const std::vector<int>& labels);

/// Mean cross-entropy only.
double loss(const ParamVector& params, const ModelSpec& spec,
            const Eigen::Ref<const Eigen::MatrixXd>& features, const std::vector<int>& labels);

struct TrainResult {
  ParamVector params;
  std::int64_t sample_count = 0;
};

/// `cfg.epochs` passes of shuffled mini-batch SGD. The last short batch of
/// each epoch is kept. Pure in (params, spec, data, cfg, seed).
TrainResult train(const ParamVector& params, const ModelSpec& spec, const DataContainer& data,
                  const TrainConfig& cfg, std::uint64_t seed);

Metrics evaluate(const ParamVector& params, const ModelSpec& spec, const DataContainer& data);

}  // namespace fedsim

#endif  // FEDSIM_MODEL_HPP
