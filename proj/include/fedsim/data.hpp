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

#ifndef FEDSIM_DATA_HPP
#define FEDSIM_DATA_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

namespace fedsim {

/// Feature matrix plus integer labels in [0, num_classes).
class DataContainer {
 public:
  DataContainer() = default;
  /// `num_classes` of 0 infers max(label) + 1.
  DataContainer(Eigen::MatrixXd features, std::vector<int> labels, int num_classes = 0);

  const Eigen::MatrixXd& features() const noexcept { return features_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  int num_classes() const noexcept { return num_classes_; }
  Eigen::Index size() const noexcept { return features_.rows(); }
  Eigen::Index dim() const noexcept { return features_.cols(); }
  bool empty() const noexcept { return size() == 0; }

  /// Rows in the given order; num_classes is preserved.
  DataContainer subset(std::span<const std::size_t> indices) const;

  /// Record count per label, length num_classes.
  std::vector<std::int64_t> label_counts() const;

 private:
  Eigen::MatrixXd features_;
  std::vector<int> labels_;
  int num_classes_ = 0;
};

/// Gaussian blobs with unit isotropic noise. Class c < dim is centred at
/// `separation * e_c`; further classes get seeded random directions of the
/// same norm.
DataContainer generate_synthetic(int num_classes, int per_class, int dim, std::uint64_t seed,
                                 double separation = 3.0);

/// MNIST-style IDX pair. Pixels are scaled to [0, 1].
DataContainer load_idx(const std::filesystem::path& images_path,
                       const std::filesystem::path& labels_path);

/// Numeric CSV with a header row; the last column is the integer label.
DataContainer load_csv(const std::filesystem::path& path);

/// Seeded shuffle then split. Returns (train, test); both keep source order.
std::pair<DataContainer, DataContainer> train_test_split(const DataContainer& data,
                                                         double test_fraction, std::uint64_t seed);

/// Index form of train_test_split, exposed for partition checks.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(Eigen::Index n,
                                                                            double test_fraction,
                                                                            std::uint64_t seed);

}  // namespace fedsim

#endif  // FEDSIM_DATA_HPP
