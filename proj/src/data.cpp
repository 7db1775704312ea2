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

#include "fedsim/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>
#include <string>

#include "fedsim/errors.hpp"
#include "fedsim/random.hpp"

namespace fedsim {

DataContainer::DataContainer(Eigen::MatrixXd features, std::vector<int> labels, int num_classes)
    : features_(std::move(features)), labels_(std::move(labels)), num_classes_(num_classes) {
  if (features_.rows() != static_cast<Eigen::Index>(labels_.size())) {
    throw ShapeError("feature rows (" + std::to_string(features_.rows()) + ") != label count (" +
                     std::to_string(labels_.size()) + ")");
  }
  int max_label = -1;
  for (int y : labels_) {
    if (y < 0) throw ArgumentError("negative label " + std::to_string(y));
    max_label = std::max(max_label, y);
  }
  if (num_classes_ == 0) num_classes_ = max_label + 1;
  if (max_label >= num_classes_) {
    throw ArgumentError("label " + std::to_string(max_label) + " outside [0, " +
                        std::to_string(num_classes_) + ")");
  }
}

DataContainer DataContainer::subset(std::span<const std::size_t> indices) const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(indices.size()), dim());
  std::vector<int> y(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= labels_.size()) throw ArgumentError("subset index out of range");
    x.row(static_cast<Eigen::Index>(i)) = features_.row(static_cast<Eigen::Index>(indices[i]));
    y[i] = labels_[indices[i]];
  }
  return {std::move(x), std::move(y), num_classes_};
}

std::vector<std::int64_t> DataContainer::label_counts() const {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(num_classes_), 0);
  for (int y : labels_) ++counts[static_cast<std::size_t>(y)];
  return counts;
}

DataContainer generate_synthetic(int num_classes, int per_class, int dim, std::uint64_t seed,
                                 double separation) {
  if (num_classes <= 0 || per_class <= 0 || dim <= 0) {
    throw ArgumentError("generate_synthetic: all sizes must be positive");
  }
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(num_classes, dim);
  for (int c = 0; c < num_classes; ++c) {
    if (c < dim) {
      means(c, c) = separation;
      continue;
    }
    Eigen::VectorXd dir(dim);
    for (int j = 0; j < dim; ++j) dir[j] = normal(rng);
    means.row(c) = separation * dir.normalized().transpose();
  }

  const Eigen::Index n = static_cast<Eigen::Index>(num_classes) * per_class;
  Eigen::MatrixXd x(n, dim);
  std::vector<int> y(static_cast<std::size_t>(n));
  Eigen::Index row = 0;
  for (int c = 0; c < num_classes; ++c) {
    for (int i = 0; i < per_class; ++i, ++row) {
      for (int j = 0; j < dim; ++j) x(row, j) = means(c, j) + normal(rng);
      y[static_cast<std::size_t>(row)] = c;
    }
  }
  return {std::move(x), std::move(y), num_classes};
}

namespace {

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset,
                        const std::filesystem::path& path) {
  if (bytes.size() < offset + 4) throw FormatError(path.string() + ": truncated IDX header");
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

constexpr std::uint32_t kIdxImages = 0x00000803;
constexpr std::uint32_t kIdxLabels = 0x00000801;

}  // namespace

DataContainer load_idx(const std::filesystem::path& images_path,
                       const std::filesystem::path& labels_path) {
  const auto images = read_bytes(images_path);
  const auto labels = read_bytes(labels_path);

  if (read_be32(images, 0, images_path) != kIdxImages) {
    throw FormatError(images_path.string() + ": bad IDX image magic");
  }
  if (read_be32(labels, 0, labels_path) != kIdxLabels) {
    throw FormatError(labels_path.string() + ": bad IDX label magic");
  }
  const std::size_t n = read_be32(images, 4, images_path);
  const std::size_t rows = read_be32(images, 8, images_path);
  const std::size_t cols = read_be32(images, 12, images_path);
  const std::size_t n_labels = read_be32(labels, 4, labels_path);
  if (n != n_labels) {
    throw FormatError("IDX count mismatch: " + std::to_string(n) + " images vs " +
                      std::to_string(n_labels) + " labels");
  }
  const std::size_t d = rows * cols;
  if (images.size() != 16 + n * d) throw FormatError(images_path.string() + ": truncated or oversized IDX body");
  if (labels.size() != 8 + n) throw FormatError(labels_path.string() + ": truncated or oversized IDX body");

  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = images[16 + i * d + j] / 255.0;
    }
    y[i] = labels[8 + i];
  }
  return {std::move(x), std::move(y)};
}

DataContainer load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": missing header row");
  const auto width = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (width < 2) throw FormatError(path.string() + ": need at least one feature and a label");

  std::vector<double> values;
  std::vector<int> y;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
    }
    if (row.size() != width) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(width) + " columns");
    }
    const double label = row.back();
    if (label < 0 || label != std::floor(label)) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": label must be a non-negative integer");
    }
    y.push_back(static_cast<int>(label));
    values.insert(values.end(), row.begin(), row.end() - 1);
  }
  const auto n = static_cast<Eigen::Index>(y.size());
  const auto d = static_cast<Eigen::Index>(width - 1);
  Eigen::MatrixXd x = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), n, d);
  return {std::move(x), std::move(y)};
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(Eigen::Index n,
                                                                            double test_fraction,
                                                                            std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ArgumentError("test_fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
  std::vector<std::size_t> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

std::pair<DataContainer, DataContainer> train_test_split(const DataContainer& data,
                                                         double test_fraction, std::uint64_t seed) {
  auto [train, test] = split_indices(data.size(), test_fraction, seed);
  return {data.subset(train), data.subset(test)};
}

}  // namespace fedsim
