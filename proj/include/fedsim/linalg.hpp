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

#ifndef FEDSIM_LINALG_HPP
#define FEDSIM_LINALG_HPP

// Scalar-generic dense routines over row-per-sample matrices: K-Means and
// principal components. Header-only so any Eigen floating type works.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "fedsim/errors.hpp"
#include "fedsim/random.hpp"

namespace fedsim {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct KMeansResult {
  std::vector<Eigen::Index> assignments;
  MatrixX<Scalar> centroids;  ///< k x dim
  /// SSE after every assignment step and every refinement pass.
  std::vector<Scalar> sse_history;
  int iterations = 0;

  Scalar sse() const { return sse_history.empty() ? Scalar(0) : sse_history.back(); }
};

namespace detail {

template <typename Derived, typename Scalar = typename Derived::Scalar>
Eigen::Index nearest_centroid(const Eigen::MatrixBase<Derived>& point, const MatrixX<Scalar>& centroids) {
  Eigen::Index best = 0;
  Scalar best_d = (centroids.row(0) - point).squaredNorm();
  for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
    const Scalar d = (centroids.row(c) - point).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

template <typename Derived, typename Scalar = typename Derived::Scalar>
Scalar sum_squared_error(const Eigen::MatrixBase<Derived>& points, const MatrixX<Scalar>& centroids,
                         const std::vector<Eigen::Index>& assignments) {
  Scalar sse(0);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    sse += (points.row(i) - centroids.row(assignments[static_cast<std::size_t>(i)])).squaredNorm();
  }
  return sse;
}

// k-means++ seeding: first centre uniform, then proportional to squared
// distance. When every remaining point coincides with a centre the lowest
// unchosen index is taken.
template <typename Derived, typename Scalar = typename Derived::Scalar>
MatrixX<Scalar> seed_plus_plus(const Eigen::MatrixBase<Derived>& points, Eigen::Index k, Rng& rng) {
  const Eigen::Index n = points.rows();
  MatrixX<Scalar> centroids(k, points.cols());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  auto first = std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng);
  centroids.row(0) = points.row(first);
  chosen[static_cast<std::size_t>(first)] = true;

  VectorX<Scalar> d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2[i] = (points.row(i) - centroids.row(0)).squaredNorm();

  for (Eigen::Index c = 1; c < k; ++c) {
    const double total = static_cast<double>(d2.sum());
    Eigen::Index pick = -1;
    if (total > 0.0) {
      const double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (d2[i] <= Scalar(0)) continue;
        acc += static_cast<double>(d2[i]);
        pick = i;
        if (acc > r) break;
      }
    }
    if (pick < 0) {
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) {
          pick = i;
          break;
        }
      }
    }
    chosen[static_cast<std::size_t>(pick)] = true;
    centroids.row(c) = points.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], Scalar((points.row(i) - centroids.row(c)).squaredNorm()));
    }
  }
  return centroids;
}

}  // namespace detail

/// Lloyd's algorithm from k-means++ seeds, followed by single-point
/// (Hartigan) refinement passes. On return every point sits in its nearest
/// centroid (ties: lowest index) and no single reassignment lowers the SSE,
/// unless `max_iters` ran out first.
template <typename Derived>
KMeansResult<typename Derived::Scalar> kmeans(const Eigen::MatrixBase<Derived>& points, Eigen::Index k,
                                              int max_iters, std::uint64_t seed) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = points.rows();
  if (n == 0) throw ArgumentError("kmeans: empty input");
  if (k < 1 || k > n) throw ArgumentError("kmeans: k must lie in [1, number of points]");
  if (max_iters < 1) throw ArgumentError("kmeans: max_iters must be >= 1");

  Rng rng(seed);
  KMeansResult<Scalar> result;
  result.centroids = detail::seed_plus_plus(points, k, rng);
  auto& assign = result.assignments;
  assign.assign(static_cast<std::size_t>(n), -1);

  std::vector<Eigen::Index> sizes(static_cast<std::size_t>(k));
  int iter = 0;
  for (; iter < max_iters; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto c = detail::nearest_centroid(points.row(i), result.centroids);
      if (c != assign[static_cast<std::size_t>(i)]) {
        assign[static_cast<std::size_t>(i)] = c;
        changed = true;
      }
    }
    result.sse_history.push_back(detail::sum_squared_error(points, result.centroids, assign));
    if (!changed) break;

    MatrixX<Scalar> sums = MatrixX<Scalar>::Zero(k, points.cols());
    std::fill(sizes.begin(), sizes.end(), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += points.row(i);
      ++sizes[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
    }
    for (Eigen::Index c = 0; c < k; ++c) {
      // Empty clusters keep their previous centre.
      if (sizes[static_cast<std::size_t>(c)] > 0) {
        result.centroids.row(c) = sums.row(c) / Scalar(sizes[static_cast<std::size_t>(c)]);
      }
    }
  }

  // Refinement: move x from a to b when n_b/(n_b+1)|x-c_b|^2 < n_a/(n_a-1)|x-c_a|^2.
  // Centroids are exact means throughout, so each move strictly lowers the SSE.
  std::fill(sizes.begin(), sizes.end(), 0);
  MatrixX<Scalar> sums = MatrixX<Scalar>::Zero(k, points.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    sums.row(assign[static_cast<std::size_t>(i)]) += points.row(i);
    ++sizes[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
  }
  for (Eigen::Index c = 0; c < k; ++c) {
    if (sizes[static_cast<std::size_t>(c)] > 0) {
      result.centroids.row(c) = sums.row(c) / Scalar(sizes[static_cast<std::size_t>(c)]);
    }
  }
  const Scalar margin = Scalar(1) - Scalar(64) * std::numeric_limits<Scalar>::epsilon();
  for (; iter < max_iters; ++iter) {
    bool moved = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto a = assign[static_cast<std::size_t>(i)];
      const auto na = sizes[static_cast<std::size_t>(a)];
      if (na <= 1) continue;
      const Scalar remove_cost =
          Scalar(na) / Scalar(na - 1) * (points.row(i) - result.centroids.row(a)).squaredNorm();
      Eigen::Index best = -1;
      Scalar best_cost = remove_cost * margin;
      for (Eigen::Index b = 0; b < k; ++b) {
        if (b == a) continue;
        const auto nb = sizes[static_cast<std::size_t>(b)];
        const Scalar add_cost =
            Scalar(nb) / Scalar(nb + 1) * (points.row(i) - result.centroids.row(b)).squaredNorm();
        if (add_cost < best_cost) {
          best_cost = add_cost;
          best = b;
        }
      }
      if (best < 0) continue;
      sums.row(a) -= points.row(i);
      sums.row(best) += points.row(i);
      --sizes[static_cast<std::size_t>(a)];
      ++sizes[static_cast<std::size_t>(best)];
      result.centroids.row(a) = sums.row(a) / Scalar(sizes[static_cast<std::size_t>(a)]);
      result.centroids.row(best) = sums.row(best) / Scalar(sizes[static_cast<std::size_t>(best)]);
      assign[static_cast<std::size_t>(i)] = best;
      moved = true;
    }
    if (!moved) break;
    result.sse_history.push_back(detail::sum_squared_error(points, result.centroids, assign));
  }
  result.iterations = iter;
  result.sse_history.push_back(detail::sum_squared_error(points, result.centroids, assign));
  return result;
}

template <typename Scalar>
struct PcaResult {
  VectorX<Scalar> mean;                ///< length P
  MatrixX<Scalar> components;          ///< P x d, orthonormal columns
  MatrixX<Scalar> projections;         ///< K x d
  VectorX<Scalar> explained_variance;  ///< length d, non-increasing

  /// mean + projections * components^T, K x P.
  MatrixX<Scalar> reconstruct() const {
    MatrixX<Scalar> x = projections * components.transpose();
    x.rowwise() += mean.transpose();
    return x;
  }
};

/// Top-`d` principal components of the rows of `samples` (K x P). Works on
/// the K x K Gram matrix, so P may be large. Each component is signed so its
/// largest-magnitude coordinate is positive (ties: lowest index). Directions
/// with zero variance are completed to an orthonormal set.
template <typename Derived>
PcaResult<typename Derived::Scalar> principal_components(const Eigen::MatrixBase<Derived>& samples,
                                                         Eigen::Index d) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index k = samples.rows();
  const Eigen::Index p = samples.cols();
  if (k < 2) throw ArgumentError("PCA needs at least two samples");
  if (d < 1 || d > std::min(k, p)) throw ArgumentError("PCA dimension d out of range [1, min(K, P)]");

  PcaResult<Scalar> out;
  out.mean = samples.colwise().mean().transpose();
  // Second pass removes the rounding left by the first mean.
  out.mean += (samples.rowwise() - out.mean.transpose()).colwise().mean().transpose();
  const MatrixX<Scalar> centred = samples.rowwise() - out.mean.transpose();
  const MatrixX<Scalar> gram = centred * centred.transpose();
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(gram);

  out.components = MatrixX<Scalar>::Zero(p, d);
  out.explained_variance = VectorX<Scalar>::Zero(d);
  const Scalar top = std::max(eig.eigenvalues()[k - 1], Scalar(0));
  const Scalar floor = top * Scalar(k) * std::numeric_limits<Scalar>::epsilon() * Scalar(16);

  Eigen::Index filled = 0;
  for (; filled < d; ++filled) {
    const Scalar lambda = eig.eigenvalues()[k - 1 - filled];
    if (!(lambda > floor) || lambda <= Scalar(0)) break;
    VectorX<Scalar> v = centred.transpose() * eig.eigenvectors().col(k - 1 - filled);
    v /= v.norm();
    out.components.col(filled) = v;
    out.explained_variance[filled] = lambda / Scalar(k - 1);
  }
  // Zero-variance directions: Gram-Schmidt over the standard basis.
  for (Eigen::Index j = 0; filled < d && j < p; ++j) {
    VectorX<Scalar> v = VectorX<Scalar>::Unit(p, j);
    for (Eigen::Index c = 0; c < filled; ++c) v -= out.components.col(c).dot(v) * out.components.col(c);
    const Scalar norm = v.norm();
    if (norm < Scalar(1e-6)) continue;
    out.components.col(filled++) = v / norm;
  }
  for (Eigen::Index c = 0; c < d; ++c) {
    Eigen::Index arg = 0;
    for (Eigen::Index j = 1; j < p; ++j) {
      if (std::abs(out.components(j, c)) > std::abs(out.components(arg, c))) arg = j;
    }
    if (out.components(arg, c) < Scalar(0)) out.components.col(c) *= Scalar(-1);
  }
  out.projections = centred * out.components;
  return out;
}

/// Mean Euclidean distance over all unordered row pairs.
template <typename Derived>
typename Derived::Scalar mean_pairwise_distance(const Eigen::MatrixBase<Derived>& samples) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index k = samples.rows();
  if (k < 2) throw ArgumentError("pairwise distance needs at least two samples");
  Scalar total(0);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) total += (samples.row(i) - samples.row(j)).norm();
  }
  return total / Scalar(k * (k - 1) / 2);
}

}  // namespace fedsim

#endif  // FEDSIM_LINALG_HPP
