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

#include <Eigen/Eigenvalues>
#include <random>
#include <set>

#include "fedsim/errors.hpp"
#include "fedsim/linalg.hpp"

using namespace fedsim;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double sse_of(const MatrixXd& x, const std::vector<Eigen::Index>& assign, Eigen::Index k) {
  double total = 0.0;
  for (Eigen::Index c = 0; c < k; ++c) {
    VectorXd mean = VectorXd::Zero(x.cols());
    int n = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (assign[static_cast<std::size_t>(i)] == c) {
        mean += x.row(i).transpose();
        ++n;
      }
    }
    if (n == 0) continue;
    mean /= n;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (assign[static_cast<std::size_t>(i)] == c) total += (x.row(i).transpose() - mean).squaredNorm();
    }
  }
  return total;
}

MatrixXd blobs(int per, int groups, int dim, double spread, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXd x(per * groups, dim);
  for (int b = 0; b < groups; ++b) {
    VectorXd centre(dim);
    for (int j = 0; j < dim; ++j) centre[j] = spread * g(rng);
    for (int i = 0; i < per; ++i) {
      for (int j = 0; j < dim; ++j) x(b * per + i, j) = centre[j] + g(rng);
    }
  }
  return x;
}

}  // namespace

TEST_SUITE("kmeans") {
  TEST_CASE("k equal to the point count gives zero SSE") {
    const MatrixXd x = blobs(3, 3, 2, 5.0, 1);
    const auto r = kmeans(x, x.rows(), 50, 3);
    CHECK(r.sse() == doctest::Approx(0.0));
    std::set<Eigen::Index> used(r.assignments.begin(), r.assignments.end());
    CHECK(used.size() == static_cast<std::size_t>(x.rows()));
  }

  TEST_CASE("two separated pairs match the brute-force optimum") {
    MatrixXd x(4, 2);
    x << 0, 0, 0, 1, 10, 10, 10, 11;
    // Enumerate every 2-partition with both sides non-empty.
    double best = std::numeric_limits<double>::infinity();
    std::vector<Eigen::Index> best_assign;
    for (int mask = 1; mask < 15; ++mask) {
      std::vector<Eigen::Index> a(4);
      for (int i = 0; i < 4; ++i) a[static_cast<std::size_t>(i)] = (mask >> i) & 1;
      const double s = sse_of(x, a, 2);
      if (s < best) {
        best = s;
        best_assign = a;
      }
    }
    CHECK(best == doctest::Approx(1.0));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto r = kmeans(x, 2, 100, seed);
      CHECK(r.sse() == doctest::Approx(best));
      CHECK(r.assignments[0] == r.assignments[1]);
      CHECK(r.assignments[2] == r.assignments[3]);
      CHECK(r.assignments[0] != r.assignments[2]);
    }
  }

  TEST_CASE("k = 1 centroid is the mean") {
    const MatrixXd x = blobs(10, 2, 3, 4.0, 2);
    const auto r = kmeans(x, 1, 10, 0);
    CHECK((r.centroids.row(0) - x.colwise().mean()).norm() < 1e-12);
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(kmeans(MatrixXd(0, 2), 1, 10, 0), ArgumentError);
    CHECK_THROWS_AS(kmeans(MatrixXd::Zero(3, 2), 4, 10, 0), ArgumentError);
    CHECK_THROWS_AS(kmeans(MatrixXd::Zero(3, 2), 0, 10, 0), ArgumentError);
  }

  TEST_CASE("SSE non-increasing, nearest-centroid and single-move optimality") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto k = static_cast<Eigen::Index>(2 + seed % 5);
      const MatrixXd x = blobs(8, 4, 3, seed % 2 ? 1.0 : 6.0, seed);
      const auto r = kmeans(x, k, 500, seed);
      for (std::size_t i = 1; i < r.sse_history.size(); ++i) {
        CHECK(r.sse_history[i] <= r.sse_history[i - 1] * (1 + 1e-12));
      }
      CHECK(r.sse() == doctest::Approx(sse_of(x, r.assignments, k)).epsilon(1e-10));

      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        // Nearest centroid, lowest index on ties.
        Eigen::Index nearest = 0;
        for (Eigen::Index c = 1; c < k; ++c) {
          if ((x.row(i) - r.centroids.row(c)).squaredNorm() < (x.row(i) - r.centroids.row(nearest)).squaredNorm()) {
            nearest = c;
          }
        }
        CHECK(r.assignments[static_cast<std::size_t>(i)] == nearest);
      }

      const double base = sse_of(x, r.assignments, k);
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index c = 0; c < k; ++c) {
          auto moved = r.assignments;
          if (moved[static_cast<std::size_t>(i)] == c) continue;
          moved[static_cast<std::size_t>(i)] = c;
          CHECK(sse_of(x, moved, k) >= base - 1e-9 * (1 + base));
        }
      }
    }
  }

  TEST_CASE("deterministic per seed, float scalars supported") {
    const MatrixXd x = blobs(6, 3, 2, 3.0, 9);
    CHECK(kmeans(x, 3, 100, 4).assignments == kmeans(x, 3, 100, 4).assignments);
    const Eigen::MatrixXf xf = x.cast<float>();
    const auto rf = kmeans(xf, 3, 100, 4);
    CHECK(rf.assignments.size() == 18);
  }
}

TEST_SUITE("pca") {
  TEST_CASE("identical samples project to zero") {
    const MatrixXd x = MatrixXd::Ones(5, 4) * 2.5;
    const auto r = principal_components(x, 2);
    CHECK(r.projections.norm() == doctest::Approx(0.0));
    CHECK(r.explained_variance.norm() == doctest::Approx(0.0));
    CHECK((r.components.transpose() * r.components - MatrixXd::Identity(2, 2)).norm() < 1e-12);
    CHECK(mean_pairwise_distance(x) == 0.0);
  }

  TEST_CASE("collinear samples reconstruct from one component") {
    VectorXd dir(5);
    dir << 1, -2, 0.5, 3, 0;
    MatrixXd x(6, 5);
    for (int i = 0; i < 6; ++i) x.row(i) = (0.7 * i - 1.0) * dir.transpose() + VectorXd::Constant(5, 4.0).transpose();
    const auto r = principal_components(x, 1);
    CHECK((r.reconstruct() - x).cwiseAbs().maxCoeff() < 1e-9);
    // Sign convention: largest-magnitude coordinate positive.
    CHECK(r.components(3, 0) > 0);
    CHECK(std::abs(r.components.col(0).dot(dir.normalized())) == doctest::Approx(1.0));
  }

  TEST_CASE("matches a covariance eigen-decomposition") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> g(0.0, 1.0);
      const int k = 12, p = 7;
      MatrixXd x(k, p);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < p; ++j) x(i, j) = g(rng) * (1.0 + j);
      // Oracle: explicit P x P covariance from loops.
      VectorXd mean = VectorXd::Zero(p);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < p; ++j) mean[j] += x(i, j) / k;
      MatrixXd cov = MatrixXd::Zero(p, p);
      for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b)
          for (int i = 0; i < k; ++i) cov(a, b) += (x(i, a) - mean[a]) * (x(i, b) - mean[b]) / (k - 1);
      Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);

      const auto r = principal_components(x, 3);
      CHECK((r.components.transpose() * r.components - MatrixXd::Identity(3, 3)).norm() < 1e-10);
      for (int c = 0; c < 3; ++c) {
        CHECK(r.explained_variance[c] == doctest::Approx(eig.eigenvalues()[p - 1 - c]).epsilon(1e-9));
        CHECK(std::abs(r.components.col(c).dot(eig.eigenvectors().col(p - 1 - c))) ==
              doctest::Approx(1.0).epsilon(1e-8));
        Eigen::Index arg;
        r.components.col(c).cwiseAbs().maxCoeff(&arg);
        CHECK(r.components(arg, c) > 0);
        if (c > 0) CHECK(r.explained_variance[c] <= r.explained_variance[c - 1]);
      }
      CHECK((r.projections - (x.rowwise() - mean.transpose()) * r.components).norm() < 1e-9);
    }
  }

  TEST_CASE("wide inputs and argument errors") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    MatrixXd x(4, 500);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
    const auto r = principal_components(x, 4);
    CHECK(r.components.rows() == 500);
    CHECK((r.components.transpose() * r.components - MatrixXd::Identity(4, 4)).norm() < 1e-10);
    CHECK(r.explained_variance[3] == doctest::Approx(0.0));  // K points span K-1 dims
    CHECK_THROWS_AS(principal_components(x, 5), ArgumentError);
    CHECK_THROWS_AS(principal_components(x, 0), ArgumentError);
    CHECK_THROWS_AS(principal_components(MatrixXd::Zero(1, 3), 1), ArgumentError);
  }

  TEST_CASE("mean pairwise distance") {
    MatrixXd x(3, 2);
    x << 0, 0, 3, 4, 0, 8;
    CHECK(mean_pairwise_distance(x) == doctest::Approx((5.0 + 8.0 + 5.0) / 3.0));
  }
}
