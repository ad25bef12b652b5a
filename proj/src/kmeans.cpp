#include "lr/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include "lr/error.hpp"

namespace lr {

namespace {

KMeansResult lloyd(const Mat& points, Mat centers, int max_iterations) {
  const auto n = static_cast<int>(points.rows());
  const auto k = static_cast<int>(centers.rows());
  KMeansResult result;
  result.assignments.assign(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_dist = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double dist = (points.row(i) - centers.row(c)).squaredNorm();
        if (dist < best_dist) {
          best_dist = dist;
          best = c;
        }
      }
      if (result.assignments[static_cast<std::size_t>(i)] != best) {
        result.assignments[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    result.iterations = iter + 1;

    Mat sums = Mat::Zero(k, points.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < n; ++i) {
      const int c = result.assignments[static_cast<std::size_t>(i)];
      sums.row(c) += points.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
        continue;
      }
      int farthest = 0;
      double far_dist = -1.0;
      for (int i = 0; i < n; ++i) {
        const int a = result.assignments[static_cast<std::size_t>(i)];
        const double dist = (points.row(i) - centers.row(a)).squaredNorm();
        if (dist > far_dist) {
          far_dist = dist;
          farthest = i;
        }
      }
      centers.row(c) = points.row(farthest);
      result.assignments[static_cast<std::size_t>(farthest)] = c;
      changed = true;
    }
    if (!changed) break;
  }
  result.inertia = 0.0;
  for (int i = 0; i < n; ++i) {
    result.inertia += (points.row(i) - centers.row(result.assignments[static_cast<std::size_t>(i)])).squaredNorm();
  }
  result.centers = std::move(centers);
  return result;
}

}  // namespace

KMeansResult kmeans(const Mat& points, int k, std::uint64_t seed, KMeansOptions options) {
  const auto n = static_cast<int>(points.rows());
  if (k < 1 || k > n) {
    fail(ErrorCode::invalid_argument, "kmeans: need 1 <= k <= number of points");
  }
  const int restarts = std::clamp(options.restarts, 1, 50);
  std::mt19937_64 rng(seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    auto dist = [&](int a, int b) { return (points.row(a) - points.row(b)).norm(); };
    const auto seeds = kmeanspp_seed_indices(n, k, dist, rng);
    Mat centers(k, points.cols());
    for (int c = 0; c < k; ++c) centers.row(c) = points.row(seeds[static_cast<std::size_t>(c)]);
    auto result = lloyd(points, std::move(centers), options.max_iterations);
    if (result.inertia < best.inertia) best = std::move(result);
  }
  return best;
}

}  // namespace lr
