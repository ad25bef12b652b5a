#pragma once

#include <cstdint>
#include <vector>

#include "lr/types.hpp"

namespace lr {

struct KMeansResult {
  Mat centers;  // k x d
  std::vector<int> assignments;
  double inertia = 0.0;
  int iterations = 0;
};

struct KMeansOptions {
  int restarts = 10;  // capped at 50
  int max_iterations = 300;
};

// Euclidean Lloyd iterations with k-means++ seeding; rows of `points` are
// samples. The restart with the lowest inertia wins. An empty cluster is
// re-seeded at the point farthest from its current center.
KMeansResult kmeans(const Mat& points, int k, std::uint64_t seed, KMeansOptions options = {});

// k-means++ seeding from an arbitrary pairwise distance callback.
template <typename DistanceFn, typename Rng>
std::vector<int> kmeanspp_seed_indices(int n, int k, DistanceFn&& distance, Rng& rng);

}  // namespace lr

#include "lr/detail/kmeanspp.hpp"
