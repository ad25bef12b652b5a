#pragma once

#include <limits>
#include <random>
#include <vector>

namespace lr {

template <typename DistanceFn, typename Rng>
std::vector<int> kmeanspp_seed_indices(int n, int k, DistanceFn&& distance, Rng& rng) {
  std::vector<int> chosen;
  chosen.reserve(static_cast<std::size_t>(k));
  std::uniform_int_distribution<int> first(0, n - 1);
  chosen.push_back(first(rng));
  std::vector<double> nearest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  while (static_cast<int>(chosen.size()) < k) {
    const int last = chosen.back();
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const double dist = distance(last, i);
      nearest[static_cast<std::size_t>(i)] = std::min(nearest[static_cast<std::size_t>(i)], dist * dist);
      total += nearest[static_cast<std::size_t>(i)];
    }
    int pick = -1;
    if (total > 0.0) {
      double target = unif(rng) * total;
      for (int i = 0; i < n; ++i) {
        target -= nearest[static_cast<std::size_t>(i)];
        if (target <= 0.0 && nearest[static_cast<std::size_t>(i)] > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {
        for (int i = n; i-- > 0;) {
          if (nearest[static_cast<std::size_t>(i)] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // All remaining points coincide with a chosen center.
      for (int i = 0; i < n && pick < 0; ++i) {
        bool used = false;
        for (int c : chosen) used = used || c == i;
        if (!used) pick = i;
      }
    }
    chosen.push_back(pick);
  }
  return chosen;
}

}  // namespace lr
