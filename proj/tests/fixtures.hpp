#pragma once

// Seeded models shared by the unit and acceptance tests.

#include <cstdint>
#include <random>
#include <vector>

#include "lr/dataset.hpp"
#include "lr/generator.hpp"
#include "lr/mlp.hpp"
#include "lr/rbf.hpp"

namespace lr::fixture {

// tanh decoder d -> D with an RBF precision whose centers sit in [-2, 2]^d.
inline GeneratorModel tanh_rbf_generator(std::uint64_t seed, int d = 2, int out_dim = 5, int hidden = 16,
                                         int centers = 4) {
  std::mt19937_64 rng(seed);
  GeneratorModel gen;
  const std::vector<int> widths{d, hidden, out_dim};
  const std::vector<Activation> acts{Activation::tanh, Activation::identity};
  gen.mean = Mlp::random(widths, acts, rng);
  std::normal_distribution<double> normal(0.0, 0.3);
  for (auto& layer : gen.mean.layers()) {
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = normal(rng);
  }
  std::uniform_real_distribution<double> pos(-2.0, 2.0);
  std::uniform_real_distribution<double> bw(0.3, 1.5);
  std::uniform_real_distribution<double> w(0.0, 5.0);
  RbfPrecision rbf;
  rbf.centers = Mat::NullaryExpr(centers, d, [&] { return pos(rng); });
  rbf.bandwidths = Vec::NullaryExpr(centers, [&] { return bw(rng); });
  rbf.weights = Mat::NullaryExpr(out_dim, centers, [&] { return w(rng); });
  rbf.zeta = Vec::Constant(out_dim, 1e-2);
  gen.variance = rbf;
  return gen;
}

// Identity decoder mean with an RBF precision fitted to constant squared
// residuals around `codes`: variance ~ residual on the data, 1 / zeta far away.
inline GeneratorModel walled_generator(const Mat& codes, int centers, double a, double residual,
                                       std::uint64_t seed, double zeta = 1e-2) {
  const auto d = static_cast<int>(codes.cols());
  GeneratorModel gen = identity_generator(d);
  const auto cb = fit_centers_bandwidths(codes, centers, a, seed);
  RbfPrecision rbf;
  rbf.centers = cb.centers;
  rbf.bandwidths = cb.bandwidths;
  rbf.weights = Mat::Constant(d, centers, 1e-3);
  rbf.zeta = Vec::Constant(d, zeta);
  rbf.a = a;
  fit_weights(rbf, codes, Mat::Constant(codes.rows(), d, residual));
  gen.variance = rbf;
  return gen;
}

// Concentric half arcs (radius 1 and 3) with a variance wall between them.
// Euclidean k-means splits them left and right.
struct WalledArcs {
  Dataset points;
  GeneratorModel generator;
};

inline WalledArcs walled_arcs(int n = 40) {
  const auto dense = make_toy_dataset(ToyKind::arc_pair, 400, 0.05, 12);
  return {make_toy_dataset(ToyKind::arc_pair, n, 0.05, 11), walled_generator(dense.points, 12, 1.2, 0.02, 3)};
}

}  // namespace lr::fixture
