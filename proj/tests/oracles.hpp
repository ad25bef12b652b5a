#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the code paths it is used to check.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "lr/mlp.hpp"
#include "lr/types.hpp"

namespace lr::oracle {

inline double act(Activation kind, double x) {
  switch (kind) {
    case Activation::identity:
      return x;
    case Activation::tanh:
      return (std::exp(x) - std::exp(-x)) / (std::exp(x) + std::exp(-x));
    case Activation::sigmoid:
      return 1.0 / (1.0 + std::exp(-x));
    case Activation::softplus:
      return x > 30.0 ? x : std::log(1.0 + std::exp(x));
  }
  return x;
}

// Straight-loop forward pass over raw std::vector storage.
inline std::vector<double> naive_forward(const Mlp& net, const std::vector<double>& z) {
  std::vector<double> h = z;
  for (const auto& layer : net.layers()) {
    std::vector<double> next(static_cast<std::size_t>(layer.weights.rows()));
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
      double s = layer.bias[i];
      for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) s += layer.weights(i, j) * h[static_cast<std::size_t>(j)];
      next[static_cast<std::size_t>(i)] = act(layer.activation, s);
    }
    h = std::move(next);
  }
  return h;
}

inline Vec naive_forward(const Mlp& net, const Vec& z) {
  const auto out = naive_forward(net, std::vector<double>(z.data(), z.data() + z.size()));
  return Eigen::Map<const Vec>(out.data(), static_cast<Eigen::Index>(out.size()));
}

// Central finite-difference Jacobian of f at z.
inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& z, double h = 1e-5) {
  const Vec f0 = f(z);
  Mat jac(f0.size(), z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    Vec zp = z;
    Vec zm = z;
    zp[i] += h;
    zm[i] -= h;
    jac.col(i) = (f(zp) - f(zm)) / (2.0 * h);
  }
  return jac;
}

inline double rel_error(const Mat& got, const Mat& want) {
  const double denom = std::max(want.norm(), 1e-12);
  return (got - want).norm() / denom;
}

inline Mlp random_net(std::mt19937_64& rng, int layers, int max_width, int in_dim, int out_dim) {
  std::uniform_int_distribution<int> width(1, max_width);
  std::uniform_int_distribution<int> pick(0, 3);
  std::vector<int> widths{in_dim};
  std::vector<Activation> acts;
  for (int l = 0; l < layers; ++l) {
    widths.push_back(l + 1 == layers ? out_dim : width(rng));
    acts.push_back(static_cast<Activation>(pick(rng)));
  }
  Mlp net = Mlp::random(widths, acts, rng);
  std::normal_distribution<double> normal(0.0, 0.3);
  for (auto& layer : net.layers()) {
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = normal(rng);
  }
  return net;
}

}  // namespace lr::oracle
