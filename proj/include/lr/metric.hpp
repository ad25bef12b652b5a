#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "lr/generator.hpp"
#include "lr/types.hpp"

namespace lr {

enum class DerivativeScheme { central, forward };

struct MetricOptions {
  DerivativeScheme scheme = DerivativeScheme::central;
  // Step is relative_step * (1 + |z|).
  double relative_step = 1e-4;
  // Memoize metric evaluations on a 1e-12 grid. Thread-safe.
  bool cache = false;
};

// Eigenvalue floor shared by every solver that inverts or factors a metric.
inline constexpr double eigenvalue_clamp = 1e-10;

// d vec(M) / dz as a (d^2 x d) matrix, column i = vec(dM/dz_i), with vec
// stacking columns.
struct MetricDerivative {
  Mat tensor;

  // dM/dz_i as a d x d matrix.
  Mat slice(int i) const;
};

// Riemannian metric field on the latent space. Built either from a stochastic
// generator, giving the expected metric J_mu^T J_mu + J_sigma^T J_sigma, or from
// an arbitrary callable for analytic test metrics.
class MetricField {
 public:
  using MetricFn = std::function<Mat(const Vec&)>;

  explicit MetricField(GeneratorModel generator, MetricOptions options = {});
  static MetricField from_function(int dim, MetricFn fn, MetricOptions options = {});

  int dim() const { return dim_; }
  const MetricOptions& options() const { return options_; }
  const GeneratorModel* generator() const { return generator_ ? generator_.get() : nullptr; }

  Mat metric(const Vec& z) const;
  MetricDerivative derivative(const Vec& z) const;
  // Metric and derivative from one stencil.
  void metric_and_derivative(const Vec& z, Mat& m, MetricDerivative& dm) const;
  double volume_measure(const Vec& z) const;

  // One draw of the random metric J^T J with J = J_mu + [S_1 eps, ..., S_d eps],
  // S_i = diag(d sigma / d z_i). Needs a generator-backed field.
  Mat stochastic_sample(const Vec& z, const Vec& eps) const;

  // Decoded mean mu(z); needs a generator-backed field.
  Vec decode(const Vec& z) const;

  std::size_t cache_size() const;

 private:
  MetricField() = default;
  Mat evaluate(const Vec& z) const;

  int dim_ = 0;
  MetricOptions options_;
  std::shared_ptr<const GeneratorModel> generator_;
  MetricFn fn_;
  struct Cache;
  std::shared_ptr<Cache> cache_;
};

// Symmetric part of m.
Mat symmetrize(const Mat& m);
// Inverse after flooring eigenvalues at eigenvalue_clamp. Raises
// singular_metric when every eigenvalue is below the floor.
Mat clamped_inverse(const Mat& m);
// sqrt(det m) with eigenvalues floored at zero; +inf on overflow. Raises
// singular_metric when an eigenvalue is below -tolerance * max(1, |m|).
double sqrt_det(const Mat& m, double tolerance = 1e-10);

}  // namespace lr
