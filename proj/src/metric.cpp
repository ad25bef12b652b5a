#include "lr/metric.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "lr/error.hpp"

namespace lr {

struct MetricField::Cache {
  struct KeyHash {
    std::size_t operator()(const std::vector<std::int64_t>& key) const noexcept {
      std::size_t h = 1469598103934665603ULL;
      for (auto v : key) {
        h ^= std::hash<std::int64_t>{}(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      }
      return h;
    }
  };
  mutable std::mutex mutex;
  std::unordered_map<std::vector<std::int64_t>, Mat, KeyHash> entries;
};

Mat MetricDerivative::slice(int i) const {
  const auto d = static_cast<Eigen::Index>(std::lround(std::sqrt(static_cast<double>(tensor.rows()))));
  return Eigen::Map<const Mat>(tensor.col(i).data(), d, d);
}

MetricField::MetricField(GeneratorModel generator, MetricOptions options)
    : dim_(generator.latent_dim()), options_(options) {
  generator.validate();
  generator_ = std::make_shared<const GeneratorModel>(std::move(generator));
  if (options_.cache) cache_ = std::make_shared<Cache>();
}

MetricField MetricField::from_function(int dim, MetricFn fn, MetricOptions options) {
  if (dim < 1) fail(ErrorCode::invalid_argument, "metric dimension must be positive");
  MetricField field;
  field.dim_ = dim;
  field.options_ = options;
  field.fn_ = std::move(fn);
  if (options.cache) field.cache_ = std::make_shared<Cache>();
  return field;
}

Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

Mat MetricField::evaluate(const Vec& z) const {
  Mat m;
  if (generator_) {
    Vec value;
    Mat j_mu;
    generator_->mean.forward_with_jacobian(z, value, j_mu);
    const Mat j_sigma = stddev_jacobian_at(generator_->variance, z);
    m.noalias() = j_mu.transpose() * j_mu;
    m.noalias() += j_sigma.transpose() * j_sigma;
  } else {
    m = fn_(z);
    require_dims(m.rows(), dim_, "metric rows");
    require_dims(m.cols(), dim_, "metric cols");
  }
  if (!m.allFinite()) fail(ErrorCode::non_finite, "metric has non-finite entries");
  return symmetrize(m);
}

Mat MetricField::metric(const Vec& z) const {
  require_dims(z.size(), dim_, "metric point");
  if (!cache_ || z.cwiseAbs().maxCoeff() > 1e6) return evaluate(z);
  std::vector<std::int64_t> key(static_cast<std::size_t>(z.size()));
  for (Eigen::Index i = 0; i < z.size(); ++i) key[static_cast<std::size_t>(i)] = std::llround(z[i] * 1e12);
  {
    const std::lock_guard<std::mutex> lock(cache_->mutex);
    if (auto it = cache_->entries.find(key); it != cache_->entries.end()) return it->second;
  }
  Mat m = evaluate(z);
  const std::lock_guard<std::mutex> lock(cache_->mutex);
  cache_->entries.emplace(std::move(key), m);
  return m;
}

std::size_t MetricField::cache_size() const {
  if (!cache_) return 0;
  const std::lock_guard<std::mutex> lock(cache_->mutex);
  return cache_->entries.size();
}

void MetricField::metric_and_derivative(const Vec& z, Mat& m, MetricDerivative& dm) const {
  m = metric(z);
  const double h = options_.relative_step * (1.0 + z.norm());
  dm.tensor.resize(static_cast<Eigen::Index>(dim_) * dim_, dim_);
  Vec zp = z;
  for (int i = 0; i < dim_; ++i) {
    zp[i] = z[i] + h;
    const Mat plus = metric(zp);
    Mat diff;
    if (options_.scheme == DerivativeScheme::central) {
      zp[i] = z[i] - h;
      diff = (plus - metric(zp)) / (2.0 * h);
    } else {
      diff = (plus - m) / h;
    }
    zp[i] = z[i];
    dm.tensor.col(i) = Eigen::Map<const Vec>(diff.data(), diff.size());
  }
}

MetricDerivative MetricField::derivative(const Vec& z) const {
  Mat m;
  MetricDerivative dm;
  metric_and_derivative(z, m, dm);
  return dm;
}

double MetricField::volume_measure(const Vec& z) const { return sqrt_det(metric(z)); }

Mat MetricField::stochastic_sample(const Vec& z, const Vec& eps) const {
  if (!generator_) fail(ErrorCode::invalid_argument, "stochastic metric needs a generator-backed field");
  require_dims(eps.size(), generator_->output_dim(), "stochastic metric eps");
  Mat j = generator_->mean.jacobian(z);
  const Mat j_sigma = stddev_jacobian_at(generator_->variance, z);
  // column i of B is S_i eps = (d sigma / d z_i) * eps
  for (int i = 0; i < dim_; ++i) j.col(i) += j_sigma.col(i).cwiseProduct(eps);
  if (!j.allFinite()) fail(ErrorCode::non_finite, "stochastic metric has non-finite entries");
  return j.transpose() * j;
}

Vec MetricField::decode(const Vec& z) const {
  if (!generator_) fail(ErrorCode::invalid_argument, "decoding needs a generator-backed field");
  return generator_->mean.forward(z);
}

Mat clamped_inverse(const Mat& m) {
  const Eigen::SelfAdjointEigenSolver<Mat> eig(symmetrize(m));
  if (eig.info() != Eigen::Success) fail(ErrorCode::singular_metric, "metric eigendecomposition failed");
  const Vec& values = eig.eigenvalues();
  if (values.maxCoeff() <= eigenvalue_clamp) fail(ErrorCode::singular_metric, "metric is numerically zero");
  const Vec inv = values.cwiseMax(eigenvalue_clamp).cwiseInverse();
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

double sqrt_det(const Mat& m, double tolerance) {
  const Eigen::SelfAdjointEigenSolver<Mat> eig(symmetrize(m), Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) fail(ErrorCode::singular_metric, "metric eigendecomposition failed");
  const Vec& values = eig.eigenvalues();
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  if (values.minCoeff() < -tolerance * scale) {
    fail(ErrorCode::singular_metric, "metric has a negative eigenvalue; determinant is negative");
  }
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double v = std::max(values[i], 0.0);
    if (v == 0.0) return 0.0;
    log_det += std::log(v);
  }
  const double result = std::exp(0.5 * log_det);
  return std::isfinite(result) ? result : std::numeric_limits<double>::infinity();
}

}  // namespace lr
