#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "lr/types.hpp"

namespace lr {

// Element-wise precision beta(z) = W v(z) + zeta with Gaussian features
// v_k(z) = exp(-lambda_k |z - c_k|^2). W >= 0 and zeta > 0 keep beta >= zeta.
struct RbfPrecision {
  Mat centers;     // K x d
  Vec bandwidths;  // K, lambda_k > 0
  Mat weights;     // D x K, nonnegative
  Vec zeta;        // D, positive floor
  double a = 2.0;  // bandwidth scale used when fitting

  int latent_dim() const { return static_cast<int>(centers.cols()); }
  int output_dim() const { return static_cast<int>(weights.rows()); }
  int num_centers() const { return static_cast<int>(centers.rows()); }

  void validate() const;
};

Vec rbf_features(const RbfPrecision& model, const Vec& z);
// d v / d z, K x d.
Mat rbf_features_jacobian(const RbfPrecision& model, const Vec& z);

Vec precision(const RbfPrecision& model, const Vec& z);
Vec variance(const RbfPrecision& model, const Vec& z);
// d beta / d z, D x d.
Mat precision_jacobian(const RbfPrecision& model, const Vec& z);
// sigma = beta^{-1/2} and its jacobian -1/2 beta^{-3/2} d beta / d z.
Vec stddev(const RbfPrecision& model, const Vec& z);
Mat stddev_jacobian(const RbfPrecision& model, const Vec& z);

struct CentersBandwidths {
  Mat centers;
  Vec bandwidths;
  std::vector<int> assignments;
};

// k-means centers, then lambda_k = 1/2 (a * mean_{j in C_k} |z_j - c_k|)^{-2}.
// A cluster whose mean member distance is zero has no bandwidth estimate and
// raises ErrorCode::degenerate.
CentersBandwidths fit_centers_bandwidths(const Mat& codes, int num_centers, double a,
                                         std::uint64_t seed, int restarts = 50);

struct WeightFitOptions {
  int iterations = 2000;
  double step = 1.0;
  double l2 = 0.0;
  double grad_tol = 1e-10;
};

struct WeightFitTrace {
  std::vector<double> objective;  // mean log-likelihood per iteration, index 0 = init
  int iterations = 0;
};

// Projected gradient ascent on
//   sum_n sum_j [ 1/2 log beta_j(z_n) - 1/2 beta_j(z_n) r_nj ] - l2/2 |W|^2
// over W >= 0, with per-row backtracking. Modifies model.weights in place.
WeightFitTrace fit_weights(RbfPrecision& model, const Mat& codes, const Mat& residuals,
                           const WeightFitOptions& options = {});

double rbf_weight_objective(const RbfPrecision& model, const Mat& features, const Mat& residuals);

nlohmann::json to_json(const RbfPrecision& model);
RbfPrecision rbf_from_json(const nlohmann::json& doc);

}  // namespace lr
