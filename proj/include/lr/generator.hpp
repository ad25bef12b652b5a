#pragma once

#include <string>
#include <variant>

#include <json.hpp>

#include "lr/mlp.hpp"
#include "lr/rbf.hpp"
#include "lr/types.hpp"

namespace lr {

// sigma^2(z) = value everywhere.
struct ConstantVariance {
  Vec value;
};

// sigma^2(z) = softplus head output + floor.
struct DeepVariance {
  static constexpr double floor = 1e-6;
  Mlp net;
};

using VarianceModel = std::variant<ConstantVariance, DeepVariance, RbfPrecision>;

// "fixed", "deep-net" or "rbf".
std::string variance_kind(const VarianceModel& model);

Vec variance_at(const VarianceModel& model, const Vec& z);
// d sigma^2 / dz, D x d.
Mat variance_jacobian_at(const VarianceModel& model, const Vec& z);
Vec stddev_at(const VarianceModel& model, const Vec& z);
// d sigma / dz, D x d.
Mat stddev_jacobian_at(const VarianceModel& model, const Vec& z);

nlohmann::json to_json(const VarianceModel& model);
VarianceModel variance_from_json(const nlohmann::json& doc, const std::string& kind);

// The stochastic generator f(z) = mu(z) + sigma(z) * eps.
struct GeneratorModel {
  Mlp mean;
  VarianceModel variance;

  int latent_dim() const { return mean.in_dim(); }
  int output_dim() const { return mean.out_dim(); }
  void validate() const;
};

// mu(z) = z with unit variance: the flat Euclidean generator.
GeneratorModel identity_generator(int dim);
// mu(z) = A z with constant variance.
GeneratorModel linear_generator(const Mat& a);

}  // namespace lr
