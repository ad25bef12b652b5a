#include "lr/generator.hpp"

#include <cmath>

#include "lr/error.hpp"

namespace lr {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::string variance_kind(const VarianceModel& model) {
  return std::visit(overloaded{[](const ConstantVariance&) { return std::string("fixed"); },
                               [](const DeepVariance&) { return std::string("deep-net"); },
                               [](const RbfPrecision&) { return std::string("rbf"); }},
                    model);
}

Vec variance_at(const VarianceModel& model, const Vec& z) {
  return std::visit(
      overloaded{[&](const ConstantVariance& m) -> Vec { return m.value; },
                 [&](const DeepVariance& m) -> Vec {
                   return m.net.forward(z).array() + DeepVariance::floor;
                 },
                 [&](const RbfPrecision& m) -> Vec { return variance(m, z); }},
      model);
}

Mat variance_jacobian_at(const VarianceModel& model, const Vec& z) {
  return std::visit(
      overloaded{[&](const ConstantVariance& m) -> Mat { return Mat::Zero(m.value.size(), z.size()); },
                 [&](const DeepVariance& m) -> Mat { return m.net.jacobian(z); },
                 [&](const RbfPrecision& m) -> Mat {
                   // d(1/beta) = -d beta / beta^2
                   const Vec beta = precision(m, z);
                   Mat jac = precision_jacobian(m, z);
                   for (Eigen::Index j = 0; j < jac.rows(); ++j) jac.row(j) /= -(beta[j] * beta[j]);
                   return jac;
                 }},
      model);
}

Vec stddev_at(const VarianceModel& model, const Vec& z) {
  if (const auto* rbf = std::get_if<RbfPrecision>(&model)) return stddev(*rbf, z);
  return variance_at(model, z).cwiseSqrt();
}

Mat stddev_jacobian_at(const VarianceModel& model, const Vec& z) {
  return std::visit(
      overloaded{[&](const ConstantVariance& m) -> Mat { return Mat::Zero(m.value.size(), z.size()); },
                 [&](const DeepVariance& m) -> Mat {
                   Vec value;
                   Mat jac;
                   m.net.forward_with_jacobian(z, value, jac);
                   for (Eigen::Index j = 0; j < jac.rows(); ++j) {
                     jac.row(j) *= 0.5 / std::sqrt(value[j] + DeepVariance::floor);
                   }
                   return jac;
                 },
                 [&](const RbfPrecision& m) -> Mat { return stddev_jacobian(m, z); }},
      model);
}

nlohmann::json to_json(const VarianceModel& model) {
  return std::visit(
      overloaded{[](const ConstantVariance& m) -> nlohmann::json {
                   return {{"value", std::vector<double>(m.value.data(), m.value.data() + m.value.size())}};
                 },
                 [](const DeepVariance& m) -> nlohmann::json { return to_json(m.net); },
                 [](const RbfPrecision& m) -> nlohmann::json { return to_json(m); }},
      model);
}

VarianceModel variance_from_json(const nlohmann::json& doc, const std::string& kind) {
  if (kind == "fixed") {
    try {
      const auto v = doc.at("value").get<std::vector<double>>();
      ConstantVariance m{Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()))};
      if ((m.value.array() <= 0.0).any()) fail(ErrorCode::parse, "fixed variance must be positive");
      return m;
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::parse, std::string("malformed fixed variance: ") + e.what());
    }
  }
  if (kind == "deep-net") return DeepVariance{mlp_from_json(doc)};
  if (kind == "rbf") return rbf_from_json(doc);
  fail(ErrorCode::parse, "unknown variance kind '" + kind + "'");
}

void GeneratorModel::validate() const {
  std::visit(overloaded{[&](const ConstantVariance& m) {
                          require_dims(m.value.size(), output_dim(), "constant variance");
                          if ((m.value.array() <= 0.0).any()) {
                            fail(ErrorCode::invalid_argument, "constant variance must be positive");
                          }
                        },
                        [&](const DeepVariance& m) {
                          require_dims(m.net.in_dim(), latent_dim(), "deep variance input");
                          require_dims(m.net.out_dim(), output_dim(), "deep variance output");
                        },
                        [&](const RbfPrecision& m) {
                          m.validate();
                          require_dims(m.latent_dim(), latent_dim(), "RBF latent dim");
                          require_dims(m.output_dim(), output_dim(), "RBF output dim");
                        }},
             variance);
}

GeneratorModel identity_generator(int dim) {
  return linear_generator(Mat::Identity(dim, dim));
}

GeneratorModel linear_generator(const Mat& a) {
  GeneratorModel g{Mlp::affine(a, Vec::Zero(a.rows())), ConstantVariance{Vec::Ones(a.rows())}};
  return g;
}

}  // namespace lr
