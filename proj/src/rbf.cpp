#include "lr/rbf.hpp"

#include <cmath>

#include "lr/error.hpp"
#include "lr/kmeans.hpp"

namespace lr {

void RbfPrecision::validate() const {
  const auto k = centers.rows();
  require_dims(bandwidths.size(), k, "RbfPrecision bandwidths");
  require_dims(weights.cols(), k, "RbfPrecision weight columns");
  require_dims(zeta.size(), weights.rows(), "RbfPrecision zeta");
  if ((bandwidths.array() <= 0.0).any()) fail(ErrorCode::invalid_argument, "RBF bandwidths must be positive");
  if ((zeta.array() <= 0.0).any()) fail(ErrorCode::invalid_argument, "RBF floor zeta must be positive");
  if ((weights.array() < 0.0).any()) fail(ErrorCode::invalid_argument, "RBF weights must be nonnegative");
  if (!centers.allFinite() || !weights.allFinite()) fail(ErrorCode::non_finite, "RBF parameters are not finite");
}

Vec rbf_features(const RbfPrecision& model, const Vec& z) {
  require_dims(z.size(), model.latent_dim(), "rbf_features input");
  Vec v(model.num_centers());
  for (int k = 0; k < model.num_centers(); ++k) {
    v[k] = std::exp(-model.bandwidths[k] * (z.transpose() - model.centers.row(k)).squaredNorm());
  }
  return v;
}

Mat rbf_features_jacobian(const RbfPrecision& model, const Vec& z) {
  const Vec v = rbf_features(model, z);
  Mat jac(model.num_centers(), model.latent_dim());
  for (int k = 0; k < model.num_centers(); ++k) {
    jac.row(k) = -2.0 * model.bandwidths[k] * v[k] * (z.transpose() - model.centers.row(k));
  }
  return jac;
}

Vec precision(const RbfPrecision& model, const Vec& z) {
  return model.weights * rbf_features(model, z) + model.zeta;
}

Vec variance(const RbfPrecision& model, const Vec& z) { return precision(model, z).cwiseInverse(); }

Mat precision_jacobian(const RbfPrecision& model, const Vec& z) {
  return model.weights * rbf_features_jacobian(model, z);
}

Vec stddev(const RbfPrecision& model, const Vec& z) {
  return precision(model, z).cwiseSqrt().cwiseInverse();
}

Mat stddev_jacobian(const RbfPrecision& model, const Vec& z) {
  const Vec beta = precision(model, z);
  Mat jac = precision_jacobian(model, z);
  for (Eigen::Index j = 0; j < jac.rows(); ++j) {
    jac.row(j) *= -0.5 * std::pow(beta[j], -1.5);
  }
  return jac;
}

CentersBandwidths fit_centers_bandwidths(const Mat& codes, int num_centers, double a,
                                         std::uint64_t seed, int restarts) {
  if (num_centers < 1 || num_centers > codes.rows()) {
    fail(ErrorCode::invalid_argument, "fit_centers_bandwidths: need 1 <= K <= N");
  }
  if (!(a > 0.0)) fail(ErrorCode::invalid_argument, "fit_centers_bandwidths: a must be positive");
  KMeansOptions options;
  options.restarts = restarts;
  auto km = kmeans(codes, num_centers, seed, options);

  CentersBandwidths out;
  out.centers = km.centers;
  out.assignments = km.assignments;
  out.bandwidths.resize(num_centers);
  Vec dist_sum = Vec::Zero(num_centers);
  Eigen::VectorXi counts = Eigen::VectorXi::Zero(num_centers);
  for (Eigen::Index i = 0; i < codes.rows(); ++i) {
    const int c = km.assignments[static_cast<std::size_t>(i)];
    dist_sum[c] += (codes.row(i) - km.centers.row(c)).norm();
    ++counts[c];
  }
  for (int c = 0; c < num_centers; ++c) {
    const double mean_dist = counts[c] > 0 ? dist_sum[c] / counts[c] : 0.0;
    // Rounding in the k-means mean leaves tiny distances for coincident members.
    if (!(mean_dist > 1e-12 * (1.0 + km.centers.row(c).norm()))) {
      fail(ErrorCode::degenerate,
           "RBF center " + std::to_string(c) +
               " has zero mean member distance; its bandwidth is undefined (use fewer centers)");
    }
    const double scaled = a * mean_dist;
    out.bandwidths[c] = 0.5 / (scaled * scaled);
  }
  return out;
}

namespace {

double row_objective(const Eigen::RowVectorXd& w, double zeta, const Mat& features,
                     const Eigen::VectorXd& resid, double l2) {
  const Vec beta = features * w.transpose() + Vec::Constant(features.rows(), zeta);
  double total = 0.0;
  for (Eigen::Index n = 0; n < beta.size(); ++n) {
    total += 0.5 * std::log(beta[n]) - 0.5 * beta[n] * resid[n];
  }
  return total / static_cast<double>(features.rows()) - 0.5 * l2 * w.squaredNorm();
}

}  // namespace

double rbf_weight_objective(const RbfPrecision& model, const Mat& features, const Mat& residuals) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < model.weights.rows(); ++j) {
    total += row_objective(model.weights.row(j), model.zeta[j], features, residuals.col(j), 0.0);
  }
  return total;
}

WeightFitTrace fit_weights(RbfPrecision& model, const Mat& codes, const Mat& residuals,
                           const WeightFitOptions& options) {
  model.validate();
  require_dims(codes.cols(), model.latent_dim(), "fit_weights codes");
  require_dims(residuals.rows(), codes.rows(), "fit_weights residual rows");
  require_dims(residuals.cols(), model.output_dim(), "fit_weights residual cols");

  Mat features(codes.rows(), model.num_centers());
  for (Eigen::Index n = 0; n < codes.rows(); ++n) {
    features.row(n) = rbf_features(model, codes.row(n).transpose()).transpose();
  }
  const double inv_n = 1.0 / static_cast<double>(codes.rows());

  WeightFitTrace trace;
  std::vector<double> row_values(static_cast<std::size_t>(model.output_dim()));
  std::vector<double> row_steps(static_cast<std::size_t>(model.output_dim()), options.step);
  double total = 0.0;
  for (int j = 0; j < model.output_dim(); ++j) {
    row_values[static_cast<std::size_t>(j)] =
        row_objective(model.weights.row(j), model.zeta[j], features, residuals.col(j), options.l2);
    total += row_values[static_cast<std::size_t>(j)];
  }
  if (!std::isfinite(total)) fail(ErrorCode::non_finite, "fit_weights: non-finite objective at iteration 0");
  trace.objective.push_back(total);

  for (int iter = 1; iter <= options.iterations; ++iter) {
    double max_move = 0.0;
    total = 0.0;
    for (int j = 0; j < model.output_dim(); ++j) {
      const auto js = static_cast<std::size_t>(j);
      Eigen::RowVectorXd w = model.weights.row(j);
      const Vec beta = features * w.transpose() + Vec::Constant(features.rows(), model.zeta[j]);
      const Vec coeff = 0.5 * (beta.cwiseInverse() - residuals.col(j)) * inv_n;
      const Eigen::RowVectorXd grad = coeff.transpose() * features - options.l2 * w;

      double step = row_steps[js];
      bool accepted = false;
      for (int halving = 0; halving < 60; ++halving) {
        const Eigen::RowVectorXd trial = (w + step * grad).cwiseMax(0.0);
        const double value = row_objective(trial, model.zeta[j], features, residuals.col(j), options.l2);
        if (!std::isfinite(value)) {
          step *= 0.5;
          continue;
        }
        if (value >= row_values[js]) {
          max_move = std::max(max_move, (trial - w).cwiseAbs().maxCoeff());
          model.weights.row(j) = trial;
          row_values[js] = value;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      row_steps[js] = accepted ? std::min(step * 2.0, 1e12) : step;
      total += row_values[js];
    }
    if (!std::isfinite(total)) {
      fail(ErrorCode::non_finite, "fit_weights: non-finite objective at iteration " + std::to_string(iter));
    }
    trace.objective.push_back(total);
    trace.iterations = iter;
    if (max_move < options.grad_tol) break;
  }
  return trace;
}

nlohmann::json to_json(const RbfPrecision& model) {
  auto mat_rows = [](const Mat& m) {
    std::vector<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      rows.emplace_back(static_cast<std::size_t>(m.cols()));
      for (Eigen::Index j = 0; j < m.cols(); ++j) rows.back()[static_cast<std::size_t>(j)] = m(i, j);
    }
    return rows;
  };
  auto vec = [](const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return {{"centers", mat_rows(model.centers)},
          {"bandwidths", vec(model.bandwidths)},
          {"weights", mat_rows(model.weights)},
          {"zeta", vec(model.zeta)},
          {"a", model.a}};
}

RbfPrecision rbf_from_json(const nlohmann::json& doc) {
  try {
    auto read_mat = [](const nlohmann::json& rows, Eigen::Index cols_hint) {
      const auto data = rows.get<std::vector<std::vector<double>>>();
      const auto r = static_cast<Eigen::Index>(data.size());
      const Eigen::Index c = r > 0 ? static_cast<Eigen::Index>(data[0].size()) : cols_hint;
      Mat m(r, c);
      for (Eigen::Index i = 0; i < r; ++i) {
        if (static_cast<Eigen::Index>(data[static_cast<std::size_t>(i)].size()) != c) {
          fail(ErrorCode::parse, "ragged matrix in RBF document");
        }
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = data[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      }
      return m;
    };
    RbfPrecision model;
    model.centers = read_mat(doc.at("centers"), 0);
    const auto bw = doc.at("bandwidths").get<std::vector<double>>();
    model.bandwidths = Eigen::Map<const Vec>(bw.data(), static_cast<Eigen::Index>(bw.size()));
    model.weights = read_mat(doc.at("weights"), model.centers.rows());
    const auto zeta = doc.at("zeta").get<std::vector<double>>();
    model.zeta = Eigen::Map<const Vec>(zeta.data(), static_cast<Eigen::Index>(zeta.size()));
    model.a = doc.at("a").get<double>();
    model.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse, std::string("malformed RBF document: ") + e.what());
  }
}

}  // namespace lr
