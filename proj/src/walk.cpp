#include "lr/walk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "lr/error.hpp"
#include "lr/parallel.hpp"

namespace lr {

const char* to_string(WalkKind kind) {
  switch (kind) {
    case WalkKind::riemannian:
      return "riemannian";
    case WalkKind::euclidean:
      return "euclidean";
    case WalkKind::hypercube:
      return "hypercube";
  }
  return "riemannian";
}

WalkKind walk_kind_from_string(const std::string& name) {
  if (name == "riemannian") return WalkKind::riemannian;
  if (name == "euclidean") return WalkKind::euclidean;
  if (name == "hypercube") return WalkKind::hypercube;
  fail(ErrorCode::invalid_argument, "unknown walk kind '" + name + "'");
}

BrownianStep brownian_step(const MetricField& field, const Vec& z, double s, const Vec& eps) {
  require_dims(z.size(), field.dim(), "brownian_step position");
  require_dims(eps.size(), field.dim(), "brownian_step noise");
  const Eigen::SelfAdjointEigenSolver<Mat> eig(symmetrize(field.metric(z)));
  if (eig.info() != Eigen::Success) fail(ErrorCode::non_finite, "brownian_step: eigendecomposition failed");
  BrownianStep out;
  Vec scale(z.size());
  for (Eigen::Index i = 0; i < scale.size(); ++i) {
    double l = eig.eigenvalues()[i];
    if (!(l >= eigenvalue_clamp)) {
      l = eigenvalue_clamp;
      ++out.clamped;
    }
    scale[i] = 1.0 / std::sqrt(l);
  }
  out.z = z + s * (eig.eigenvectors() * scale.cwiseProduct(eps));
  return out;
}

WalkTrace run_walk(const MetricField& field, const Vec& z0, double s, int n_steps, std::uint64_t seed,
                   WalkKind kind, const WalkOptions& options) {
  require_dims(z0.size(), field.dim(), "run_walk start");
  if (n_steps < 1) fail(ErrorCode::invalid_argument, "run_walk needs at least one step");
  if (!(s > 0.0) || !std::isfinite(s)) fail(ErrorCode::invalid_argument, "run_walk step size must be positive");
  if (kind == WalkKind::hypercube) {
    require_dims(options.lower.size(), z0.size(), "hypercube lower bound");
    require_dims(options.upper.size(), z0.size(), "hypercube upper bound");
  }
  WalkTrace trace;
  trace.stepsize = s;
  trace.seed = seed;
  trace.kind = kind;
  trace.steps.resize(n_steps + 1, z0.size());
  trace.steps.row(0) = z0.transpose();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec z = z0;
  for (int n = 1; n <= n_steps; ++n) {
    const Vec eps = Vec::NullaryExpr(z.size(), [&] { return normal(rng); });
    if (kind == WalkKind::riemannian) {
      auto step = brownian_step(field, z, s, eps);
      trace.clamp_warnings += step.clamped;
      z = std::move(step.z);
    } else {
      const Vec next = z + s * eps;
      if (kind == WalkKind::hypercube &&
          ((next.array() < options.lower.array()).any() || (next.array() > options.upper.array()).any())) {
        ++trace.rejected;
      } else {
        z = next;
      }
    }
    if (!z.allFinite()) fail(ErrorCode::non_finite, "walk state became non-finite at step " + std::to_string(n));
    trace.steps.row(n) = z.transpose();
  }
  return trace;
}

double default_stepsize(const Mat& codes) {
  if (codes.rows() < 2) fail(ErrorCode::invalid_argument, "default_stepsize needs at least two codes");
  const Eigen::RowVectorXd mean = codes.colwise().mean();
  const Eigen::RowVectorXd var = (codes.rowwise() - mean).array().square().colwise().sum() / (codes.rows() - 1.0);
  const double s = 0.05 * var.array().sqrt().mean();
  if (!(s > 0.0)) fail(ErrorCode::degenerate, "default_stepsize: codes have zero spread");
  return s;
}

WalkOptions bounding_box(const Mat& codes, double margin) {
  if (codes.rows() < 1) fail(ErrorCode::invalid_argument, "bounding_box needs codes");
  WalkOptions box;
  box.lower = codes.colwise().minCoeff().transpose();
  box.upper = codes.colwise().maxCoeff().transpose();
  const Vec pad = margin * (box.upper - box.lower);
  box.lower -= pad;
  box.upper += pad;
  return box;
}

namespace {

Vec measures(const MetricField& field, const Mat& states) {
  Vec out(states.rows());
  parallel_for(static_cast<std::size_t>(states.rows()), [&](std::size_t i) {
    const auto r = static_cast<Eigen::Index>(i);
    out[r] = field.volume_measure(states.row(r).transpose());
  });
  return out;
}

}  // namespace

SupportBand calibrate_support(const MetricField& field, const Mat& codes, double upper_quantile,
                              double lower_factor) {
  require_dims(codes.cols(), field.dim(), "calibrate_support codes");
  if (codes.rows() < 1) fail(ErrorCode::invalid_argument, "calibrate_support needs codes");
  if (!(upper_quantile > 0.0 && upper_quantile <= 1.0)) {
    fail(ErrorCode::invalid_argument, "calibrate_support: quantile must lie in (0, 1]");
  }
  const Vec m = measures(field, codes);
  std::vector<double> sorted(m.data(), m.data() + m.size());
  std::sort(sorted.begin(), sorted.end());
  // Nearest-rank quantile, so at least that fraction of codes sits at or below it.
  const auto rank = static_cast<std::size_t>(std::ceil(upper_quantile * static_cast<double>(sorted.size())));
  SupportBand band;
  band.upper = std::nextafter(sorted[std::max<std::size_t>(rank, 1) - 1], std::numeric_limits<double>::infinity());
  band.lower = lower_factor * sorted.front();
  return band;
}

double support_fraction(const MetricField& field, const Mat& states, const SupportBand& band) {
  require_dims(states.cols(), field.dim(), "support_fraction states");
  if (states.rows() == 0) return 0.0;
  const Vec m = measures(field, states);
  const auto inside = (m.array() >= band.lower && m.array() < band.upper).count();
  return static_cast<double>(inside) / static_cast<double>(m.size());
}

}  // namespace lr
