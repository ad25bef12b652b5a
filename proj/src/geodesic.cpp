#include "lr/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/numeric/odeint.hpp>

#include "lr/error.hpp"

namespace lr {

DiscreteCurve DiscreteCurve::straight(const Vec& z0, const Vec& z1, int num_nodes) {
  require_dims(z1.size(), z0.size(), "straight curve endpoints");
  if (num_nodes < 3) fail(ErrorCode::invalid_argument, "a discrete curve needs at least 3 nodes");
  DiscreteCurve c;
  c.nodes.resize(num_nodes, z0.size());
  for (int i = 0; i < num_nodes; ++i) {
    const double t = static_cast<double>(i) / (num_nodes - 1);
    c.nodes.row(i) = ((1.0 - t) * z0 + t * z1).transpose();
  }
  c.nodes.row(0) = z0.transpose();
  c.nodes.row(num_nodes - 1) = z1.transpose();
  return c;
}

void DiscreteCurve::validate() const {
  if (nodes.rows() < 3) fail(ErrorCode::invalid_argument, "a discrete curve needs at least 3 nodes");
  if (!nodes.allFinite()) fail(ErrorCode::non_finite, "curve has non-finite nodes");
}

Mat DiscreteCurve::velocities() const {
  validate();
  const int t = size();
  const double h = dt();
  Mat v(t, dim());
  const auto& g = nodes;
  if (t < 5) {
    for (int i = 1; i + 1 < t; ++i) v.row(i) = (g.row(i + 1) - g.row(i - 1)) / (2.0 * h);
    v.row(0) = (-3.0 * g.row(0) + 4.0 * g.row(1) - g.row(2)) / (2.0 * h);
    v.row(t - 1) = (3.0 * g.row(t - 1) - 4.0 * g.row(t - 2) + g.row(t - 3)) / (2.0 * h);
    return v;
  }
  // Fourth-order stencils throughout.
  const double c = 1.0 / (12.0 * h);
  for (int i = 2; i + 2 < t; ++i) {
    v.row(i) = c * (g.row(i - 2) - 8.0 * g.row(i - 1) + 8.0 * g.row(i + 1) - g.row(i + 2));
  }
  v.row(1) = c * (-3.0 * g.row(0) - 10.0 * g.row(1) + 18.0 * g.row(2) - 6.0 * g.row(3) + g.row(4));
  v.row(t - 2) = -c * (-3.0 * g.row(t - 1) - 10.0 * g.row(t - 2) + 18.0 * g.row(t - 3) - 6.0 * g.row(t - 4) + g.row(t - 5));
  v.row(0) = c * (-25.0 * g.row(0) + 48.0 * g.row(1) - 36.0 * g.row(2) + 16.0 * g.row(3) - 3.0 * g.row(4));
  v.row(t - 1) = -c * (-25.0 * g.row(t - 1) + 48.0 * g.row(t - 2) - 36.0 * g.row(t - 3) + 16.0 * g.row(t - 4) - 3.0 * g.row(t - 5));
  return v;
}

DiscreteCurve DiscreteCurve::resampled(int num_nodes) const {
  validate();
  if (num_nodes < 3) fail(ErrorCode::invalid_argument, "a discrete curve needs at least 3 nodes");
  DiscreteCurve out;
  out.nodes.resize(num_nodes, dim());
  const int t_old = size();
  for (int i = 0; i < num_nodes; ++i) {
    const double s = static_cast<double>(i) / (num_nodes - 1) * (t_old - 1);
    const int lo = std::min(static_cast<int>(std::floor(s)), t_old - 2);
    const double frac = s - lo;
    out.nodes.row(i) = (1.0 - frac) * nodes.row(lo) + frac * nodes.row(lo + 1);
  }
  out.nodes.row(0) = nodes.row(0);
  out.nodes.row(num_nodes - 1) = nodes.row(t_old - 1);
  return out;
}

double DiscreteCurve::coordinate_length() const {
  double total = 0.0;
  for (int i = 0; i + 1 < size(); ++i) total += (nodes.row(i + 1) - nodes.row(i)).norm();
  return total;
}

namespace {

double trapezoid_weight(int i, int t, double h) { return (i == 0 || i == t - 1) ? 0.5 * h : h; }

}  // namespace

double curve_length(const MetricField& field, const DiscreteCurve& curve) {
  const Mat v = curve.velocities();
  double total = 0.0;
  for (int i = 0; i < curve.size(); ++i) {
    const Vec vi = v.row(i).transpose();
    const double sq = vi.dot(field.metric(curve.node(i)) * vi);
    total += trapezoid_weight(i, curve.size(), curve.dt()) * std::sqrt(std::max(sq, 0.0));
  }
  return total;
}

double curve_energy(const MetricField& field, const DiscreteCurve& curve) {
  const Mat v = curve.velocities();
  double total = 0.0;
  for (int i = 0; i < curve.size(); ++i) {
    const Vec vi = v.row(i).transpose();
    total += trapezoid_weight(i, curve.size(), curve.dt()) * vi.dot(field.metric(curve.node(i)) * vi);
  }
  return total;
}

Vec geodesic_ode_rhs(const Mat& metric, const MetricDerivative& dmetric, const Vec& velocity) {
  const auto d = velocity.size();
  require_dims(dmetric.tensor.rows(), d * d, "metric derivative rows");
  // I_d (x) v^T : d x d^2
  Mat kron_left = Mat::Zero(d, d * d);
  for (Eigen::Index i = 0; i < d; ++i) kron_left.block(i, i * d, 1, d) = velocity.transpose();
  // v (x) v : d^2
  Vec kron_vv(d * d);
  for (Eigen::Index i = 0; i < d; ++i) kron_vv.segment(i * d, d) = velocity[i] * velocity;
  const Vec bracket = 2.0 * kron_left * dmetric.tensor * velocity - dmetric.tensor.transpose() * kron_vv;
  return -0.5 * clamped_inverse(metric) * bracket;
}

Vec geodesic_ode_rhs(const MetricField& field, const Vec& position, const Vec& velocity) {
  require_dims(position.size(), field.dim(), "ode position");
  require_dims(velocity.size(), field.dim(), "ode velocity");
  Mat m;
  MetricDerivative dm;
  field.metric_and_derivative(position, m, dm);
  try {
    return geodesic_ode_rhs(m, dm, velocity);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::singular_metric) throw;
    std::string where;
    for (Eigen::Index i = 0; i < position.size(); ++i) where += (i ? ", " : "") + std::to_string(position[i]);
    fail(ErrorCode::singular_metric, std::string(e.what()) + " at z = (" + where + ")");
  }
}

namespace {

// d rhs / d v for fixed position; the right-hand side is quadratic in v.
Mat rhs_velocity_jacobian(const Mat& minv, const MetricDerivative& dm, const Vec& v) {
  const auto d = v.size();
  Mat weighted = Mat::Zero(d, d);
  Mat p(d, d);
  for (Eigen::Index l = 0; l < d; ++l) {
    const Mat slice = dm.slice(static_cast<int>(l));
    weighted += v[l] * slice;
    p.col(l) = slice * v;
  }
  return -minv * (weighted + p - p.transpose());
}

struct Collocation {
  Vec residual;  // (T - 2) d
  double max_norm = 0.0;
};

Collocation collocation_residual(const MetricField& field, const Mat& nodes) {
  const auto t = nodes.rows();
  const auto d = nodes.cols();
  const double h = 1.0 / static_cast<double>(t - 1);
  Collocation out;
  out.residual.resize((t - 2) * d);
  for (Eigen::Index i = 1; i + 1 < t; ++i) {
    const Vec pos = nodes.row(i).transpose();
    const Vec vel = (nodes.row(i + 1) - nodes.row(i - 1)).transpose() / (2.0 * h);
    const Vec acc = (nodes.row(i + 1) - 2.0 * nodes.row(i) + nodes.row(i - 1)).transpose() / (h * h);
    const Vec r = acc - geodesic_ode_rhs(field, pos, vel);
    out.residual.segment((i - 1) * d, d) = r;
    out.max_norm = std::max(out.max_norm, r.norm());
  }
  return out;
}

double coordinate_length(const Mat& nodes) {
  double total = 0.0;
  for (Eigen::Index i = 0; i + 1 < nodes.rows(); ++i) total += (nodes.row(i + 1) - nodes.row(i)).norm();
  return total;
}

double normalized(double max_norm, const Mat& nodes) {
  return max_norm / std::max(coordinate_length(nodes), 1e-12);
}

// Energy with the metric averaged over each segment's end nodes.
double segment_energy(const std::vector<Mat>& metrics, const Mat& nodes) {
  const auto t = nodes.rows();
  const double h = 1.0 / static_cast<double>(t - 1);
  double total = 0.0;
  for (Eigen::Index i = 0; i + 1 < t; ++i) {
    const Vec delta = (nodes.row(i + 1) - nodes.row(i)).transpose();
    total += 0.5 * delta.dot((metrics[static_cast<std::size_t>(i)] + metrics[static_cast<std::size_t>(i + 1)]) * delta);
  }
  return total / h;
}

struct RelaxationOutcome {
  Mat nodes;
  double energy = 0.0;
  double last_relative_change = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

RelaxationOutcome relax_energy(const MetricField& field, Mat nodes, const GeodesicConfig& cfg) {
  const auto t = nodes.rows();
  const auto d = nodes.cols();
  const auto n_free = (t - 2) * d;
  const double h = 1.0 / static_cast<double>(t - 1);

  std::vector<Mat> metrics(static_cast<std::size_t>(t));
  for (Eigen::Index i = 0; i < t; ++i) metrics[static_cast<std::size_t>(i)] = field.metric(nodes.row(i).transpose());
  std::vector<MetricDerivative> derivs(static_cast<std::size_t>(t));

  RelaxationOutcome out;
  double energy = segment_energy(metrics, nodes);
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    Vec grad(n_free);
    for (Eigen::Index i = 1; i + 1 < t; ++i) {
      const auto si = static_cast<std::size_t>(i);
      field.metric_and_derivative(nodes.row(i).transpose(), metrics[si], derivs[si]);
    }
    Mat hess = Mat::Zero(n_free, n_free);
    double scale = 0.0;
    for (Eigen::Index i = 1; i + 1 < t; ++i) {
      const auto si = static_cast<std::size_t>(i);
      const Vec back = (nodes.row(i) - nodes.row(i - 1)).transpose();
      const Vec fwd = (nodes.row(i + 1) - nodes.row(i)).transpose();
      const Mat left = metrics[si - 1] + metrics[si];
      const Mat right = metrics[si] + metrics[si + 1];
      Vec g = left * back - right * fwd;
      for (Eigen::Index l = 0; l < d; ++l) {
        const Mat slice = derivs[si].slice(static_cast<int>(l));
        g[l] += 0.5 * (back.dot(slice * back) + fwd.dot(slice * fwd));
      }
      grad.segment((i - 1) * d, d) = g / h;
      hess.block((i - 1) * d, (i - 1) * d, d, d) = (left + right) / h;
      if (i + 2 < t) {
        hess.block((i - 1) * d, i * d, d, d) = -right / h;
        hess.block(i * d, (i - 1) * d, d, d) = -right / h;
      }
      scale = std::max(scale, (left + right).diagonal().maxCoeff() / h);
    }
    hess.diagonal().array() += std::max(scale, 1.0) * 1e-12;
    Vec step = -hess.ldlt().solve(grad);
    double slope = grad.dot(step);
    if (!step.allFinite() || slope >= 0.0) {
      step = -grad;
      slope = -grad.squaredNorm();
    }
    if (slope == 0.0) {
      out.last_relative_change = 0.0;
      break;
    }
    // Trust region: no node moves further than a quarter of the curve's coordinate length per step.
    double max_move = 0.0;
    for (Eigen::Index i = 0; i < t - 2; ++i) max_move = std::max(max_move, step.segment(i * d, d).norm());
    const double radius = 0.25 * coordinate_length(nodes);
    if (max_move > radius) {
      step *= radius / max_move;
      slope *= radius / max_move;
    }

    bool accepted = false;
    double alpha = 1.0;
    Mat trial = nodes;
    std::vector<Mat> trial_metrics = metrics;
    double trial_energy = energy;
    for (int k = 0; k < 40; ++k) {
      trial = nodes;
      for (Eigen::Index i = 1; i + 1 < t; ++i) trial.row(i) += alpha * step.segment((i - 1) * d, d).transpose();
      bool finite = true;
      try {
        for (Eigen::Index i = 1; i + 1 < t; ++i) {
          trial_metrics[static_cast<std::size_t>(i)] = field.metric(trial.row(i).transpose());
        }
        trial_energy = segment_energy(trial_metrics, trial);
        finite = std::isfinite(trial_energy);
      } catch (const Error&) {
        finite = false;
      }
      if (finite && trial_energy <= energy + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    out.iterations = iter + 1;
    if (!accepted) {
      out.last_relative_change = 0.0;
      break;
    }
    out.last_relative_change = (energy - trial_energy) / std::max(energy, 1e-300);
    nodes = std::move(trial);
    metrics = std::move(trial_metrics);
    energy = trial_energy;
    if (out.last_relative_change < cfg.ftol) break;
  }
  out.nodes = std::move(nodes);
  out.energy = energy;
  return out;
}

struct PolishOutcome {
  Mat nodes;
  double residual = std::numeric_limits<double>::infinity();
  double last_relative_change = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

// Newton iterations on the finite-difference collocation equations
//   (g_{i+1} - 2 g_i + g_{i-1}) / h^2 = rhs(g_i, (g_{i+1} - g_{i-1}) / 2h).
PolishOutcome polish_newton(const MetricField& field, Mat nodes, const GeodesicConfig& cfg) {
  const auto t = nodes.rows();
  const auto d = nodes.cols();
  const auto n_free = (t - 2) * d;
  const double h = 1.0 / static_cast<double>(t - 1);
  const double target = cfg.tol * 1e-4;

  PolishOutcome out;
  auto energy_of = [&](const Mat& x) {
    std::vector<Mat> metrics(static_cast<std::size_t>(t));
    for (Eigen::Index i = 0; i < t; ++i) metrics[static_cast<std::size_t>(i)] = field.metric(x.row(i).transpose());
    return segment_energy(metrics, x);
  };

  Collocation current = collocation_residual(field, nodes);
  double energy = energy_of(nodes);
  for (int iter = 0; iter < cfg.max_newton_iterations; ++iter) {
    out.residual = normalized(current.max_norm, nodes);
    if (out.residual < target) break;

    Mat jac = Mat::Zero(n_free, n_free);
    for (Eigen::Index i = 1; i + 1 < t; ++i) {
      const Vec pos = nodes.row(i).transpose();
      const Vec vel = (nodes.row(i + 1) - nodes.row(i - 1)).transpose() / (2.0 * h);
      Mat m;
      MetricDerivative dm;
      field.metric_and_derivative(pos, m, dm);
      const Mat b = rhs_velocity_jacobian(clamped_inverse(m), dm, vel);
      Mat a(d, d);
      const double delta = 1e-4 * (1.0 + pos.norm());
      for (Eigen::Index k = 0; k < d; ++k) {
        Vec plus = pos, minus = pos;
        plus[k] += delta;
        minus[k] -= delta;
        a.col(k) = (geodesic_ode_rhs(field, plus, vel) - geodesic_ode_rhs(field, minus, vel)) / (2.0 * delta);
      }
      const Mat ident = Mat::Identity(d, d);
      const auto row = (i - 1) * d;
      jac.block(row, row, d, d) = -2.0 * ident / (h * h) - a;
      if (i > 1) jac.block(row, row - d, d, d) = ident / (h * h) + b / (2.0 * h);
      if (i + 2 < t) jac.block(row, row + d, d, d) = ident / (h * h) - b / (2.0 * h);
    }
    const Vec step = jac.partialPivLu().solve(-current.residual);
    if (!step.allFinite()) break;

    const double norm0 = current.residual.norm();
    bool accepted = false;
    double lambda = 1.0;
    for (int k = 0; k < 12; ++k) {
      Mat trial = nodes;
      for (Eigen::Index i = 1; i + 1 < t; ++i) trial.row(i) += lambda * step.segment((i - 1) * d, d).transpose();
      try {
        Collocation next = collocation_residual(field, trial);
        if (std::isfinite(next.residual.norm()) && next.residual.norm() < (1.0 - 1e-4 * lambda) * norm0) {
          const double trial_energy = energy_of(trial);
          out.last_relative_change = std::abs(energy - trial_energy) / std::max(energy, 1e-300);
          energy = trial_energy;
          nodes = std::move(trial);
          current = std::move(next);
          accepted = true;
          break;
        }
      } catch (const Error&) {
      }
      lambda *= 0.5;
    }
    out.iterations = iter + 1;
    if (!accepted) break;
  }
  out.residual = normalized(current.max_norm, nodes);
  out.nodes = std::move(nodes);
  return out;
}

}  // namespace

double ode_residual(const MetricField& field, const DiscreteCurve& curve) {
  curve.validate();
  return normalized(collocation_residual(field, curve.nodes).max_norm, curve.nodes);
}

GeodesicSolution shortest_path(const MetricField& field, const Vec& z0, const Vec& z1, const GeodesicConfig& cfg) {
  require_dims(z0.size(), field.dim(), "shortest_path start");
  require_dims(z1.size(), field.dim(), "shortest_path end");
  if (cfg.nodes < 3) fail(ErrorCode::invalid_argument, "shortest_path needs at least 3 nodes");
  GeodesicSolution sol;
  if (z0 == z1) {
    sol.curve = DiscreteCurve::straight(z0, z1, cfg.nodes);
    sol.converged = true;
    sol.strategy = "trivial";
    return sol;
  }

  Mat init;
  if (cfg.initial) {
    DiscreteCurve warm = cfg.initial->resampled(cfg.nodes);
    const Vec shift0 = z0 - warm.node(0);
    const Vec shift1 = z1 - warm.node(cfg.nodes - 1);
    for (int i = 0; i < cfg.nodes; ++i) {
      const double t = static_cast<double>(i) / (cfg.nodes - 1);
      warm.nodes.row(i) += ((1.0 - t) * shift0 + t * shift1).transpose();
    }
    init = std::move(warm.nodes);
  } else {
    init = DiscreteCurve::straight(z0, z1, cfg.nodes).nodes;
  }
  init.row(0) = z0.transpose();
  init.row(cfg.nodes - 1) = z1.transpose();

  RelaxationOutcome relaxed = relax_energy(field, std::move(init), cfg);
  sol.iterations = relaxed.iterations;
  sol.curve.nodes = relaxed.nodes;
  sol.strategy = "energy-relaxation";
  double last_change = relaxed.last_relative_change;
  // A curve that wanders into a degenerate region has no usable residual.
  try {
    sol.residual = ode_residual(field, sol.curve);
  } catch (const Error&) {
    sol.residual = std::numeric_limits<double>::infinity();
  }

  if (cfg.polish && sol.residual >= cfg.tol * 1e-4) {
    PolishOutcome polished;
    try {
      polished = polish_newton(field, relaxed.nodes, cfg);
    } catch (const Error&) {
      polished.iterations = 0;
    }
    sol.newton_iterations = polished.iterations;
    if (polished.iterations > 0 && polished.residual < sol.residual) {
      DiscreteCurve candidate{polished.nodes};
      const double relaxed_length = curve_length(field, sol.curve);
      // Keep the polish only when it stays on the relaxed curve's branch.
      if (curve_length(field, candidate) <= relaxed_length * (1.0 + 1e-2)) {
        sol.curve = std::move(candidate);
        sol.residual = polished.residual;
        last_change = polished.last_relative_change;
        sol.strategy = "energy-relaxation+newton";
      }
    }
  }
  sol.curve.nodes.row(0) = z0.transpose();
  sol.curve.nodes.row(cfg.nodes - 1) = z1.transpose();
  sol.length = curve_length(field, sol.curve);
  sol.energy = curve_energy(field, sol.curve);
  sol.converged = sol.residual < cfg.tol && last_change < cfg.ftol;
  return sol;
}

ExpMapResult exp_map(const MetricField& field, const Vec& z0, const Vec& v, const ExpMapConfig& cfg) {
  namespace odeint = boost::numeric::odeint;
  require_dims(z0.size(), field.dim(), "exp_map start");
  require_dims(v.size(), field.dim(), "exp_map velocity");
  if (!v.allFinite()) fail(ErrorCode::non_finite, "exp_map velocity is not finite");
  const auto d = z0.size();
  using State = std::vector<double>;
  State x(static_cast<std::size_t>(2 * d));
  for (Eigen::Index i = 0; i < d; ++i) {
    x[static_cast<std::size_t>(i)] = z0[i];
    x[static_cast<std::size_t>(d + i)] = v[i];
  }
  ExpMapResult out;
  std::vector<State> trace{x};
  out.times.push_back(0.0);

  if (v.squaredNorm() > 0.0) {
    auto system = [&](const State& s, State& ds, double) {
      const Vec pos = Eigen::Map<const Vec>(s.data(), d);
      const Vec vel = Eigen::Map<const Vec>(s.data() + d, d);
      const Vec acc = geodesic_ode_rhs(field, pos, vel);
      for (Eigen::Index i = 0; i < d; ++i) {
        ds[static_cast<std::size_t>(i)] = vel[i];
        ds[static_cast<std::size_t>(d + i)] = acc[i];
      }
    };
    auto stepper = odeint::make_controlled(cfg.abs_tol, cfg.rel_tol, odeint::runge_kutta_dopri5<State>());
    double t = 0.0;
    double dt = cfg.initial_step;
    while (t < 1.0) {
      if (out.steps >= cfg.max_steps) fail(ErrorCode::step_underflow, "exp_map exceeded its step budget");
      dt = std::min(dt, 1.0 - t);
      if (1.0 - t - dt < 1e-14) dt = 1.0 - t;
      const auto result = stepper.try_step(system, x, t, dt);
      if (result == odeint::success) {
        if (!std::all_of(x.begin(), x.end(), [](double a) { return std::isfinite(a); })) {
          fail(ErrorCode::non_finite, "exp_map state became non-finite");
        }
        ++out.steps;
        trace.push_back(x);
        out.times.push_back(t);
        if (1.0 - t < 1e-14) break;
      } else if (dt < cfg.min_step) {
        fail(ErrorCode::step_underflow, "exp_map step size underflow at t = " + std::to_string(t));
      }
    }
  }
  out.positions.resize(static_cast<Eigen::Index>(trace.size()), d);
  for (std::size_t r = 0; r < trace.size(); ++r) {
    out.positions.row(static_cast<Eigen::Index>(r)) = Eigen::Map<const Vec>(trace[r].data(), d).transpose();
  }
  out.endpoint = Eigen::Map<const Vec>(x.data(), d);
  out.final_velocity = Eigen::Map<const Vec>(x.data() + d, d);
  return out;
}

LogMapResult log_map(const MetricField& field, const Vec& z0, const Vec& z1, const GeodesicConfig& cfg) {
  LogMapResult out;
  out.path = shortest_path(field, z0, z1, cfg);
  if (z0 == z1) {
    out.tangent = Vec::Zero(z0.size());
    return out;
  }
  Vec v = out.path.curve.velocities().row(0).transpose();
  const double norm = std::sqrt(std::max(v.dot(field.metric(z0) * v), 0.0));
  if (norm > 0.0) v *= out.path.length / norm;
  out.tangent = v;
  if (!cfg.refine_log_map) return out;

  // Shooting correction: Newton on exp_map(z0, v) = z1.
  const Mat m0 = field.metric(z0);
  const double scale = std::max(z1.norm(), (z1 - z0).norm());
  Vec best = v;
  try {
    Vec miss = exp_map(field, z0, v).endpoint - z1;
    for (int iter = 0; iter < 8 && miss.norm() > 1e-10 * (1.0 + scale); ++iter) {
      Mat jac(z0.size(), z0.size());
      const double delta = 1e-6 * (1.0 + v.norm());
      for (Eigen::Index k = 0; k < v.size(); ++k) {
        Vec vp = v, vm = v;
        vp[k] += delta;
        vm[k] -= delta;
        jac.col(k) = (exp_map(field, z0, vp).endpoint - exp_map(field, z0, vm).endpoint) / (2.0 * delta);
      }
      const Vec step = jac.partialPivLu().solve(-miss);
      if (!step.allFinite()) break;
      v += step;
      miss = exp_map(field, z0, v).endpoint - z1;
    }
    const Vec change = v - out.tangent;
    const double change_norm = std::sqrt(std::max(change.dot(m0 * change), 0.0));
    if (miss.norm() <= 1e-8 * (1.0 + scale) && change_norm <= 0.1 * std::max(out.path.length, 1e-300)) {
      best = v;
      out.shooting_refined = true;
    }
  } catch (const Error&) {
  }
  out.tangent = best;
  return out;
}

}  // namespace lr
