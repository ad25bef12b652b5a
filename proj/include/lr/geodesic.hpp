#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lr/metric.hpp"
#include "lr/types.hpp"

namespace lr {

// Curve sampled at T uniform nodes t_i = i / (T - 1) on [0, 1].
struct DiscreteCurve {
  Mat nodes;  // T x d

  static DiscreteCurve straight(const Vec& z0, const Vec& z1, int num_nodes);

  int size() const { return static_cast<int>(nodes.rows()); }
  int dim() const { return static_cast<int>(nodes.cols()); }
  double dt() const { return 1.0 / (size() - 1); }
  Vec node(int i) const { return nodes.row(i).transpose(); }
  // Fourth-order finite differences (central inside, one-sided near the ends); second order below 5 nodes.
  Mat velocities() const;
  // Linear resampling to a new node count; endpoints are kept exactly.
  DiscreteCurve resampled(int num_nodes) const;
  // Euclidean length of the polyline in latent coordinates.
  double coordinate_length() const;
  void validate() const;
};

// Trapezoid-rule quadratures of |gamma'|_M and |gamma'|_M^2 over the nodes.
double curve_length(const MetricField& field, const DiscreteCurve& curve);
double curve_energy(const MetricField& field, const DiscreteCurve& curve);

// gamma'' = -1/2 M^{-1} [ 2 (I_d (x) v^T) dvec(M)/dz v - dvec(M)/dz^T (v (x) v) ].
Vec geodesic_ode_rhs(const MetricField& field, const Vec& position, const Vec& velocity);
Vec geodesic_ode_rhs(const Mat& metric, const MetricDerivative& dmetric, const Vec& velocity);

struct GeodesicConfig {
  int nodes = 32;
  int max_iterations = 500;
  // Bound on the normalized ODE residual of a converged curve.
  double tol = 1e-3;
  // Bound on the relative energy change of the final step.
  double ftol = 1e-6;
  bool polish = true;
  int max_newton_iterations = 25;
  // Newton shooting correction of log_map's initial velocity.
  bool refine_log_map = true;
  // Warm start; resampled and shifted onto the requested endpoints.
  std::optional<DiscreteCurve> initial;
};

struct GeodesicSolution {
  DiscreteCurve curve;
  double length = 0.0;
  double energy = 0.0;
  bool converged = false;
  double residual = 0.0;
  int iterations = 0;
  int newton_iterations = 0;
  std::string strategy;
};

// Max over interior nodes of |FD gamma'' - rhs| divided by the coordinate
// length of the curve.
double ode_residual(const MetricField& field, const DiscreteCurve& curve);

GeodesicSolution shortest_path(const MetricField& field, const Vec& z0, const Vec& z1,
                               const GeodesicConfig& cfg = {});

struct ExpMapConfig {
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  double initial_step = 0.05;
  double min_step = 1e-12;
  int max_steps = 100000;
};

struct ExpMapResult {
  Vec endpoint;
  Vec final_velocity;
  std::vector<double> times;
  Mat positions;  // one row per accepted step, including t = 0
  int steps = 0;
};

// Integrates the geodesic ODE from (z0, v) over t in [0, 1] with the adaptive
// Dormand-Prince 5(4) pair.
ExpMapResult exp_map(const MetricField& field, const Vec& z0, const Vec& v, const ExpMapConfig& cfg = {});

struct LogMapResult {
  Vec tangent;
  GeodesicSolution path;
  bool shooting_refined = false;
};

// Initial velocity of the shortest path, scaled so |v|_M(z0) equals its length.
LogMapResult log_map(const MetricField& field, const Vec& z0, const Vec& z1, const GeodesicConfig& cfg = {});

}  // namespace lr
