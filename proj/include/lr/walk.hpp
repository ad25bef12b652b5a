#pragma once

#include <cstdint>
#include <string>

#include "lr/metric.hpp"
#include "lr/types.hpp"

namespace lr {

enum class WalkKind { riemannian, euclidean, hypercube };
const char* to_string(WalkKind kind);
WalkKind walk_kind_from_string(const std::string& name);

struct BrownianStep {
  Vec z;
  // Eigenvalues of M(z) raised to eigenvalue_clamp.
  int clamped = 0;
};

// z + s U L^{-1/2} eps with M(z) = U L U^T (symmetrized).
BrownianStep brownian_step(const MetricField& field, const Vec& z, double s, const Vec& eps);

struct WalkOptions {
  // Box for the hypercube kind; a proposal leaving it is rejected and the
  // walk stays put for that step.
  Vec lower;
  Vec upper;
};

struct WalkTrace {
  Mat steps;  // (N_s + 1) x d, row n = state after n steps
  double stepsize = 0.0;
  std::uint64_t seed = 0;
  WalkKind kind = WalkKind::riemannian;
  int clamp_warnings = 0;
  int rejected = 0;
};

WalkTrace run_walk(const MetricField& field, const Vec& z0, double s, int n_steps, std::uint64_t seed,
                   WalkKind kind, const WalkOptions& options = {});

// 0.05 times the mean per-coordinate standard deviation of the codes.
double default_stepsize(const Mat& codes);

// Box around the codes, widened by margin times each coordinate's range.
WalkOptions bounding_box(const Mat& codes, double margin = 0.0);

// A state is inside the support when lower <= volume_measure(z) < upper.
struct SupportBand {
  double lower = 0.0;
  double upper = 0.0;
};

// upper is the upper_quantile of the measure over the codes. lower is
// lower_factor times the smallest code measure, which keeps out the far field
// of saturating decoders, where the measure falls to zero.
SupportBand calibrate_support(const MetricField& field, const Mat& codes, double upper_quantile = 0.95,
                              double lower_factor = 0.5);

double support_fraction(const MetricField& field, const Mat& states, const SupportBand& band);

}  // namespace lr
