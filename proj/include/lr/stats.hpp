#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lr/geodesic.hpp"
#include "lr/metric.hpp"
#include "lr/types.hpp"

namespace lr {

enum class DistanceKind { riemannian, euclidean };
const char* to_string(DistanceKind kind);
DistanceKind distance_kind_from_string(const std::string& name);

struct DistanceOptions {
  GeodesicConfig geodesic;
  // Start each solve from the curve of the nearest endpoint already solved
  // from the same source point.
  bool warm_start = true;
};

struct DistanceMatrix {
  Mat values;  // N x N, symmetric, zero diagonal
  // converged(i, j) is 1 when both directions of the pair converged.
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> converged;
  DistanceKind kind = DistanceKind::euclidean;

  int unconverged_pairs() const;
};

// Riemannian entries average the two solved directions.
DistanceMatrix pairwise_distances(const MetricField& field, const Mat& points, DistanceKind kind,
                                  const DistanceOptions& options = {});

struct RiemannianKMeansOptions {
  DistanceKind kind = DistanceKind::riemannian;
  int max_iterations = 50;
  int frechet_iterations = 20;
  double frechet_step = 0.5;
  // Inner loop stops once the Frechet step is shorter than this, relative to
  // the mean member distance.
  double frechet_tol = 1e-4;
  // Per-solve relaxation budget; log maps are warm-started from the previous
  // curve for the same centroid and point.
  GeodesicConfig geodesic = [] {
    GeodesicConfig g;
    g.refine_log_map = false;
    g.max_iterations = 150;
    return g;
  }();
};

struct RiemannianKMeansResult {
  Mat centroids;  // k x d
  std::vector<int> assignments;
  double inertia = 0.0;  // sum of squared distances to the assigned centroid
  int iterations = 0;
  bool converged = false;
  int unconverged_solves = 0;
  int reseeded = 0;
};

// Lloyd iterations with assignments by the chosen distance and the centroid
// update c <- Exp_c(step * mean_i Log_c(z_i)). k-means++ seeding uses the same
// distance.
RiemannianKMeansResult riemannian_kmeans(const MetricField& field, const Mat& points, int k,
                                         std::uint64_t seed, const RiemannianKMeansOptions& options = {});

// Pairwise F1 over ordered point pairs (self pairs included): precision is the
// fraction of same-cluster pairs that share a label, recall the fraction of
// same-label pairs that share a cluster.
double f_measure(const std::vector<int>& assignments, const std::vector<int>& labels);

// Locally adaptive normal component: density exp(-1/2 Log_mu(z)^T Sigma^-1
// Log_mu(z)) / C(mu, Sigma).
struct LandComponent {
  Vec mean;
  Mat covariance;
  double weight = 1.0;
  double log_normalizer = 0.0;
  // Relative standard error of the Monte-Carlo estimate of C.
  double normalizer_rel_error = 0.0;
  // Monte-Carlo draws whose exponential map failed; they are left out.
  int normalizer_failures = 0;
  bool flagged = false;
};

struct LandNormalizerOptions {
  int samples = 10000;
  std::uint64_t seed = 0;
  ExpMapConfig exp_map = [] {
    ExpMapConfig c;
    c.abs_tol = 1e-7;
    c.rel_tol = 1e-7;
    return c;
  }();
};

// C = (2 pi)^{d/2} |Sigma|^{1/2} E_{v ~ N(0, Sigma)}[ m(mu) / m(Exp_mu v) ]
// with m the volume measure. Sets log_normalizer and normalizer_rel_error.
void estimate_land_normalizer(const MetricField& field, LandComponent& comp,
                              const LandNormalizerOptions& options = {});

// Needs a computed normalizer. A failed log map gives -inf.
double land_logdensity(const MetricField& field, const LandComponent& comp, const Vec& z,
                       const GeodesicConfig& geodesic = {});
// Same, from a precomputed Log_mu(z).
double land_logdensity_from_log(const LandComponent& comp, const Vec& log_mu_z);

struct LandOptions {
  int max_iterations = 30;
  // Stops when the mean log-likelihood improves by less than this.
  double tol = 1e-4;
  int frechet_iterations = 20;
  double frechet_step = 0.5;
  // Components whose responsibility mass falls below this fraction of N
  // count as collapsed.
  double collapse_fraction = 1e-3;
  LandNormalizerOptions normalizer;
  GeodesicConfig geodesic = [] {
    GeodesicConfig g;
    g.refine_log_map = false;
    return g;
  }();
};

struct LandMixture {
  std::vector<LandComponent> components;
  Mat responsibilities;  // N x K
  std::vector<int> assignments;
  // Mean log-likelihood per iteration, index 0 = after initialization.
  std::vector<double> objective;
  int iterations = 0;
  int reseeded = 0;
};

double land_mixture_logdensity(const MetricField& field, const LandMixture& mixture, const Vec& z,
                               const GeodesicConfig& geodesic = {});

// EM: responsibilities from the component densities, means by weighted
// Frechet steps, covariances from weighted log-map outer products, weights
// from the responsibility mass. Initialized from Euclidean k-means.
LandMixture fit_land_mixture(const MetricField& field, const Mat& points, int n_components, std::uint64_t seed,
                             const LandOptions& options = {});

struct LandSamples {
  Mat latents;  // n x d
  Mat decoded;  // n x D, empty when the field has no generator
  int retries = 0;
};

// v ~ N(0, Sigma), z = Exp_mu(v). A failed exp map is redrawn up to
// max_retries times in total.
LandSamples land_sample(const MetricField& field, const LandComponent& comp, int n, std::uint64_t seed,
                        int max_retries = 100);

}  // namespace lr
