#include "lr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <random>

#include "lr/error.hpp"
#include "lr/kmeans.hpp"
#include "lr/parallel.hpp"

namespace lr {

const char* to_string(DistanceKind kind) { return kind == DistanceKind::riemannian ? "riemannian" : "euclidean"; }

DistanceKind distance_kind_from_string(const std::string& name) {
  if (name == "riemannian") return DistanceKind::riemannian;
  if (name == "euclidean") return DistanceKind::euclidean;
  fail(ErrorCode::invalid_argument, "unknown distance kind '" + name + "'");
}

int DistanceMatrix::unconverged_pairs() const {
  int count = 0;
  for (Eigen::Index i = 0; i < converged.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < converged.cols(); ++j) count += converged(i, j) ? 0 : 1;
  }
  return count;
}

namespace {

void require_points(const MetricField& field, const Mat& points, const char* what) {
  if (points.rows() < 1) fail(ErrorCode::invalid_argument, std::string(what) + " needs at least one point");
  require_dims(points.cols(), field.dim(), what);
  if (!points.allFinite()) fail(ErrorCode::non_finite, std::string(what) + ": points are not finite");
}

Vec row_of(const Mat& m, Eigen::Index i) { return m.row(i).transpose(); }

// Shortest path from a to b, retried from a straight line when a warm start
// does not converge.
GeodesicSolution solve_pair(const MetricField& field, const Vec& a, const Vec& b, const GeodesicConfig& base,
                            const DiscreteCurve* warm) {
  if (warm == nullptr) return shortest_path(field, a, b, base);
  GeodesicConfig cfg = base;
  cfg.initial = *warm;
  GeodesicSolution sol = shortest_path(field, a, b, cfg);
  if (sol.converged) return sol;
  GeodesicSolution cold = shortest_path(field, a, b, base);
  if (cold.converged || cold.length < sol.length) return cold;
  return sol;
}

struct TangentResult {
  Vec tangent;
  double distance = 0.0;
  bool converged = true;
  std::optional<DiscreteCurve> curve;
};

// A warm start that fails is retried cold only when the previous solve for the pair converged.
TangentResult tangent_to(const MetricField& field, DistanceKind kind, const Vec& from, const Vec& to,
                         const GeodesicConfig& cfg, const TangentResult* previous = nullptr) {
  TangentResult out;
  if (kind == DistanceKind::euclidean) {
    out.tangent = to - from;
    out.distance = out.tangent.norm();
    return out;
  }
  if (from == to) {
    out.tangent = Vec::Zero(from.size());
    return out;
  }
  auto solve = [&](const GeodesicConfig& c) {
    const LogMapResult log = log_map(field, from, to, c);
    TangentResult r;
    r.tangent = log.tangent;
    r.distance = log.path.length;
    r.converged = log.path.converged;
    r.curve = log.path.curve;
    return r;
  };
  if (previous == nullptr || !previous->curve) return solve(cfg);
  GeodesicConfig warm = cfg;
  warm.initial = previous->curve;
  out = solve(warm);
  if (out.converged || !previous->converged) return out;
  TangentResult cold = solve(cfg);
  if (cold.converged || cold.distance < out.distance) return cold;
  return out;
}

Vec step_from(const MetricField& field, DistanceKind kind, const Vec& from, const Vec& v) {
  if (kind == DistanceKind::euclidean) return from + v;
  return exp_map(field, from, v).endpoint;
}

double tangent_norm(const MetricField& field, DistanceKind kind, const Vec& at, const Vec& v) {
  if (kind == DistanceKind::euclidean) return v.norm();
  return std::sqrt(std::max(v.dot(field.metric(at) * v), 0.0));
}

double log_sum_exp(const Vec& v) {
  const double peak = v.maxCoeff();
  if (!std::isfinite(peak)) return peak;
  return peak + std::log((v.array() - peak).exp().sum());
}

}  // namespace

DistanceMatrix pairwise_distances(const MetricField& field, const Mat& points, DistanceKind kind,
                                  const DistanceOptions& options) {
  require_points(field, points, "pairwise_distances");
  const Eigen::Index n = points.rows();
  DistanceMatrix out;
  out.kind = kind;
  out.values = Mat::Zero(n, n);
  out.converged = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>::Ones(n, n);
  if (kind == DistanceKind::euclidean) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        out.values(i, j) = out.values(j, i) = (points.row(i) - points.row(j)).norm();
      }
    }
    return out;
  }

  Mat directed = Mat::Zero(n, n);
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> ok = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>::Ones(n, n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t si) {
    const auto i = static_cast<Eigen::Index>(si);
    const Vec src = row_of(points, i);
    std::vector<std::pair<Eigen::Index, DiscreteCurve>> solved;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const Vec dst = row_of(points, j);
      const DiscreteCurve* warm = nullptr;
      if (options.warm_start && !solved.empty()) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [k, curve] : solved) {
          const double d = (points.row(k) - points.row(j)).squaredNorm();
          if (d < best) {
            best = d;
            warm = &curve;
          }
        }
      }
      const GeodesicSolution sol = solve_pair(field, src, dst, options.geodesic, warm);
      directed(i, j) = sol.length;
      ok(i, j) = sol.converged ? 1 : 0;
      if (options.warm_start && src != dst) solved.emplace_back(j, sol.curve);
    }
  });
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      out.values(i, j) = out.values(j, i) = 0.5 * (directed(i, j) + directed(j, i));
      out.converged(i, j) = out.converged(j, i) = ok(i, j) && ok(j, i);
    }
  }
  return out;
}

RiemannianKMeansResult riemannian_kmeans(const MetricField& field, const Mat& points, int k, std::uint64_t seed,
                                         const RiemannianKMeansOptions& options) {
  require_points(field, points, "riemannian_kmeans");
  const Eigen::Index n = points.rows();
  if (k < 1 || k > n) fail(ErrorCode::invalid_argument, "riemannian_kmeans: need 1 <= k <= N");
  if (options.max_iterations < 1) fail(ErrorCode::invalid_argument, "riemannian_kmeans: max_iterations must be positive");
  const auto kind = options.kind;
  const auto& gcfg = options.geodesic;

  std::mt19937_64 rng(seed);
  auto seed_distance = [&](int a, int b) {
    if (a == b) return 0.0;
    if (kind == DistanceKind::euclidean) return (points.row(a) - points.row(b)).norm();
    return shortest_path(field, row_of(points, a), row_of(points, b), gcfg).length;
  };
  const auto chosen = kmeanspp_seed_indices(static_cast<int>(n), k, seed_distance, rng);

  RiemannianKMeansResult out;
  out.centroids.resize(k, points.cols());
  for (int c = 0; c < k; ++c) out.centroids.row(c) = points.row(chosen[static_cast<std::size_t>(c)]);
  out.assignments.assign(static_cast<std::size_t>(n), -1);

  // logs[c * n + i] = Log_{centroid c}(z_i); its curve warm-starts the next solve for the pair.
  std::vector<TangentResult> logs(static_cast<std::size_t>(k * n));
  std::vector<char> solved(static_cast<std::size_t>(k * n), 0);
  Mat dist(n, k);
  std::vector<int> unconverged(static_cast<std::size_t>(n), 0);

  auto refresh = [&](int c, const std::vector<Eigen::Index>& members) {
    const Vec centroid = row_of(out.centroids, c);
    parallel_for(members.size(), [&](std::size_t m) {
      const Eigen::Index i = members[m];
      const auto slot = static_cast<std::size_t>(c * n + i);
      const TangentResult* previous = solved[slot] ? &logs[slot] : nullptr;
      auto r = tangent_to(field, kind, centroid, row_of(points, i), gcfg, previous);
      dist(i, c) = r.distance;
      if (!r.converged) ++unconverged[static_cast<std::size_t>(i)];
      logs[slot] = std::move(r);
      solved[slot] = 1;
    });
  };
  std::vector<Eigen::Index> everyone(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) everyone[static_cast<std::size_t>(i)] = i;

  for (int iter = 0;; ++iter) {
    for (int c = 0; c < k; ++c) refresh(c, everyone);
    std::vector<int> next(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      dist.row(i).minCoeff(&best);
      next[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    // Re-seed empty clusters on the point farthest from its centroid.
    for (int c = 0; c < k; ++c) {
      if (std::find(next.begin(), next.end(), c) != next.end()) continue;
      Eigen::Index far = -1;
      double far_dist = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const int owner = next[static_cast<std::size_t>(i)];
        if (std::count(next.begin(), next.end(), owner) < 2) continue;
        if (dist(i, owner) > far_dist) {
          far_dist = dist(i, owner);
          far = i;
        }
      }
      if (far < 0) break;
      next[static_cast<std::size_t>(far)] = c;
      out.centroids.row(c) = points.row(far);
      refresh(c, everyone);
      ++out.reseeded;
    }
    const bool stable = next == out.assignments;
    out.assignments = std::move(next);
    out.iterations = iter + 1;
    out.inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = dist(i, out.assignments[static_cast<std::size_t>(i)]);
      out.inertia += d * d;
    }
    if (stable) {
      out.converged = true;
      break;
    }
    if (iter + 1 >= options.max_iterations) break;

    for (int c = 0; c < k; ++c) {
      std::vector<Eigen::Index> members;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (out.assignments[static_cast<std::size_t>(i)] == c) members.push_back(i);
      }
      if (members.empty()) continue;
      double mean_dist = 0.0;
      for (auto i : members) mean_dist += dist(i, c);
      mean_dist /= static_cast<double>(members.size());
      for (int inner = 0; inner < options.frechet_iterations; ++inner) {
        Vec mean_log = Vec::Zero(points.cols());
        for (auto i : members) mean_log += logs[static_cast<std::size_t>(c * n + i)].tangent;
        mean_log /= static_cast<double>(members.size());
        const Vec step = options.frechet_step * mean_log;
        const Vec centroid = row_of(out.centroids, c);
        if (tangent_norm(field, kind, centroid, step) <= options.frechet_tol * std::max(mean_dist, 1e-300)) break;
        out.centroids.row(c) = step_from(field, kind, centroid, step).transpose();
        refresh(c, members);
      }
    }
  }
  for (int u : unconverged) out.unconverged_solves += u;
  return out;
}

double f_measure(const std::vector<int>& assignments, const std::vector<int>& labels) {
  if (assignments.size() != labels.size()) {
    fail(ErrorCode::dimension_mismatch, "f_measure: assignments and labels differ in length");
  }
  if (assignments.empty()) fail(ErrorCode::invalid_argument, "f_measure needs at least one point");
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> by_cluster;
  std::map<int, double> by_label;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    joint[{assignments[i], labels[i]}] += 1.0;
    by_cluster[assignments[i]] += 1.0;
    by_label[labels[i]] += 1.0;
  }
  double both = 0.0, same_cluster = 0.0, same_label = 0.0;
  for (const auto& [key, count] : joint) both += count * count;
  for (const auto& [key, count] : by_cluster) same_cluster += count * count;
  for (const auto& [key, count] : by_label) same_label += count * count;
  const double precision = both / same_cluster;
  const double recall = both / same_label;
  return 2.0 * precision * recall / (precision + recall);
}

namespace {

Eigen::LLT<Mat> covariance_factor(const Mat& cov) {
  Eigen::LLT<Mat> llt(symmetrize(cov));
  if (llt.info() != Eigen::Success || !cov.allFinite()) {
    fail(ErrorCode::degenerate, "LAND covariance is not positive definite");
  }
  return llt;
}

double log_gaussian_normalizer(const Eigen::LLT<Mat>& llt) {
  const auto d = static_cast<double>(llt.matrixL().rows());
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < llt.matrixL().rows(); ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
  return 0.5 * d * std::log(2.0 * M_PI) + 0.5 * log_det;
}

}  // namespace

void estimate_land_normalizer(const MetricField& field, LandComponent& comp, const LandNormalizerOptions& options) {
  require_dims(comp.mean.size(), field.dim(), "LAND mean");
  if (options.samples < 2) fail(ErrorCode::invalid_argument, "LAND normalizer needs at least 2 samples");
  const auto llt = covariance_factor(comp.covariance);
  const Mat chol = llt.matrixL();
  const double m_mu = field.volume_measure(comp.mean);
  if (!(m_mu > 0.0) || !std::isfinite(m_mu)) {
    fail(ErrorCode::degenerate, "LAND mean has a zero or infinite volume measure");
  }
  const auto d = comp.mean.size();
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat eps(options.samples, d);
  for (Eigen::Index s = 0; s < eps.rows(); ++s) {
    for (Eigen::Index j = 0; j < d; ++j) eps(s, j) = normal(rng);
  }
  Vec ratio(options.samples);
  std::vector<char> failed(static_cast<std::size_t>(options.samples), 0);
  parallel_for(static_cast<std::size_t>(options.samples), [&](std::size_t si) {
    const auto s = static_cast<Eigen::Index>(si);
    const Vec v = chol * eps.row(s).transpose();
    try {
      const Vec z = exp_map(field, comp.mean, v, options.exp_map).endpoint;
      ratio[s] = m_mu / field.volume_measure(z);
      if (!std::isfinite(ratio[s])) failed[si] = 1;
    } catch (const Error&) {
      failed[si] = 1;
    }
  });
  double sum = 0.0, sq = 0.0;
  int used = 0;
  for (Eigen::Index s = 0; s < ratio.size(); ++s) {
    if (failed[static_cast<std::size_t>(s)]) continue;
    sum += ratio[s];
    sq += ratio[s] * ratio[s];
    ++used;
  }
  comp.normalizer_failures = options.samples - used;
  if (used < 2) fail(ErrorCode::divergence, "LAND normalizer: every exponential map failed");
  const double mean = sum / used;
  const double var = std::max(sq / used - mean * mean, 0.0);
  comp.log_normalizer = log_gaussian_normalizer(llt) + std::log(mean);
  comp.normalizer_rel_error = std::sqrt(var / used) / mean;
}

double land_logdensity_from_log(const LandComponent& comp, const Vec& log_mu_z) {
  const auto llt = covariance_factor(comp.covariance);
  const Vec w = llt.matrixL().solve(log_mu_z);
  return -0.5 * w.squaredNorm() - comp.log_normalizer;
}

double land_logdensity(const MetricField& field, const LandComponent& comp, const Vec& z,
                       const GeodesicConfig& geodesic) {
  require_dims(z.size(), field.dim(), "LAND point");
  try {
    const Vec v = z == comp.mean ? Vec::Zero(z.size()) : log_map(field, comp.mean, z, geodesic).tangent;
    return land_logdensity_from_log(comp, v);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::degenerate) throw;
    return -std::numeric_limits<double>::infinity();
  }
}

double land_mixture_logdensity(const MetricField& field, const LandMixture& mixture, const Vec& z,
                               const GeodesicConfig& geodesic) {
  Vec terms(static_cast<Eigen::Index>(mixture.components.size()));
  for (std::size_t c = 0; c < mixture.components.size(); ++c) {
    const auto& comp = mixture.components[c];
    terms[static_cast<Eigen::Index>(c)] = comp.weight > 0.0
                                              ? std::log(comp.weight) + land_logdensity(field, comp, z, geodesic)
                                              : -std::numeric_limits<double>::infinity();
  }
  return log_sum_exp(terms);
}

LandMixture fit_land_mixture(const MetricField& field, const Mat& points, int n_components, std::uint64_t seed,
                             const LandOptions& options) {
  require_points(field, points, "fit_land_mixture");
  const Eigen::Index n = points.rows();
  const int k = n_components;
  const auto d = points.cols();
  if (k < 1 || k > n) fail(ErrorCode::invalid_argument, "fit_land_mixture: need 1 <= components <= N");
  const GeodesicConfig& gcfg = options.geodesic;

  const auto km = kmeans(points, k, seed);
  LandMixture mix;
  mix.components.resize(static_cast<std::size_t>(k));
  mix.responsibilities = Mat::Zero(n, k);
  for (Eigen::Index i = 0; i < n; ++i) mix.responsibilities(i, km.assignments[static_cast<std::size_t>(i)]) = 1.0;
  for (int c = 0; c < k; ++c) mix.components[static_cast<std::size_t>(c)].mean = row_of(km.centers, c);

  std::vector<std::vector<Vec>> logs(static_cast<std::size_t>(k), std::vector<Vec>(static_cast<std::size_t>(n)));
  auto refresh_logs = [&](int c) {
    const Vec mean = mix.components[static_cast<std::size_t>(c)].mean;
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
      logs[static_cast<std::size_t>(c)][i] =
          tangent_to(field, DistanceKind::riemannian, mean, row_of(points, static_cast<Eigen::Index>(i)), gcfg).tangent;
    });
  };
  for (int c = 0; c < k; ++c) refresh_logs(c);

  Mat pooled = Mat::Zero(d, d);
  {
    const Vec centre = points.colwise().mean().transpose();
    for (Eigen::Index i = 0; i < n; ++i) pooled += (row_of(points, i) - centre) * (row_of(points, i) - centre).transpose();
    pooled /= static_cast<double>(n);
    pooled += 1e-9 * (1.0 + pooled.trace()) * Mat::Identity(d, d);
  }
  std::vector<int> reseeds(static_cast<std::size_t>(k), 0);
  Vec point_loglik = Vec::Zero(n);

  auto m_step = [&]() {
    for (int c = 0; c < k; ++c) {
      auto& comp = mix.components[static_cast<std::size_t>(c)];
      if (comp.flagged) continue;
      const Vec r = mix.responsibilities.col(c);
      const double mass = r.sum();
      if (mass < options.collapse_fraction * static_cast<double>(n)) {
        if (reseeds[static_cast<std::size_t>(c)] > 0) {
          comp.flagged = true;
          comp.weight = 0.0;
          continue;
        }
        // Re-seed on the point the mixture explains worst.
        Eigen::Index worst = 0;
        point_loglik.minCoeff(&worst);
        comp.mean = row_of(points, worst);
        comp.covariance = pooled;
        comp.weight = 1.0 / k;
        ++reseeds[static_cast<std::size_t>(c)];
        ++mix.reseeded;
        refresh_logs(c);
        continue;
      }
      auto& lc = logs[static_cast<std::size_t>(c)];
      double spread = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) spread += r[i] * lc[static_cast<std::size_t>(i)].squaredNorm();
      spread = std::sqrt(spread / mass);
      for (int inner = 0; inner < options.frechet_iterations; ++inner) {
        Vec mean_log = Vec::Zero(d);
        for (Eigen::Index i = 0; i < n; ++i) mean_log += r[i] * lc[static_cast<std::size_t>(i)];
        const Vec step = options.frechet_step * mean_log / mass;
        if (step.norm() <= 1e-6 * std::max(spread, 1e-300)) break;
        comp.mean = exp_map(field, comp.mean, step).endpoint;
        refresh_logs(c);
      }
      Mat cov = Mat::Zero(d, d);
      for (Eigen::Index i = 0; i < n; ++i) {
        const Vec& v = lc[static_cast<std::size_t>(i)];
        cov += r[i] * v * v.transpose();
      }
      cov /= mass;
      cov += 1e-10 * (1.0 + cov.trace()) * Mat::Identity(d, d);
      comp.covariance = symmetrize(cov);
      comp.weight = mass / static_cast<double>(n);
    }
    double total = 0.0;
    for (const auto& comp : mix.components) total += comp.weight;
    for (auto& comp : mix.components) comp.weight /= total;
  };

  m_step();
  for (int iter = 0;; ++iter) {
    for (int c = 0; c < k; ++c) {
      auto& comp = mix.components[static_cast<std::size_t>(c)];
      if (comp.flagged) continue;
      LandNormalizerOptions nopts = options.normalizer;
      nopts.seed = options.normalizer.seed + static_cast<std::uint64_t>(c);
      estimate_land_normalizer(field, comp, nopts);
    }
    double objective = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      Vec terms(k);
      for (int c = 0; c < k; ++c) {
        const auto& comp = mix.components[static_cast<std::size_t>(c)];
        terms[c] = comp.weight > 0.0 ? std::log(comp.weight) +
                                           land_logdensity_from_log(comp, logs[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)])
                                     : -std::numeric_limits<double>::infinity();
      }
      const double total = log_sum_exp(terms);
      point_loglik[i] = total;
      objective += total;
      for (int c = 0; c < k; ++c) mix.responsibilities(i, c) = std::exp(terms[c] - total);
    }
    objective /= static_cast<double>(n);
    mix.objective.push_back(objective);
    mix.iterations = iter;
    const bool small_gain = iter > 0 && objective - mix.objective[mix.objective.size() - 2] < options.tol;
    if (small_gain || iter >= options.max_iterations) break;
    m_step();
  }
  mix.assignments.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    mix.responsibilities.row(i).maxCoeff(&best);
    mix.assignments[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return mix;
}

LandSamples land_sample(const MetricField& field, const LandComponent& comp, int n, std::uint64_t seed,
                        int max_retries) {
  require_dims(comp.mean.size(), field.dim(), "LAND mean");
  if (n < 0) fail(ErrorCode::invalid_argument, "land_sample: n must be nonnegative");
  const Mat chol = covariance_factor(comp.covariance).matrixL();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  LandSamples out;
  out.latents.resize(n, comp.mean.size());
  for (int i = 0; i < n; ++i) {
    for (;;) {
      const Vec eps = Vec::NullaryExpr(comp.mean.size(), [&] { return normal(rng); });
      try {
        out.latents.row(i) = exp_map(field, comp.mean, chol * eps).endpoint.transpose();
        break;
      } catch (const Error&) {
        if (++out.retries > max_retries) fail(ErrorCode::divergence, "land_sample: retry budget exhausted");
      }
    }
  }
  if (field.generator() != nullptr && n > 0) {
    out.decoded.resize(n, field.generator()->output_dim());
    for (int i = 0; i < n; ++i) out.decoded.row(i) = field.decode(row_of(out.latents, i)).transpose();
  }
  return out;
}

}  // namespace lr
