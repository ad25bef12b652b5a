#include <doctest.h>

#include <cmath>
#include <random>

#include "lr/error.hpp"
#include "lr/rbf.hpp"
#include "oracles.hpp"

using namespace lr;

namespace {

RbfPrecision two_center_model() {
  RbfPrecision m;
  m.centers.resize(2, 2);
  m.centers << 0, 0, 3, 1;
  m.bandwidths.resize(2);
  m.bandwidths << 2.0, 0.5;
  m.weights.resize(3, 2);
  m.weights << 1, 4, 0, 2, 5, 0;
  m.zeta = Vec::Constant(3, 1e-2);
  return m;
}

}  // namespace

TEST_CASE("features peak at the centers and decay with distance") {
  const auto m = two_center_model();
  CHECK(rbf_features(m, m.centers.row(0).transpose())[0] == 1.0);
  Vec z = m.centers.row(1).transpose();
  z[0] += 1.0 / std::sqrt(m.bandwidths[1]);
  CHECK(rbf_features(m, z)[1] == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  for (int k = 0; k < 2; ++k) {
    Vec far = m.centers.row(k).transpose();
    far[1] += 10.0 / std::sqrt(m.bandwidths[k]);
    CHECK(rbf_features(m, far)[k] < 1e-12);
  }
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    const Vec p = Vec::NullaryExpr(2, [&] { return normal(rng); });
    const Vec v = rbf_features(m, p);
    CHECK((v.array() > 0.0).all());
    CHECK((v.array() < 1.0).all());
  }
}

TEST_CASE("precision is W v + zeta and variance its reciprocal") {
  auto m = two_center_model();
  Vec z(2);
  z << 0.4, 0.3;
  const Vec v = rbf_features(m, z);
  const Vec want = m.weights * v + m.zeta;
  CHECK((precision(m, z) - want).norm() < 1e-14);
  CHECK((variance(m, z) - want.cwiseInverse()).norm() < 1e-12);
  const Vec at_center = precision(m, m.centers.row(0).transpose());
  CHECK(at_center[2] == doctest::Approx(m.weights(2, 0) + m.zeta[2] + m.weights(2, 1) * rbf_features(m, m.centers.row(0).transpose())[1]));

  Vec far(2);
  far << 1e6, -1e6;
  CHECK(((variance(m, far).array() * m.zeta.array() - 1.0).abs() < 1e-6).all());

  m.weights.setZero();
  CHECK((variance(m, z) - m.zeta.cwiseInverse()).norm() < 1e-10);
}

TEST_CASE("single center precision at its center is w + zeta") {
  RbfPrecision m;
  m.centers = Mat::Zero(1, 2);
  m.bandwidths = Vec::Constant(1, 1.0);
  m.weights.resize(2, 1);
  m.weights << 3.0, 7.0;
  m.zeta = Vec::Constant(2, 0.5);
  const Vec p = precision(m, Vec::Zero(2));
  CHECK(p[0] == 3.5);
  CHECK(p[1] == 7.5);
}

TEST_CASE("precision and stddev jacobians match finite differences") {
  const auto m = two_center_model();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(1.0, 1.5);
  for (int i = 0; i < 50; ++i) {
    const Vec z = Vec::NullaryExpr(2, [&] { return normal(rng); });
    const Mat fd_beta = oracle::fd_jacobian([&](const Vec& p) { return precision(m, p); }, z);
    CHECK(oracle::rel_error(precision_jacobian(m, z), fd_beta) < 1e-6);
    const Mat fd_sigma = oracle::fd_jacobian(
        [&](const Vec& p) { return Vec((m.weights * rbf_features(m, p) + m.zeta).cwiseSqrt().cwiseInverse()); }, z);
    CHECK(oracle::rel_error(stddev_jacobian(m, z), fd_sigma) < 1e-6);
    CHECK(oracle::rel_error(rbf_features_jacobian(m, z),
                            oracle::fd_jacobian([&](const Vec& p) { return rbf_features(m, p); }, z)) < 1e-6);
  }
}

TEST_CASE("variance extrapolates monotonically to its asymptote along rays") {
  // Within 1% at three radii 1/sqrt(lambda) needs W_jk e^{-9} below 1% of
  // zeta_j, so the weights here are kept small.
  auto m = two_center_model();
  m.weights *= 0.1;
  Vec centroid = m.centers.colwise().mean().transpose();
  double reach = 0.0;
  for (int k = 0; k < m.num_centers(); ++k) {
    reach = std::max(reach, (m.centers.row(k).transpose() - centroid).norm() + 3.0 / std::sqrt(m.bandwidths[k]));
  }
  for (int r = 0; r < 8; ++r) {
    const double angle = 2.0 * M_PI * r / 8.0;
    Vec dir(2);
    dir << std::cos(angle), std::sin(angle);
    Vec prev = Vec::Zero(3);
    for (int s = 0; s < 20; ++s) {
      const Vec var = variance(m, centroid + (reach + 0.5 * s) * dir);
      CHECK(((var.array() * m.zeta.array() - 1.0).abs() < 0.01).all());
      CHECK((var.array() >= prev.array() * (1.0 - 1e-12)).all());
      prev = var;
    }
  }
}

TEST_CASE("bandwidth follows the mean member distance") {
  // Eight points on a circle of radius 0.5 around the origin, a = 1.
  Mat codes(8, 2);
  for (int i = 0; i < 8; ++i) codes.row(i) << 0.5 * std::cos(i * M_PI / 4), 0.5 * std::sin(i * M_PI / 4);
  const auto fit = fit_centers_bandwidths(codes, 1, 1.0, 0);
  CHECK(fit.centers.row(0).norm() < 1e-12);
  CHECK(fit.bandwidths[0] == doctest::Approx(2.0).epsilon(1e-12));
  const auto fit_a2 = fit_centers_bandwidths(codes, 1, 2.0, 0);
  CHECK(fit_a2.bandwidths[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("identical codes have no bandwidth") {
  const Mat codes = Mat::Constant(10, 2, 0.3);
  try {
    fit_centers_bandwidths(codes, 1, 2.0, 0);
    FAIL("expected a degenerate cluster error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate);
  }
  CHECK_THROWS_AS(fit_centers_bandwidths(codes, 11, 2.0, 0), Error);
}

TEST_CASE("two separated blobs recover their means") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal(0.0, 0.3);
  Mat codes(400, 2);
  for (int i = 0; i < 400; ++i) codes.row(i) << (i < 200 ? -3.0 : 3.0) + normal(rng), 1.0 + normal(rng);
  const auto fit = fit_centers_bandwidths(codes, 2, 2.0, 9);
  const Vec means_left = codes.topRows(200).colwise().mean().transpose();
  const Vec means_right = codes.bottomRows(200).colwise().mean().transpose();
  const int left = fit.centers(0, 0) < 0.0 ? 0 : 1;
  CHECK((fit.centers.row(left).transpose() - means_left).norm() < 0.1);
  CHECK((fit.centers.row(1 - left).transpose() - means_right).norm() < 0.1);
}

TEST_CASE("weight fit recovers the closed-form precision") {
  RbfPrecision m;
  m.centers = Mat::Zero(1, 2);
  m.bandwidths = Vec::Constant(1, 1.0);
  m.weights = Mat::Constant(2, 1, 1e-3);
  m.zeta = Vec::Constant(2, 1e-2);
  const Mat codes = Mat::Zero(50, 2);
  Mat resid(50, 2);
  resid.col(0).setConstant(0.25 * 0.25);
  resid.col(1).setConstant(0.1 * 0.1);
  fit_weights(m, codes, resid);
  const Vec beta = precision(m, Vec::Zero(2));
  CHECK(beta[0] == doctest::Approx(1.0 / 0.0625).epsilon(1e-6));
  CHECK(beta[1] == doctest::Approx(100.0).epsilon(1e-6));
}

TEST_CASE("weight fit keeps weights nonnegative and its objective monotone") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat codes(300, 2);
  for (Eigen::Index i = 0; i < codes.size(); ++i) codes.data()[i] = normal(rng);
  const auto cb = fit_centers_bandwidths(codes, 6, 2.0, 1);
  RbfPrecision m;
  m.centers = cb.centers;
  m.bandwidths = cb.bandwidths;
  m.weights = Mat::Constant(3, 6, 5e-3);
  m.zeta = Vec::Constant(3, 1e-2);
  Mat resid(300, 3);
  for (Eigen::Index n = 0; n < 300; ++n) {
    const double scale = 0.05 + 0.5 * codes.row(n).squaredNorm();
    for (int j = 0; j < 3; ++j) resid(n, j) = scale * std::pow(normal(rng), 2) * (j + 1);
  }
  const auto trace = fit_weights(m, codes, resid);
  CHECK((m.weights.array() >= 0.0).all());
  CHECK(trace.objective.size() == static_cast<std::size_t>(trace.iterations + 1));
  for (std::size_t i = 1; i < trace.objective.size(); ++i) CHECK(trace.objective[i] >= trace.objective[i - 1]);
  CHECK(trace.objective.back() > trace.objective.front());
  for (Eigen::Index n = 0; n < 300; ++n) {
    const Vec var = variance(m, codes.row(n).transpose());
    CHECK(var.allFinite());
    CHECK((var.array() <= m.zeta.cwiseInverse().array() * (1 + 1e-12)).all());
  }
  for (Eigen::Index n = 0; n < 50; ++n) CHECK((precision(m, codes.row(n).transpose()).array() >= m.zeta.array()).all());
}

TEST_CASE("zero iterations leave the weights unchanged") {
  auto m = two_center_model();
  const Mat before = m.weights;
  WeightFitOptions opts;
  opts.iterations = 0;
  const auto trace = fit_weights(m, Mat::Zero(5, 2), Mat::Ones(5, 3), opts);
  CHECK(m.weights == before);
  CHECK(trace.iterations == 0);
  CHECK(trace.objective.size() == 1);
}

TEST_CASE("non-finite residuals abort the weight fit") {
  auto m = two_center_model();
  Mat resid = Mat::Ones(5, 3);
  resid(2, 1) = std::numeric_limits<double>::infinity();
  try {
    fit_weights(m, Mat::Zero(5, 2), resid);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::non_finite);
    CHECK(std::string(e.what()).find("iteration 0") != std::string::npos);
  }
  CHECK_THROWS_AS(fit_weights(m, Mat::Zero(5, 2), Mat::Ones(4, 3)), Error);
}

TEST_CASE("invalid models and malformed documents are rejected") {
  auto m = two_center_model();
  m.weights(0, 0) = -1.0;
  CHECK_THROWS_AS(m.validate(), Error);
  m = two_center_model();
  m.zeta[0] = 0.0;
  CHECK_THROWS_AS(m.validate(), Error);
  m = two_center_model();
  m.bandwidths[1] = -2.0;
  CHECK_THROWS_AS(m.validate(), Error);

  const auto good = two_center_model();
  const auto back = rbf_from_json(to_json(good));
  CHECK(back.centers == good.centers);
  CHECK(back.weights == good.weights);
  CHECK(back.bandwidths == good.bandwidths);
  CHECK(back.zeta == good.zeta);
  CHECK(back.a == good.a);
  auto doc = to_json(good);
  doc["weights"][0].push_back(1.0);
  CHECK_THROWS_AS(rbf_from_json(doc), Error);
  CHECK_THROWS_AS(rbf_from_json(nlohmann::json::object()), Error);
}
