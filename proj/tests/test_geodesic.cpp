#include <doctest.h>

#include <cmath>
#include <random>

#include "lr/error.hpp"
#include "lr/geodesic.hpp"

using namespace lr;

namespace {

// M = diag(1, 1 + z1^2)
MetricField warped_field() {
  return MetricField::from_function(2, [](const Vec& z) {
    Mat m = Mat::Identity(2, 2);
    m(1, 1) = 1.0 + z[0] * z[0];
    return m;
  });
}

// Hand-derived: Gamma^1_22 = -z1, Gamma^2_12 = Gamma^2_21 = z1 / (1 + z1^2).
Vec christoffel_acceleration(const Vec& z, const Vec& v) {
  Vec a(2);
  a[0] = z[0] * v[1] * v[1];
  a[1] = -2.0 * z[0] / (1.0 + z[0] * z[0]) * v[0] * v[1];
  return a;
}

MetricField bumpy_field() {
  return MetricField::from_function(2, [](const Vec& z) {
    const double bump = 1.0 + 4.0 * std::exp(-z.squaredNorm());
    Mat m(2, 2);
    m << bump, 0.2 * std::sin(z[0]), 0.2 * std::sin(z[0]), bump + 0.5 * z[1] * z[1];
    return m;
  });
}

MetricField constant_field(const Mat& a) {
  const Mat m = a.transpose() * a;
  return MetricField::from_function(static_cast<int>(a.cols()), [m](const Vec&) { return m; });
}

}  // namespace

TEST_CASE("straight curve under the identity metric has length 5 and energy 25") {
  const MetricField field(identity_generator(2));
  Vec z0(2), z1(2);
  z0 << 0, 0;
  z1 << 3, 4;
  const auto curve = DiscreteCurve::straight(z0, z1, 17);
  CHECK(curve_length(field, curve) == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(curve_energy(field, curve) == doctest::Approx(25.0).epsilon(1e-10));
  CHECK(curve.node(0) == z0);
  CHECK(curve.node(16) == z1);
}

TEST_CASE("straight segment under a constant metric has length |A v|") {
  Mat a(3, 2);
  a << 1, 2, -1, 0.5, 0.3, 3;
  const MetricField field(linear_generator(a));
  Vec z0(2), z1(2);
  z0 << -1, 0.5;
  z1 << 2, -1;
  const auto curve = DiscreteCurve::straight(z0, z1, 9);
  CHECK(curve_length(field, curve) == doctest::Approx((a * (z1 - z0)).norm()).epsilon(1e-10));
}

TEST_CASE("length squared never exceeds energy on random curves") {
  const auto field = bumpy_field();
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    DiscreteCurve c;
    c.nodes.resize(3 + trial % 20, 2);
    for (Eigen::Index i = 0; i < c.nodes.size(); ++i) c.nodes.data()[i] = normal(rng);
    const double len = curve_length(field, c);
    CHECK(len * len <= curve_energy(field, c) * (1.0 + 1e-12));
  }
}

TEST_CASE("curves with fewer than three nodes are rejected") {
  Vec z(2);
  z << 0, 1;
  CHECK_THROWS_AS(DiscreteCurve::straight(z, z, 2), Error);
  DiscreteCurve c;
  c.nodes = Mat::Zero(2, 2);
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("ode right-hand side vanishes for constant metrics and zero velocity") {
  Mat a(2, 2);
  a << 2, 1, 0, 1;
  const auto flat = constant_field(a);
  const auto warped = warped_field();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const Vec z = Vec::NullaryExpr(2, [&] { return normal(rng); });
    const Vec v = Vec::NullaryExpr(2, [&] { return normal(rng); });
    CHECK(geodesic_ode_rhs(flat, z, v).norm() < 1e-8);
    CHECK(geodesic_ode_rhs(warped, z, Vec::Zero(2)).norm() == 0.0);
  }
}

TEST_CASE("ode right-hand side matches hand-derived Christoffel symbols") {
  const auto field = warped_field();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    Vec z(2), v(2);
    z << uni(rng), uni(rng);
    v << uni(rng), uni(rng);
    const Vec want = christoffel_acceleration(z, v);
    worst = std::max(worst, (geodesic_ode_rhs(field, z, v) - want).norm() / std::max(1.0, want.norm()));
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("singular metric is reported with the offending point") {
  const auto field = MetricField::from_function(2, [](const Vec&) { return Mat::Zero(2, 2); });
  Vec z(2), v(2);
  z << 0.5, -0.25;
  v << 1, 0;
  try {
    geodesic_ode_rhs(field, z, v);
    FAIL("expected a singular metric error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::singular_metric);
    CHECK(std::string(e.what()).find("0.5") != std::string::npos);
  }
}

TEST_CASE("shortest path is the straight line under flat metrics") {
  Mat a(3, 2);
  a << 1, 2, -1, 0.5, 0.3, 3;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (const auto& field : {MetricField(identity_generator(2)), MetricField(linear_generator(a))}) {
    const Mat ata = field.metric(Vec::Zero(2));
    for (int i = 0; i < 10; ++i) {
      const Vec z0 = Vec::NullaryExpr(2, [&] { return normal(rng); });
      const Vec z1 = Vec::NullaryExpr(2, [&] { return normal(rng); });
      const auto sol = shortest_path(field, z0, z1);
      const Vec diff = z1 - z0;
      CHECK(sol.converged);
      CHECK(std::abs(sol.length - std::sqrt(diff.dot(ata * diff))) < 1e-6);
      const auto line = DiscreteCurve::straight(z0, z1, sol.curve.size());
      CHECK((sol.curve.nodes - line.nodes).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("equal endpoints give the trivial solution") {
  const auto field = bumpy_field();
  Vec z(2);
  z << 0.3, 0.1;
  const auto sol = shortest_path(field, z, z);
  CHECK(sol.length == 0.0);
  CHECK(sol.converged);
  CHECK(sol.strategy == "trivial");
}

TEST_CASE("curved shortest paths are certified, shorter than the chord and stable") {
  const auto field = bumpy_field();
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  for (int i = 0; i < 10; ++i) {
    Vec z0(2), z1(2);
    z0 << uni(rng), uni(rng);
    z1 << uni(rng), uni(rng);
    const auto sol = shortest_path(field, z0, z1);
    CHECK(sol.converged);
    CHECK(sol.residual < 1e-3);
    CHECK(sol.residual == doctest::Approx(ode_residual(field, sol.curve)));
    CHECK(sol.curve.node(0) == z0);
    CHECK(sol.curve.node(sol.curve.size() - 1) == z1);
    const double chord = curve_length(field, DiscreteCurve::straight(z0, z1, 32));
    CHECK(sol.length <= chord * (1.0 + 1e-9));

    const auto back = shortest_path(field, z1, z0);
    CHECK(std::abs(sol.length - back.length) / sol.length < 0.01);

    GeodesicConfig fine;
    fine.nodes = 64;
    const auto refined = shortest_path(field, z0, z1, fine);
    CHECK(std::abs(refined.length - sol.length) / sol.length < 0.005);
  }
}

TEST_CASE("warm starts reach the same geodesic") {
  const auto field = bumpy_field();
  Vec z0(2), z1(2), z2(2);
  z0 << -1.5, -0.2;
  z1 << 1.5, 0.3;
  z2 << 1.6, 0.2;
  const auto cold = shortest_path(field, z0, z2);
  GeodesicConfig cfg;
  cfg.initial = shortest_path(field, z0, z1).curve;
  const auto warm = shortest_path(field, z0, z2, cfg);
  CHECK(warm.converged);
  CHECK(warm.length == doctest::Approx(cold.length).epsilon(1e-4));
}

TEST_CASE("exp map is a translation under the identity metric") {
  const MetricField field(identity_generator(2));
  Vec z0(2), v(2);
  z0 << 1, -2;
  v << 0.5, 3;
  CHECK((exp_map(field, z0, v).endpoint - (z0 + v)).norm() < 1e-9);
  const auto still = exp_map(field, z0, Vec::Zero(2));
  CHECK(still.endpoint == z0);
  CHECK(still.steps == 0);
}

TEST_CASE("exp map conserves speed and its geodesic length matches the shortest path") {
  const auto field = warped_field();
  Vec z0(2), v(2);
  z0 << 0.5, 0.0;
  v << 0.3, 0.8;
  const auto res = exp_map(field, z0, v);
  const double speed0 = std::sqrt(v.dot(field.metric(z0) * v));
  const Vec v1 = res.final_velocity;
  CHECK(std::sqrt(v1.dot(field.metric(res.endpoint) * v1)) == doctest::Approx(speed0).epsilon(1e-6));
  const auto sol = shortest_path(field, z0, res.endpoint);
  CHECK(sol.length == doctest::Approx(speed0).epsilon(1e-3));
  CHECK(res.times.back() == doctest::Approx(1.0));
  CHECK(res.positions.rows() == static_cast<Eigen::Index>(res.times.size()));
}

TEST_CASE("log map inverts exp map") {
  const auto field = bumpy_field();
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    Vec z0(2), v(2);
    z0 << uni(rng), uni(rng);
    v << uni(rng), uni(rng);
    v *= 0.6;
    const Vec z1 = exp_map(field, z0, v).endpoint;
    const auto log = log_map(field, z0, z1);
    CHECK((log.tangent - v).norm() < 1e-3);
    CHECK((exp_map(field, z0, log.tangent).endpoint - z1).norm() < 1e-3);
  }
}

TEST_CASE("log map norms are symmetric and flat log maps are differences") {
  const MetricField flat(identity_generator(2));
  Vec a(2), b(2);
  a << 0.2, -1;
  b << 1.4, 0.7;
  CHECK((log_map(flat, a, b).tangent - (b - a)).norm() < 1e-6);
  const auto field = bumpy_field();
  const Vec ab = log_map(field, a, b).tangent;
  const Vec ba = log_map(field, b, a).tangent;
  const double nab = std::sqrt(ab.dot(field.metric(a) * ab));
  const double nba = std::sqrt(ba.dot(field.metric(b) * ba));
  CHECK(std::abs(nab - nba) / nab < 0.01);
}

TEST_CASE("dimension mismatches are rejected") {
  const MetricField field(identity_generator(2));
  CHECK_THROWS_AS(shortest_path(field, Vec::Zero(2), Vec::Zero(3)), Error);
  CHECK_THROWS_AS(exp_map(field, Vec::Zero(3), Vec::Zero(3)), Error);
  CHECK_THROWS_AS(geodesic_ode_rhs(field, Vec::Zero(2), Vec::Zero(1)), Error);
}
