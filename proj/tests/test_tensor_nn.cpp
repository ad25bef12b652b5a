#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "lr/error.hpp"
#include "lr/mlp.hpp"
#include "oracles.hpp"

using namespace lr;

TEST_CASE("activation derivatives agree with central differences") {
  for (auto kind : {Activation::identity, Activation::tanh, Activation::sigmoid, Activation::softplus}) {
    for (int i = 0; i < 100; ++i) {
      const double x = -10.0 + 20.0 * i / 99.0;
      const double h = 1e-5;
      const double fd = (activate(kind, x + h) - activate(kind, x - h)) / (2.0 * h);
      const double analytic = activate_derivative(kind, x);
      CHECK(std::abs(analytic - fd) / (1.0 + std::abs(analytic)) < 1e-7);
    }
  }
}

TEST_CASE("softplus is overflow safe") {
  CHECK(std::abs(activate(Activation::softplus, 31.0) - 31.0) < 1e-9);
  CHECK(std::abs(activate(Activation::softplus, 800.0) - 800.0) < 1e-9);
  CHECK(std::isfinite(activate(Activation::softplus, -800.0)));
  CHECK(activate(Activation::softplus, -800.0) >= 0.0);
}

TEST_CASE("forward: identity and tanh single layers") {
  const Mlp ident = Mlp::affine(Mat::Identity(2, 2), Vec::Zero(2));
  const Vec out = ident.forward(Vec{{0.3, -0.7}});
  CHECK(out[0] == 0.3);
  CHECK(out[1] == -0.7);

  Mlp tanh_net({DenseLayer{Mat::Identity(2, 2), Vec::Zero(2), Activation::tanh}});
  CHECK(tanh_net.forward(Vec::Zero(2)).norm() == 0.0);
}

TEST_CASE("forward matches a naive loop re-evaluation") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Mlp net = oracle::random_net(rng, 2, 16, 3, 4);
    Vec z(3);
    z << 0.2 * trial - 1.0, 0.5, -0.3;
    CHECK((net.forward(z) - oracle::naive_forward(net, z)).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("forward rejects the wrong input dimension") {
  const Mlp net = Mlp::affine(Mat::Identity(2, 2), Vec::Zero(2));
  CHECK_THROWS_AS(net.forward(Vec::Zero(3)), Error);
  try {
    net.forward(Vec::Zero(3));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::dimension_mismatch);
  }
}

TEST_CASE("jacobian of linear and tanh nets") {
  Mat a(3, 2);
  a << 1, 2, -3, 0.5, 4, -1;
  const Mlp lin = Mlp::affine(a, Vec{{0.1, 0.2, 0.3}});
  CHECK((lin.jacobian(Vec{{5.0, -2.0}}) - a).norm() == 0.0);

  Mat w(2, 2);
  w << 0.7, -0.2, 0.4, 1.3;
  Mlp tanh_net({DenseLayer{w, Vec::Zero(2), Activation::tanh}});
  CHECK((tanh_net.jacobian(Vec::Zero(2)) - w).norm() < 1e-15);
}

TEST_CASE("jacobian agrees with finite differences") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> layers(1, 4);
  std::uniform_int_distribution<int> dims(1, 64);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int in = dims(rng);
    const Mlp net = oracle::random_net(rng, layers(rng), 64, in, dims(rng));
    Vec z(in);
    for (auto& v : z) v = normal(rng);
    const Mat fd = oracle::fd_jacobian([&](const Vec& x) { return oracle::naive_forward(net, x); }, z);
    CHECK(oracle::rel_error(net.jacobian(z), fd) < 1e-5);
  }
}

TEST_CASE("jacobian reports the layer with a non-finite entry") {
  Mat w(1, 1);
  w << 1e308;
  Mlp net({DenseLayer{w, Vec::Zero(1), Activation::identity}, DenseLayer{w, Vec::Zero(1), Activation::identity}});
  try {
    net.jacobian(Vec::Ones(1));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::non_finite);
    CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
  }
}

TEST_CASE("forward and jacobian are pure") {
  std::mt19937_64 rng(3);
  const Mlp net = oracle::random_net(rng, 3, 8, 2, 5);
  const Vec z{{0.4, -1.1}};
  CHECK(net.forward(z) == net.forward(z));
  CHECK(net.jacobian(z) == net.jacobian(z));
}

TEST_CASE("param_gradients of a single linear layer") {
  Mat a(2, 3);
  a << 1, 2, 3, 4, 5, 6;
  const Mlp lin = Mlp::affine(a, Vec::Zero(2));
  const Vec z{{1.0, -2.0, 0.5}};
  const Vec u{{0.3, -0.4}};
  const auto g = lin.param_gradients(z, u);
  CHECK((g.weights[0] - u * z.transpose()).norm() < 1e-15);
  CHECK((g.bias[0] - u).norm() < 1e-15);
  CHECK((g.input - a.transpose() * u).norm() < 1e-14);

  const auto zero = lin.param_gradients(z, Vec::Zero(2));
  CHECK(zero.flatten().norm() == 0.0);
}

TEST_CASE("param_gradients agree with per-parameter finite differences") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Mlp net = oracle::random_net(rng, 2, 12, 3, 4);
    Vec z(3), u(4);
    for (auto& v : z) v = normal(rng);
    for (auto& v : u) v = normal(rng);
    const Vec analytic = net.param_gradients(z, u).flatten();
    const Vec params = net.parameters();
    Vec fd(params.size());
    const double h = 1e-6;
    for (Eigen::Index p = 0; p < params.size(); ++p) {
      Vec plus = params, minus = params;
      plus[p] += h;
      minus[p] -= h;
      net.set_parameters(plus);
      const double fp = u.dot(oracle::naive_forward(net, z));
      net.set_parameters(minus);
      const double fm = u.dot(oracle::naive_forward(net, z));
      fd[p] = (fp - fm) / (2.0 * h);
    }
    net.set_parameters(params);
    CHECK(oracle::rel_error(analytic, fd) < 1e-4);
  }
}

TEST_CASE("param_gradients shape mismatch") {
  const Mlp lin = Mlp::affine(Mat::Identity(2, 2), Vec::Zero(2));
  CHECK_THROWS_AS(lin.param_gradients(Vec::Zero(2), Vec::Zero(3)), Error);
}

TEST_CASE("adam: single step, zero gradient, and descent direction") {
  {
    AdamState state(1, 0.01);
    Vec p{{2.0}};
    adam_step(state, p, Vec{{1.0}});
    // m_hat = v_hat = 1 after bias correction
    CHECK(std::abs((p[0] - 2.0) - (-0.01 / (1.0 + state.epsilon))) < 1e-9);
  }
  {
    AdamState state(2, 0.01);
    Vec p{{1.0, -1.0}};
    adam_step(state, p, Vec{{0.5, -0.5}});
    const Vec m_before = state.first_moment;
    const Vec after_first = p;
    adam_step(state, p, Vec::Zero(2));
    CHECK((state.first_moment - 0.9 * m_before).norm() < 1e-15);
    // the parameter keeps drifting only through the decayed moments
    CHECK(std::abs(p[0] - after_first[0]) < 0.01);
  }
  {
    AdamState state(1, 0.01);
    Vec p{{0.0}};
    for (int i = 0; i < 200; ++i) adam_step(state, p, Vec{{-3.0}});
    CHECK(p[0] > 1.0);
  }
  {
    AdamState state(3, 0.01);
    Vec p = Vec::Zero(2);
    CHECK_THROWS_AS(adam_step(state, p, Vec::Zero(2)), Error);
  }
}

TEST_CASE("serialization round trip is bit identical") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const Mlp net = oracle::random_net(rng, 3, 10, 2, 3);
    const auto text = to_json(net).dump();
    const Mlp back = mlp_from_json(nlohmann::json::parse(text));
    std::normal_distribution<double> normal(0.0, 2.0);
    for (int k = 0; k < 10; ++k) {
      const Vec z{{normal(rng), normal(rng)}};
      const Vec a = net.forward(z);
      const Vec b = back.forward(z);
      CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0);
    }
  }
  CHECK_THROWS_AS(mlp_from_json(nlohmann::json::parse(R"({"version":2,"layers":[]})")), Error);
  CHECK_THROWS_AS(mlp_from_json(nlohmann::json::parse(
                      R"({"version":1,"layers":[{"rows":2,"cols":2,"weights":[1,2,3],"bias":[0,0],"activation":"tanh"}]})")),
                  Error);
}
