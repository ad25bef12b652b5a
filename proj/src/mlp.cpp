#include "lr/mlp.hpp"

#include <cmath>

#include "lr/error.hpp"

namespace lr {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double activate(Activation kind, double x) {
  switch (kind) {
    case Activation::identity:
      return x;
    case Activation::tanh:
      return std::tanh(x);
    case Activation::sigmoid:
      return sigmoid(x);
    case Activation::softplus:
      // log(1 + e^x) = max(x, 0) + log1p(e^{-|x|})
      return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
  }
  return x;
}

double activate_derivative(Activation kind, double x) {
  switch (kind) {
    case Activation::identity:
      return 1.0;
    case Activation::tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::sigmoid: {
      const double s = sigmoid(x);
      return s * (1.0 - s);
    }
    case Activation::softplus:
      return sigmoid(x);
  }
  return 1.0;
}

const char* to_string(Activation kind) {
  switch (kind) {
    case Activation::identity:
      return "identity";
    case Activation::tanh:
      return "tanh";
    case Activation::sigmoid:
      return "sigmoid";
    case Activation::softplus:
      return "softplus";
  }
  return "identity";
}

Activation activation_from_string(const std::string& name) {
  if (name == "identity" || name == "linear") return Activation::identity;
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "softplus") return Activation::softplus;
  fail(ErrorCode::parse, "unknown activation '" + name + "'");
}

Vec MlpGradients::flatten() const {
  Eigen::Index total = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    total += weights[l].size() + bias[l].size();
  }
  Vec flat(total);
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    flat.segment(offset, weights[l].size()) =
        Eigen::Map<const Vec>(weights[l].data(), weights[l].size());
    offset += weights[l].size();
    flat.segment(offset, bias[l].size()) = bias[l];
    offset += bias[l].size();
  }
  return flat;
}

MlpGradients& MlpGradients::operator+=(const MlpGradients& other) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] += other.weights[l];
    bias[l] += other.bias[l];
  }
  if (input.size() == other.input.size()) input += other.input;
  return *this;
}

MlpGradients& MlpGradients::operator*=(double scale) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] *= scale;
    bias[l] *= scale;
  }
  input *= scale;
  return *this;
}

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  check_shapes();
}

void Mlp::check_shapes() const {
  if (layers_.empty()) fail(ErrorCode::invalid_argument, "Mlp needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.bias.size() != layer.weights.rows()) {
      fail(ErrorCode::dimension_mismatch,
           "layer " + std::to_string(l) + ": bias length does not match weight rows");
    }
    if (l > 0 && layer.weights.cols() != layers_[l - 1].weights.rows()) {
      fail(ErrorCode::dimension_mismatch,
           "layer " + std::to_string(l) + ": input width does not match previous layer");
    }
    if (!layer.weights.allFinite() || !layer.bias.allFinite()) {
      fail(ErrorCode::non_finite, "layer " + std::to_string(l) + ": non-finite parameters");
    }
  }
}

Mlp Mlp::random(std::span<const int> widths, std::span<const Activation> activations,
                std::mt19937_64& rng) {
  if (widths.size() < 2 || activations.size() != widths.size() - 1) {
    fail(ErrorCode::invalid_argument, "Mlp::random: need one activation per layer");
  }
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int fan_in = widths[l];
    const int fan_out = widths[l + 1];
    const double s = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> unif(-s, s);
    DenseLayer layer;
    layer.weights.resize(fan_out, fan_in);
    // Column-major fill keeps the draw order tied to the storage order.
    for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) {
      for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
        layer.weights(i, j) = unif(rng);
      }
    }
    layer.bias = Vec::Zero(fan_out);
    layer.activation = activations[l];
    layers.push_back(std::move(layer));
  }
  return Mlp(std::move(layers));
}

Mlp Mlp::affine(Mat weights, Vec bias) {
  DenseLayer layer{std::move(weights), std::move(bias), Activation::identity};
  return Mlp({std::move(layer)});
}

int Mlp::in_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.front().weights.cols());
}

int Mlp::out_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.back().weights.rows());
}

Vec Mlp::forward(const Vec& z) const {
  require_dims(z.size(), in_dim(), "Mlp::forward input");
  Vec h = z;
  for (const auto& layer : layers_) {
    Vec a = layer.weights * h + layer.bias;
    if (layer.activation != Activation::identity) {
      for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = activate(layer.activation, a[i]);
    }
    h = std::move(a);
  }
  return h;
}

void Mlp::forward_with_jacobian(const Vec& z, Vec& value, Mat& jac) const {
  require_dims(z.size(), in_dim(), "Mlp::jacobian input");
  Vec h = z;
  jac = Mat::Identity(in_dim(), in_dim());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    Vec a = layer.weights * h + layer.bias;
    Mat next = layer.weights * jac;
    if (layer.activation != Activation::identity) {
      for (Eigen::Index i = 0; i < a.size(); ++i) {
        next.row(i) *= activate_derivative(layer.activation, a[i]);
        a[i] = activate(layer.activation, a[i]);
      }
    }
    if (!next.allFinite()) {
      fail(ErrorCode::non_finite, "Mlp::jacobian: non-finite entry at layer " + std::to_string(l));
    }
    jac = std::move(next);
    h = std::move(a);
  }
  value = std::move(h);
}

Mat Mlp::jacobian(const Vec& z) const {
  Vec value;
  Mat jac;
  forward_with_jacobian(z, value, jac);
  return jac;
}

MlpGradients Mlp::zero_gradients() const {
  MlpGradients g;
  for (const auto& layer : layers_) {
    g.weights.push_back(Mat::Zero(layer.weights.rows(), layer.weights.cols()));
    g.bias.push_back(Vec::Zero(layer.bias.size()));
  }
  g.input = Vec::Zero(in_dim());
  return g;
}

MlpGradients Mlp::param_gradients(const Vec& z, const Vec& upstream) const {
  require_dims(z.size(), in_dim(), "Mlp::param_gradients input");
  require_dims(upstream.size(), out_dim(), "Mlp::param_gradients upstream");
  const std::size_t n = layers_.size();
  std::vector<Vec> inputs(n);
  std::vector<Vec> pre(n);
  Vec h = z;
  for (std::size_t l = 0; l < n; ++l) {
    inputs[l] = h;
    pre[l] = layers_[l].weights * h + layers_[l].bias;
    h = pre[l];
    if (layers_[l].activation != Activation::identity) {
      for (Eigen::Index i = 0; i < h.size(); ++i) h[i] = activate(layers_[l].activation, h[i]);
    }
  }

  MlpGradients g;
  g.weights.resize(n);
  g.bias.resize(n);
  Vec delta = upstream;
  for (std::size_t l = n; l-- > 0;) {
    const auto& layer = layers_[l];
    if (layer.activation != Activation::identity) {
      for (Eigen::Index i = 0; i < delta.size(); ++i) {
        delta[i] *= activate_derivative(layer.activation, pre[l][i]);
      }
    }
    g.weights[l] = delta * inputs[l].transpose();
    g.bias[l] = delta;
    delta = layer.weights.transpose() * delta;
  }
  g.input = std::move(delta);
  return g;
}

std::size_t Mlp::num_parameters() const {
  std::size_t total = 0;
  for (const auto& layer : layers_) total += layer.weights.size() + layer.bias.size();
  return total;
}

Vec Mlp::parameters() const {
  Vec flat(static_cast<Eigen::Index>(num_parameters()));
  Eigen::Index offset = 0;
  for (const auto& layer : layers_) {
    flat.segment(offset, layer.weights.size()) =
        Eigen::Map<const Vec>(layer.weights.data(), layer.weights.size());
    offset += layer.weights.size();
    flat.segment(offset, layer.bias.size()) = layer.bias;
    offset += layer.bias.size();
  }
  return flat;
}

void Mlp::set_parameters(const Vec& flat) {
  require_dims(flat.size(), static_cast<long>(num_parameters()), "Mlp::set_parameters");
  Eigen::Index offset = 0;
  for (auto& layer : layers_) {
    Eigen::Map<Vec>(layer.weights.data(), layer.weights.size()) =
        flat.segment(offset, layer.weights.size());
    offset += layer.weights.size();
    layer.bias = flat.segment(offset, layer.bias.size());
    offset += layer.bias.size();
  }
}

nlohmann::json to_json(const Mlp& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : net.layers()) {
    std::vector<double> row_major;
    row_major.reserve(static_cast<std::size_t>(layer.weights.size()));
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) row_major.push_back(layer.weights(i, j));
    }
    layers.push_back({{"rows", layer.weights.rows()},
                      {"cols", layer.weights.cols()},
                      {"weights", row_major},
                      {"bias", std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size())},
                      {"activation", to_string(layer.activation)}});
  }
  return {{"version", 1}, {"layers", layers}};
}

Mlp mlp_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("version").get<int>() != 1) {
      fail(ErrorCode::parse, "unsupported Mlp document version");
    }
    std::vector<DenseLayer> layers;
    for (const auto& item : doc.at("layers")) {
      const auto rows = item.at("rows").get<Eigen::Index>();
      const auto cols = item.at("cols").get<Eigen::Index>();
      const auto w = item.at("weights").get<std::vector<double>>();
      const auto b = item.at("bias").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(w.size()) != rows * cols || static_cast<Eigen::Index>(b.size()) != rows) {
        fail(ErrorCode::parse, "Mlp layer payload does not match its declared shape");
      }
      DenseLayer layer;
      layer.weights.resize(rows, cols);
      for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) layer.weights(i, j) = w[static_cast<std::size_t>(i * cols + j)];
      }
      layer.bias = Eigen::Map<const Vec>(b.data(), rows);
      layer.activation = activation_from_string(item.at("activation").get<std::string>());
      layers.push_back(std::move(layer));
    }
    return Mlp(std::move(layers));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse, std::string("malformed Mlp document: ") + e.what());
  }
}

AdamState::AdamState(std::size_t num_params, double lr)
    : learning_rate(lr),
      first_moment(Vec::Zero(static_cast<Eigen::Index>(num_params))),
      second_moment(Vec::Zero(static_cast<Eigen::Index>(num_params))) {}

void adam_step(AdamState& state, Vec& params, const Vec& grads) {
  require_dims(params.size(), state.first_moment.size(), "adam_step params");
  require_dims(grads.size(), state.first_moment.size(), "adam_step grads");
  ++state.step_count;
  state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * grads;
  state.second_moment =
      state.beta2 * state.second_moment + (1.0 - state.beta2) * grads.cwiseProduct(grads);
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double m_hat = state.first_moment[i] / c1;
    const double v_hat = state.second_moment[i] / c2;
    params[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

}  // namespace lr
