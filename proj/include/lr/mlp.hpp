#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lr/types.hpp"

namespace lr {

enum class Activation { identity, tanh, sigmoid, softplus };

double activate(Activation kind, double x);
// First derivative with respect to the pre-activation.
double activate_derivative(Activation kind, double x);

const char* to_string(Activation kind);
Activation activation_from_string(const std::string& name);

struct DenseLayer {
  Mat weights;  // out x in
  Vec bias;     // out
  Activation activation = Activation::identity;
};

// Gradients of a scalar loss with respect to every layer parameter, plus the
// gradient with respect to the network input.
struct MlpGradients {
  std::vector<Mat> weights;
  std::vector<Vec> bias;
  Vec input;

  Vec flatten() const;
  MlpGradients& operator+=(const MlpGradients& other);
  MlpGradients& operator*=(double scale);
};

class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<DenseLayer> layers);

  // Glorot-uniform weights, zero biases. `widths` lists every layer size from
  // the input to the output, `activations` has one entry per dense layer.
  static Mlp random(std::span<const int> widths,
                    std::span<const Activation> activations,
                    std::mt19937_64& rng);

  // Single layer z -> W z + b with the identity activation.
  static Mlp affine(Mat weights, Vec bias);

  int in_dim() const;
  int out_dim() const;
  std::size_t num_layers() const { return layers_.size(); }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  Vec forward(const Vec& z) const;
  Mat jacobian(const Vec& z) const;
  // Value and jacobian from one pass.
  void forward_with_jacobian(const Vec& z, Vec& value, Mat& jac) const;

  // Reverse-mode gradient of <upstream, forward(z)>.
  MlpGradients param_gradients(const Vec& z, const Vec& upstream) const;
  MlpGradients zero_gradients() const;

  std::size_t num_parameters() const;
  Vec parameters() const;
  void set_parameters(const Vec& flat);

 private:
  void check_shapes() const;

  std::vector<DenseLayer> layers_;
};

nlohmann::json to_json(const Mlp& net);
Mlp mlp_from_json(const nlohmann::json& doc);

// Adam optimizer over a flat parameter vector.
struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step_count = 0;
  Vec first_moment;
  Vec second_moment;

  explicit AdamState(std::size_t num_params, double lr = 1e-3);
};

void adam_step(AdamState& state, Vec& params, const Vec& grads);

}  // namespace lr
