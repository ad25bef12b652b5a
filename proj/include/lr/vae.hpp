#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lr/dataset.hpp"
#include "lr/generator.hpp"
#include "lr/mlp.hpp"

namespace lr {

struct VaeArchitecture {
  int latent_dim = 2;
  std::vector<int> encoder_hidden{32, 16};
  std::vector<int> decoder_hidden{16, 32};
  Activation hidden_activation = Activation::tanh;
  Activation output_activation = Activation::identity;
  // Ties layer 1 of the encoder mean and encoder scale networks.
  bool share_encoder_first_layer = false;
};

// Encoder q(z|x) = N(mu_phi(x), diag sigma_phi(x)^2), decoder mean mu_theta and
// a decoder variance model.
struct VaeModel {
  Mlp enc_mu;
  Mlp enc_sigma;  // softplus head, outputs the standard deviation
  Mlp dec_mu;
  VarianceModel dec_var;

  int latent_dim() const { return enc_mu.out_dim(); }
  int data_dim() const { return enc_mu.in_dim(); }
  GeneratorModel generator() const { return {dec_mu, dec_var}; }
  Vec encode_mean(const Vec& x) const { return enc_mu.forward(x); }
  Mat encode_means(const Mat& x) const;
  void validate() const;
};

VaeModel make_vae(int data_dim, const VaeArchitecture& arch, std::uint64_t seed,
                  double initial_variance = 1.0);

enum class VarianceKind { fixed, deep_net, rbf };
VarianceKind variance_kind_from_string(const std::string& name);

struct TrainConfig {
  int stage1_epochs = 150;
  int stage2_epochs = 300;
  int batch_size = 64;
  double learning_rate = 3e-3;
  std::uint64_t seed = 0;
  double stage1_variance = 1.0;
  double kl_weight = 1.0;
  VarianceKind variance_kind = VarianceKind::rbf;
  VaeArchitecture arch;

  // Posterior draws per training point when building stage-2 residuals.
  int variance_samples = 4;
  double l2 = 1e-5;

  int rbf_centers = 8;
  double rbf_a = 2.0;
  double rbf_zeta = 1e-2;
  int rbf_iterations = 2000;

  std::vector<int> variance_hidden{32};

  void validate(Eigen::Index n) const;
};

nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& doc);

struct ElboResult {
  double elbo = 0.0;
  double log_likelihood = 0.0;
  double kl = 0.0;
  // Gradients of the ELBO (ascent direction).
  MlpGradients enc_mu;
  MlpGradients enc_sigma;
  MlpGradients dec_mu;
  std::optional<MlpGradients> dec_var;  // only for a deep-net variance
};

double gaussian_log_likelihood(const Vec& x, const Vec& mean, const Vec& variance);
double kl_to_standard_normal(const Vec& mu, const Vec& sigma);

// Single-sample ELBO with z = mu_phi(x) + sigma_phi(x) * eps_z.
ElboResult elbo(const VaeModel& model, const Vec& x, const Vec& eps_z, double kl_weight = 1.0,
                bool with_gradients = true);

struct TrainTrace {
  std::vector<double> stage1_loss;  // mean negative ELBO per epoch
  std::vector<double> stage1_mse;   // reconstruction MSE through the encoder mean
  std::vector<double> stage2_loss;  // variance-fit objective per epoch / iteration
};

struct TrainResult {
  VaeModel model;
  TrainTrace trace;
};

// Stage 1: encoder and decoder mean with sigma_theta^2 frozen at
// cfg.stage1_variance.
TrainResult train_stage1(const Dataset& data, const TrainConfig& cfg);
// Stage 2: freezes everything else and fits cfg.variance_kind.
void fit_variance_stage(VaeModel& model, const Dataset& data, const TrainConfig& cfg, TrainTrace& trace);
TrainResult train_two_stage(const Dataset& data, const TrainConfig& cfg);

// Latent draws and squared residuals (x - mu_theta(z))^2 used by stage 2.
struct VarianceTrainingSet {
  Mat latents;    // M x d
  Mat residuals;  // M x D
};
VarianceTrainingSet variance_training_set(const VaeModel& model, const Mat& x, int samples_per_point,
                                          std::uint64_t seed);

struct MarginalLikelihood {
  Vec per_point;
  double mean = 0.0;
};

// log p(x) ~= log (1/S) sum_s N(x | mu(z_s), diag sigma^2(z_s)) with z_s ~ N(0, I).
MarginalLikelihood marginal_loglik(const GeneratorModel& gen, const Mat& x_test, int samples,
                                   std::uint64_t seed);
MarginalLikelihood marginal_loglik(const GeneratorModel& gen, const Mat& x_test, const Mat& latent_samples);

nlohmann::json to_json(const VaeModel& model);
VaeModel vae_from_json(const nlohmann::json& doc);
void save_model(const VaeModel& model, const std::string& path);
VaeModel load_model(const std::string& path);

}  // namespace lr
