#include "lr/vae.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

#include "lr/error.hpp"
#include "lr/parallel.hpp"
#include "lr/rbf.hpp"

namespace lr {

namespace {

constexpr double log_two_pi = 1.8378770664093454835606594728112;

std::vector<int> widths_of(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> w{in};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(out);
  return w;
}

std::vector<Activation> activations_of(std::size_t hidden, Activation act, Activation head) {
  std::vector<Activation> a(hidden, act);
  a.push_back(head);
  return a;
}

Vec standard_normal(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

std::vector<int> ints_from(const nlohmann::json& j) { return j.get<std::vector<int>>(); }

}  // namespace

Mat VaeModel::encode_means(const Mat& x) const {
  Mat codes(x.rows(), latent_dim());
  for (Eigen::Index i = 0; i < x.rows(); ++i) codes.row(i) = enc_mu.forward(x.row(i).transpose()).transpose();
  return codes;
}

void VaeModel::validate() const {
  require_dims(enc_sigma.in_dim(), enc_mu.in_dim(), "encoder scale input");
  require_dims(enc_sigma.out_dim(), enc_mu.out_dim(), "encoder scale output");
  require_dims(dec_mu.in_dim(), latent_dim(), "decoder input");
  require_dims(dec_mu.out_dim(), data_dim(), "decoder output");
  if (latent_dim() > data_dim()) {
    fail(ErrorCode::invalid_argument, "latent dimension must not exceed data dimension");
  }
  if (enc_sigma.layers().back().activation != Activation::softplus) {
    fail(ErrorCode::invalid_argument, "encoder scale network needs a softplus head");
  }
  generator().validate();
}

VaeModel make_vae(int data_dim, const VaeArchitecture& arch, std::uint64_t seed, double initial_variance) {
  std::mt19937_64 rng(seed);
  const auto enc_w = widths_of(data_dim, arch.encoder_hidden, arch.latent_dim);
  const auto dec_w = widths_of(arch.latent_dim, arch.decoder_hidden, data_dim);
  VaeModel m;
  m.enc_mu = Mlp::random(enc_w, activations_of(arch.encoder_hidden.size(), arch.hidden_activation,
                                               Activation::identity),
                         rng);
  m.enc_sigma = Mlp::random(enc_w, activations_of(arch.encoder_hidden.size(), arch.hidden_activation,
                                                  Activation::softplus),
                            rng);
  if (arch.share_encoder_first_layer && arch.encoder_hidden.size() > 0) {
    m.enc_sigma.layers()[0].weights = m.enc_mu.layers()[0].weights;
    m.enc_sigma.layers()[0].bias = m.enc_mu.layers()[0].bias;
  }
  m.dec_mu = Mlp::random(dec_w, activations_of(arch.decoder_hidden.size(), arch.hidden_activation,
                                               arch.output_activation),
                         rng);
  m.dec_var = ConstantVariance{Vec::Constant(data_dim, initial_variance)};
  m.validate();
  return m;
}

VarianceKind variance_kind_from_string(const std::string& name) {
  if (name == "fixed") return VarianceKind::fixed;
  if (name == "deep-net") return VarianceKind::deep_net;
  if (name == "rbf") return VarianceKind::rbf;
  fail(ErrorCode::invalid_argument, "unknown variance kind '" + name + "'");
}

void TrainConfig::validate(Eigen::Index n) const {
  if (stage1_epochs < 1 || stage2_epochs < 0) fail(ErrorCode::invalid_argument, "epochs must be positive");
  if (batch_size < 1 || batch_size > n) fail(ErrorCode::invalid_argument, "batch size must be in [1, N]");
  if (!(learning_rate > 0.0)) fail(ErrorCode::invalid_argument, "learning rate must be positive");
  if (!(stage1_variance > 0.0)) fail(ErrorCode::invalid_argument, "stage-1 variance must be positive");
  if (variance_samples < 1) fail(ErrorCode::invalid_argument, "variance_samples must be >= 1");
  if (!(rbf_zeta > 0.0) || !(rbf_a > 0.0)) fail(ErrorCode::invalid_argument, "RBF zeta and a must be positive");
}

nlohmann::json to_json(const TrainConfig& cfg) {
  const char* kind = cfg.variance_kind == VarianceKind::rbf
                         ? "rbf"
                         : (cfg.variance_kind == VarianceKind::deep_net ? "deep-net" : "fixed");
  return {{"stage1_epochs", cfg.stage1_epochs},
          {"stage2_epochs", cfg.stage2_epochs},
          {"batch_size", cfg.batch_size},
          {"learning_rate", cfg.learning_rate},
          {"seed", cfg.seed},
          {"stage1_variance", cfg.stage1_variance},
          {"kl_weight", cfg.kl_weight},
          {"variance_kind", kind},
          {"latent_dim", cfg.arch.latent_dim},
          {"encoder_hidden", cfg.arch.encoder_hidden},
          {"decoder_hidden", cfg.arch.decoder_hidden},
          {"hidden_activation", to_string(cfg.arch.hidden_activation)},
          {"output_activation", to_string(cfg.arch.output_activation)},
          {"share_encoder_first_layer", cfg.arch.share_encoder_first_layer},
          {"variance_samples", cfg.variance_samples},
          {"l2", cfg.l2},
          {"rbf_centers", cfg.rbf_centers},
          {"rbf_a", cfg.rbf_a},
          {"rbf_zeta", cfg.rbf_zeta},
          {"rbf_iterations", cfg.rbf_iterations},
          {"variance_hidden", cfg.variance_hidden}};
}

TrainConfig train_config_from_json(const nlohmann::json& doc) {
  TrainConfig cfg;
  try {
    cfg.stage1_epochs = doc.value("stage1_epochs", cfg.stage1_epochs);
    cfg.stage2_epochs = doc.value("stage2_epochs", cfg.stage2_epochs);
    cfg.batch_size = doc.value("batch_size", cfg.batch_size);
    cfg.learning_rate = doc.value("learning_rate", cfg.learning_rate);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.stage1_variance = doc.value("stage1_variance", cfg.stage1_variance);
    cfg.kl_weight = doc.value("kl_weight", cfg.kl_weight);
    cfg.variance_kind = variance_kind_from_string(doc.value("variance_kind", std::string("rbf")));
    cfg.arch.latent_dim = doc.value("latent_dim", cfg.arch.latent_dim);
    if (doc.contains("encoder_hidden")) cfg.arch.encoder_hidden = ints_from(doc["encoder_hidden"]);
    if (doc.contains("decoder_hidden")) cfg.arch.decoder_hidden = ints_from(doc["decoder_hidden"]);
    cfg.arch.hidden_activation = activation_from_string(doc.value("hidden_activation", std::string("tanh")));
    cfg.arch.output_activation =
        activation_from_string(doc.value("output_activation", std::string("identity")));
    cfg.arch.share_encoder_first_layer = doc.value("share_encoder_first_layer", false);
    cfg.variance_samples = doc.value("variance_samples", cfg.variance_samples);
    cfg.l2 = doc.value("l2", cfg.l2);
    cfg.rbf_centers = doc.value("rbf_centers", cfg.rbf_centers);
    cfg.rbf_a = doc.value("rbf_a", cfg.rbf_a);
    cfg.rbf_zeta = doc.value("rbf_zeta", cfg.rbf_zeta);
    cfg.rbf_iterations = doc.value("rbf_iterations", cfg.rbf_iterations);
    if (doc.contains("variance_hidden")) cfg.variance_hidden = ints_from(doc["variance_hidden"]);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse, std::string("malformed training config: ") + e.what());
  }
  return cfg;
}

double gaussian_log_likelihood(const Vec& x, const Vec& mean, const Vec& variance) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double r = x[j] - mean[j];
    total += -0.5 * (log_two_pi + std::log(variance[j])) - 0.5 * r * r / variance[j];
  }
  return total;
}

double kl_to_standard_normal(const Vec& mu, const Vec& sigma) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double s2 = sigma[i] * sigma[i];
    total += 0.5 * (mu[i] * mu[i] + s2 - 1.0 - std::log(s2));
  }
  return total;
}

ElboResult elbo(const VaeModel& model, const Vec& x, const Vec& eps_z, double kl_weight, bool with_gradients) {
  require_dims(x.size(), model.data_dim(), "elbo input");
  require_dims(eps_z.size(), model.latent_dim(), "elbo eps_z");
  const Vec mu_phi = model.enc_mu.forward(x);
  const Vec sigma_phi = model.enc_sigma.forward(x);
  if ((sigma_phi.array() <= 0.0).any()) fail(ErrorCode::non_finite, "encoder produced a non-positive scale");
  const Vec z = mu_phi + sigma_phi.cwiseProduct(eps_z);
  const Vec mean = model.dec_mu.forward(z);
  const Vec var = variance_at(model.dec_var, z);
  if ((var.array() <= 0.0).any()) fail(ErrorCode::non_finite, "decoder produced a non-positive variance");

  ElboResult out;
  out.log_likelihood = gaussian_log_likelihood(x, mean, var);
  out.kl = kl_to_standard_normal(mu_phi, sigma_phi);
  out.elbo = out.log_likelihood - kl_weight * out.kl;
  if (!with_gradients) return out;

  const Vec resid = x - mean;
  // d ll / d mean and d ll / d var
  const Vec d_mean = resid.cwiseQuotient(var);
  Vec d_var(var.size());
  for (Eigen::Index j = 0; j < var.size(); ++j) {
    d_var[j] = -0.5 / var[j] + 0.5 * resid[j] * resid[j] / (var[j] * var[j]);
  }
  out.dec_mu = model.dec_mu.param_gradients(z, d_mean);
  Vec d_z = out.dec_mu.input;
  if (const auto* deep = std::get_if<DeepVariance>(&model.dec_var)) {
    out.dec_var = deep->net.param_gradients(z, d_var);
    d_z += out.dec_var->input;
  } else if (std::holds_alternative<RbfPrecision>(model.dec_var)) {
    d_z += variance_jacobian_at(model.dec_var, z).transpose() * d_var;
  }

  Vec d_mu_phi = d_z - kl_weight * mu_phi;
  Vec d_sigma_phi(sigma_phi.size());
  for (Eigen::Index i = 0; i < sigma_phi.size(); ++i) {
    d_sigma_phi[i] = d_z[i] * eps_z[i] - kl_weight * (sigma_phi[i] - 1.0 / sigma_phi[i]);
  }
  out.enc_mu = model.enc_mu.param_gradients(x, d_mu_phi);
  out.enc_sigma = model.enc_sigma.param_gradients(x, d_sigma_phi);
  return out;
}

namespace {

double reconstruction_mse(const VaeModel& model, const Mat& x) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Vec xi = x.row(i).transpose();
    total += (xi - model.dec_mu.forward(model.enc_mu.forward(xi))).squaredNorm();
  }
  return total / static_cast<double>(x.rows() * x.cols());
}

// Sums the first-layer gradients of the two encoder networks into both.
void tie_first_layer(MlpGradients& a, MlpGradients& b) {
  const Mat w = a.weights[0] + b.weights[0];
  const Vec bias = a.bias[0] + b.bias[0];
  a.weights[0] = w;
  b.weights[0] = w;
  a.bias[0] = bias;
  b.bias[0] = bias;
}

}  // namespace

TrainResult train_stage1(const Dataset& data, const TrainConfig& cfg) {
  data.validate();
  cfg.validate(data.size());
  TrainResult result;
  result.model = make_vae(data.dim(), cfg.arch, cfg.seed, cfg.stage1_variance);
  VaeModel& model = result.model;
  const bool tie = cfg.arch.share_encoder_first_layer && !cfg.arch.encoder_hidden.empty();

  AdamState opt_mu(model.enc_mu.num_parameters(), cfg.learning_rate);
  AdamState opt_sigma(model.enc_sigma.num_parameters(), cfg.learning_rate);
  AdamState opt_dec(model.dec_mu.num_parameters(), cfg.learning_rate);
  Vec p_mu = model.enc_mu.parameters();
  Vec p_sigma = model.enc_sigma.parameters();
  Vec p_dec = model.dec_mu.parameters();

  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.stage1_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      MlpGradients g_mu = model.enc_mu.zero_gradients();
      MlpGradients g_sigma = model.enc_sigma.zero_gradients();
      MlpGradients g_dec = model.dec_mu.zero_gradients();
      for (std::size_t b = start; b < end; ++b) {
        const Vec x = data.points.row(order[b]).transpose();
        const Vec eps = standard_normal(rng, model.latent_dim());
        const auto r = elbo(model, x, eps, cfg.kl_weight, true);
        if (!std::isfinite(r.elbo) || r.kl < -1e-12) {
          fail(ErrorCode::divergence, "stage-1 training diverged at epoch " + std::to_string(epoch));
        }
        epoch_loss -= r.elbo;
        g_mu += r.enc_mu;
        g_sigma += r.enc_sigma;
        g_dec += r.dec_mu;
      }
      const double scale = -1.0 / static_cast<double>(end - start);
      g_mu *= scale;
      g_sigma *= scale;
      g_dec *= scale;
      if (tie) tie_first_layer(g_mu, g_sigma);
      adam_step(opt_mu, p_mu, g_mu.flatten());
      adam_step(opt_sigma, p_sigma, g_sigma.flatten());
      adam_step(opt_dec, p_dec, g_dec.flatten());
      if (!p_mu.allFinite() || !p_sigma.allFinite() || !p_dec.allFinite()) {
        fail(ErrorCode::divergence, "stage-1 parameters became non-finite at epoch " + std::to_string(epoch));
      }
      model.enc_mu.set_parameters(p_mu);
      model.enc_sigma.set_parameters(p_sigma);
      model.dec_mu.set_parameters(p_dec);
    }
    epoch_loss /= static_cast<double>(data.size());
    if (!std::isfinite(epoch_loss)) {
      fail(ErrorCode::divergence, "stage-1 loss is non-finite at epoch " + std::to_string(epoch));
    }
    result.trace.stage1_loss.push_back(epoch_loss);
    result.trace.stage1_mse.push_back(reconstruction_mse(model, data.points));
  }
  return result;
}

VarianceTrainingSet variance_training_set(const VaeModel& model, const Mat& x, int samples_per_point,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  VarianceTrainingSet set;
  const Eigen::Index m = x.rows() * samples_per_point;
  set.latents.resize(m, model.latent_dim());
  set.residuals.resize(m, model.data_dim());
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Vec xi = x.row(i).transpose();
    const Vec mu = model.enc_mu.forward(xi);
    const Vec sigma = model.enc_sigma.forward(xi);
    for (int s = 0; s < samples_per_point; ++s, ++row) {
      const Vec z = mu + sigma.cwiseProduct(standard_normal(rng, mu.size()));
      set.latents.row(row) = z.transpose();
      set.residuals.row(row) = (xi - model.dec_mu.forward(z)).array().square().transpose();
    }
  }
  return set;
}

void fit_variance_stage(VaeModel& model, const Dataset& data, const TrainConfig& cfg, TrainTrace& trace) {
  cfg.validate(data.size());
  const int out_dim = model.data_dim();
  switch (cfg.variance_kind) {
    case VarianceKind::fixed:
      model.dec_var = ConstantVariance{Vec::Constant(out_dim, cfg.stage1_variance)};
      return;
    case VarianceKind::rbf: {
      const Mat codes = model.encode_means(data.points);
      const auto cb = fit_centers_bandwidths(codes, cfg.rbf_centers, cfg.rbf_a, cfg.seed + 17);
      RbfPrecision rbf;
      rbf.centers = cb.centers;
      rbf.bandwidths = cb.bandwidths;
      rbf.zeta = Vec::Constant(out_dim, cfg.rbf_zeta);
      rbf.a = cfg.rbf_a;
      std::mt19937_64 rng(cfg.seed + 29);
      std::uniform_real_distribution<double> unif(0.0, 1e-2);
      rbf.weights.resize(out_dim, cfg.rbf_centers);
      for (Eigen::Index k = 0; k < rbf.weights.cols(); ++k) {
        for (Eigen::Index j = 0; j < rbf.weights.rows(); ++j) rbf.weights(j, k) = 1e-2 - unif(rng);
      }
      const auto set = variance_training_set(model, data.points, cfg.variance_samples, cfg.seed + 31);
      WeightFitOptions options;
      options.iterations = cfg.rbf_iterations;
      options.l2 = cfg.l2;
      const auto fit = fit_weights(rbf, set.latents, set.residuals, options);
      trace.stage2_loss.assign(fit.objective.begin(), fit.objective.end());
      for (auto& v : trace.stage2_loss) v = -v;
      model.dec_var = std::move(rbf);
      return;
    }
    case VarianceKind::deep_net: {
      std::mt19937_64 rng(cfg.seed + 29);
      auto widths = widths_of(model.latent_dim(), cfg.variance_hidden, out_dim);
      DeepVariance deep{Mlp::random(widths, activations_of(cfg.variance_hidden.size(),
                                                           cfg.arch.hidden_activation, Activation::softplus),
                                    rng)};
      const auto set = variance_training_set(model, data.points, cfg.variance_samples, cfg.seed + 31);
      AdamState opt(deep.net.num_parameters(), cfg.learning_rate);
      Vec params = deep.net.parameters();
      std::vector<Eigen::Index> order(static_cast<std::size_t>(set.latents.rows()));
      std::iota(order.begin(), order.end(), 0);
      const auto batch = static_cast<std::size_t>(cfg.batch_size);
      for (int epoch = 0; epoch < cfg.stage2_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
          const std::size_t end = std::min(order.size(), start + batch);
          MlpGradients g = deep.net.zero_gradients();
          for (std::size_t b = start; b < end; ++b) {
            const Vec z = set.latents.row(order[b]).transpose();
            const Vec r = set.residuals.row(order[b]).transpose();
            const Vec var = deep.net.forward(z).array() + DeepVariance::floor;
            // negative log-likelihood: 1/2 log var + r / (2 var)
            Vec upstream(var.size());
            for (Eigen::Index j = 0; j < var.size(); ++j) {
              epoch_loss += 0.5 * std::log(var[j]) + 0.5 * r[j] / var[j];
              upstream[j] = 0.5 / var[j] - 0.5 * r[j] / (var[j] * var[j]);
            }
            g += deep.net.param_gradients(z, upstream);
          }
          g *= 1.0 / static_cast<double>(end - start);
          Vec flat = g.flatten() + cfg.l2 * params;
          adam_step(opt, params, flat);
          if (!params.allFinite()) {
            fail(ErrorCode::divergence, "stage-2 variance network diverged at epoch " + std::to_string(epoch));
          }
          deep.net.set_parameters(params);
        }
        epoch_loss /= static_cast<double>(order.size());
        if (!std::isfinite(epoch_loss)) {
          fail(ErrorCode::divergence, "stage-2 loss is non-finite at epoch " + std::to_string(epoch));
        }
        trace.stage2_loss.push_back(epoch_loss);
      }
      model.dec_var = std::move(deep);
      return;
    }
  }
}

TrainResult train_two_stage(const Dataset& data, const TrainConfig& cfg) {
  TrainResult result = train_stage1(data, cfg);
  fit_variance_stage(result.model, data, cfg, result.trace);
  return result;
}

MarginalLikelihood marginal_loglik(const GeneratorModel& gen, const Mat& x_test, const Mat& latent_samples) {
  require_dims(x_test.cols(), gen.output_dim(), "marginal_loglik data");
  require_dims(latent_samples.cols(), gen.latent_dim(), "marginal_loglik latents");
  const Eigen::Index s_count = latent_samples.rows();
  if (s_count < 1) fail(ErrorCode::invalid_argument, "marginal_loglik needs at least one sample");
  Mat means(s_count, gen.output_dim());
  Mat variances(s_count, gen.output_dim());
  for (Eigen::Index s = 0; s < s_count; ++s) {
    const Vec z = latent_samples.row(s).transpose();
    means.row(s) = gen.mean.forward(z).transpose();
    variances.row(s) = variance_at(gen.variance, z).transpose();
  }
  MarginalLikelihood out;
  out.per_point.resize(x_test.rows());
  parallel_for(static_cast<std::size_t>(x_test.rows()), [&](std::size_t idx) {
    const auto i = static_cast<Eigen::Index>(idx);
    const Vec x = x_test.row(i).transpose();
    Vec logs(s_count);
    for (Eigen::Index s = 0; s < s_count; ++s) {
      logs[s] = gaussian_log_likelihood(x, means.row(s).transpose(), variances.row(s).transpose());
    }
    const double peak = logs.maxCoeff();
    out.per_point[i] = peak + std::log((logs.array() - peak).exp().sum()) - std::log(static_cast<double>(s_count));
  });
  out.mean = out.per_point.mean();
  return out;
}

MarginalLikelihood marginal_loglik(const GeneratorModel& gen, const Mat& x_test, int samples, std::uint64_t seed) {
  if (samples < 1) fail(ErrorCode::invalid_argument, "marginal_loglik needs S >= 1");
  std::mt19937_64 rng(seed);
  Mat latents(samples, gen.latent_dim());
  for (Eigen::Index s = 0; s < samples; ++s) latents.row(s) = standard_normal(rng, gen.latent_dim()).transpose();
  return marginal_loglik(gen, x_test, latents);
}

nlohmann::json to_json(const VaeModel& model) {
  return {{"format", "latent-riemann-model"},
          {"version", 1},
          {"enc_mu", to_json(model.enc_mu)},
          {"enc_var", to_json(model.enc_sigma)},
          {"dec_mu", to_json(model.dec_mu)},
          {"dec_var", to_json(model.dec_var)},
          {"var_kind", variance_kind(model.dec_var)}};
}

VaeModel vae_from_json(const nlohmann::json& doc) {
  try {
    if (doc.value("version", 0) != 1) fail(ErrorCode::parse, "unsupported model manifest version");
    VaeModel model;
    model.enc_mu = mlp_from_json(doc.at("enc_mu"));
    model.enc_sigma = mlp_from_json(doc.at("enc_var"));
    model.dec_mu = mlp_from_json(doc.at("dec_mu"));
    model.dec_var = variance_from_json(doc.at("dec_var"), doc.at("var_kind").get<std::string>());
    model.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse, std::string("malformed model manifest: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::parse) throw;
    fail(ErrorCode::parse, std::string("invalid model manifest: ") + e.what());
  }
}

void save_model(const VaeModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot write model '" + path + "'");
  out << to_json(model).dump(1) << '\n';
}

VaeModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open model '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse, "model '" + path + "' is not valid JSON: " + e.what());
  }
  return vae_from_json(doc);
}

}  // namespace lr
