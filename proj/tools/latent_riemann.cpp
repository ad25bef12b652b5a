// latent-riemann: command-line front end. Every run writes manifest.json next
// to its outputs; `replay <manifest>` re-runs it from that file alone.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lr/dataset.hpp"
#include "lr/error.hpp"
#include "lr/geodesic.hpp"
#include "lr/metric.hpp"
#include "lr/stats.hpp"
#include "lr/vae.hpp"
#include "lr/version.hpp"
#include "lr/walk.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace lr;

namespace {

enum Exit { ok = 0, internal = 1, usage = 2, io = 3, parse = 4, dimension = 5, numerical = 6, degenerate = 7 };

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument:
      return usage;
    case ErrorCode::io:
      return io;
    case ErrorCode::parse:
      return parse;
    case ErrorCode::dimension_mismatch:
      return dimension;
    case ErrorCode::non_finite:
    case ErrorCode::singular_metric:
    case ErrorCode::divergence:
    case ErrorCode::step_underflow:
      return numerical;
    case ErrorCode::degenerate:
      return degenerate;
  }
  return internal;
}

int report(const std::string& code, const std::string& message, int exit_code) {
  json doc = {{"error", {{"code", code}, {"message", message}, {"exit_code", exit_code}}}};
  std::cerr << doc.dump() << "\n";
  return exit_code;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Collects output files so the manifest can list them.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

  const fs::path& dir() const { return dir_; }

  std::ofstream open(const std::string& name) {
    std::ofstream out(dir_ / name);
    if (!out) fail(ErrorCode::io, "cannot write " + (dir_ / name).string());
    files_.push_back(name);
    return out;
  }

  void write_json(const std::string& name, const json& doc) { open(name) << doc.dump(2) << "\n"; }

  void write_matrix(const std::string& name, const std::vector<std::string>& header, const Mat& m) {
    auto out = open(name);
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << "\n";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << num(m(r, c));
      out << "\n";
    }
  }

  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

std::vector<std::string> columns(const std::string& prefix, Eigen::Index n) {
  std::vector<std::string> out;
  for (Eigen::Index i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i + 1));
  return out;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json mat_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec_json(m.row(r).transpose()));
  return rows;
}

Vec row_of(const Mat& m, Eigen::Index r) { return m.row(r).transpose(); }

std::uint64_t seed_of(const json& cfg) { return cfg.at("seed").get<std::uint64_t>(); }

// Points for the statistics commands: data-space rows are encoded with the
// encoder mean, latent rows are used as they are.
struct LatentPoints {
  Mat z;
  std::vector<int> labels;
};

LatentPoints load_points(const json& cfg, const VaeModel& model) {
  const Dataset data = read_csv(cfg.at("data").get<std::string>());
  LatentPoints out;
  out.labels = data.labels;
  if (cfg.at("space").get<std::string>() == "latent") {
    require_dims(data.dim(), model.latent_dim(), "latent points");
    out.z = data.points;
  } else {
    require_dims(data.dim(), model.data_dim(), "data points");
    out.z = model.encode_means(data.points);
  }
  return out;
}

TrainConfig train_config(const json& cfg) {
  TrainConfig t;
  t.seed = seed_of(cfg);
  t.stage1_epochs = cfg.at("stage1_epochs").get<int>();
  t.stage2_epochs = cfg.at("stage2_epochs").get<int>();
  t.stage1_variance = cfg.at("stage1_variance").get<double>();
  t.batch_size = cfg.at("batch_size").get<int>();
  t.learning_rate = cfg.at("learning_rate").get<double>();
  t.variance_kind = variance_kind_from_string(cfg.at("variance").get<std::string>());
  t.rbf_centers = cfg.at("centers").get<int>();
  t.rbf_a = cfg.at("rbf_a").get<double>();
  t.rbf_zeta = cfg.at("zeta").get<double>();
  t.arch.latent_dim = cfg.at("latent_dim").get<int>();
  return t;
}

void write_trace(Outputs& out, const TrainTrace& trace) {
  Mat s1(static_cast<Eigen::Index>(trace.stage1_loss.size()), 3);
  for (Eigen::Index e = 0; e < s1.rows(); ++e) {
    s1.row(e) << static_cast<double>(e + 1), trace.stage1_loss[static_cast<std::size_t>(e)],
        trace.stage1_mse[static_cast<std::size_t>(e)];
  }
  out.write_matrix("stage1_trace.csv", {"epoch", "loss", "mse"}, s1);
  Mat s2(static_cast<Eigen::Index>(trace.stage2_loss.size()), 2);
  for (Eigen::Index e = 0; e < s2.rows(); ++e) s2.row(e) << static_cast<double>(e), trace.stage2_loss[static_cast<std::size_t>(e)];
  out.write_matrix("stage2_trace.csv", {"iteration", "objective"}, s2);
}

void cmd_make_data(const json& cfg, Outputs& out) {
  const auto kind = toy_kind_from_string(cfg.at("kind").get<std::string>());
  const Dataset data = make_toy_dataset(kind, cfg.at("n").get<int>(), cfg.at("noise").get<double>(), seed_of(cfg),
                                        cfg.at("ambient_dim").get<int>());
  out.open("data.csv").close();
  write_csv(data, (out.dir() / "data.csv").string());
}

void cmd_train(const json& cfg, Outputs& out) {
  const Dataset data = read_csv(cfg.at("data").get<std::string>());
  const TrainResult result = train_two_stage(data, train_config(cfg));
  out.open("model.json").close();
  save_model(result.model, (out.dir() / "model.json").string());
  write_trace(out, result.trace);
  const Mat codes = result.model.encode_means(data.points);
  Mat table(codes.rows(), codes.cols() + (data.has_labels() ? 1 : 0));
  table.leftCols(codes.cols()) = codes;
  if (data.has_labels()) {
    for (Eigen::Index i = 0; i < codes.rows(); ++i) table(i, codes.cols()) = data.labels[static_cast<std::size_t>(i)];
  }
  auto header = columns("z", codes.cols());
  if (data.has_labels()) header.push_back("label");
  out.write_matrix("codes.csv", header, table);
}

struct Axis {
  double lo = 0.0;
  double hi = 0.0;
  int n = 0;
};

std::vector<Axis> parse_grid(const std::string& spec) {
  std::vector<Axis> axes;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    Axis a;
    char c1 = 0, c2 = 0;
    std::stringstream ps(part);
    if (!(ps >> a.lo >> c1 >> a.hi >> c2 >> a.n) || c1 != ':' || c2 != ':' || !ps.eof() || a.n < 1) {
      fail(ErrorCode::invalid_argument, "grid axis '" + part + "' is not lo:hi:n");
    }
    axes.push_back(a);
  }
  return axes;
}

void cmd_metric_field(const json& cfg, Outputs& out) {
  const VaeModel model = load_model(cfg.at("model").get<std::string>());
  const MetricField field(model.generator());
  const auto axes = parse_grid(cfg.at("grid").get<std::string>());
  const int d = model.latent_dim();
  require_dims(static_cast<Eigen::Index>(axes.size()), d, "grid axes");
  Eigen::Index total = 1;
  for (const auto& a : axes) total *= a.n;
  const auto pairs = d * (d + 1) / 2;
  Mat table(total, d + 2 + pairs);
  for (Eigen::Index r = 0; r < total; ++r) {
    Vec z(d);
    Eigen::Index rest = r;
    for (int k = d - 1; k >= 0; --k) {
      const auto& a = axes[static_cast<std::size_t>(k)];
      const Eigen::Index idx = rest % a.n;
      rest /= a.n;
      z[k] = a.n == 1 ? a.lo : a.lo + (a.hi - a.lo) * static_cast<double>(idx) / (a.n - 1);
    }
    const Mat m = field.metric(z);
    table.row(r).head(d) = z.transpose();
    table(r, d) = field.volume_measure(z);
    table(r, d + 1) = variance_at(model.dec_var, z).mean();
    int c = d + 2;
    for (int i = 0; i < d; ++i) {
      for (int j = i; j < d; ++j) table(r, c++) = m(i, j);
    }
  }
  auto header = concat(columns("z", d), {"volume_measure", "mean_variance"});
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) header.push_back("m" + std::to_string(i + 1) + std::to_string(j + 1));
  }
  out.write_matrix("metric_field.csv", header, table);
}

// Endpoint pairs: a CSV file with 2d columns per row, or inline rows
// "a1,a2,b1,b2;..." in latent coordinates.
Mat read_pairs(const std::string& spec, int d) {
  std::vector<std::vector<double>> rows;
  if (fs::exists(spec)) {
    const Dataset table = read_csv(spec);
    require_dims(table.dim(), 2 * d, "pair columns");
    return table.points;
  }
  std::stringstream ss(spec);
  std::string row;
  while (std::getline(ss, row, ';')) {
    std::vector<double> vals;
    std::stringstream rs(row);
    std::string cell;
    while (std::getline(rs, cell, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::logic_error&) {
        fail(ErrorCode::invalid_argument, "cannot read pair value '" + cell + "'");
      }
    }
    require_dims(static_cast<Eigen::Index>(vals.size()), 2 * d, "pair values");
    rows.push_back(vals);
  }
  if (rows.empty()) fail(ErrorCode::invalid_argument, "no endpoint pairs given");
  Mat m(static_cast<Eigen::Index>(rows.size()), 2 * d);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
  return m;
}

GeodesicConfig geodesic_config(const json& cfg) {
  GeodesicConfig g;
  g.nodes = cfg.at("nodes").get<int>();
  g.tol = cfg.at("tol").get<double>();
  return g;
}

void cmd_geodesic(const json& cfg, Outputs& out) {
  const VaeModel model = load_model(cfg.at("model").get<std::string>());
  const MetricField field(model.generator());
  const int d = model.latent_dim();
  const Mat pairs = read_pairs(cfg.at("pairs").get<std::string>(), d);
  const GeodesicConfig g = geodesic_config(cfg);
  json results = json::array();
  Mat curves(pairs.rows() * g.nodes, 3 + d);
  for (Eigen::Index p = 0; p < pairs.rows(); ++p) {
    const Vec a = pairs.row(p).head(d).transpose();
    const Vec b = pairs.row(p).tail(d).transpose();
    const GeodesicSolution sol = shortest_path(field, a, b, g);
    results.push_back({{"pair", p},
                       {"start", vec_json(a)},
                       {"end", vec_json(b)},
                       {"length", sol.length},
                       {"euclidean_length", (b - a).norm()},
                       {"energy", sol.energy},
                       {"residual", std::isfinite(sol.residual) ? json(sol.residual) : json(nullptr)},
                       {"converged", sol.converged},
                       {"strategy", sol.strategy},
                       {"iterations", sol.iterations},
                       {"newton_iterations", sol.newton_iterations}});
    for (int i = 0; i < g.nodes; ++i) {
      const auto r = p * g.nodes + i;
      curves(r, 0) = static_cast<double>(p);
      curves(r, 1) = static_cast<double>(i);
      curves(r, 2) = static_cast<double>(i) / (g.nodes - 1);
      curves.row(r).tail(d) = sol.curve.nodes.row(i);
    }
  }
  out.write_json("geodesics.json", {{"geodesics", results}});
  out.write_matrix("curves.csv", concat({"pair", "node", "t"}, columns("z", d)), curves);
}

void cmd_distances(const json& cfg, Outputs& out) {
  const VaeModel model = load_model(cfg.at("model").get<std::string>());
  const MetricField field(model.generator());
  const auto pts = load_points(cfg, model);
  DistanceOptions options;
  options.geodesic = geodesic_config(cfg);
  const auto kind = distance_kind_from_string(cfg.at("kind").get<std::string>());
  const DistanceMatrix dm = pairwise_distances(field, pts.z, kind, options);
  const auto n = pts.z.rows();
  out.write_matrix("distances.csv", columns("p", n), dm.values);
  out.write_matrix("converged.csv", columns("p", n), dm.converged.cast<double>());
  out.write_json("distances.json", {{"kind", to_string(dm.kind)}, {"points", n}, {"unconverged_pairs", dm.unconverged_pairs()}});
}

void cmd_kmeans(const json& cfg, Outputs& out) {
  const VaeModel model = load_model(cfg.at("model").get<std::string>());
  const MetricField field(model.generator());
  const auto pts = load_points(cfg, model);
  RiemannianKMeansOptions options;
  options.kind = distance_kind_from_string(cfg.at("kind").get<std::string>());
  options.geodesic.nodes = cfg.at("nodes").get<int>();
  options.geodesic.tol = cfg.at("tol").get<double>();
  const auto result = riemannian_kmeans(field, pts.z, cfg.at("k").get<int>(), seed_of(cfg), options);
  Mat table(pts.z.rows(), 2);
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    table(i, 0) = static_cast<double>(i);
    table(i, 1) = result.assignments[static_cast<std::size_t>(i)];
  }
  out.write_matrix("assignments.csv", {"index", "cluster"}, table);
  out.write_matrix("centroids.csv", columns("z", pts.z.cols()), result.centroids);
  json summary = {{"kind", to_string(options.kind)},
                  {"inertia", result.inertia},
                  {"iterations", result.iterations},
                  {"converged", result.converged},
                  {"unconverged_solves", result.unconverged_solves},
                  {"reseeded", result.reseeded}};
  if (!pts.labels.empty()) summary["f_measure"] = f_measure(result.assignments, pts.labels);
  out.write_json("kmeans.json", summary);
}

void cmd_land(const json& cfg, Outputs& out) {
  const VaeModel model = load_model(cfg.at("model").get<std::string>());
  const MetricField field(model.generator());
  const auto pts = load_points(cfg, model);
  LandOptions options;
  options.normalizer.samples = cfg.at("samples").get<int>();
  options.geodesic.nodes = cfg.at("nodes").get<int>();
  const auto mix = fit_land_mixture(field, pts.z, cfg.at("components").get<int>(), seed_of(cfg), options);
  json comps = json::array();
  const int draw = cfg.at("draw").get<int>();
  const auto d = pts.z.cols();
  Mat samples(0, 1 + d + model.data_dim());
  for (std::size_t c = 0; c < mix.components.size(); ++c) {
    const auto& comp = mix.components[c];
    comps.push_back({{"mean", vec_json(comp.mean)},
                     {"covariance", mat_json(comp.covariance)},
                     {"weight", comp.weight},
                     {"log_normalizer", comp.log_normalizer},
                     {"normalizer_rel_error", comp.normalizer_rel_error},
                     {"normalizer_failures", comp.normalizer_failures},
                     {"flagged", comp.flagged}});
    if (draw > 0 && comp.weight > 0.0) {
      const auto s = land_sample(field, comp, draw, seed_of(cfg) + 1000 + c);
      Mat block(draw, samples.cols());
      block.col(0).setConstant(static_cast<double>(c));
      block.middleCols(1, d) = s.latents;
      block.rightCols(model.data_dim()) = s.decoded;
      samples.conservativeResize(samples.rows() + draw, Eigen::NoChange);
      samples.bottomRows(draw) = block;
    }
  }
  json summary = {{"model", "simplified LAND"},
                  {"components", comps},
                  {"objective", mix.objective},
                  {"iterations", mix.iterations},
                  {"reseeded", mix.reseeded}};
  if (!pts.labels.empty()) summary["f_measure"] = f_measure(mix.assignments, pts.labels);
  out.write_json("land.json", summary);
  out.write_matrix("responsibilities.csv", columns("r", mix.responsibilities.cols()), mix.responsibilities);
  out.write_matrix("samples.csv", concat(concat({"component"}, columns("z", d)), columns("x", model.data_dim())), samples);
}

void cmd_walk(const json& cfg, Outputs& out) {
  const VaeModel model = load_model(cfg.at("model").get<std::string>());
  const MetricField field(model.generator());
  const auto pts = load_points(cfg, model);
  const auto start = cfg.at("start").get<Eigen::Index>();
  if (start < 0 || start >= pts.z.rows()) fail(ErrorCode::invalid_argument, "walk start index out of range");
  double s = cfg.at("stepsize").get<double>();
  if (s <= 0.0) s = default_stepsize(pts.z);
  const auto kind = walk_kind_from_string(cfg.at("kind").get<std::string>());
  const WalkOptions box = bounding_box(pts.z);
  const auto trace = run_walk(field, row_of(pts.z, start), s, cfg.at("steps").get<int>(), seed_of(cfg), kind, box);
  const auto band = calibrate_support(field, pts.z);
  const auto d = pts.z.cols();
  Mat table(trace.steps.rows(), 2 + d + model.data_dim());
  for (Eigen::Index n = 0; n < table.rows(); ++n) {
    const Vec z = row_of(trace.steps, n);
    table(n, 0) = static_cast<double>(n);
    table.row(n).segment(1, d) = z.transpose();
    table(n, 1 + d) = field.volume_measure(z);
    table.row(n).tail(model.data_dim()) = field.decode(z).transpose();
  }
  out.write_matrix("walk.csv", concat(concat({"step"}, columns("z", d)), concat({"volume_measure"}, columns("x", model.data_dim()))),
                   table);
  out.write_json("walk.json", {{"kind", to_string(kind)},
                               {"stepsize", s},
                               {"steps", trace.steps.rows() - 1},
                               {"support_fraction", support_fraction(field, trace.steps, band)},
                               {"support_band", {{"lower", band.lower}, {"upper", band.upper}}},
                               {"clamp_warnings", trace.clamp_warnings},
                               {"rejected", trace.rejected}});
}

void cmd_mll_compare(const json& cfg, Outputs& out) {
  const Dataset data = read_csv(cfg.at("data").get<std::string>());
  const auto [train, test] = split_dataset(data, cfg.at("train_fraction").get<double>(), seed_of(cfg));
  TrainConfig tc = train_config(cfg);
  TrainResult base = train_stage1(train, tc);
  const int samples = cfg.at("samples").get<int>();
  json summary = {{"train_points", train.size()}, {"test_points", test.size()}, {"samples", samples}};
  Mat per_point(test.size(), 2);
  int col = 0;
  for (auto kind : {VarianceKind::rbf, VarianceKind::deep_net}) {
    tc.variance_kind = kind;
    VaeModel model = base.model;
    TrainTrace trace;
    fit_variance_stage(model, train, tc, trace);
    const auto mll = marginal_loglik(model.generator(), test.points, samples, seed_of(cfg) + 1);
    summary[kind == VarianceKind::rbf ? "rbf" : "deep_net"] = {{"mean_log_likelihood", mll.mean}};
    per_point.col(col++) = mll.per_point;
  }
  summary["rbf_minus_deep_net"] = summary["rbf"]["mean_log_likelihood"].get<double>() -
                                  summary["deep_net"]["mean_log_likelihood"].get<double>();
  out.write_json("mll.json", summary);
  out.write_matrix("mll_per_point.csv", {"rbf", "deep_net"}, per_point);
}

using Handler = std::function<void(const json&, Outputs&)>;

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table = {
      {"make-data", cmd_make_data}, {"train", cmd_train},   {"metric-field", cmd_metric_field},
      {"geodesic", cmd_geodesic},   {"distances", cmd_distances}, {"kmeans", cmd_kmeans},
      {"land", cmd_land},           {"walk", cmd_walk},     {"mll-compare", cmd_mll_compare}};
  return table;
}

void run(const std::string& name, const json& cfg, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::io, "cannot create output directory " + out_dir.string() + ": " + ec.message());
  Outputs out(out_dir);
  try {
    handlers().at(name)(cfg, out);
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, std::string("bad configuration: ") + e.what());
  }
  json manifest = {{"format_version", file_format_version},
                   {"library_version", library_version},
                   {"subcommand", name},
                   {"seed", cfg.at("seed")},
                   {"config", cfg},
                   {"outputs", out.files()}};
  std::ofstream file(out_dir / "manifest.json");
  if (!file) fail(ErrorCode::io, "cannot write manifest in " + out_dir.string());
  file << manifest.dump(2) << "\n";
}

void replay(const std::string& manifest_path, const std::string& out_override) {
  std::ifstream in(manifest_path);
  if (!in) fail(ErrorCode::io, "cannot open manifest " + manifest_path);
  json manifest;
  try {
    manifest = json::parse(in);
    const auto version = manifest.at("format_version").get<int>();
    if (version != file_format_version) {
      fail(ErrorCode::parse, "manifest format version " + std::to_string(version) + " is not supported");
    }
    const auto name = manifest.at("subcommand").get<std::string>();
    if (!handlers().count(name)) fail(ErrorCode::parse, "manifest names unknown subcommand '" + name + "'");
    const json cfg = manifest.at("config");
    const std::string out = out_override.empty() ? cfg.at("out").get<std::string>() : out_override;
    json effective = cfg;
    effective["out"] = out;
    run(name, effective, out);
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, std::string("malformed manifest: ") + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Riemannian geometry of generative-model latent spaces"};
  app.require_subcommand(1);
  app.set_version_flag("--version", library_version);

  std::map<std::string, json> configs;
  auto common = [&](CLI::App* sub, bool needs_model, bool needs_data) {
    auto& cfg = configs[sub->get_name()];
    cfg["seed"] = 0;
    cfg["out"] = "out";
    sub->add_option_function<std::uint64_t>("--seed", [&cfg](std::uint64_t v) { cfg["seed"] = v; }, "Random seed");
    sub->add_option_function<std::string>("--out", [&cfg](const std::string& v) { cfg["out"] = v; }, "Output directory");
    if (needs_model) {
      sub->add_option_function<std::string>("--model", [&cfg](const std::string& v) { cfg["model"] = v; },
                                            "Model JSON from `train`")
          ->required();
    }
    if (needs_data) {
      sub->add_option_function<std::string>("--data", [&cfg](const std::string& v) { cfg["data"] = v; }, "Points CSV")
          ->required();
    }
    return &cfg;
  };
  auto option = [](CLI::App* sub, json* cfg, const std::string& flag, const std::string& key, auto def,
                   const std::string& help) {
    using T = decltype(def);
    (*cfg)[key] = def;
    sub->add_option_function<T>(flag, [cfg, key](const T& v) { (*cfg)[key] = v; }, help)->default_str(json(def).dump());
  };
  auto space = [&](CLI::App* sub, json* cfg) {
    (*cfg)["space"] = "data";
    sub->add_option_function<std::string>("--space", [cfg](const std::string& v) { (*cfg)["space"] = v; },
                                          "Whether --data rows are data points (encoded) or latent codes")
        ->check(CLI::IsMember({"data", "latent"}));
  };
  auto geodesic_flags = [&](CLI::App* sub, json* cfg) {
    option(sub, cfg, "--nodes", "nodes", 32, "Curve nodes T");
    option(sub, cfg, "--tol", "tol", 1e-3, "ODE residual tolerance");
  };
  auto training_flags = [&](CLI::App* sub, json* cfg) {
    const TrainConfig d;
    option(sub, cfg, "--variance", "variance", std::string("rbf"), "Variance model: rbf, deep-net or fixed");
    option(sub, cfg, "--stage1-epochs", "stage1_epochs", d.stage1_epochs, "Stage-1 epochs");
    option(sub, cfg, "--stage2-epochs", "stage2_epochs", d.stage2_epochs, "Stage-2 epochs (deep-net variance)");
    option(sub, cfg, "--stage1-variance", "stage1_variance", d.stage1_variance, "Fixed decoder variance in stage 1");
    option(sub, cfg, "--batch-size", "batch_size", d.batch_size, "Minibatch size");
    option(sub, cfg, "--learning-rate", "learning_rate", d.learning_rate, "Adam step size");
    option(sub, cfg, "--centers", "centers", d.rbf_centers, "RBF centers K");
    option(sub, cfg, "--rbf-a", "rbf_a", d.rbf_a, "Bandwidth scale a");
    option(sub, cfg, "--zeta", "zeta", d.rbf_zeta, "Precision floor zeta");
    option(sub, cfg, "--latent-dim", "latent_dim", d.arch.latent_dim, "Latent dimension");
  };

  auto* make_data = app.add_subcommand("make-data", "Generate a toy dataset");
  {
    auto* cfg = common(make_data, false, false);
    option(make_data, cfg, "--kind", "kind", std::string("two-blobs"), "two-blobs, arc-pair or two-moons");
    option(make_data, cfg, "--n", "n", 1000, "Number of points");
    option(make_data, cfg, "--noise", "noise", 0.5, "Noise level");
    option(make_data, cfg, "--ambient-dim", "ambient_dim", 2, "Data dimension D");
  }
  auto* train = app.add_subcommand("train", "Two-stage VAE training");
  training_flags(train, common(train, false, true));

  auto* metric_field = app.add_subcommand("metric-field", "Metric, volume measure and variance on a latent grid");
  {
    auto* cfg = common(metric_field, true, false);
    metric_field
        ->add_option_function<std::string>("--grid", [cfg](const std::string& v) { (*cfg)["grid"] = v; },
                                           "x0:x1:n,y0:y1:n")
        ->required();
  }
  auto* geodesic = app.add_subcommand("geodesic", "Shortest paths between latent endpoints");
  {
    auto* cfg = common(geodesic, true, false);
    geodesic
        ->add_option_function<std::string>("--pairs", [cfg](const std::string& v) { (*cfg)["pairs"] = v; },
                                           "CSV of a1..ad,b1..bd rows, or inline 'a1,a2,b1,b2;...'")
        ->required();
    geodesic_flags(geodesic, cfg);
  }
  auto* distances = app.add_subcommand("distances", "Pairwise distance matrix");
  {
    auto* cfg = common(distances, true, true);
    space(distances, cfg);
    option(distances, cfg, "--kind", "kind", std::string("riemannian"), "riemannian or euclidean");
    geodesic_flags(distances, cfg);
  }
  auto* kmeans = app.add_subcommand("kmeans", "k-means under the chosen distance");
  {
    auto* cfg = common(kmeans, true, true);
    space(kmeans, cfg);
    option(kmeans, cfg, "--k", "k", 2, "Clusters");
    option(kmeans, cfg, "--kind", "kind", std::string("riemannian"), "riemannian or euclidean");
    geodesic_flags(kmeans, cfg);
  }
  auto* land = app.add_subcommand("land", "Simplified LAND mixture");
  {
    auto* cfg = common(land, true, true);
    space(land, cfg);
    option(land, cfg, "--components", "components", 2, "Mixture components");
    option(land, cfg, "--samples", "samples", 10000, "Monte-Carlo draws for each normalizer");
    option(land, cfg, "--draw", "draw", 40, "Samples drawn from each component");
    option(land, cfg, "--nodes", "nodes", 32, "Curve nodes T");
  }
  auto* walk = app.add_subcommand("walk", "Brownian walk in the latent space");
  {
    auto* cfg = common(walk, true, true);
    space(walk, cfg);
    option(walk, cfg, "--steps", "steps", 5000, "Number of steps");
    option(walk, cfg, "--stepsize", "stepsize", 0.0, "Step size s; 0 picks 0.05 x code std");
    option(walk, cfg, "--kind", "kind", std::string("riemannian"), "riemannian, euclidean or hypercube");
    option(walk, cfg, "--start", "start", 0, "Index of the starting point in --data");
  }
  auto* mll = app.add_subcommand("mll-compare", "Held-out log-likelihood: RBF vs deep-net variance");
  {
    auto* cfg = common(mll, false, true);
    training_flags(mll, cfg);
    option(mll, cfg, "--samples", "samples", 10000, "Prior samples S per test point");
    option(mll, cfg, "--train-fraction", "train_fraction", 0.9, "Training share of the split");
  }
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a recorded manifest");
  std::string manifest_path, replay_out;
  replay_cmd->add_option("manifest", manifest_path, "manifest.json")->required();
  replay_cmd->add_option("--out", replay_out, "Output directory (defaults to the recorded one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("usage", e.what(), usage);
  }

  try {
    if (replay_cmd->parsed()) {
      replay(manifest_path, replay_out);
    } else {
      for (auto* sub : app.get_subcommands()) {
        const json& cfg = configs.at(sub->get_name());
        run(sub->get_name(), cfg, cfg.at("out").get<std::string>());
      }
    }
  } catch (const Error& e) {
    return report(to_string(e.code()), e.what(), exit_code_for(e.code()));
  } catch (const std::exception& e) {
    return report("internal", e.what(), internal);
  }
  return ok;
}
