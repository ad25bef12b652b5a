#include "lr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "lr/error.hpp"

namespace lr {

void Dataset::validate() const {
  if (points.rows() < 2) fail(ErrorCode::invalid_argument, "dataset needs at least two points");
  if (!points.allFinite()) fail(ErrorCode::non_finite, "dataset contains non-finite values");
  if (!labels.empty()) require_dims(static_cast<long>(labels.size()), points.rows(), "dataset labels");
}

ToyKind toy_kind_from_string(const std::string& name) {
  if (name == "two-blobs") return ToyKind::two_blobs;
  if (name == "arc-pair") return ToyKind::arc_pair;
  if (name == "two-moons") return ToyKind::two_moons;
  fail(ErrorCode::invalid_argument, "unknown toy dataset '" + name + "'");
}

const char* to_string(ToyKind kind) {
  switch (kind) {
    case ToyKind::two_blobs:
      return "two-blobs";
    case ToyKind::arc_pair:
      return "arc-pair";
    case ToyKind::two_moons:
      return "two-moons";
  }
  return "two-blobs";
}

Dataset make_toy_dataset(ToyKind kind, int n, double noise, std::uint64_t seed, int ambient_dim) {
  if (n < 2) fail(ErrorCode::invalid_argument, "toy dataset needs n >= 2");
  if (ambient_dim < 2) fail(ErrorCode::invalid_argument, "toy dataset needs ambient_dim >= 2");
  if (noise < 0.0) fail(ErrorCode::invalid_argument, "noise must be nonnegative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  constexpr double pi = std::numbers::pi;

  Mat base(n, 2);
  std::vector<int> labels(static_cast<std::size_t>(n));
  const int first = (n + 1) / 2;
  for (int i = 0; i < n; ++i) {
    const int label = i < first ? 0 : 1;
    labels[static_cast<std::size_t>(i)] = label;
    switch (kind) {
      case ToyKind::two_blobs: {
        const double cx = label == 0 ? -2.0 : 2.0;
        const double ex = normal(rng);
        const double ey = normal(rng);
        base(i, 0) = cx + noise * ex;
        base(i, 1) = noise * ey;
        break;
      }
      case ToyKind::arc_pair: {
        const double radius = label == 0 ? 1.0 : 3.0;
        const double angle = pi * unif(rng);
        const double r = radius + noise * normal(rng);
        base(i, 0) = r * std::cos(angle);
        base(i, 1) = r * std::sin(angle);
        break;
      }
      case ToyKind::two_moons: {
        const double angle = pi * unif(rng);
        const double ex = normal(rng);
        const double ey = normal(rng);
        if (label == 0) {
          base(i, 0) = std::cos(angle);
          base(i, 1) = std::sin(angle);
        } else {
          base(i, 0) = 1.0 - std::cos(angle);
          base(i, 1) = 0.5 - std::sin(angle);
        }
        base(i, 0) += noise * ex;
        base(i, 1) += noise * ey;
        break;
      }
    }
  }

  Dataset out;
  out.name = to_string(kind);
  out.labels = std::move(labels);
  if (ambient_dim == 2) {
    out.points = std::move(base);
  } else {
    Mat gaussian(ambient_dim, 2);
    for (Eigen::Index j = 0; j < 2; ++j) {
      for (Eigen::Index i = 0; i < ambient_dim; ++i) gaussian(i, j) = normal(rng);
    }
    const Eigen::HouseholderQR<Mat> qr(gaussian);
    const Mat lift = qr.householderQ() * Mat::Identity(ambient_dim, 2);
    out.points = base * lift.transpose();
  }
  out.provenance = {{"generator", to_string(kind)},
                    {"n", n},
                    {"noise", noise},
                    {"seed", seed},
                    {"ambient_dim", ambient_dim}};
  return out;
}

Dataset read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open dataset '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::parse, "dataset '" + path + "' is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  int label_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "label") label_col = static_cast<int>(c);
  }
  const int dims = static_cast<int>(header.size()) - (label_col >= 0 ? 1 : 0);
  if (dims < 1) fail(ErrorCode::parse, "dataset '" + path + "' has no coordinate columns");

  std::vector<double> values;
  std::vector<int> labels;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int col = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        if (col == label_col) {
          labels.push_back(std::stoi(cell));
        } else {
          values.push_back(std::stod(cell));
        }
      } catch (const std::exception&) {
        fail(ErrorCode::parse, "dataset '" + path + "': bad value '" + cell + "' on row " +
                                   std::to_string(rows + 2));
      }
      ++col;
    }
    if (col != static_cast<int>(header.size())) {
      fail(ErrorCode::parse, "dataset '" + path + "': row " + std::to_string(rows + 2) +
                                 " has the wrong number of columns");
    }
    ++rows;
  }
  Dataset out;
  out.points = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), rows, dims);
  out.labels = std::move(labels);
  out.name = path;
  out.provenance = {{"source", path}};
  out.validate();
  return out;
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot write dataset '" + path + "'");
  for (int j = 0; j < data.dim(); ++j) out << (j ? "," : "") << "x" << (j + 1);
  if (data.has_labels()) out << ",label";
  out << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (int j = 0; j < data.dim(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", data.points(i, j));
      out << (j ? "," : "") << buf;
    }
    if (data.has_labels()) out << ',' << data.labels[static_cast<std::size_t>(i)];
    out << '\n';
  }
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double fraction, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::map<int, std::vector<Eigen::Index>> groups;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    groups[data.has_labels() ? data.labels[static_cast<std::size_t>(i)] : 0].push_back(i);
  }
  std::vector<Eigen::Index> first, second;
  for (auto& [label, idx] : groups) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto cut = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
    first.insert(first.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(cut));
    second.insert(second.end(), idx.begin() + static_cast<std::ptrdiff_t>(cut), idx.end());
  }
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  auto take = [&](const std::vector<Eigen::Index>& rows, const char* part) {
    Dataset d;
    d.points.resize(static_cast<Eigen::Index>(rows.size()), data.dim());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      d.points.row(static_cast<Eigen::Index>(r)) = data.points.row(rows[r]);
      if (data.has_labels()) d.labels.push_back(data.labels[static_cast<std::size_t>(rows[r])]);
    }
    d.name = data.name + ":" + part;
    d.provenance = {{"split_of", data.name}, {"part", part}, {"fraction", fraction}, {"seed", seed}};
    return d;
  };
  return {take(first, "first"), take(second, "second")};
}

}  // namespace lr
