#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "lr/types.hpp"

namespace lr {

struct Dataset {
  Mat points;               // N x D
  std::vector<int> labels;  // empty or N entries
  std::string name;
  nlohmann::json provenance = nlohmann::json::object();

  Eigen::Index size() const { return points.rows(); }
  int dim() const { return static_cast<int>(points.cols()); }
  bool has_labels() const { return !labels.empty(); }
  void validate() const;
};

enum class ToyKind { two_blobs, arc_pair, two_moons };

ToyKind toy_kind_from_string(const std::string& name);
const char* to_string(ToyKind kind);

// Synthetic 2-D families, one label per component:
//   two-blobs: isotropic Gaussians (std = noise) around (-2, 0) and (2, 0);
//   arc-pair:  concentric upper half circles of radius 1 and 3, radial noise;
//   two-moons: the interleaved half circles, isotropic noise.
// With ambient_dim > 2 the 2-D sample is mapped through a seeded matrix with
// orthonormal columns, so distances are preserved.
Dataset make_toy_dataset(ToyKind kind, int n, double noise, std::uint64_t seed, int ambient_dim = 2);

// Header row, one point per row, optional `label` column.
Dataset read_csv(const std::string& path);
void write_csv(const Dataset& data, const std::string& path);

// Deterministic split into (first, second) with `fraction` of the rows in the
// first part; class balance is kept when labels exist.
std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double fraction, std::uint64_t seed);

}  // namespace lr
