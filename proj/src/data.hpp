#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "graph.hpp"

namespace hdcal {

enum class Split { Train, Test };

struct Dataset {
  Eigen::MatrixXd features;  // n x d, finite, scaled into [-1, 1] per feature
  std::vector<int> labels;   // in [0, n_classes)
  std::string name;
  Split split = Split::Train;

  int n() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
  int n_classes() const;
};

struct LoadReport {
  std::string name;
  int rows = 0;
  int dims = 0;
  int classes = 0;
  std::string digest;  // content digest of the parsed matrices
  int skipped = 0;     // dangling references skipped during ingestion
};

// Synthetic kernel-approximation dataset: 20 points with 30 features; the
// first row is U(-1,1)^30 and each next row adds a U(0,0.1)^30 perturbation.
Eigen::MatrixXd gen_kernel_dataset(uint64_t seed);

// n_edges distinct unordered pairs sampled uniformly without replacement.
GraphSpec gen_random_graph(int n_nodes, int n_edges, uint64_t seed);

// ISOLET: comma-separated rows of 617 features plus a 1-based class label.
// Expects isolet1+2+3+4.data and isolet5.data under `dir`. Features are
// min-max scaled to [-1,1] on the training split; the test split reuses the
// training bounds and clamps.
std::pair<Dataset, Dataset> load_isolet(const std::string& dir, LoadReport* report = nullptr);

// Fashion-MNIST IDX files (train-images-idx3-ubyte etc.) under `dir`; pixels
// map [0,255] -> [0,1] -> [-1,1].
std::pair<Dataset, Dataset> load_fmnist(const std::string& dir, LoadReport* report = nullptr);

// Cora citation graph: cora.content and cora.cites under `dir`. Returns 2708
// nodes with 1433-dim binary features (used as-is) and 7 classes; citation
// pairs become undirected deduplicated edges, dangling ids are skipped and
// counted. id_map, when given, receives paper-id -> node index.
GraphSpec load_cora(const std::string& dir, LoadReport* report = nullptr,
                    std::map<long long, int>* id_map = nullptr);

// Per-class proportional subsample (within one sample per class), seeded.
Dataset stratified_subsample(const Dataset& ds, int target_n, uint64_t seed);

// FNV-1a digest over the parsed feature/label content, hex-encoded.
std::string content_digest(const Eigen::MatrixXd& features, const std::vector<int>& labels);

}  // namespace hdcal
