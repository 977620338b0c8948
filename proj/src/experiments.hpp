#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "calibrate.hpp"
#include "classify.hpp"
#include "data.hpp"
#include "graph.hpp"

namespace hdcal {

enum class ExperimentKind { Kernel, Classify, GraphRecon, NodeClassify };

ExperimentKind experiment_from_string(const std::string& s);
std::string experiment_to_string(ExperimentKind k);

// Flat key=value configuration with dotted sections; command-line overrides
// win over file values, file values win over per-experiment defaults.
struct ConfigMap {
  std::map<std::string, std::string> values;

  static ConfigMap from_file(const std::string& path);
  void merge_overrides(const ConfigMap& other);

  bool has(const std::string& key) const { return values.count(key) > 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  uint64_t get_u64(const std::string& key, uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Kernel;
  DistortionSpec hw;
  int dim = 512;
  int repeats = 10;
  uint64_t seed = 42;
  std::string out_dir;
  std::string data_root;
  bool optimized = false;

  // kernel
  double kernel_sigma = 0.05;
  bool encode_distorted = false;
  int kernel_cal_iterations = 400;
  int kernel_joint_iterations = 1500;
  double kernel_cal_step = 0.1;
  double kernel_joint_step = 0.02;

  // classify
  std::string dataset = "isolet";
  int epochs = 20;
  int train_subsample = 10000;  // fmnist desk scale
  int test_subsample = 2000;
  bool full_size = false;
  int classify_cal_iterations = 400;
  double classify_cal_step = 0.01;
  int classify_cal_batch = 64;

  // graph reconstruction
  int graph_nodes = 20;
  int graph_edges = 10;
  Repr graph_repr = Repr::Phase;
  int node_opt_iterations = 400;
  double node_opt_step = 60.0;

  // node classification
  Repr node_repr = Repr::DenseReal;
  int train_per_class = 20;
  int test_count = 1000;
  int relhd_cal_iterations = 300;
  double relhd_cal_step = 0.02;

  double alpha = 1.0;
  double beta = 0.01;

  // resolved copy of every knob, embedded in reports
  std::map<std::string, std::string> resolved;

  void validate() const;
};

// Build a config for `kind` from defaults + file values + overrides. Raises a
// config error naming the offending key on invalid input.
ExperimentConfig make_config(ExperimentKind kind, const ConfigMap& file_cfg,
                             const ConfigMap& overrides);

struct RunResult {
  int exit_code = 0;
  std::vector<std::string> artifact_paths;
  std::string report_json;  // primary report content
};

// Dispatch an experiment, writing every artifact plus run_manifest.json into
// cfg.out_dir. Throws hdcal::Error on failure; the CLI maps codes to exits.
RunResult run_experiment(const ExperimentConfig& cfg);

// Compare two reports of the same experiment kind; returns the delta summary
// (also written next to report_a when out_path is nonempty).
std::string compare_reports(const std::string& report_a_path, const std::string& report_b_path,
                            double tolerance, const std::string& out_path);

// Deterministic node split for citation-graph classification: the first
// `per_class` nodes of each class in file order train; the last `test_count`
// non-training nodes test.
std::pair<std::vector<int>, std::vector<int>> make_node_split(const GraphSpec& g, int per_class,
                                                              int test_count);

std::string library_version();

}  // namespace hdcal
