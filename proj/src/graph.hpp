#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "calibrate.hpp"
#include "encoder.hpp"
#include "hwmodel.hpp"
#include "hypervector.hpp"

namespace hdcal {

// Undirected graph: node count plus a set of unordered edges (stored i < j,
// deduplicated, no self loops), optionally with node features and labels.
struct GraphSpec {
  int n_nodes = 0;
  std::vector<std::pair<int, int>> edges;
  std::optional<Eigen::MatrixXd> features;
  std::optional<std::vector<int>> labels;

  void validate() const;
  std::vector<std::vector<int>> adjacency() const;
};

// The three orthogonal bipolar role vectors that tag a node's own identity,
// 1-hop and 2-hop neighborhoods inside a relation hypervector.
struct RelationContext {
  Hypervector omega0, omega1, omega2;

  static RelationContext random(size_t dim, uint64_t seed);
};

// Whole-graph memory G = 1/2 sum_i H_i * M_i with M_i the bundle of node i's
// neighbors. Bipolar (or real) node vectors give a DenseReal of length D;
// phase node vectors give the complex result as interleaved (re, im) pairs of
// length 2D.
Hypervector graphd_encode(const GraphSpec& g, const std::vector<Hypervector>& node_hvs);

// Recover node i's memory bundle: bipolar keys bind (self-inverse), phase keys
// rotate by the conjugate.
Hypervector graphd_node_memory(const Hypervector& G, const Hypervector& H_i);

// Edge decision threshold: sort the pair scores and split at the largest gap
// between consecutive values; when that gap is below min_gap the scores are
// considered unimodal and the fixed fallback applies.
struct ThresholdPolicy {
  double min_gap = 0.05;
  double fallback = 0.5;
};

struct ReconResult {
  std::vector<std::pair<int, int>> edges;
  double threshold = 0.0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  double density = 0.0;  // predicted edges / all pairs
};

// Store the node vectors through the distortion, rebuild the graph memory from
// the stored atoms, recover each node's memory, and score every pair through
// the hardware comparison stage. The returned edge set is symmetrized by OR.
ReconResult graphd_reconstruct(const GraphSpec& g, const std::vector<Hypervector>& node_hvs,
                               const DistortionSpec& spec, const ThresholdPolicy& tau, Rng& rng);

struct Histogram {
  std::vector<double> centers;  // 50 bins over [-1, 1]
  std::vector<int> counts;
  double mean = 0.0;
};

// All pairwise hardware similarities of the node vectors, binned.
Histogram similarity_distribution(const std::vector<Hypervector>& node_hvs,
                                  const DistortionSpec& spec, Rng& rng);

// Train node vectors to be quasi-orthogonal as the hardware perceives them
// (target similarity matrix = identity).
//
// Phase vectors descend in the stored-phase domain -- the storage transfer is
// a bijection, so the optimum is unchanged while the conditioning is not at
// the mercy of the transfer's saturated regions -- and map back through the
// exact inverse transfer. Bipolar vectors relax to real values during descent
// and are sign-projected at the end.
std::vector<Hypervector> optimize_node_vectors(int n_nodes, int dim, const DistortionSpec& spec,
                                               const OptimizeConfig& cfg, Repr repr,
                                               std::vector<double>* trace = nullptr);

// 1-hop bundles M1_k and reused 2-hop bundles M2_k = sum over direct
// neighbors j of M1_j.
std::pair<std::vector<Hypervector>, std::vector<Hypervector>> relhd_neighbors(
    const GraphSpec& g, const std::vector<Hypervector>& node_hvs);

// Relation hypervectors I_k = H_k*w0 + M1_k*w1 + M2_k*w2.
std::vector<Hypervector> relhd_encode(const GraphSpec& g, const std::vector<Hypervector>& node_hvs,
                                      const RelationContext& ctx);

struct NodeClassifyConfig {
  DistortionSpec spec;
  int dim = 512;
  bool optimized = false;
  int repeats = 10;
  uint64_t seed = 1;
  // DenseReal: real feature encodings stored through the elementwise
  // transfer and noise floor. Phase: FHRR encodings stored through the phase
  // transfer. Relations are built in memory from the stored atoms either way.
  Repr repr = Repr::DenseReal;
  // encoder calibration (optimized variant)
  int cal_iterations = 300;
  double cal_step = 0.02;
  int cal_batch = 48;   // labelled training nodes per step
  int ortho_batch = 16; // extra nodes per step carrying the identity target
  double alpha = 1.0;
  double beta = 0.01;
};

struct NodeClassifyResult {
  double mean_accuracy = 0.0;
  std::vector<double> per_repeat;
  std::vector<uint64_t> repeat_seeds;
};

// RelHD node classification: encode node features, build relation vectors
// under the distortion pipeline, bundle class prototypes from the training
// nodes, classify the test nodes by hardware associative search. The
// optimized variant first calibrates the feature encoder against the label
// kernel plus a quasi-orthogonality target on random node pairs.
NodeClassifyResult relhd_classify(const GraphSpec& g, const std::vector<int>& train_idx,
                                  const std::vector<int>& test_idx,
                                  const NodeClassifyConfig& cfg);

}  // namespace hdcal
