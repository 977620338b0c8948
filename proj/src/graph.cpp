#include "graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "error.hpp"

namespace hdcal {

void GraphSpec::validate() const {
  std::set<std::pair<int, int>> seen;
  for (const auto& [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n_nodes || j >= n_nodes)
      raise(ErrorCode::InvalidParameter, "edge endpoint out of range");
    if (i == j) raise(ErrorCode::InvalidParameter, "self loops are not allowed");
    auto key = std::minmax(i, j);
    if (!seen.insert({key.first, key.second}).second)
      raise(ErrorCode::InvalidParameter, "duplicate edge");
  }
  if (features && features->rows() != n_nodes)
    raise(ErrorCode::InvalidDataset, "feature row count does not match node count");
  if (labels && static_cast<int>(labels->size()) != n_nodes)
    raise(ErrorCode::InvalidDataset, "label count does not match node count");
}

std::vector<std::vector<int>> GraphSpec::adjacency() const {
  std::vector<std::vector<int>> adj(n_nodes);
  for (const auto& [i, j] : edges) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  return adj;
}

RelationContext RelationContext::random(size_t dim, uint64_t seed) {
  const double bound = 4.0 / std::sqrt(static_cast<double>(dim));
  Rng rng(seed);
  for (int attempt = 0; attempt < 64; ++attempt) {
    RelationContext ctx;
    ctx.omega0 = random_bipolar(dim, rng.next_u64());
    ctx.omega1 = random_bipolar(dim, rng.next_u64());
    ctx.omega2 = random_bipolar(dim, rng.next_u64());
    if (std::fabs(cosine_sim(ctx.omega0, ctx.omega1)) < bound &&
        std::fabs(cosine_sim(ctx.omega0, ctx.omega2)) < bound &&
        std::fabs(cosine_sim(ctx.omega1, ctx.omega2)) < bound)
      return ctx;
  }
  raise(ErrorCode::InvalidParameter,
        "could not draw quasi-orthogonal role vectors at this dimension");
}

namespace {

bool all_phase(const std::vector<Hypervector>& vs) {
  bool phase = false, real = false;
  for (const auto& v : vs) (v.repr == Repr::Phase ? phase : real) = true;
  if (phase && real) raise(ErrorCode::Incompatible, "mixed phase and real node vectors");
  return phase;
}

void check_nodes(const GraphSpec& g, const std::vector<Hypervector>& node_hvs) {
  if (static_cast<int>(node_hvs.size()) != g.n_nodes)
    raise(ErrorCode::Incompatible, "need one hypervector per node");
  for (const auto& v : node_hvs)
    if (v.dim() != node_hvs[0].dim())
      raise(ErrorCode::Incompatible, "node vector dimension mismatch");
}

}  // namespace

Hypervector graphd_encode(const GraphSpec& g, const std::vector<Hypervector>& node_hvs) {
  g.validate();
  check_nodes(g, node_hvs);
  const auto adj = g.adjacency();
  const size_t dim = node_hvs.empty() ? 0 : node_hvs[0].dim();
  Hypervector G;
  G.repr = Repr::DenseReal;
  if (!all_phase(node_hvs)) {
    G.data.assign(dim, 0.0);
    std::vector<double> mem(dim);
    for (int i = 0; i < g.n_nodes; ++i) {
      std::fill(mem.begin(), mem.end(), 0.0);
      for (int j : adj[i])
        for (size_t d = 0; d < dim; ++d) mem[d] += node_hvs[j].data[d];
      for (size_t d = 0; d < dim; ++d) G.data[d] += 0.5 * node_hvs[i].data[d] * mem[d];
    }
    return G;
  }
  // phase: complex accumulation, binding rotates the memory by the node phase
  G.data.assign(2 * dim, 0.0);
  std::vector<double> mre(dim), mim(dim);
  for (int i = 0; i < g.n_nodes; ++i) {
    std::fill(mre.begin(), mre.end(), 0.0);
    std::fill(mim.begin(), mim.end(), 0.0);
    for (int j : adj[i])
      for (size_t d = 0; d < dim; ++d) {
        mre[d] += std::cos(node_hvs[j].data[d]);
        mim[d] += std::sin(node_hvs[j].data[d]);
      }
    for (size_t d = 0; d < dim; ++d) {
      const double c = std::cos(node_hvs[i].data[d]);
      const double s = std::sin(node_hvs[i].data[d]);
      G.data[2 * d] += 0.5 * (mre[d] * c - mim[d] * s);
      G.data[2 * d + 1] += 0.5 * (mre[d] * s + mim[d] * c);
    }
  }
  return G;
}

Hypervector graphd_node_memory(const Hypervector& G, const Hypervector& H_i) {
  Hypervector out;
  out.repr = Repr::DenseReal;
  if (H_i.repr == Repr::Phase) {
    if (G.dim() != 2 * H_i.dim())
      raise(ErrorCode::Incompatible, "graph vector is not the complex bundle of these nodes");
    out.data.resize(G.dim());
    for (size_t d = 0; d < H_i.dim(); ++d) {
      // conjugate rotation undoes the binding
      const double c = std::cos(H_i.data[d]);
      const double s = std::sin(H_i.data[d]);
      const double re = G.data[2 * d], im = G.data[2 * d + 1];
      out.data[2 * d] = re * c + im * s;
      out.data[2 * d + 1] = im * c - re * s;
    }
    return out;
  }
  if (G.dim() != H_i.dim()) raise(ErrorCode::Incompatible, "dimension mismatch");
  out.data.resize(G.dim());
  for (size_t d = 0; d < G.dim(); ++d) out.data[d] = G.data[d] * H_i.data[d];
  return out;
}

namespace {

double pick_threshold(std::vector<double> scores, const ThresholdPolicy& tau) {
  std::sort(scores.begin(), scores.end());
  double best_gap = 0.0, split = tau.fallback;
  for (size_t k = 0; k + 1 < scores.size(); ++k) {
    const double gap = scores[k + 1] - scores[k];
    if (gap > best_gap) {
      best_gap = gap;
      split = 0.5 * (scores[k] + scores[k + 1]);
    }
  }
  return best_gap < tau.min_gap ? tau.fallback : split;
}

}  // namespace

ReconResult graphd_reconstruct(const GraphSpec& g, const std::vector<Hypervector>& node_hvs,
                               const DistortionSpec& spec, const ThresholdPolicy& tau, Rng& rng) {
  g.validate();
  check_nodes(g, node_hvs);
  const bool phase = all_phase(node_hvs);
  const int n = g.n_nodes;

  std::vector<Hypervector> stored;
  stored.reserve(node_hvs.size());
  for (const auto& v : node_hvs) stored.push_back(distort(v, spec, rng));

  const Hypervector G = graphd_encode(g, stored);
  std::vector<Hypervector> recovered;
  recovered.reserve(n);
  for (int i = 0; i < n; ++i) recovered.push_back(graphd_node_memory(G, stored[i]));

  std::vector<Hypervector> atoms;
  atoms.reserve(n);
  for (int j = 0; j < n; ++j)
    atoms.push_back(phase ? to_complex_pairs(stored[j]) : stored[j]);

  // unordered pair score: OR-symmetrized over the two lookup directions
  std::vector<double> pair_scores;
  pair_scores.reserve(static_cast<size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double sij = psi_compare(recovered[i], atoms[j], spec, rng);
      const double sji = psi_compare(recovered[j], atoms[i], spec, rng);
      pair_scores.push_back(std::max(sij, sji));
    }

  ReconResult res;
  res.threshold = pick_threshold(pair_scores, tau);
  size_t k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j, ++k)
      if (pair_scores[k] > res.threshold) res.edges.emplace_back(i, j);

  std::set<std::pair<int, int>> truth(g.edges.begin(), g.edges.end());
  size_t tp = 0;
  for (const auto& e : res.edges)
    if (truth.count(e)) ++tp;
  const size_t fp = res.edges.size() - tp;
  const size_t fn = truth.size() - tp;
  res.precision = (tp + fp) == 0 ? 1.0 : static_cast<double>(tp) / (tp + fp);
  res.recall = (tp + fn) == 0 ? 1.0 : static_cast<double>(tp) / (tp + fn);
  res.f1 = (res.precision + res.recall) == 0.0
               ? 0.0
               : 2.0 * res.precision * res.recall / (res.precision + res.recall);
  res.density = pair_scores.empty()
                    ? 0.0
                    : static_cast<double>(res.edges.size()) / static_cast<double>(pair_scores.size());
  return res;
}

Histogram similarity_distribution(const std::vector<Hypervector>& node_hvs,
                                  const DistortionSpec& spec, Rng& rng) {
  if (node_hvs.size() < 2) raise(ErrorCode::EmptyInput, "need at least two node vectors");
  constexpr int kBins = 50;
  Histogram h;
  h.centers.resize(kBins);
  h.counts.assign(kBins, 0);
  for (int b = 0; b < kBins; ++b) h.centers[b] = -1.0 + (b + 0.5) * (2.0 / kBins);
  double sum = 0.0;
  size_t count = 0;
  for (size_t i = 0; i < node_hvs.size(); ++i)
    for (size_t j = i + 1; j < node_hvs.size(); ++j) {
      const double s = hw_similarity(node_hvs[i], node_hvs[j], spec, rng);
      sum += s;
      ++count;
      int bin = static_cast<int>((s + 1.0) / 2.0 * kBins);
      bin = std::clamp(bin, 0, kBins - 1);
      h.counts[bin] += 1;
    }
  h.mean = sum / static_cast<double>(count);
  return h;
}

namespace {

constexpr double kDivergenceCap = 1e6;

// Stored-domain descent for phase node vectors: the parameters are the stored
// angles themselves; the naive initial vectors enter through their stored
// image, and the result maps back through the exact inverse transfer.
std::vector<Hypervector> optimize_phase_nodes(int n, int dim, const DistortionSpec& spec,
                                              const OptimizeConfig& cfg,
                                              std::vector<double>* trace) {
  Rng rng(cfg.seed);
  Eigen::MatrixXd psi(n, dim);
  for (int i = 0; i < n; ++i) {
    Hypervector hv = random_phase(dim, rng.next_u64());
    for (int d = 0; d < dim; ++d)
      psi(i, d) = kTwoPi * unit_transfer(spec.family, spec.gain, hv.data[d] / kTwoPi);
  }

  const double dimd = static_cast<double>(dim);
  Eigen::MatrixXd best = psi;
  double best_loss = std::numeric_limits<double>::infinity();
  for (int step = 0; step < cfg.iterations; ++step) {
    Eigen::MatrixXd cosP = psi.array().cos();
    Eigen::MatrixXd sinP = psi.array().sin();
    Eigen::MatrixXd C = (cosP * cosP.transpose() + sinP * sinP.transpose()) / dimd;

    double loss = 0.0;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double s = nonlinearity(spec.family, spec.gain, C(i, j));
        const double resid = s - (i == j ? 1.0 : 0.0);
        loss += cfg.alpha * resid * resid;
        if (i != j)
          M(i, j) = 2.0 * cfg.alpha * resid * nonlinearity_deriv(spec.family, spec.gain, C(i, j));
      }
    if (!std::isfinite(loss) || loss > kDivergenceCap)
      raise(ErrorCode::Diverged, "node vector optimization diverged at step " + std::to_string(step));
    if (trace) trace->push_back(loss);
    if (loss < best_loss) {
      best_loss = loss;
      best = psi;
    }
    Eigen::MatrixXd S = M + M.transpose();
    Eigen::MatrixXd grad = -(sinP.cwiseProduct(S * cosP) - cosP.cwiseProduct(S * sinP)) / dimd;
    psi -= cfg.step_size * grad;
  }

  std::vector<Hypervector> out(n);
  for (int i = 0; i < n; ++i) {
    out[i].repr = Repr::Phase;
    out[i].data.resize(dim);
    for (int d = 0; d < dim; ++d) {
      const double u = wrap_phase(best(i, d)) / kTwoPi;
      out[i].data[d] =
          wrap_phase(kTwoPi * unit_transfer_inverse(spec.family, spec.gain, u));
    }
  }
  return out;
}

std::vector<Hypervector> optimize_bipolar_nodes(int n, int dim, const DistortionSpec& spec,
                                                const OptimizeConfig& cfg,
                                                std::vector<double>* trace) {
  // Node vectors as rows of a learnable weight matrix behind an identity
  // feature batch; relaxation to reals happens by construction.
  Rng rng(cfg.seed);
  EncoderParams params;
  params.activation = Activation::None;
  params.weights.resize(n, dim);
  for (int i = 0; i < n; ++i) {
    Hypervector hv = random_bipolar(dim, rng.next_u64());
    for (int d = 0; d < dim; ++d) params.weights(i, d) = hv.data[d];
  }
  Eigen::MatrixXd identity_batch = Eigen::MatrixXd::Identity(n, n);
  KernelMatrix target = Eigen::MatrixXd::Identity(n, n);
  OptimizeResult r = optimize(params, identity_batch, target, spec, cfg);
  if (trace) *trace = r.trace;

  std::vector<Hypervector> out(n);
  for (int i = 0; i < n; ++i) {
    out[i].repr = Repr::Bipolar;
    out[i].data.resize(dim);
    for (int d = 0; d < dim; ++d) out[i].data[d] = r.params.weights(i, d) >= 0.0 ? 1.0 : -1.0;
  }
  return out;
}

}  // namespace

std::vector<Hypervector> optimize_node_vectors(int n_nodes, int dim, const DistortionSpec& spec,
                                               const OptimizeConfig& cfg, Repr repr,
                                               std::vector<double>* trace) {
  cfg.validate();
  if (n_nodes < 1 || dim < 1) raise(ErrorCode::InvalidDimension, "need positive node count and dim");
  if (repr == Repr::Phase) return optimize_phase_nodes(n_nodes, dim, spec, cfg, trace);
  if (repr == Repr::Bipolar) return optimize_bipolar_nodes(n_nodes, dim, spec, cfg, trace);
  raise(ErrorCode::UnsupportedRepr, "node vectors are bipolar or phase");
}

std::pair<std::vector<Hypervector>, std::vector<Hypervector>> relhd_neighbors(
    const GraphSpec& g, const std::vector<Hypervector>& node_hvs) {
  g.validate();
  check_nodes(g, node_hvs);
  if (all_phase(node_hvs))
    raise(ErrorCode::UnsupportedRepr, "relation encoding expects real-valued node vectors");
  const auto adj = g.adjacency();
  const size_t dim = node_hvs[0].dim();
  std::vector<Hypervector> m1(g.n_nodes), m2(g.n_nodes);
  for (int k = 0; k < g.n_nodes; ++k) {
    m1[k].repr = Repr::DenseReal;
    m1[k].data.assign(dim, 0.0);
    for (int j : adj[k])
      for (size_t d = 0; d < dim; ++d) m1[k].data[d] += node_hvs[j].data[d];
  }
  for (int k = 0; k < g.n_nodes; ++k) {
    m2[k].repr = Repr::DenseReal;
    m2[k].data.assign(dim, 0.0);
    for (int j : adj[k])
      for (size_t d = 0; d < dim; ++d) m2[k].data[d] += m1[j].data[d];
  }
  return {std::move(m1), std::move(m2)};
}

std::vector<Hypervector> relhd_encode(const GraphSpec& g, const std::vector<Hypervector>& node_hvs,
                                      const RelationContext& ctx) {
  auto [m1, m2] = relhd_neighbors(g, node_hvs);
  const size_t dim = node_hvs[0].dim();
  if (ctx.omega0.dim() != dim || ctx.omega1.dim() != dim || ctx.omega2.dim() != dim)
    raise(ErrorCode::Incompatible, "role vector dimension mismatch");
  std::vector<Hypervector> out(g.n_nodes);
  for (int k = 0; k < g.n_nodes; ++k) {
    out[k].repr = Repr::DenseReal;
    out[k].data.resize(dim);
    for (size_t d = 0; d < dim; ++d)
      out[k].data[d] = node_hvs[k].data[d] * ctx.omega0.data[d] +
                       m1[k].data[d] * ctx.omega1.data[d] + m2[k].data[d] * ctx.omega2.data[d];
  }
  return out;
}

NodeClassifyResult relhd_classify(const GraphSpec& g, const std::vector<int>& train_idx,
                                  const std::vector<int>& test_idx,
                                  const NodeClassifyConfig& cfg) {
  g.validate();
  if (!g.features || !g.labels)
    raise(ErrorCode::InvalidDataset, "node classification needs features and labels");
  {
    std::set<int> tr(train_idx.begin(), train_idx.end());
    for (int t : test_idx)
      if (tr.count(t)) raise(ErrorCode::InvalidParameter, "train/test masks overlap");
  }
  const Eigen::MatrixXd& F = *g.features;
  const std::vector<int>& labels = *g.labels;
  const int n_classes = 1 + *std::max_element(labels.begin(), labels.end());
  const bool phase = cfg.repr == Repr::Phase;

  Rng rng(cfg.seed);
  EncoderParams enc =
      random_projection_params(static_cast<int>(F.cols()), cfg.dim, rng.next_u64());
  if (phase) {
    enc.activation = Activation::PhaseMap;
    // spread the initial phases across the circle: without rescaling, sparse
    // inputs land in a narrow arc and even the clean pipeline is degenerate
    double ms = 0.0;
    for (int i = 0; i < F.rows(); ++i) ms += F.row(i).squaredNorm();
    const double rms_z = std::sqrt(ms / (static_cast<double>(F.rows()) * F.cols()));
    if (rms_z > 0.0) enc.weights *= 3.141592653589793 / rms_z;
  }

  if (cfg.optimized) {
    // Calibrate the feature encoder: same-class training pairs pull together,
    // cross-class pairs and random node pairs push toward quasi-orthogonality.
    OptimizeConfig oc;
    oc.step_size = cfg.cal_step;
    oc.iterations = 1;
    oc.alpha = cfg.alpha;
    oc.beta = cfg.beta;
    Rng cal_rng = rng.split(7);
    SimPipeline pipe;
    pipe.spec = cfg.spec;
    for (int step = 0; step < cfg.cal_iterations; ++step) {
      Rng step_rng = cal_rng.split(step);
      const int nb = cfg.cal_batch + cfg.ortho_batch;
      std::vector<int> batch_nodes;
      batch_nodes.reserve(nb);
      for (int k = 0; k < cfg.cal_batch; ++k)
        batch_nodes.push_back(train_idx[step_rng.below(train_idx.size())]);
      for (int k = 0; k < cfg.ortho_batch; ++k)
        batch_nodes.push_back(static_cast<int>(step_rng.below(g.n_nodes)));
      Eigen::MatrixXd X(nb, F.cols());
      Eigen::MatrixXd target = Eigen::MatrixXd::Identity(nb, nb);
      for (int r = 0; r < nb; ++r) X.row(r) = F.row(batch_nodes[r]);
      for (int r = 0; r < cfg.cal_batch; ++r)
        for (int c = 0; c < cfg.cal_batch; ++c)
          target(r, c) = labels[batch_nodes[r]] == labels[batch_nodes[c]] ? 1.0 : 0.0;
      ObjectiveGradient gobj =
          sim_objective_gradient(enc, X, target, pipe, cfg.alpha, cfg.beta, false, step_rng);
      if (!std::isfinite(gobj.objective) || gobj.objective > kDivergenceCap)
        raise(ErrorCode::Diverged, "encoder calibration diverged at step " + std::to_string(step));
      enc.weights -= cfg.cal_step * gobj.grad_weights;
    }
  }

  // Relation vectors are built in memory from the stored atoms: encodings
  // pass through the storage transfer (and its noise floor) once per hardware
  // instance, then binding/bundling and the comparison act on stored values.
  RelationContext ctx = RelationContext::random(cfg.dim, rng.next_u64());
  Eigen::MatrixXd Z = F * enc.weights;

  auto build_relations = [&](Rng& store_rng) {
    std::vector<Hypervector> I(g.n_nodes);
    const auto adj = g.adjacency();
    if (phase) {
      std::vector<Hypervector> pairs(g.n_nodes);
      for (int k = 0; k < g.n_nodes; ++k) {
        Hypervector theta;
        theta.repr = Repr::Phase;
        theta.data.resize(cfg.dim);
        for (int d = 0; d < cfg.dim; ++d) theta.data[d] = wrap_phase(Z(k, d));
        pairs[k] = to_complex_pairs(distort(theta, cfg.spec, store_rng));
      }
      const int dim2 = 2 * cfg.dim;
      std::vector<Hypervector> m1(g.n_nodes);
      for (int k = 0; k < g.n_nodes; ++k) {
        m1[k].repr = Repr::DenseReal;
        m1[k].data.assign(dim2, 0.0);
        for (int j : adj[k])
          for (int d = 0; d < dim2; ++d) m1[k].data[d] += pairs[j].data[d];
      }
      for (int k = 0; k < g.n_nodes; ++k) {
        Hypervector m2k;
        m2k.data.assign(dim2, 0.0);
        for (int j : adj[k])
          for (int d = 0; d < dim2; ++d) m2k.data[d] += m1[j].data[d];
        I[k].repr = Repr::DenseReal;
        I[k].data.resize(dim2);
        for (int d = 0; d < cfg.dim; ++d) {
          // bipolar role vectors act on both quadrature parts of a component
          const double w0 = ctx.omega0.data[d], w1 = ctx.omega1.data[d], w2 = ctx.omega2.data[d];
          I[k].data[2 * d] =
              pairs[k].data[2 * d] * w0 + m1[k].data[2 * d] * w1 + m2k.data[2 * d] * w2;
          I[k].data[2 * d + 1] =
              pairs[k].data[2 * d + 1] * w0 + m1[k].data[2 * d + 1] * w1 + m2k.data[2 * d + 1] * w2;
        }
      }
    } else {
      std::vector<Hypervector> H(g.n_nodes);
      for (int k = 0; k < g.n_nodes; ++k) {
        Hypervector raw;
        raw.repr = Repr::DenseReal;
        raw.data.resize(Z.cols());
        for (int d = 0; d < Z.cols(); ++d) raw.data[d] = Z(k, d);
        H[k] = distort(raw, cfg.spec, store_rng);
      }
      I = relhd_encode(g, H, ctx);
    }
    for (auto& v : I) {
      double nrm = 0.0;
      for (double x : v.data) nrm += x * x;
      nrm = std::sqrt(nrm);
      if (nrm > 0.0)
        for (double& x : v.data) x /= nrm;
    }
    return I;
  };

  NodeClassifyResult res;
  Rng eval_rng = rng.split(99);
  for (int rep = 0; rep < cfg.repeats; ++rep) {
    const uint64_t rep_seed = eval_rng.next_u64();
    Rng rep_rng(rep_seed);
    std::vector<Hypervector> I = build_relations(rep_rng);

    const size_t proto_dim = I[0].dim();
    std::vector<Hypervector> protos(n_classes);
    for (int c = 0; c < n_classes; ++c) {
      protos[c].repr = Repr::DenseReal;
      protos[c].data.assign(proto_dim, 0.0);
    }
    for (int k : train_idx)
      for (size_t d = 0; d < proto_dim; ++d) protos[labels[k]].data[d] += I[k].data[d];

    int correct = 0;
    for (int k : test_idx) {
      int best_c = 0;
      double best_s = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < n_classes; ++c) {
        const double s = psi_compare(I[k], protos[c], cfg.spec, rep_rng);
        if (s > best_s) {
          best_s = s;
          best_c = c;
        }
      }
      if (best_c == labels[k]) ++correct;
    }
    res.per_repeat.push_back(static_cast<double>(correct) / static_cast<double>(test_idx.size()));
    res.repeat_seeds.push_back(rep_seed);
  }
  double sum = 0.0;
  for (double a : res.per_repeat) sum += a;
  res.mean_accuracy = sum / static_cast<double>(res.per_repeat.size());
  return res;
}

}  // namespace hdcal
