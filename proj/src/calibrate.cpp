#include "calibrate.hpp"

#include <cmath>

#include "data.hpp"
#include "error.hpp"

namespace hdcal {

namespace {
constexpr int kEnsembleDrawsPerStep = 4;
constexpr double kDivergenceCap = 1e6;
}  // namespace

void OptimizeConfig::validate() const {
  if (!(step_size > 0.0)) raise(ErrorCode::InvalidParameter, "step_size must be > 0");
  if (iterations < 1) raise(ErrorCode::InvalidParameter, "iterations must be >= 1");
  if (alpha < 0.0 || beta < 0.0) raise(ErrorCode::InvalidParameter, "alpha/beta must be >= 0");
  if (ensemble) ensemble->validate();
}

KernelMatrix rbf_kernel(const Eigen::MatrixXd& X, double sigma) {
  if (!(sigma > 0.0)) raise(ErrorCode::InvalidParameter, "rbf sigma must be > 0");
  const int n = static_cast<int>(X.rows());
  KernelMatrix K(n, n);
  const double denom = 2.0 * sigma * sigma;
  for (int i = 0; i < n; ++i) {
    K(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      const double d2 = (X.row(i) - X.row(j)).squaredNorm();
      const double v = std::exp(-d2 / denom);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

KernelMatrix hw_kernel(const Eigen::MatrixXd& X, const EncoderParams& params,
                       const DistortionSpec& spec, bool encode_distorted, Rng& rng) {
  SimPipeline pipe;
  pipe.spec = spec;
  pipe.encode_distorted = encode_distorted;
  return hw_kernel_batch(X, params, pipe, rng);
}

double sim_loss(const KernelMatrix& k_hw, const KernelMatrix& k_target) {
  if (k_hw.rows() != k_target.rows() || k_hw.cols() != k_target.cols())
    raise(ErrorCode::Incompatible, "kernel size mismatch");
  return (k_hw - k_target).squaredNorm();
}

KernelMatrix build_label_kernel(const std::vector<int>& labels) {
  if (labels.empty()) raise(ErrorCode::EmptyInput, "no labels");
  const int n = static_cast<int>(labels.size());
  KernelMatrix K(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) K(i, j) = labels[i] == labels[j] ? 1.0 : 0.0;
  return K;
}

double joint_objective(const EncoderParams& params, const Eigen::MatrixXd& X,
                       const KernelMatrix& k_target, const DistortionSpec& spec,
                       std::optional<double> task_loss, const OptimizeConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  double sim = 0.0;
  if (cfg.ensemble) {
    for (int d = 0; d < kEnsembleDrawsPerStep; ++d) {
      Rng draw_rng = rng.split(d);
      DistortionSpec drawn = sample_hardware(*cfg.ensemble, draw_rng);
      Rng eval_rng(drawn.seed);
      sim += sim_loss(hw_kernel(X, params, drawn, false, eval_rng), k_target);
    }
    sim /= kEnsembleDrawsPerStep;
  } else {
    sim = sim_loss(hw_kernel(X, params, spec, false, rng), k_target);
  }
  return task_loss.value_or(0.0) + cfg.alpha * sim + cfg.beta * regularizer(params, X);
}

namespace {

struct StepGradient {
  Eigen::MatrixXd grad_w;
  double grad_a = 0.0, grad_b = 0.0;
  double obj = 0.0;
};

StepGradient eval_gradient(const EncoderParams& cur, const Eigen::MatrixXd& X,
                           const KernelMatrix& target, SimPipeline pipe, double a, double b,
                           bool want_cal, const OptimizeConfig& cfg, Rng& step_rng) {
  pipe.cal_gain = a;
  pipe.cal_bias = b;
  StepGradient out;
  if (cfg.ensemble) {
    out.grad_w = Eigen::MatrixXd::Zero(cur.weights.rows(), cur.weights.cols());
    for (int d = 0; d < kEnsembleDrawsPerStep; ++d) {
      Rng draw_rng = step_rng.split(d);
      SimPipeline drawn = pipe;
      drawn.spec = sample_hardware(*cfg.ensemble, draw_rng);
      Rng eval_rng(drawn.spec.seed);
      ObjectiveGradient g =
          sim_objective_gradient(cur, X, target, drawn, cfg.alpha, cfg.beta, want_cal, eval_rng);
      out.grad_w += g.grad_weights;
      out.grad_a += g.grad_cal_gain;
      out.grad_b += g.grad_cal_bias;
      out.obj += g.objective;
    }
    out.grad_w /= kEnsembleDrawsPerStep;
    out.grad_a /= kEnsembleDrawsPerStep;
    out.grad_b /= kEnsembleDrawsPerStep;
    out.obj /= kEnsembleDrawsPerStep;
    return out;
  }
  ObjectiveGradient g =
      sim_objective_gradient(cur, X, target, pipe, cfg.alpha, cfg.beta, want_cal, step_rng);
  out.grad_w = std::move(g.grad_weights);
  out.grad_a = g.grad_cal_gain;
  out.grad_b = g.grad_cal_bias;
  out.obj = g.objective;
  return out;
}

// Shared descent loop over (weights, calibration). Returns the best iterate.
// line_search backtracks (and gently re-grows) the step when a move would
// increase the objective; the plain path takes cfg.step_size unconditionally.
CalibratedOptimizeResult descend(const EncoderParams& init, const Eigen::MatrixXd& X,
                                 const KernelMatrix& target, const DistortionSpec& spec,
                                 bool encode_distorted, double cal_gain, double cal_bias,
                                 bool train_weights, bool train_cal, bool line_search,
                                 const OptimizeConfig& cfg) {
  cfg.validate();
  if (target.rows() != X.rows())
    raise(ErrorCode::Incompatible, "target kernel does not match the dataset size");

  CalibratedOptimizeResult best;
  best.params = init;
  best.cal_gain = cal_gain;
  best.cal_bias = cal_bias;

  EncoderParams cur = init;
  double a = cal_gain, b = cal_bias;
  double best_obj = std::numeric_limits<double>::infinity();
  double eta = cfg.step_size;
  Rng rng(cfg.seed);

  SimPipeline pipe;
  pipe.spec = spec;
  pipe.encode_distorted = encode_distorted;

  for (int step = 0; step < cfg.iterations; ++step) {
    Rng step_rng = rng.split(step);
    Rng grad_rng = step_rng.split(0);
    StepGradient g = eval_gradient(cur, X, target, pipe, a, b, train_cal, cfg, grad_rng);

    if (!std::isfinite(g.obj) || g.obj > kDivergenceCap)
      raise(ErrorCode::Diverged, "optimization diverged at step " + std::to_string(step));

    best.trace.push_back(g.obj);
    if (g.obj < best_obj) {
      best_obj = g.obj;
      best.params = cur;
      best.cal_gain = a;
      best.cal_bias = b;
    }

    if (!line_search) {
      if (train_weights) cur.weights -= cfg.step_size * g.grad_w;
      if (train_cal) {
        a -= cfg.step_size * g.grad_a;
        b -= cfg.step_size * g.grad_b;
      }
      continue;
    }

    bool moved = false;
    for (int half = 0; half < 30 && !moved; ++half) {
      EncoderParams cand = cur;
      double cand_a = a, cand_b = b;
      if (train_weights) cand.weights -= eta * g.grad_w;
      if (train_cal) {
        cand_a -= eta * g.grad_a;
        cand_b -= eta * g.grad_b;
      }
      Rng cand_rng = step_rng.split(1);
      StepGradient cg =
          eval_gradient(cand, X, target, pipe, cand_a, cand_b, false, cfg, cand_rng);
      if (std::isfinite(cg.obj) && cg.obj <= g.obj) {
        cur = std::move(cand);
        a = cand_a;
        b = cand_b;
        eta *= 1.25;
        moved = true;
      } else {
        eta *= 0.5;
      }
    }
    if (!moved) break;  // no descent direction at line-search resolution
  }
  return best;
}

}  // namespace

OptimizeResult optimize(const EncoderParams& params, const Eigen::MatrixXd& X,
                        const KernelMatrix& k_target, const DistortionSpec& spec,
                        const OptimizeConfig& cfg) {
  CalibratedOptimizeResult r =
      descend(params, X, k_target, spec, false, 1.0, 0.0, true, false, false, cfg);
  return OptimizeResult{std::move(r.params), std::move(r.trace)};
}

CalibratedOptimizeResult optimize_calibrated(const EncoderParams& params,
                                             const Eigen::MatrixXd& X,
                                             const KernelMatrix& k_target,
                                             const DistortionSpec& spec, bool encode_distorted,
                                             double init_cal_gain, double init_cal_bias,
                                             bool train_weights, bool train_cal,
                                             const OptimizeConfig& cfg) {
  return descend(params, X, k_target, spec, encode_distorted, init_cal_gain, init_cal_bias,
                 train_weights, train_cal, true, cfg);
}

KernelExperimentResult kernel_experiment(const KernelExperimentConfig& cfg) {
  const Eigen::MatrixXd X = gen_kernel_dataset(cfg.seed);
  const int n_features = static_cast<int>(X.cols());

  KernelExperimentResult res;
  res.A = rbf_kernel(X, cfg.sigma);

  // Bandwidth-matched random phase encoder: projection entries N(0, 1/sigma^2)
  // make the pairwise phase cosine an unbiased estimate of the RBF target.
  EncoderParams naive = random_projection_params(n_features, cfg.dim, cfg.seed);
  naive.activation = Activation::PhaseMap;
  naive.weights *= std::sqrt(static_cast<double>(n_features)) / cfg.sigma;

  Rng rng_b(cfg.seed);
  res.B = hw_kernel(X, naive, cfg.spec, cfg.encode_distorted, rng_b);

  OptimizeConfig cal_cfg;
  cal_cfg.step_size = cfg.cal_step;
  cal_cfg.iterations = cfg.cal_iterations;
  cal_cfg.alpha = cfg.alpha;
  cal_cfg.beta = cfg.beta;
  cal_cfg.seed = cfg.seed;
  CalibratedOptimizeResult c = optimize_calibrated(naive, X, res.A, cfg.spec, cfg.encode_distorted,
                                                   1.0, 0.0, false, true, cal_cfg);
  SimPipeline pipe_c;
  pipe_c.spec = cfg.spec;
  pipe_c.encode_distorted = cfg.encode_distorted;
  pipe_c.cal_gain = c.cal_gain;
  pipe_c.cal_bias = c.cal_bias;
  Rng rng_c(cfg.seed);
  res.C = hw_kernel_batch(X, c.params, pipe_c, rng_c);

  OptimizeConfig joint_cfg = cal_cfg;
  joint_cfg.step_size = cfg.joint_step;
  joint_cfg.iterations = cfg.joint_iterations;
  CalibratedOptimizeResult d = optimize_calibrated(
      naive, X, res.A, cfg.spec, cfg.encode_distorted, c.cal_gain, c.cal_bias, true, true, joint_cfg);
  SimPipeline pipe_d = pipe_c;
  pipe_d.cal_gain = d.cal_gain;
  pipe_d.cal_bias = d.cal_bias;
  Rng rng_d(cfg.seed);
  res.D = hw_kernel_batch(X, d.params, pipe_d, rng_d);

  res.frobenius_errors["B"] = (res.B - res.A).norm();
  res.frobenius_errors["C"] = (res.C - res.A).norm();
  res.frobenius_errors["D"] = (res.D - res.A).norm();
  return res;
}

}  // namespace hdcal
