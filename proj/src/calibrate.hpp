#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "encoder.hpp"
#include "hwmodel.hpp"

namespace hdcal {

// n x n symmetric similarity matrices (targets and hardware-perceived).
using KernelMatrix = Eigen::MatrixXd;

struct OptimizeConfig {
  double step_size = 0.05;
  int iterations = 2000;
  double alpha = 1.0;
  double beta = 0.01;
  std::optional<HardwareEnsemble> ensemble;
  uint64_t seed = 0;

  void validate() const;
};

// K_ij = exp(-|x_i - x_j|^2 / (2 sigma^2)) over the rows of X.
KernelMatrix rbf_kernel(const Eigen::MatrixXd& X, double sigma);

// Hardware-perceived kernel of the rows of X under the given encoder and
// distortion; encode_distorted selects whether the encoding stage itself runs
// through the storage nonlinearity.
KernelMatrix hw_kernel(const Eigen::MatrixXd& X, const EncoderParams& params,
                       const DistortionSpec& spec, bool encode_distorted, Rng& rng);

// Squared Frobenius norm of the difference.
double sim_loss(const KernelMatrix& k_hw, const KernelMatrix& k_target);

// Ground-truth target kernel: S*_ij = 1 when the labels match, else 0.
KernelMatrix build_label_kernel(const std::vector<int>& labels);

// L_task (0 when absent) + alpha * sim_loss + beta * regularizer; with an
// ensemble configured the similarity term is averaged over hardware draws.
double joint_objective(const EncoderParams& params, const Eigen::MatrixXd& X,
                       const KernelMatrix& k_target, const DistortionSpec& spec,
                       std::optional<double> task_loss, const OptimizeConfig& cfg);

struct OptimizeResult {
  EncoderParams params;
  std::vector<double> trace;  // objective value per step
};

// Full-batch gradient descent on the projection weights. Deterministic in
// cfg.seed; the returned parameters are the best iterate seen (so the final
// objective never exceeds the initial one). Throws a divergence error naming
// the step if the objective explodes or turns non-finite.
OptimizeResult optimize(const EncoderParams& params, const Eigen::MatrixXd& X,
                        const KernelMatrix& k_target, const DistortionSpec& spec,
                        const OptimizeConfig& cfg);

// As optimize, but with the scalar output calibration g(a*c + b) in the loop.
// train_weights / train_cal select which parameters descend; regimes with the
// distorted encode stage pass encode_distorted = true.
struct CalibratedOptimizeResult {
  EncoderParams params;
  double cal_gain = 1.0;
  double cal_bias = 0.0;
  std::vector<double> trace;
};

CalibratedOptimizeResult optimize_calibrated(const EncoderParams& params,
                                             const Eigen::MatrixXd& X,
                                             const KernelMatrix& k_target,
                                             const DistortionSpec& spec, bool encode_distorted,
                                             double init_cal_gain, double init_cal_bias,
                                             bool train_weights, bool train_cal,
                                             const OptimizeConfig& cfg);

// The four-variant kernel approximation experiment on the synthetic random
// walk dataset:
//   A: the RBF target;
//   B: the naive hardware kernel of a bandwidth-matched random phase encoder;
//   C: B with only the scalar output calibration trained (encoder frozen);
//   D: joint optimization of encoder weights and output calibration,
//      warm-started from C.
struct KernelExperimentConfig {
  uint64_t seed = 1;
  int dim = 512;
  double sigma = 0.05;  // 1/n for the 20-point dataset
  DistortionSpec spec;
  bool encode_distorted = false;
  int cal_iterations = 400;
  double cal_step = 0.1;
  int joint_iterations = 1500;
  double joint_step = 0.02;
  double alpha = 1.0;
  double beta = 0.01;
};

struct KernelExperimentResult {
  KernelMatrix A, B, C, D;
  std::map<std::string, double> frobenius_errors;  // keys "B", "C", "D"
};

KernelExperimentResult kernel_experiment(const KernelExperimentConfig& cfg);

}  // namespace hdcal
