#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "hwmodel.hpp"
#include "hypervector.hpp"

namespace hdcal {

// Activation applied to the linear projection z = W^T x.
//   None:     DenseReal(z)
//   Tanh:     DenseReal(tanh z)
//   PhaseMap: Phase(z mod 2pi) -- the FHRR encoding; with gaussian projection
//             weights this is the classic random-Fourier-feature map whose
//             pairwise cosine approximates an RBF kernel.
enum class Activation : uint8_t { None = 0, Tanh = 1, PhaseMap = 2 };

Activation activation_from_string(const std::string& s);
std::string activation_to_string(Activation a);

struct EncoderParams {
  Eigen::MatrixXd weights;  // n_features x D
  Activation activation = Activation::None;

  int n_features() const { return static_cast<int>(weights.rows()); }
  int dim() const { return static_cast<int>(weights.cols()); }
};

// W entries i.i.d. N(0, 1/n_features); deterministic in seed.
EncoderParams random_projection_params(int n_features, int dim, uint64_t seed);

Hypervector encode(const Eigen::VectorXd& x, const EncoderParams& params);

// encode followed by the storage distortion (the end-to-end pipeline where the
// encoding stage itself runs on distorted hardware).
Hypervector encode_hw(const Eigen::VectorXd& x, const EncoderParams& params,
                      const DistortionSpec& spec, Rng& rng);

// Full similarity pipeline description used by the calibration objective.
// cal_gain/cal_bias are the scalar output calibration applied inside the
// comparison nonlinearity in OutputNonlinear mode: s = g(a*c + b).
struct SimPipeline {
  DistortionSpec spec;
  bool encode_distorted = false;
  double cal_gain = 1.0;
  double cal_bias = 0.0;
};

// Fixed internal weight of the sparsity term inside the regularizer.
constexpr double kSparsityWeight = 0.1;

// Regularizer on a batch of encodings: mean over the batch of
// (|phi(x)|^2/D - 1)^2 + kSparsityWeight * mean_i |phi(x)_i|.
// Phase encodings are intrinsically normalized (unit complex components), so
// the value is identically zero for them.
double regularizer(const EncoderParams& params, const Eigen::MatrixXd& batch);

// Hardware-perceived kernel of a batch through the pipeline: every row is
// encoded (and distorted when the pipeline says so), stored once, and compared
// pairwise; symmetric by construction (upper triangle mirrored).
Eigen::MatrixXd hw_kernel_batch(const Eigen::MatrixXd& batch, const EncoderParams& params,
                                const SimPipeline& pipe, Rng& rng);

struct ObjectiveGradient {
  Eigen::MatrixXd grad_weights;
  double grad_cal_gain = 0.0;
  double grad_cal_bias = 0.0;
  double objective = 0.0;  // alpha * sim_loss + beta * regularizer
  double sim_loss = 0.0;
  double reg = 0.0;
};

// Analytic gradient of alpha * sum_ij (S_hw(i,j) - target_ij)^2 + beta * R
// with respect to the projection weights (and optionally the output
// calibration scalars). Additive noise, when enabled, enters the forward
// values as a constant offset per draw, so the chain rule through the
// deterministic nonlinearities remains exact.
ObjectiveGradient sim_objective_gradient(const EncoderParams& params, const Eigen::MatrixXd& batch,
                                         const Eigen::MatrixXd& target, const SimPipeline& pipe,
                                         double alpha, double beta, bool want_cal_grads, Rng& rng);

// Spec-level entry point: gradient of the joint objective with the output
// calibration fixed at identity and ideal encode stage.
Eigen::MatrixXd loss_gradient(const EncoderParams& params, const Eigen::MatrixXd& batch,
                              const Eigen::MatrixXd& target, const DistortionSpec& spec,
                              double alpha, double beta, Rng& rng);

// Encoder cache format: u32 n_features, u32 dim, u8 activation, then
// row-major f64 weights (little-endian).
std::vector<uint8_t> serialize(const EncoderParams& params);
EncoderParams deserialize_encoder(const uint8_t* buf, size_t len);

}  // namespace hdcal
