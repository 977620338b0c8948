#include "encoder.hpp"

#include <cmath>
#include <cstring>

#include "error.hpp"

namespace hdcal {

Activation activation_from_string(const std::string& s) {
  if (s == "none") return Activation::None;
  if (s == "tanh") return Activation::Tanh;
  if (s == "phase") return Activation::PhaseMap;
  raise(ErrorCode::Config, "unknown activation '" + s + "'");
}

std::string activation_to_string(Activation a) {
  switch (a) {
    case Activation::None: return "none";
    case Activation::Tanh: return "tanh";
    case Activation::PhaseMap: return "phase";
  }
  return "?";
}

EncoderParams random_projection_params(int n_features, int dim, uint64_t seed) {
  if (n_features <= 0 || dim <= 0)
    raise(ErrorCode::InvalidDimension, "encoder dimensions must be positive");
  Rng rng(seed);
  EncoderParams p;
  p.weights.resize(n_features, dim);
  const double std = 1.0 / std::sqrt(static_cast<double>(n_features));
  for (int r = 0; r < n_features; ++r)
    for (int c = 0; c < dim; ++c) p.weights(r, c) = rng.normal(0.0, std);
  return p;
}

Hypervector encode(const Eigen::VectorXd& x, const EncoderParams& params) {
  if (x.size() != params.weights.rows())
    raise(ErrorCode::Incompatible, "feature length " + std::to_string(x.size()) +
                                       " does not match encoder with " +
                                       std::to_string(params.weights.rows()) + " inputs");
  Eigen::VectorXd z = params.weights.transpose() * x;
  Hypervector out;
  out.data.resize(z.size());
  switch (params.activation) {
    case Activation::None:
      out.repr = Repr::DenseReal;
      for (int i = 0; i < z.size(); ++i) out.data[i] = z(i);
      break;
    case Activation::Tanh:
      out.repr = Repr::DenseReal;
      for (int i = 0; i < z.size(); ++i) out.data[i] = std::tanh(z(i));
      break;
    case Activation::PhaseMap:
      out.repr = Repr::Phase;
      for (int i = 0; i < z.size(); ++i) out.data[i] = wrap_phase(z(i));
      break;
  }
  return out;
}

Hypervector encode_hw(const Eigen::VectorXd& x, const EncoderParams& params,
                      const DistortionSpec& spec, Rng& rng) {
  return distort(encode(x, params), spec, rng);
}

namespace {

// Applies one storage stage to a value matrix, returning outputs and the
// elementwise derivative. Phase stages act on wrapped angles through the
// full-scale transfer; wrapping is transparent to the chain rule.
struct StageResult {
  Eigen::MatrixXd out;
  Eigen::MatrixXd deriv;
};

StageResult apply_stage(const Eigen::MatrixXd& in, bool phase, const DistortionSpec& spec,
                        Rng& rng) {
  StageResult r;
  r.out.resizeLike(in);
  r.deriv.resizeLike(in);
  for (Eigen::Index i = 0; i < in.rows(); ++i)
    for (Eigen::Index j = 0; j < in.cols(); ++j) {
      const double x = in(i, j);
      if (phase) {
        const double t = wrap_phase(x) / kTwoPi;
        r.out(i, j) = kTwoPi * unit_transfer(spec.family, spec.gain, t);
        r.deriv(i, j) = unit_transfer_deriv(spec.family, spec.gain, t);
      } else {
        r.out(i, j) = nonlinearity(spec.family, spec.gain, x);
        r.deriv(i, j) = nonlinearity_deriv(spec.family, spec.gain, x);
      }
      if (spec.input_noise_std > 0.0) r.out(i, j) += rng.normal(0.0, spec.input_noise_std);
    }
  return r;
}

struct Forward {
  bool phase = false;
  Eigen::MatrixXd Z;     // pre-activation
  Eigen::MatrixXd A;     // activation output (values or angles)
  Eigen::MatrixXd dAdZ;  // activation derivative
  Eigen::MatrixXd V;     // stored values/angles entering the comparison
  Eigen::MatrixXd dVdA;  // elementwise derivative of all storage stages
  // real path caches
  Eigen::MatrixXd gram;
  Eigen::VectorXd norms;
  // phase path caches
  Eigen::MatrixXd cosV, sinV;
  Eigen::MatrixXd C;  // pairwise raw similarities c_ij
};

Forward run_forward(const EncoderParams& params, const Eigen::MatrixXd& batch,
                    const SimPipeline& pipe, Rng& rng) {
  if (batch.cols() != params.weights.rows())
    raise(ErrorCode::Incompatible, "batch feature width does not match encoder");
  Forward f;
  f.phase = params.activation == Activation::PhaseMap;
  f.Z = batch * params.weights;  // n x D
  f.dAdZ = Eigen::MatrixXd::Ones(f.Z.rows(), f.Z.cols());
  switch (params.activation) {
    case Activation::None:
      f.A = f.Z;
      break;
    case Activation::Tanh:
      f.A = f.Z.array().tanh();
      f.dAdZ = 1.0 - f.A.array().square();
      break;
    case Activation::PhaseMap:
      f.A = f.Z.unaryExpr([](double z) { return wrap_phase(z); });
      break;
  }
  f.dVdA = Eigen::MatrixXd::Ones(f.A.rows(), f.A.cols());
  Eigen::MatrixXd cur = f.A;
  if (pipe.encode_distorted) {
    StageResult enc = apply_stage(cur, f.phase, pipe.spec, rng);
    cur = enc.out;
    f.dVdA = f.dVdA.cwiseProduct(enc.deriv);
  }
  StageResult store = apply_stage(cur, f.phase, pipe.spec, rng);
  f.V = store.out;
  f.dVdA = f.dVdA.cwiseProduct(store.deriv);

  for (Eigen::Index i = 0; i < f.V.size(); ++i)
    if (!std::isfinite(f.V(i / f.V.cols(), i % f.V.cols())))
      raise(ErrorCode::NumericOverflow,
            "non-finite stored value at flat index " + std::to_string(i));

  const double dim = static_cast<double>(f.V.cols());
  if (f.phase) {
    f.cosV = f.V.array().cos();
    f.sinV = f.V.array().sin();
    f.C = (f.cosV * f.cosV.transpose() + f.sinV * f.sinV.transpose()) / dim;
  } else {
    f.gram = f.V * f.V.transpose();
    f.norms = f.gram.diagonal().array().sqrt();
    for (Eigen::Index i = 0; i < f.norms.size(); ++i)
      if (f.norms(i) == 0.0)
        raise(ErrorCode::UndefinedSimilarity,
              "stored encoding " + std::to_string(i) + " has zero norm");
    f.C = f.gram.array() /
          (f.norms * f.norms.transpose()).array();
  }
  return f;
}

// Comparison stage on the cached forward state. In OutputNonlinear mode the
// raw similarity passes through g(a*c + b); AccumulateNonlinear applies g per
// product term (no calibration).
double compare_entry(const Forward& f, const SimPipeline& pipe, int i, int j) {
  const double dim = static_cast<double>(f.V.cols());
  if (pipe.spec.mode == Mode::OutputNonlinear) {
    const double p = pipe.cal_gain * f.C(i, j) + pipe.cal_bias;
    return nonlinearity(pipe.spec.family, pipe.spec.gain, p);
  }
  double acc = 0.0;
  for (int d = 0; d < f.V.cols(); ++d) {
    const double term = f.phase ? std::cos(f.V(i, d) - f.V(j, d)) : f.V(i, d) * f.V(j, d);
    acc += nonlinearity(pipe.spec.family, pipe.spec.gain, term);
  }
  return acc / dim;
}

double reg_from_encodings(const Eigen::MatrixXd& A, bool phase) {
  if (phase) return 0.0;
  const double n = static_cast<double>(A.rows());
  const double dim = static_cast<double>(A.cols());
  double r = 0.0;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const double q = A.row(i).squaredNorm() / dim - 1.0;
    r += q * q + kSparsityWeight * A.row(i).cwiseAbs().mean();
  }
  return r / n;
}

}  // namespace

double regularizer(const EncoderParams& params, const Eigen::MatrixXd& batch) {
  if (batch.cols() != params.weights.rows())
    raise(ErrorCode::Incompatible, "batch feature width does not match encoder");
  Eigen::MatrixXd Z = batch * params.weights;
  switch (params.activation) {
    case Activation::None:
      return reg_from_encodings(Z, false);
    case Activation::Tanh: {
      Eigen::MatrixXd A = Z.array().tanh();
      return reg_from_encodings(A, false);
    }
    case Activation::PhaseMap:
      return 0.0;
  }
  return 0.0;
}

Eigen::MatrixXd hw_kernel_batch(const Eigen::MatrixXd& batch, const EncoderParams& params,
                                const SimPipeline& pipe, Rng& rng) {
  pipe.spec.validate();
  Forward f = run_forward(params, batch, pipe, rng);
  const int n = static_cast<int>(batch.rows());
  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = compare_entry(f, pipe, i, j);
      if (pipe.spec.output_noise_std > 0.0) s += rng.normal(0.0, pipe.spec.output_noise_std);
      K(i, j) = s;
      K(j, i) = s;
    }
  return K;
}

ObjectiveGradient sim_objective_gradient(const EncoderParams& params, const Eigen::MatrixXd& batch,
                                         const Eigen::MatrixXd& target, const SimPipeline& pipe,
                                         double alpha, double beta, bool want_cal_grads, Rng& rng) {
  pipe.spec.validate();
  const int n = static_cast<int>(batch.rows());
  if (target.rows() != n || target.cols() != n)
    raise(ErrorCode::Incompatible, "target kernel size does not match the batch");

  ObjectiveGradient out;
  out.grad_weights = Eigen::MatrixXd::Zero(params.weights.rows(), params.weights.cols());
  Forward f = run_forward(params, batch, pipe, rng);
  const int dim = static_cast<int>(f.V.cols());
  const double dimd = static_cast<double>(dim);

  Eigen::MatrixXd dLdV = Eigen::MatrixXd::Zero(n, dim);
  double sim = 0.0;

  if (pipe.spec.mode == Mode::OutputNonlinear) {
    // s_ij = g(a*c_ij + b) + eps; accumulate dL/dc into M, then one matrix
    // pass for dL/dV.
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double p = pipe.cal_gain * f.C(i, j) + pipe.cal_bias;
        double s = nonlinearity(pipe.spec.family, pipe.spec.gain, p);
        if (pipe.spec.output_noise_std > 0.0) s += rng.normal(0.0, pipe.spec.output_noise_std);
        const double resid = s - target(i, j);
        sim += resid * resid;
        const double dLds = 2.0 * alpha * resid;
        const double gp = nonlinearity_deriv(pipe.spec.family, pipe.spec.gain, p);
        if (want_cal_grads) {
          out.grad_cal_gain += dLds * gp * f.C(i, j);
          out.grad_cal_bias += dLds * gp;
        }
        if (i != j) M(i, j) = dLds * gp * pipe.cal_gain;  // dc_ii/dV is zero
      }
    // S_ij = M_ij + M_ji folds the two ordered-pair terms that both see the
    // same raw similarity c_ij = c_ji.
    Eigen::MatrixXd S = M + M.transpose();
    if (f.phase) {
      // dL/dV_id = -(1/D) sum_j S_ij sin(V_id - V_jd)
      Eigen::MatrixXd Scos = S * f.cosV;  // n x D
      Eigen::MatrixXd Ssin = S * f.sinV;
      dLdV = -(f.sinV.cwiseProduct(Scos) - f.cosV.cwiseProduct(Ssin)) / dimd;
    } else {
      Eigen::MatrixXd Wn = S.array() / (f.norms * f.norms.transpose()).array();
      Eigen::VectorXd diagc = (S.cwiseProduct(f.C)).rowwise().sum();
      dLdV = Wn * f.V;
      for (int i = 0; i < n; ++i) dLdV.row(i) -= diagc(i) / (f.norms(i) * f.norms(i)) * f.V.row(i);
    }
  } else {
    // AccumulateNonlinear: per-term nonlinearity.
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int d = 0; d < dim; ++d) {
          const double term = f.phase ? std::cos(f.V(i, d) - f.V(j, d)) : f.V(i, d) * f.V(j, d);
          acc += nonlinearity(pipe.spec.family, pipe.spec.gain, term);
        }
        double s = acc / dimd;
        if (pipe.spec.output_noise_std > 0.0) s += rng.normal(0.0, pipe.spec.output_noise_std);
        const double resid = s - target(i, j);
        sim += resid * resid;
        const double dLds = 2.0 * alpha * resid;
        for (int d = 0; d < dim; ++d) {
          if (f.phase) {
            const double delta = f.V(i, d) - f.V(j, d);
            const double gp =
                nonlinearity_deriv(pipe.spec.family, pipe.spec.gain, std::cos(delta));
            const double contrib = -dLds * gp * std::sin(delta) / dimd;
            dLdV(i, d) += contrib;
            dLdV(j, d) -= contrib;
          } else {
            const double gp =
                nonlinearity_deriv(pipe.spec.family, pipe.spec.gain, f.V(i, d) * f.V(j, d));
            dLdV(i, d) += dLds * gp * f.V(j, d) / dimd;
            dLdV(j, d) += dLds * gp * f.V(i, d) / dimd;
          }
        }
      }
  }
  if (!std::isfinite(sim))
    raise(ErrorCode::NumericOverflow, "similarity loss overflowed (values left the "
                                      "nonlinearity's working range)");
  out.sim_loss = sim;

  // chain through the storage stages
  Eigen::MatrixXd dLdA = dLdV.cwiseProduct(f.dVdA);

  // regularizer on the (pre-storage) encodings
  out.reg = reg_from_encodings(f.A, f.phase);
  if (!f.phase && beta != 0.0) {
    const double nrows = static_cast<double>(n);
    for (int i = 0; i < n; ++i) {
      const double q = f.A.row(i).squaredNorm() / dimd - 1.0;
      for (int d = 0; d < dim; ++d) {
        double g = 2.0 * q * 2.0 * f.A(i, d) / dimd;
        g += kSparsityWeight * (f.A(i, d) > 0.0 ? 1.0 : (f.A(i, d) < 0.0 ? -1.0 : 0.0)) / dimd;
        dLdA(i, d) += beta * g / nrows;
      }
    }
  }

  Eigen::MatrixXd dLdZ = dLdA.cwiseProduct(f.dAdZ);
  out.grad_weights = batch.transpose() * dLdZ;
  out.objective = alpha * sim + beta * out.reg;
  return out;
}

Eigen::MatrixXd loss_gradient(const EncoderParams& params, const Eigen::MatrixXd& batch,
                              const Eigen::MatrixXd& target, const DistortionSpec& spec,
                              double alpha, double beta, Rng& rng) {
  SimPipeline pipe;
  pipe.spec = spec;
  return sim_objective_gradient(params, batch, target, pipe, alpha, beta, false, rng)
      .grad_weights;
}

std::vector<uint8_t> serialize(const EncoderParams& params) {
  std::vector<uint8_t> buf;
  const uint32_t rows = static_cast<uint32_t>(params.weights.rows());
  const uint32_t cols = static_cast<uint32_t>(params.weights.cols());
  auto put32 = [&buf](uint32_t v) {
    for (int s = 0; s < 32; s += 8) buf.push_back(static_cast<uint8_t>(v >> s));
  };
  put32(rows);
  put32(cols);
  buf.push_back(static_cast<uint8_t>(params.activation));
  buf.reserve(buf.size() + size_t{8} * rows * cols);
  for (uint32_t r = 0; r < rows; ++r)
    for (uint32_t c = 0; c < cols; ++c) {
      uint64_t bits;
      const double x = params.weights(r, c);
      std::memcpy(&bits, &x, 8);
      for (int s = 0; s < 64; s += 8) buf.push_back(static_cast<uint8_t>(bits >> s));
    }
  return buf;
}

EncoderParams deserialize_encoder(const uint8_t* buf, size_t len) {
  if (len < 9) raise(ErrorCode::Format, "encoder buffer truncated");
  auto get32 = [buf](size_t off) {
    uint32_t v = 0;
    for (int s = 0; s < 4; ++s) v |= static_cast<uint32_t>(buf[off + s]) << (8 * s);
    return v;
  };
  const uint32_t rows = get32(0), cols = get32(4);
  if (buf[8] > 2) raise(ErrorCode::Format, "unknown activation tag");
  if (len != 9 + size_t{8} * rows * cols) raise(ErrorCode::Format, "encoder payload size mismatch");
  EncoderParams p;
  p.activation = static_cast<Activation>(buf[8]);
  p.weights.resize(rows, cols);
  size_t off = 9;
  for (uint32_t r = 0; r < rows; ++r)
    for (uint32_t c = 0; c < cols; ++c) {
      uint64_t bits = 0;
      for (int s = 0; s < 8; ++s) bits |= static_cast<uint64_t>(buf[off + s]) << (8 * s);
      std::memcpy(&p.weights(r, c), &bits, 8);
      off += 8;
    }
  return p;
}

}  // namespace hdcal
