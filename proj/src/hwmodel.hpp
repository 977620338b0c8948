#pragma once

#include <string>
#include <vector>

#include "hypervector.hpp"
#include "rng.hpp"

namespace hdcal {

// Nonlinearity families of the simulated CIM storage/compare path. All are
// odd, strictly increasing, fix the origin, and map [-1,1] into [-1,1]
// (Exp/Log reach exactly +-1 at +-1; Tanh saturates at +-tanh(gain)).
enum class Family : uint8_t { Tanh = 0, Exp = 1, Log = 2, Identity = 3 };

// Where the comparison nonlinearity acts.
//   OutputNonlinear:     on the scalar similarity (sense-amplifier compression).
//   AccumulateNonlinear: on each elementwise product before summation
//                        (per-column saturation).
enum class Mode : uint8_t { OutputNonlinear = 0, AccumulateNonlinear = 1 };

struct DistortionSpec {
  Family family = Family::Identity;
  double gain = 1.0;              // > 0
  double input_noise_std = 0.0;   // additive gaussian on stored components
  double output_noise_std = 0.0;  // additive gaussian on the scalar similarity
  Mode mode = Mode::OutputNonlinear;
  uint64_t seed = 0;

  void validate() const;
};

struct HardwareEnsemble {
  std::vector<Family> family_pool;
  double gain_lo = 1.0, gain_hi = 1.0;
  double noise_lo = 0.0, noise_hi = 0.0;
  uint64_t seed = 0;

  void validate() const;
};

Family family_from_string(const std::string& s);
std::string family_to_string(Family f);
Mode mode_from_string(const std::string& s);
std::string mode_to_string(Mode m);

// Scalar nonlinearity g and its derivative.
//   Tanh: tanh(gain*x)
//   Exp:  sign(x) * (e^{gain|x|} - 1) / (e^{gain} - 1)
//   Log:  sign(x) * log(1 + gain|x|) / log(1 + gain)
double nonlinearity(Family f, double gain, double x);
double nonlinearity_deriv(Family f, double gain, double x);

// The same families normalized onto the unit interval, g(0)=0 and g(1)=1,
// used as the stored-phase transfer curve (a phase theta is stored as
// 2pi * unit_transfer(theta/2pi)). Strictly increasing, hence invertible.
double unit_transfer(Family f, double gain, double t);
double unit_transfer_deriv(Family f, double gain, double t);
double unit_transfer_inverse(Family f, double gain, double u);

// Storage distortion: the stored analog of a hypervector.
// Real reprs: componentwise nonlinearity plus N(0, input_noise^2); result is
// DenseReal. Phase repr: the full-scale phase transfer plus noise, wrapped to
// [0, 2pi); result stays Phase.
Hypervector distort(const Hypervector& v, const DistortionSpec& spec, Rng& rng);

// The comparison stage Psi on vectors that are already stored: mode-dependent
// combination, then output noise. The graph pipelines call this on composites
// built from stored atoms.
double psi_compare(const Hypervector& stored_a, const Hypervector& stored_b,
                   const DistortionSpec& spec, Rng& rng);

// Hardware-perceived similarity of two ideal vectors: store both, compare.
// Deterministic when both noise levels are zero.
double hw_similarity(const Hypervector& a, const Hypervector& b, const DistortionSpec& spec,
                     Rng& rng);

// Draw one hardware instance from the ensemble: family uniform over the pool,
// gain and noise levels uniform over their ranges, fresh sub-seed.
DistortionSpec sample_hardware(const HardwareEnsemble& ensemble, Rng& rng);

}  // namespace hdcal
