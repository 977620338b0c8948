#include "hwmodel.hpp"

#include <cmath>

#include "error.hpp"

namespace hdcal {

void DistortionSpec::validate() const {
  if (!(gain > 0.0)) raise(ErrorCode::InvalidParameter, "distortion gain must be > 0");
  if (input_noise_std < 0.0 || output_noise_std < 0.0)
    raise(ErrorCode::InvalidParameter, "noise std must be >= 0");
}

void HardwareEnsemble::validate() const {
  if (family_pool.empty()) raise(ErrorCode::InvalidEnsemble, "ensemble family pool is empty");
  if (gain_lo > gain_hi || noise_lo > noise_hi)
    raise(ErrorCode::InvalidEnsemble, "ensemble ranges must be ordered");
  if (!(gain_lo > 0.0)) raise(ErrorCode::InvalidEnsemble, "ensemble gains must be > 0");
  if (noise_lo < 0.0) raise(ErrorCode::InvalidEnsemble, "ensemble noise must be >= 0");
}

Family family_from_string(const std::string& s) {
  if (s == "tanh") return Family::Tanh;
  if (s == "exp") return Family::Exp;
  if (s == "log") return Family::Log;
  if (s == "identity") return Family::Identity;
  raise(ErrorCode::Config, "unknown nonlinearity family '" + s + "'");
}

std::string family_to_string(Family f) {
  switch (f) {
    case Family::Tanh: return "tanh";
    case Family::Exp: return "exp";
    case Family::Log: return "log";
    case Family::Identity: return "identity";
  }
  return "?";
}

Mode mode_from_string(const std::string& s) {
  if (s == "output") return Mode::OutputNonlinear;
  if (s == "accumulate") return Mode::AccumulateNonlinear;
  raise(ErrorCode::Config, "unknown distortion mode '" + s + "'");
}

std::string mode_to_string(Mode m) {
  return m == Mode::OutputNonlinear ? "output" : "accumulate";
}

double nonlinearity(Family f, double gain, double x) {
  switch (f) {
    case Family::Identity:
      return x;
    case Family::Tanh:
      return std::tanh(gain * x);
    case Family::Exp: {
      const double s = x < 0.0 ? -1.0 : 1.0;
      return s * std::expm1(gain * std::fabs(x)) / std::expm1(gain);
    }
    case Family::Log: {
      const double s = x < 0.0 ? -1.0 : 1.0;
      return s * std::log1p(gain * std::fabs(x)) / std::log1p(gain);
    }
  }
  return x;
}

double nonlinearity_deriv(Family f, double gain, double x) {
  switch (f) {
    case Family::Identity:
      return 1.0;
    case Family::Tanh: {
      const double t = std::tanh(gain * x);
      return gain * (1.0 - t * t);
    }
    case Family::Exp:
      return gain * std::exp(gain * std::fabs(x)) / std::expm1(gain);
    case Family::Log:
      return gain / ((1.0 + gain * std::fabs(x)) * std::log1p(gain));
  }
  return 1.0;
}

double unit_transfer(Family f, double gain, double t) {
  switch (f) {
    case Family::Identity:
      return t;
    case Family::Tanh:
      return std::tanh(gain * t) / std::tanh(gain);
    case Family::Exp:
      return std::expm1(gain * t) / std::expm1(gain);
    case Family::Log:
      return std::log1p(gain * t) / std::log1p(gain);
  }
  return t;
}

double unit_transfer_deriv(Family f, double gain, double t) {
  switch (f) {
    case Family::Identity:
      return 1.0;
    case Family::Tanh: {
      const double c = std::cosh(gain * t);
      return gain / (c * c * std::tanh(gain));
    }
    case Family::Exp:
      return gain * std::exp(gain * t) / std::expm1(gain);
    case Family::Log:
      return gain / ((1.0 + gain * t) * std::log1p(gain));
  }
  return 1.0;
}

double unit_transfer_inverse(Family f, double gain, double u) {
  switch (f) {
    case Family::Identity:
      return u;
    case Family::Tanh:
      return std::atanh(u * std::tanh(gain)) / gain;
    case Family::Exp:
      return std::log1p(u * std::expm1(gain)) / gain;
    case Family::Log:
      return std::expm1(u * std::log1p(gain)) / gain;
  }
  return u;
}

namespace {

void require_finite(const Hypervector& v) {
  for (double x : v.data)
    if (!std::isfinite(x)) raise(ErrorCode::NumericInput, "non-finite hypervector component");
}

}  // namespace

Hypervector distort(const Hypervector& v, const DistortionSpec& spec, Rng& rng) {
  spec.validate();
  require_finite(v);
  Hypervector out;
  out.data.resize(v.dim());
  if (v.repr == Repr::Phase) {
    out.repr = Repr::Phase;
    for (size_t i = 0; i < v.dim(); ++i) {
      double stored = kTwoPi * unit_transfer(spec.family, spec.gain, v.data[i] / kTwoPi);
      if (spec.input_noise_std > 0.0) stored += rng.normal(0.0, spec.input_noise_std);
      out.data[i] = wrap_phase(stored);
    }
    return out;
  }
  out.repr = Repr::DenseReal;
  for (size_t i = 0; i < v.dim(); ++i) {
    double stored = nonlinearity(spec.family, spec.gain, v.data[i]);
    if (spec.input_noise_std > 0.0) stored += rng.normal(0.0, spec.input_noise_std);
    out.data[i] = stored;
  }
  return out;
}

double psi_compare(const Hypervector& a, const Hypervector& b, const DistortionSpec& spec,
                   Rng& rng) {
  double s;
  if (spec.mode == Mode::OutputNonlinear) {
    s = nonlinearity(spec.family, spec.gain, cosine_sim(a, b));
  } else {
    if (a.dim() != b.dim()) raise(ErrorCode::Incompatible, "dimension mismatch");
    double acc = 0.0;
    if (a.repr == Repr::Phase && b.repr == Repr::Phase) {
      for (size_t i = 0; i < a.dim(); ++i)
        acc += nonlinearity(spec.family, spec.gain, std::cos(a.data[i] - b.data[i]));
    } else if (a.repr != Repr::Phase && b.repr != Repr::Phase) {
      for (size_t i = 0; i < a.dim(); ++i)
        acc += nonlinearity(spec.family, spec.gain, a.data[i] * b.data[i]);
    } else {
      raise(ErrorCode::Incompatible, "cannot compare phase with real representation");
    }
    s = acc / static_cast<double>(a.dim());
  }
  if (spec.output_noise_std > 0.0) s += rng.normal(0.0, spec.output_noise_std);
  return s;
}

double hw_similarity(const Hypervector& a, const Hypervector& b, const DistortionSpec& spec,
                     Rng& rng) {
  if (a.dim() != b.dim()) raise(ErrorCode::Incompatible, "dimension mismatch");
  const Hypervector sa = distort(a, spec, rng);
  const Hypervector sb = distort(b, spec, rng);
  return psi_compare(sa, sb, spec, rng);
}

DistortionSpec sample_hardware(const HardwareEnsemble& ensemble, Rng& rng) {
  ensemble.validate();
  DistortionSpec spec;
  spec.family = ensemble.family_pool[rng.below(ensemble.family_pool.size())];
  spec.gain = rng.uniform(ensemble.gain_lo, ensemble.gain_hi);
  spec.input_noise_std = rng.uniform(ensemble.noise_lo, ensemble.noise_hi);
  spec.output_noise_std = rng.uniform(ensemble.noise_lo, ensemble.noise_hi);
  spec.seed = rng.next_u64();
  return spec;
}

}  // namespace hdcal
