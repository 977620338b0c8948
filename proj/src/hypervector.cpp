#include "hypervector.hpp"

#include <bit>
#include <cmath>
#include <cstring>

namespace hdcal {

double wrap_phase(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  // fmod can land exactly on 2pi after the correction
  if (t >= kTwoPi) t -= kTwoPi;
  return t;
}

namespace {

void require_dim(size_t dim) {
  if (dim == 0) raise(ErrorCode::InvalidDimension, "hypervector dimension must be >= 1");
}

void require_same_dim(const Hypervector& a, const Hypervector& b) {
  if (a.dim() != b.dim())
    raise(ErrorCode::Incompatible, "dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                                       std::to_string(b.dim()));
}

double norm(const Hypervector& v) {
  double s = 0.0;
  for (double x : v.data) s += x * x;
  return std::sqrt(s);
}

}  // namespace

Hypervector random_bipolar(size_t dim, uint64_t seed) {
  require_dim(dim);
  Rng rng(seed);
  Hypervector v;
  v.repr = Repr::Bipolar;
  v.data.resize(dim);
  for (size_t i = 0; i < dim; ++i) v.data[i] = (rng.next_u64() & 1u) ? 1.0 : -1.0;
  return v;
}

Hypervector random_phase(size_t dim, uint64_t seed) {
  require_dim(dim);
  Rng rng(seed);
  Hypervector v;
  v.repr = Repr::Phase;
  v.data.resize(dim);
  for (size_t i = 0; i < dim; ++i) v.data[i] = rng.uniform() * kTwoPi;
  return v;
}

Hypervector bind(const Hypervector& a, const Hypervector& b) {
  require_same_dim(a, b);
  Hypervector out;
  out.data.resize(a.dim());
  if (a.repr == Repr::Phase || b.repr == Repr::Phase) {
    if (a.repr != Repr::Phase || b.repr != Repr::Phase)
      raise(ErrorCode::Incompatible, "phase vectors bind only with phase vectors");
    out.repr = Repr::Phase;
    for (size_t i = 0; i < a.dim(); ++i) out.data[i] = wrap_phase(a.data[i] + b.data[i]);
    return out;
  }
  // real-valued reprs: componentwise product
  for (size_t i = 0; i < a.dim(); ++i) out.data[i] = a.data[i] * b.data[i];
  out.repr = (a.repr == Repr::Bipolar && b.repr == Repr::Bipolar) ? Repr::Bipolar : Repr::DenseReal;
  return out;
}

Hypervector unbind(const Hypervector& composite, const Hypervector& key) {
  require_same_dim(composite, key);
  if (key.repr == Repr::Phase) {
    if (composite.repr != Repr::Phase)
      raise(ErrorCode::Incompatible, "phase unbind requires a phase composite");
    Hypervector inv;
    inv.repr = Repr::Phase;
    inv.data.resize(key.dim());
    for (size_t i = 0; i < key.dim(); ++i) inv.data[i] = wrap_phase(-key.data[i]);
    return bind(composite, inv);
  }
  if (key.repr != Repr::Bipolar)
    raise(ErrorCode::UnsupportedRepr, "unbind key must be bipolar or phase");
  return bind(composite, key);  // bipolar keys are self-inverse
}

Hypervector bundle(const std::vector<Hypervector>& vs, bool normalize) {
  if (vs.empty()) raise(ErrorCode::EmptyInput, "bundle of an empty list");
  const size_t dim = vs[0].dim();
  const bool phase = vs[0].repr == Repr::Phase;
  for (const auto& v : vs) {
    if (v.dim() != dim) raise(ErrorCode::Incompatible, "bundle dimension mismatch");
    if ((v.repr == Repr::Phase) != phase)
      raise(ErrorCode::Incompatible, "bundle cannot mix phase and real representations");
  }
  Hypervector out;
  out.repr = Repr::DenseReal;
  if (phase) {
    out.data.assign(2 * dim, 0.0);
    for (const auto& v : vs)
      for (size_t i = 0; i < dim; ++i) {
        out.data[2 * i] += std::cos(v.data[i]);
        out.data[2 * i + 1] += std::sin(v.data[i]);
      }
  } else {
    out.data.assign(dim, 0.0);
    for (const auto& v : vs)
      for (size_t i = 0; i < dim; ++i) out.data[i] += v.data[i];
  }
  if (normalize) {
    const double n = norm(out);
    if (n == 0.0) raise(ErrorCode::UndefinedSimilarity, "cannot normalize a zero bundle");
    for (double& x : out.data) x /= n;
  }
  return out;
}

Hypervector to_phase(const Hypervector& pairs) {
  if (pairs.repr != Repr::DenseReal || pairs.dim() % 2 != 0)
    raise(ErrorCode::UnsupportedRepr, "to_phase expects an interleaved (re, im) DenseReal");
  Hypervector out;
  out.repr = Repr::Phase;
  out.data.resize(pairs.dim() / 2);
  for (size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = wrap_phase(std::atan2(pairs.data[2 * i + 1], pairs.data[2 * i]));
  return out;
}

Hypervector to_complex_pairs(const Hypervector& phase) {
  if (phase.repr != Repr::Phase)
    raise(ErrorCode::UnsupportedRepr, "to_complex_pairs expects a phase vector");
  Hypervector out;
  out.repr = Repr::DenseReal;
  out.data.resize(2 * phase.dim());
  for (size_t i = 0; i < phase.dim(); ++i) {
    out.data[2 * i] = std::cos(phase.data[i]);
    out.data[2 * i + 1] = std::sin(phase.data[i]);
  }
  return out;
}

double cosine_sim(const Hypervector& a, const Hypervector& b) {
  require_same_dim(a, b);
  if ((a.repr == Repr::Phase) != (b.repr == Repr::Phase))
    raise(ErrorCode::Incompatible, "cannot compare phase with real representation");
  if (a.repr == Repr::Phase) {
    // Re<a, conj(b)> / D for unit-modulus components
    double s = 0.0;
    for (size_t i = 0; i < a.dim(); ++i) s += std::cos(a.data[i] - b.data[i]);
    return s / static_cast<double>(a.dim());
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.dim(); ++i) {
    dot += a.data[i] * b.data[i];
    na += a.data[i] * a.data[i];
    nb += b.data[i] * b.data[i];
  }
  if (na == 0.0 || nb == 0.0)
    raise(ErrorCode::UndefinedSimilarity, "cosine similarity of a zero-norm vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double hamming_sim(const BinaryHypervector& a, const BinaryHypervector& b) {
  if (a.dim != b.dim) raise(ErrorCode::Incompatible, "hamming dimension mismatch");
  uint64_t diff = 0;
  for (size_t w = 0; w < a.words.size(); ++w) diff += std::popcount(a.words[w] ^ b.words[w]);
  return 1.0 - static_cast<double>(diff) / static_cast<double>(a.dim);
}

BinaryHypervector quantize_sign(const Hypervector& v) {
  if (v.repr == Repr::Phase)
    raise(ErrorCode::UnsupportedRepr, "sign quantization is undefined for phase vectors");
  BinaryHypervector b = BinaryHypervector::zeros(v.dim());
  for (size_t i = 0; i < v.dim(); ++i)
    if (v.data[i] > 0.0) b.set(i, true);
  return b;
}

namespace {

void put_u32(std::vector<uint8_t>& buf, uint32_t v) {
  buf.push_back(static_cast<uint8_t>(v));
  buf.push_back(static_cast<uint8_t>(v >> 8));
  buf.push_back(static_cast<uint8_t>(v >> 16));
  buf.push_back(static_cast<uint8_t>(v >> 24));
}

uint32_t get_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

constexpr uint8_t kBinaryTag = 3;

}  // namespace

std::vector<uint8_t> serialize(const Hypervector& v) {
  std::vector<uint8_t> buf;
  buf.reserve(5 + 8 * v.dim());
  buf.push_back(static_cast<uint8_t>(v.repr));
  put_u32(buf, static_cast<uint32_t>(v.dim()));
  for (double x : v.data) {
    uint64_t bits;
    std::memcpy(&bits, &x, 8);
    for (int s = 0; s < 64; s += 8) buf.push_back(static_cast<uint8_t>(bits >> s));
  }
  return buf;
}

std::vector<uint8_t> serialize(const BinaryHypervector& v) {
  std::vector<uint8_t> buf;
  const size_t nbytes = (v.dim + 7) / 8;
  buf.reserve(5 + nbytes);
  buf.push_back(kBinaryTag);
  put_u32(buf, static_cast<uint32_t>(v.dim));
  for (size_t i = 0; i < nbytes; ++i) {
    const uint64_t word = v.words[i / 8];
    buf.push_back(static_cast<uint8_t>(word >> (8 * (i % 8))));
  }
  return buf;
}

Hypervector deserialize_hv(const uint8_t* buf, size_t len) {
  if (len < 5) raise(ErrorCode::Format, "hypervector buffer truncated");
  const uint8_t tag = buf[0];
  if (tag > 2) raise(ErrorCode::Format, "unknown hypervector repr tag");
  const uint32_t dim = get_u32(buf + 1);
  if (len != 5 + size_t{8} * dim) raise(ErrorCode::Format, "hypervector payload size mismatch");
  Hypervector v;
  v.repr = static_cast<Repr>(tag);
  v.data.resize(dim);
  for (uint32_t i = 0; i < dim; ++i) {
    uint64_t bits = 0;
    for (int s = 0; s < 8; ++s) bits |= static_cast<uint64_t>(buf[5 + 8 * i + s]) << (8 * s);
    std::memcpy(&v.data[i], &bits, 8);
  }
  return v;
}

BinaryHypervector deserialize_binary(const uint8_t* buf, size_t len) {
  if (len < 5 || buf[0] != kBinaryTag) raise(ErrorCode::Format, "not a binary hypervector buffer");
  const uint32_t dim = get_u32(buf + 1);
  const size_t nbytes = (dim + 7) / 8;
  if (len != 5 + nbytes) raise(ErrorCode::Format, "binary payload size mismatch");
  BinaryHypervector v = BinaryHypervector::zeros(dim);
  for (size_t i = 0; i < nbytes; ++i)
    v.words[i / 8] |= static_cast<uint64_t>(buf[5 + i]) << (8 * (i % 8));
  return v;
}

}  // namespace hdcal
