#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "error.hpp"
#include "rng.hpp"

namespace hdcal {

// Hypervector representations.
//   DenseReal: unconstrained real components (bundles, encodings, memories).
//   Bipolar:   every component is exactly -1 or +1.
//   Phase:     FHRR; data holds phase angles in [0, 2pi), the implied complex
//              component is e^{i*theta} with unit modulus.
enum class Repr : uint8_t { DenseReal = 0, Bipolar = 1, Phase = 2 };

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Wrap an angle into [0, 2pi).
double wrap_phase(double theta);

struct Hypervector {
  Repr repr = Repr::DenseReal;
  std::vector<double> data;

  size_t dim() const { return data.size(); }
};

// Sign-quantized hypervector, bit-packed into 64-bit words (LSB-first).
struct BinaryHypervector {
  size_t dim = 0;
  std::vector<uint64_t> words;

  bool get(size_t i) const { return (words[i >> 6] >> (i & 63)) & 1u; }
  void set(size_t i, bool v) {
    const uint64_t mask = uint64_t{1} << (i & 63);
    if (v)
      words[i >> 6] |= mask;
    else
      words[i >> 6] &= ~mask;
  }
  static BinaryHypervector zeros(size_t dim) {
    BinaryHypervector b;
    b.dim = dim;
    b.words.assign((dim + 63) / 64, 0);
    return b;
  }
};

// i.i.d. uniform {-1,+1} components; deterministic in seed.
Hypervector random_bipolar(size_t dim, uint64_t seed);

// i.i.d. uniform phases on [0, 2pi); deterministic in seed.
Hypervector random_phase(size_t dim, uint64_t seed);

// Binding. Bipolar*Bipolar: componentwise product. Phase*Phase: phase sum
// mod 2pi. Bipolar*DenseReal (either order) is also accepted and gives the
// componentwise product as a DenseReal, which the graph memories rely on.
Hypervector bind(const Hypervector& a, const Hypervector& b);

// Inverse binding: bind with the inverse of `key` (bipolar vectors are their
// own inverse, phase inverse negates angles).
Hypervector unbind(const Hypervector& composite, const Hypervector& key);

// Componentwise sum of Bipolar/DenseReal vectors, optionally scaled to unit
// Euclidean norm. Phase vectors bundle as sums of their unit complex
// components; the result is stored as a DenseReal of length 2D holding
// interleaved (re, im) pairs. Mixed phase/real lists are rejected.
Hypervector bundle(const std::vector<Hypervector>& vs, bool normalize);

// Argument of each complex pair of an interleaved (re, im) DenseReal,
// projecting a phase bundle back to a Phase hypervector.
Hypervector to_phase(const Hypervector& pairs);

// Unit complex embedding of a Phase vector as interleaved (re, im) pairs.
Hypervector to_complex_pairs(const Hypervector& phase);

// Cosine similarity. Real reprs: <a,b>/(|a||b|). Phase pairs: real part of
// the normalized Hermitian inner product of the implied unit complex vectors.
double cosine_sim(const Hypervector& a, const Hypervector& b);

// Fraction of matching bits: 1 - popcount(a xor b)/D.
double hamming_sim(const BinaryHypervector& a, const BinaryHypervector& b);

// bit_i = 1 if v_i > 0 else 0 (exact zero maps to 0). Phase input is rejected.
BinaryHypervector quantize_sign(const Hypervector& v);

// Flat binary cache layout: repr tag u8, dim u32 little-endian, payload of
// f64 components (real reprs) or packed bits (binary).
std::vector<uint8_t> serialize(const Hypervector& v);
std::vector<uint8_t> serialize(const BinaryHypervector& v);
Hypervector deserialize_hv(const uint8_t* buf, size_t len);
BinaryHypervector deserialize_binary(const uint8_t* buf, size_t len);

}  // namespace hdcal
