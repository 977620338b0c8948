#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hwmodel.hpp"

using namespace hdcal;

namespace {
DistortionSpec make_spec(Family f, double gain, Mode mode = Mode::OutputNonlinear) {
  DistortionSpec s;
  s.family = f;
  s.gain = gain;
  s.mode = mode;
  return s;
}
}  // namespace

TEST_CASE("distortion fixes the origin and matches the stated forms") {
  Rng rng(1);
  Hypervector zero{Repr::DenseReal, std::vector<double>(8, 0.0)};
  for (Family f : {Family::Tanh, Family::Exp, Family::Log, Family::Identity}) {
    Hypervector out = distort(zero, make_spec(f, 1.0), rng);
    for (double x : out.data) CHECK(x == 0.0);
  }

  Hypervector pm{Repr::Bipolar, {1.0, -1.0}};
  Hypervector t = distort(pm, make_spec(Family::Tanh, 1.0), rng);
  CHECK(t.data[0] == doctest::Approx(0.76159415595));
  CHECK(t.data[1] == doctest::Approx(-0.76159415595));

  for (Family f : {Family::Exp, Family::Log}) {
    Hypervector out = distort(pm, make_spec(f, 1.0), rng);
    CHECK(out.data[0] == doctest::Approx(1.0));
    CHECK(out.data[1] == doctest::Approx(-1.0));
  }

  Hypervector bad{Repr::DenseReal, {1.0, std::nan("")}};
  CHECK_THROWS_AS(distort(bad, make_spec(Family::Tanh, 1.0), rng), Error);
}

TEST_CASE("families are odd, monotone, and bounded on [-1,1]") {
  for (Family f : {Family::Tanh, Family::Exp, Family::Log}) {
    for (double gain : {0.5, 1.0, 2.0, 4.0}) {
      double prev = -2.0;
      for (int k = 0; k <= 200; ++k) {
        const double x = -1.0 + 2.0 * k / 200.0;
        const double y = nonlinearity(f, gain, x);
        CHECK(y > prev);
        prev = y;
        CHECK(std::fabs(y) <= 1.0 + 1e-12);
        CHECK(nonlinearity(f, gain, -x) == doctest::Approx(-y).epsilon(1e-12));
      }
      const double hi = nonlinearity(f, gain, 1.0);
      if (f == Family::Tanh)
        CHECK(hi == doctest::Approx(std::tanh(gain)));
      else
        CHECK(hi == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("derivatives match finite differences") {
  const double h = 1e-6;
  for (Family f : {Family::Tanh, Family::Exp, Family::Log, Family::Identity}) {
    for (double gain : {0.7, 1.0, 3.0}) {
      for (double x : {-0.9, -0.3, 0.0, 0.2, 0.8}) {
        const double fd =
            (nonlinearity(f, gain, x + h) - nonlinearity(f, gain, x - h)) / (2.0 * h);
        CHECK(nonlinearity_deriv(f, gain, x) == doctest::Approx(fd).epsilon(1e-5));
      }
      for (double t : {0.05, 0.3, 0.6, 0.95}) {
        const double fd =
            (unit_transfer(f, gain, t + h) - unit_transfer(f, gain, t - h)) / (2.0 * h);
        CHECK(unit_transfer_deriv(f, gain, t) == doctest::Approx(fd).epsilon(1e-5));
        // transfer is a bijection of the unit interval
        CHECK(unit_transfer_inverse(f, gain, unit_transfer(f, gain, t)) ==
              doctest::Approx(t).epsilon(1e-9));
      }
      CHECK(unit_transfer(f, gain, 0.0) == doctest::Approx(0.0));
      CHECK(unit_transfer(f, gain, 1.0) == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("hardware similarity reduces to cosine under identity") {
  for (uint64_t s = 0; s < 20; ++s) {
    Rng rng(s);
    Hypervector a = random_bipolar(512, 2 * s);
    Hypervector b = random_bipolar(512, 2 * s + 1);
    const double hw = hw_similarity(a, b, make_spec(Family::Identity, 1.0), rng);
    CHECK(hw == doctest::Approx(cosine_sim(a, b)).epsilon(1e-12));

    Hypervector pa = random_phase(512, 100 + 2 * s);
    Hypervector pb = random_phase(512, 101 + 2 * s);
    const double phw = hw_similarity(pa, pb, make_spec(Family::Identity, 1.0), rng);
    CHECK(phw == doctest::Approx(cosine_sim(pa, pb)).epsilon(1e-12));
  }
}

TEST_CASE("self similarity saturates at g(1) in output mode") {
  Rng rng(3);
  Hypervector a = random_bipolar(256, 5);
  const double s = hw_similarity(a, a, make_spec(Family::Tanh, 1.0), rng);
  CHECK(s == doctest::Approx(std::tanh(1.0)));
}

TEST_CASE("fixed seeds give bit-identical similarity under noise") {
  DistortionSpec spec = make_spec(Family::Tanh, 1.0);
  spec.input_noise_std = 0.05;
  spec.output_noise_std = 0.02;
  Hypervector a = random_bipolar(128, 1);
  Hypervector b = random_bipolar(128, 2);
  Rng r1(42), r2(42);
  CHECK(hw_similarity(a, b, spec, r1) == hw_similarity(a, b, spec, r2));

  // symmetric when the output noise stream is replayed
  DistortionSpec out_only = make_spec(Family::Tanh, 1.0);
  out_only.output_noise_std = 0.02;
  Rng r3(42), r4(42);
  CHECK(hw_similarity(a, b, out_only, r3) == hw_similarity(b, a, out_only, r4));
}

TEST_CASE("accumulate mode applies the nonlinearity per product") {
  Hypervector a{Repr::Bipolar, {1, 1, -1, -1}};
  Hypervector b{Repr::Bipolar, {1, -1, 1, -1}};
  Rng rng(0);
  // stored tanh(1) scaling, then g applied to each product before averaging
  const double c = std::tanh(1.0);
  const double expect =
      (std::tanh(c * c) + std::tanh(-c * c) + std::tanh(-c * c) + std::tanh(c * c)) / 4.0;
  const double got =
      hw_similarity(a, b, make_spec(Family::Tanh, 1.0, Mode::AccumulateNonlinear), rng);
  CHECK(got == doctest::Approx(expect));
}

TEST_CASE("ensemble sampling") {
  HardwareEnsemble ens;
  ens.family_pool = {Family::Tanh};
  ens.gain_lo = ens.gain_hi = 2.5;
  ens.noise_lo = ens.noise_hi = 0.0;
  Rng rng(9);
  DistortionSpec s = sample_hardware(ens, rng);
  CHECK(s.family == Family::Tanh);
  CHECK(s.gain == doctest::Approx(2.5));
  CHECK(s.input_noise_std == 0.0);

  ens.family_pool = {Family::Tanh, Family::Exp};
  ens.gain_lo = 0.5;
  ens.gain_hi = 3.0;
  int tanh_count = 0;
  for (int i = 0; i < 1000; ++i) {
    DistortionSpec d = sample_hardware(ens, rng);
    if (d.family == Family::Tanh) ++tanh_count;
    CHECK(d.gain >= 0.5);
    CHECK(d.gain <= 3.0);
  }
  CHECK(tanh_count > 450);
  CHECK(tanh_count < 550);

  HardwareEnsemble empty;
  CHECK_THROWS_AS(sample_hardware(empty, rng), Error);
}

TEST_CASE("phase storage transfer concentrates naive phases") {
  // saturating transfer at high gain pushes stored phases toward full scale,
  // so naive random phase vectors become mutually similar
  DistortionSpec spec = make_spec(Family::Tanh, 4.0);
  Rng rng(11);
  double mean = 0.0;
  int count = 0;
  for (uint64_t s = 0; s < 10; ++s)
    for (uint64_t t = s + 1; t < 10; ++t) {
      mean += hw_similarity(random_phase(2048, s), random_phase(2048, t), spec, rng);
      ++count;
    }
  mean /= count;
  CHECK(mean > 0.9);
}
