#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "classify.hpp"

using namespace hdcal;

namespace {

Dataset make_blobs(int per_class, int n_classes, int dim, double sep, uint64_t seed) {
  Rng rng(seed);
  Dataset ds;
  ds.name = "blobs";
  ds.features.resize(per_class * n_classes, dim);
  ds.labels.resize(per_class * n_classes);
  Eigen::MatrixXd centers(n_classes, dim);
  for (int c = 0; c < n_classes; ++c)
    for (int f = 0; f < dim; ++f) centers(c, f) = sep * (rng.uniform() < 0.5 ? -1.0 : 1.0);
  int row = 0;
  for (int c = 0; c < n_classes; ++c)
    for (int k = 0; k < per_class; ++k, ++row) {
      ds.labels[row] = c;
      for (int f = 0; f < dim; ++f) ds.features(row, f) = centers(c, f) + 0.4 * rng.normal();
    }
  return ds;
}

DistortionSpec ident_spec() { return DistortionSpec{}; }

}  // namespace

TEST_CASE("single-sample training bundles exactly") {
  Dataset ds = make_blobs(1, 3, 8, 1.0, 5);
  EncoderParams p = random_projection_params(8, 32, 7);
  Rng rng(1);
  ClassModel m = train(ds, p, ident_spec(), 0, rng);
  CHECK(m.n_classes == 3);
  for (int c = 0; c < 3; ++c) {
    Hypervector e = encode(ds.features.row(c).transpose(), p);
    for (int d = 0; d < 32; ++d) CHECK(m.class_vectors(ds.labels[c], d) == doctest::Approx(e.data[d]));
  }

  // querying a training sample returns its own class
  Rng prng(2);
  for (int c = 0; c < 3; ++c)
    CHECK(predict(m, ds.features.row(c).transpose(), p, ident_spec(), prng) == ds.labels[c]);
}

TEST_CASE("quantized prototypes stay consistent with accumulators") {
  Dataset ds = make_blobs(10, 4, 12, 1.0, 9);
  EncoderParams p = random_projection_params(12, 64, 3);
  Rng rng(4);
  ClassModel m = train(ds, p, ident_spec(), 3, rng);
  for (int c = 0; c < 4; ++c) {
    Hypervector acc;
    acc.repr = Repr::DenseReal;
    acc.data.resize(m.dim);
    for (int d = 0; d < m.dim; ++d) acc.data[d] = m.class_vectors(c, d);
    BinaryHypervector q = quantize_sign(acc);
    CHECK(q.words == m.quantized[c].words);
  }
}

TEST_CASE("separable blobs are learned cleanly") {
  Dataset ds = make_blobs(40, 2, 16, 1.2, 11);
  EncoderParams p = random_projection_params(16, 256, 5);
  Rng rng(6);
  ClassModel m = train(ds, p, ident_spec(), 5, rng);
  Rng erng(7);
  EvalResult res = evaluate(m, ds, p, ident_spec(), 3, erng);
  CHECK(res.mean_accuracy >= 0.95);

  double mean = 0.0;
  for (double a : res.per_repeat) mean += a;
  CHECK(res.mean_accuracy == doctest::Approx(mean / res.per_repeat.size()));
  for (double a : res.per_repeat) {
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
  }
}

TEST_CASE("training accuracy does not degrade over the first retraining epoch") {
  int held = 0;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Dataset ds = make_blobs(30, 3, 10, 1.0, 100 + seed);
    EncoderParams p = random_projection_params(10, 128, seed);
    Rng r0(seed), r1(seed);
    ClassModel m0 = train(ds, p, ident_spec(), 0, r0);
    ClassModel m1 = train(ds, p, ident_spec(), 1, r1);
    Rng e0(1), e1(1);
    const double a0 = evaluate(m0, ds, p, ident_spec(), 1, e0).mean_accuracy;
    const double a1 = evaluate(m1, ds, p, ident_spec(), 1, e1).mean_accuracy;
    if (a1 >= a0) ++held;
  }
  CHECK(held >= 6);  // majority across seeds
}

TEST_CASE("argmax is invariant under monotone output nonlinearity at zero noise") {
  Dataset ds = make_blobs(15, 4, 10, 0.8, 21);
  EncoderParams p = random_projection_params(10, 128, 9);
  Rng rng(3);
  ClassModel m = train(ds, p, ident_spec(), 2, rng);
  DistortionSpec tanh_out;
  tanh_out.family = Family::Tanh;
  tanh_out.gain = 3.0;
  Rng ra(5), rb(5);
  for (int i = 0; i < ds.n(); ++i) {
    const int a = predict(m, ds.features.row(i).transpose(), p, ident_spec(), ra);
    const int b = predict(m, ds.features.row(i).transpose(), p, tanh_out, rb);
    CHECK(a == b);
  }
}

TEST_CASE("accuracy degrades monotonically with output noise") {
  Dataset ds = make_blobs(30, 5, 12, 0.7, 31);
  EncoderParams p = random_projection_params(12, 256, 13);
  Rng rng(8);
  ClassModel m = train(ds, p, ident_spec(), 3, rng);
  std::vector<double> acc;
  for (double noise : {0.0, 0.08, 0.25}) {
    DistortionSpec spec;
    spec.family = Family::Tanh;
    spec.output_noise_std = noise;
    Rng erng(17);
    acc.push_back(evaluate(m, ds, p, spec, 8, erng).mean_accuracy);
  }
  CHECK(acc[0] >= acc[1]);
  CHECK(acc[1] >= acc[2]);
}

TEST_CASE("model determinism under fixed seeds") {
  Dataset ds = make_blobs(10, 3, 8, 1.0, 41);
  EncoderParams p = random_projection_params(8, 64, 15);
  DistortionSpec spec;
  spec.family = Family::Tanh;
  spec.output_noise_std = 0.05;
  Rng r1(9), r2(9);
  ClassModel m1 = train(ds, p, spec, 4, r1);
  ClassModel m2 = train(ds, p, spec, 4, r2);
  CHECK(m1.class_vectors == m2.class_vectors);
  for (int c = 0; c < 3; ++c) CHECK(m1.quantized[c].words == m2.quantized[c].words);
}

TEST_CASE("error paths") {
  Dataset ds = make_blobs(4, 2, 6, 1.0, 51);
  EncoderParams p = random_projection_params(6, 32, 17);
  Rng rng(1);
  ClassModel untrained;
  CHECK_THROWS_AS(predict(untrained, ds.features.row(0).transpose(), p, ident_spec(), rng), Error);
  CHECK_THROWS_AS(evaluate(untrained, ds, p, ident_spec(), 1, rng), Error);

  Dataset empty;
  empty.features.resize(0, 6);
  CHECK_THROWS_AS(train(empty, p, ident_spec(), 0, rng), Error);
  ClassModel m = train(ds, p, ident_spec(), 0, rng);
  CHECK_THROWS_AS(evaluate(m, empty, p, ident_spec(), 1, rng), Error);

  // gap in the label range produces a degenerate-class warning
  Dataset gap = ds;
  for (int& l : gap.labels)
    if (l == 1) l = 2;
  ClassModel mg = train(gap, p, ident_spec(), 0, rng);
  CHECK(mg.warnings.size() == 1);
}
