#include "classify.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace hdcal {

namespace {

// Hardware encodings of every row, packed to bits once; the quantization is
// insensitive to the odd storage nonlinearity but the noise (when enabled)
// flows through.
std::vector<BinaryHypervector> encode_bits(const Eigen::MatrixXd& X, const EncoderParams& params,
                                           const DistortionSpec& spec, Rng& rng) {
  std::vector<BinaryHypervector> bits;
  bits.reserve(X.rows());
  for (int i = 0; i < X.rows(); ++i) {
    Hypervector enc = encode_hw(X.row(i).transpose(), params, spec, rng);
    bits.push_back(quantize_sign(enc));
  }
  return bits;
}

int argmax_scores(const std::vector<BinaryHypervector>& protos, const BinaryHypervector& query,
                  const DistortionSpec& spec, Rng& rng) {
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (size_t c = 0; c < protos.size(); ++c) {
    double s = nonlinearity(spec.family, spec.gain, hamming_sim(query, protos[c]));
    if (spec.output_noise_std > 0.0) s += rng.normal(0.0, spec.output_noise_std);
    if (s > best_score) {
      best_score = s;
      best = static_cast<int>(c);
    }
  }
  return best;
}

}  // namespace

ClassModel train(const Dataset& train_set, const EncoderParams& params,
                 const DistortionSpec& spec, int epochs, Rng& rng) {
  if (train_set.n() == 0) raise(ErrorCode::EmptyInput, "empty training set");
  const int C = train_set.n_classes();
  const int D = params.dim();

  ClassModel model;
  model.dim = D;
  model.n_classes = C;
  model.class_vectors = Eigen::MatrixXd::Zero(C, D);

  // cache hardware encodings (real for accumulation, bits for search)
  Eigen::MatrixXd enc(train_set.n(), D);
  std::vector<BinaryHypervector> bits;
  bits.reserve(train_set.n());
  for (int i = 0; i < train_set.n(); ++i) {
    Hypervector h = encode_hw(train_set.features.row(i).transpose(), params, spec, rng);
    for (int d = 0; d < D; ++d) enc(i, d) = h.data[d];
    bits.push_back(quantize_sign(h));
  }

  for (int i = 0; i < train_set.n(); ++i)
    model.class_vectors.row(train_set.labels[i]) += enc.row(i);

  std::vector<int> counts(C, 0);
  for (int l : train_set.labels) counts[l] += 1;
  for (int c = 0; c < C; ++c)
    if (counts[c] == 0)
      model.warnings.push_back("class " + std::to_string(c) + " has no training samples");

  auto requantize = [&model, C, D]() {
    model.quantized.clear();
    model.quantized.reserve(C);
    for (int c = 0; c < C; ++c) {
      Hypervector acc;
      acc.repr = Repr::DenseReal;
      acc.data.resize(D);
      for (int d = 0; d < D; ++d) acc.data[d] = model.class_vectors(c, d);
      model.quantized.push_back(quantize_sign(acc));
    }
  };
  requantize();

  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (int i = 0; i < train_set.n(); ++i) {
      const int pred = argmax_scores(model.quantized, bits[i], spec, rng);
      if (pred != train_set.labels[i]) {
        model.class_vectors.row(train_set.labels[i]) += enc.row(i);
        model.class_vectors.row(pred) -= enc.row(i);
      }
    }
    requantize();
  }
  return model;
}

int predict(const ClassModel& model, const Eigen::VectorXd& x, const EncoderParams& params,
            const DistortionSpec& spec, Rng& rng) {
  if (!model.trained()) raise(ErrorCode::InvalidState, "model has not been trained");
  const BinaryHypervector q = quantize_sign(encode_hw(x, params, spec, rng));
  return argmax_scores(model.quantized, q, spec, rng);
}

EvalResult evaluate(const ClassModel& model, const Dataset& test_set, const EncoderParams& params,
                    const DistortionSpec& spec, int repeats, Rng& rng) {
  if (!model.trained()) raise(ErrorCode::InvalidState, "model has not been trained");
  if (test_set.n() == 0) raise(ErrorCode::EmptyInput, "empty evaluation set");

  Rng enc_rng = rng.split(1);
  std::vector<BinaryHypervector> bits = encode_bits(test_set.features, params, spec, enc_rng);

  EvalResult res;
  Rng rep_master = rng.split(2);
  for (int rep = 0; rep < repeats; ++rep) {
    const uint64_t rep_seed = rep_master.next_u64();
    Rng rep_rng(rep_seed);
    int correct = 0;
    for (int i = 0; i < test_set.n(); ++i)
      if (argmax_scores(model.quantized, bits[i], spec, rep_rng) == test_set.labels[i]) ++correct;
    res.per_repeat.push_back(static_cast<double>(correct) / test_set.n());
    res.repeat_seeds.push_back(rep_seed);
  }
  double sum = 0.0;
  for (double a : res.per_repeat) sum += a;
  res.mean_accuracy = sum / static_cast<double>(res.per_repeat.size());
  return res;
}

}  // namespace hdcal
