#pragma once

#include <string>
#include <vector>

#include "data.hpp"
#include "encoder.hpp"
#include "hwmodel.hpp"

namespace hdcal {

// QuantHD-style model: real accumulator per class plus its sign-quantized
// prototype; associative search runs on the quantized vectors with Hamming
// similarity through the hardware output stage.
struct ClassModel {
  Eigen::MatrixXd class_vectors;  // C x D accumulators
  std::vector<BinaryHypervector> quantized;
  int dim = 0;
  int n_classes = 0;
  std::vector<std::string> warnings;

  bool trained() const { return n_classes > 0; }
};

// Single bundling pass of the (hardware-encoded) samples into their class
// accumulators, then `epochs` add/subtract retraining passes driven by the
// hardware prediction path; prototypes re-quantize after every epoch.
ClassModel train(const Dataset& train_set, const EncoderParams& params,
                 const DistortionSpec& spec, int epochs, Rng& rng);

// Argmax over classes of the distorted Hamming similarity between the
// quantized query encoding and the class prototypes; ties break to the lowest
// class index.
int predict(const ClassModel& model, const Eigen::VectorXd& x, const EncoderParams& params,
            const DistortionSpec& spec, Rng& rng);

struct EvalResult {
  double mean_accuracy = 0.0;
  std::vector<double> per_repeat;
  std::vector<uint64_t> repeat_seeds;
};

// Accuracy over the dataset, repeated with fresh noise seeds.
EvalResult evaluate(const ClassModel& model, const Dataset& test_set, const EncoderParams& params,
                    const DistortionSpec& spec, int repeats, Rng& rng);

}  // namespace hdcal
