#include "hdcal.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "experiments.hpp"

using namespace hdcal;

struct hdcal_hv {
  Hypervector v;
};
struct hdcal_binary_hv {
  BinaryHypervector v;
};
struct hdcal_hwspec {
  DistortionSpec spec;
};
struct hdcal_config {
  ExperimentKind kind;
  ConfigMap file_values;
  ConfigMap overrides;
};

namespace {

thread_local std::string g_last_error;

hdcal_status status_of(const Error& e) {
  switch (e.code()) {
    case ErrorCode::InvalidDimension: return HDCAL_ERR_INVALID_DIMENSION;
    case ErrorCode::Incompatible: return HDCAL_ERR_INCOMPATIBLE;
    case ErrorCode::EmptyInput: return HDCAL_ERR_EMPTY_INPUT;
    case ErrorCode::InvalidParameter: return HDCAL_ERR_INVALID_PARAMETER;
    case ErrorCode::InvalidEnsemble: return HDCAL_ERR_INVALID_ENSEMBLE;
    case ErrorCode::UnsupportedRepr: return HDCAL_ERR_UNSUPPORTED_REPR;
    case ErrorCode::UndefinedSimilarity: return HDCAL_ERR_UNDEFINED_SIMILARITY;
    case ErrorCode::NumericInput:
    case ErrorCode::NumericOverflow: return HDCAL_ERR_NUMERIC;
    case ErrorCode::Diverged: return HDCAL_ERR_DIVERGED;
    case ErrorCode::InvalidState: return HDCAL_ERR_INVALID_STATE;
    case ErrorCode::InvalidDataset: return HDCAL_ERR_INVALID_DATASET;
    case ErrorCode::Io: return HDCAL_ERR_IO;
    case ErrorCode::Parse: return HDCAL_ERR_PARSE;
    case ErrorCode::Format: return HDCAL_ERR_FORMAT;
    case ErrorCode::Config: return HDCAL_ERR_CONFIG;
  }
  return HDCAL_ERR_UNKNOWN;
}

template <typename Fn>
hdcal_status guarded(Fn&& fn) {
  try {
    fn();
    return HDCAL_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HDCAL_ERR_UNKNOWN;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

hdcal_status require(bool cond, const char* what) {
  if (cond) return HDCAL_OK;
  g_last_error = what;
  return HDCAL_ERR_INVALID_PARAMETER;
}

}  // namespace

extern "C" {

const char* hdcal_version(void) {
  static const std::string v = library_version();
  return v.c_str();
}

const char* hdcal_last_error(void) { return g_last_error.c_str(); }

hdcal_status hdcal_hv_random_bipolar(uint32_t dim, uint64_t seed, hdcal_hv** out) {
  if (auto s = require(out != nullptr, "null output pointer")) return s;
  return guarded([&] { *out = new hdcal_hv{random_bipolar(dim, seed)}; });
}

hdcal_status hdcal_hv_random_phase(uint32_t dim, uint64_t seed, hdcal_hv** out) {
  if (auto s = require(out != nullptr, "null output pointer")) return s;
  return guarded([&] { *out = new hdcal_hv{random_phase(dim, seed)}; });
}

hdcal_status hdcal_hv_bind(const hdcal_hv* a, const hdcal_hv* b, hdcal_hv** out) {
  if (auto s = require(a && b && out, "null argument")) return s;
  return guarded([&] { *out = new hdcal_hv{bind(a->v, b->v)}; });
}

hdcal_status hdcal_hv_unbind(const hdcal_hv* composite, const hdcal_hv* key, hdcal_hv** out) {
  if (auto s = require(composite && key && out, "null argument")) return s;
  return guarded([&] { *out = new hdcal_hv{unbind(composite->v, key->v)}; });
}

hdcal_status hdcal_hv_bundle(const hdcal_hv* const* vs, size_t count, int normalize,
                             hdcal_hv** out) {
  if (auto s = require(vs && out, "null argument")) return s;
  return guarded([&] {
    std::vector<Hypervector> list;
    list.reserve(count);
    for (size_t i = 0; i < count; ++i) {
      if (!vs[i]) raise(ErrorCode::InvalidParameter, "null hypervector in bundle list");
      list.push_back(vs[i]->v);
    }
    *out = new hdcal_hv{bundle(list, normalize != 0)};
  });
}

hdcal_status hdcal_hv_cosine(const hdcal_hv* a, const hdcal_hv* b, double* out) {
  if (auto s = require(a && b && out, "null argument")) return s;
  return guarded([&] { *out = cosine_sim(a->v, b->v); });
}

hdcal_status hdcal_hv_quantize_sign(const hdcal_hv* v, hdcal_binary_hv** out) {
  if (auto s = require(v && out, "null argument")) return s;
  return guarded([&] { *out = new hdcal_binary_hv{quantize_sign(v->v)}; });
}

hdcal_status hdcal_binary_hamming(const hdcal_binary_hv* a, const hdcal_binary_hv* b,
                                  double* out) {
  if (auto s = require(a && b && out, "null argument")) return s;
  return guarded([&] { *out = hamming_sim(a->v, b->v); });
}

uint32_t hdcal_hv_dim(const hdcal_hv* v) {
  return v ? static_cast<uint32_t>(v->v.dim()) : 0;
}

hdcal_status hdcal_hv_serialize(const hdcal_hv* v, uint8_t** buf, size_t* len) {
  if (auto s = require(v && buf && len, "null argument")) return s;
  return guarded([&] {
    std::vector<uint8_t> bytes = serialize(v->v);
    *buf = static_cast<uint8_t*>(std::malloc(bytes.size()));
    std::memcpy(*buf, bytes.data(), bytes.size());
    *len = bytes.size();
  });
}

hdcal_status hdcal_hv_deserialize(const uint8_t* buf, size_t len, hdcal_hv** out) {
  if (auto s = require(buf && out, "null argument")) return s;
  return guarded([&] { *out = new hdcal_hv{deserialize_hv(buf, len)}; });
}

void hdcal_hv_free(hdcal_hv* v) { delete v; }
void hdcal_binary_hv_free(hdcal_binary_hv* v) { delete v; }
void hdcal_buffer_free(uint8_t* buf) { std::free(buf); }

hdcal_status hdcal_hwspec_create(const char* family, double gain, double input_noise,
                                 double output_noise, const char* mode, uint64_t seed,
                                 hdcal_hwspec** out) {
  if (auto s = require(family && mode && out, "null argument")) return s;
  return guarded([&] {
    DistortionSpec spec;
    spec.family = family_from_string(family);
    spec.gain = gain;
    spec.input_noise_std = input_noise;
    spec.output_noise_std = output_noise;
    spec.mode = mode_from_string(mode);
    spec.seed = seed;
    spec.validate();
    *out = new hdcal_hwspec{spec};
  });
}

hdcal_status hdcal_distort(const hdcal_hv* v, const hdcal_hwspec* spec, uint64_t seed,
                           hdcal_hv** out) {
  if (auto s = require(v && spec && out, "null argument")) return s;
  return guarded([&] {
    Rng rng(seed);
    *out = new hdcal_hv{distort(v->v, spec->spec, rng)};
  });
}

hdcal_status hdcal_hw_similarity(const hdcal_hv* a, const hdcal_hv* b, const hdcal_hwspec* spec,
                                 uint64_t seed, double* out) {
  if (auto s = require(a && b && spec && out, "null argument")) return s;
  return guarded([&] {
    Rng rng(seed);
    *out = hw_similarity(a->v, b->v, spec->spec, rng);
  });
}

void hdcal_hwspec_free(hdcal_hwspec* spec) { delete spec; }

hdcal_status hdcal_config_create(const char* experiment, hdcal_config** out) {
  if (auto s = require(experiment && out, "null argument")) return s;
  return guarded([&] {
    *out = new hdcal_config{experiment_from_string(experiment), {}, {}};
  });
}

hdcal_status hdcal_config_load_file(hdcal_config* cfg, const char* path) {
  if (auto s = require(cfg && path, "null argument")) return s;
  return guarded([&] { cfg->file_values = ConfigMap::from_file(path); });
}

hdcal_status hdcal_config_set(hdcal_config* cfg, const char* key, const char* value) {
  if (auto s = require(cfg && key && value, "null argument")) return s;
  cfg->overrides.values[key] = value;
  return HDCAL_OK;
}

hdcal_status hdcal_run(hdcal_config* cfg, char** report_json, char** out_dir) {
  if (auto s = require(cfg != nullptr, "null config")) return s;
  return guarded([&] {
    ExperimentConfig resolved = make_config(cfg->kind, cfg->file_values, cfg->overrides);
    RunResult run = run_experiment(resolved);
    if (report_json) *report_json = dup_string(run.report_json);
    if (out_dir) *out_dir = dup_string(resolved.out_dir);
  });
}

hdcal_status hdcal_compare(const char* report_a_path, const char* report_b_path, double tolerance,
                           const char* out_path, char** delta_json) {
  if (auto s = require(report_a_path && report_b_path, "null report path")) return s;
  return guarded([&] {
    std::string text =
        compare_reports(report_a_path, report_b_path, tolerance, out_path ? out_path : "");
    if (delta_json) *delta_json = dup_string(text);
  });
}

void hdcal_config_free(hdcal_config* cfg) { delete cfg; }
void hdcal_string_free(char* s) { std::free(s); }

}  // extern "C"
