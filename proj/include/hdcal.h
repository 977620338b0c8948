/* hdcal -- hyperdimensional computing with hardware-aware calibration.
 *
 * C interface to the shared library: opaque handles, status codes, and
 * malloc'd outputs released through the matching *_free functions. All
 * functions that can fail return hdcal_status; HDCAL_OK is zero and
 * hdcal_last_error() describes the most recent failure on this thread.
 */
#ifndef HDCAL_H
#define HDCAL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hdcal_status {
  HDCAL_OK = 0,
  HDCAL_ERR_INVALID_DIMENSION,
  HDCAL_ERR_INCOMPATIBLE,
  HDCAL_ERR_EMPTY_INPUT,
  HDCAL_ERR_INVALID_PARAMETER,
  HDCAL_ERR_INVALID_ENSEMBLE,
  HDCAL_ERR_UNSUPPORTED_REPR,
  HDCAL_ERR_UNDEFINED_SIMILARITY,
  HDCAL_ERR_NUMERIC,
  HDCAL_ERR_DIVERGED,
  HDCAL_ERR_INVALID_STATE,
  HDCAL_ERR_INVALID_DATASET,
  HDCAL_ERR_IO,
  HDCAL_ERR_PARSE,
  HDCAL_ERR_FORMAT,
  HDCAL_ERR_CONFIG,
  HDCAL_ERR_UNKNOWN
} hdcal_status;

typedef struct hdcal_hv hdcal_hv;
typedef struct hdcal_binary_hv hdcal_binary_hv;
typedef struct hdcal_hwspec hdcal_hwspec;
typedef struct hdcal_config hdcal_config;

const char* hdcal_version(void);
/* Message for the most recent error on the calling thread. */
const char* hdcal_last_error(void);

/* ---- hypervectors ---- */

hdcal_status hdcal_hv_random_bipolar(uint32_t dim, uint64_t seed, hdcal_hv** out);
hdcal_status hdcal_hv_random_phase(uint32_t dim, uint64_t seed, hdcal_hv** out);
hdcal_status hdcal_hv_bind(const hdcal_hv* a, const hdcal_hv* b, hdcal_hv** out);
hdcal_status hdcal_hv_unbind(const hdcal_hv* composite, const hdcal_hv* key, hdcal_hv** out);
hdcal_status hdcal_hv_bundle(const hdcal_hv* const* vs, size_t count, int normalize,
                             hdcal_hv** out);
hdcal_status hdcal_hv_cosine(const hdcal_hv* a, const hdcal_hv* b, double* out);
hdcal_status hdcal_hv_quantize_sign(const hdcal_hv* v, hdcal_binary_hv** out);
hdcal_status hdcal_binary_hamming(const hdcal_binary_hv* a, const hdcal_binary_hv* b,
                                  double* out);
uint32_t hdcal_hv_dim(const hdcal_hv* v);

/* Flat cache layout: repr tag u8, dim u32 LE, f64/packed-bit payload. */
hdcal_status hdcal_hv_serialize(const hdcal_hv* v, uint8_t** buf, size_t* len);
hdcal_status hdcal_hv_deserialize(const uint8_t* buf, size_t len, hdcal_hv** out);

void hdcal_hv_free(hdcal_hv* v);
void hdcal_binary_hv_free(hdcal_binary_hv* v);
void hdcal_buffer_free(uint8_t* buf);

/* ---- hardware distortion model ---- */

/* family: "tanh" | "exp" | "log" | "identity"; mode: "output" | "accumulate" */
hdcal_status hdcal_hwspec_create(const char* family, double gain, double input_noise,
                                 double output_noise, const char* mode, uint64_t seed,
                                 hdcal_hwspec** out);
hdcal_status hdcal_distort(const hdcal_hv* v, const hdcal_hwspec* spec, uint64_t seed,
                           hdcal_hv** out);
hdcal_status hdcal_hw_similarity(const hdcal_hv* a, const hdcal_hv* b, const hdcal_hwspec* spec,
                                 uint64_t seed, double* out);
void hdcal_hwspec_free(hdcal_hwspec* spec);

/* ---- experiment harness ---- */

/* experiment: "kernel" | "classify" | "graph-recon" | "node-classify" */
hdcal_status hdcal_config_create(const char* experiment, hdcal_config** out);
hdcal_status hdcal_config_load_file(hdcal_config* cfg, const char* path);
hdcal_status hdcal_config_set(hdcal_config* cfg, const char* key, const char* value);

/* Runs the experiment, writing artifacts under the resolved out_dir. Both
 * output strings are malloc'd; out_dir may be NULL if not wanted. */
hdcal_status hdcal_run(hdcal_config* cfg, char** report_json, char** out_dir);

hdcal_status hdcal_compare(const char* report_a_path, const char* report_b_path, double tolerance,
                           const char* out_path, char** delta_json);

void hdcal_config_free(hdcal_config* cfg);
void hdcal_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* HDCAL_H */
