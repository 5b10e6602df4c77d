/* Copyright 2026 The FlowHigh Authors
 * License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0) */

#ifndef FLOWHIGH_FLOWHIGH_H_
#define FLOWHIGH_FLOWHIGH_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define FH_API __attribute__((visibility("default")))
#else
#define FH_API
#endif

typedef enum fh_status {
  FH_OK = 0,
  FH_ERR_INTERNAL = 1,
  FH_ERR_CONFIG = 2,
  FH_ERR_DATA = 3,
  FH_ERR_NUMERIC = 4,
  FH_ERR_IO = 5,
  FH_ERR_FORMAT = 6,
  FH_ERR_DOMAIN = 7,
  FH_ERR_UNSUPPORTED = 8,
  FH_ERR_ARGUMENT = 9
} fh_status;

typedef struct fh_config fh_config;
typedef struct fh_model fh_model;

/* Message for the last failing call on this thread; never NULL. */
FH_API const char* fh_last_error(void);
FH_API const char* fh_status_name(fh_status status);
FH_API const char* fh_version(void);

/* ---- configuration ---- */
FH_API fh_status fh_config_new(fh_config** out);
FH_API fh_status fh_config_load(const char* path, fh_config** out);
FH_API fh_status fh_config_parse(const char* text, fh_config** out);
FH_API void fh_config_free(fh_config* cfg);
FH_API fh_status fh_config_set(fh_config* cfg, const char* key, const char* value);
/* Writes a NUL-terminated value into buf; *needed receives the full length + 1. */
FH_API fh_status fh_config_get(const fh_config* cfg, const char* key, char* buf, size_t buf_len, size_t* needed);
FH_API fh_status fh_config_save(const fh_config* cfg, const char* path);
FH_API fh_status fh_config_validate(const fh_config* cfg);

/* ---- data ---- */
FH_API fh_status fh_synth_corpus(const fh_config* cfg, const char* out_dir);
/* mode: 0 = training pairs, 1 = evaluation pairs. */
FH_API fh_status fh_prepare(const fh_config* cfg, const char* manifest, const char* out_dir, int mode);

/* ---- training ---- */
typedef void (*fh_step_callback)(int step, double loss, void* user);

/* resume and loss_log may be NULL. */
FH_API fh_status fh_train(const fh_config* cfg, const char* features_dir, const char* checkpoint_out,
                          const char* resume, const char* loss_log, fh_step_callback cb, void* user);

/* ---- models and inference ---- */
FH_API fh_status fh_model_load(const fh_config* cfg, const char* checkpoint, fh_model** out);
FH_API void fh_model_free(fh_model* model);

typedef struct fh_infer_options {
  int method;        /* 0 = euler, 1 = midpoint */
  int nfe;           /* network evaluations; midpoint needs an even count */
  uint64_t seed;
  int postprocess;   /* nonzero: replace the band below the input Nyquist */
} fh_infer_options;

FH_API void fh_infer_options_default(const fh_config* cfg, fh_infer_options* out);

/* Super-resolves samples at in_rate into a buffer at the configured rate.
 * Free *out with fh_buffer_free. */
FH_API fh_status fh_super_resolve(const fh_model* model, const double* samples, size_t count, int in_rate,
                                  const fh_infer_options* opts, double** out, size_t* out_count,
                                  uint64_t* forward_calls);
FH_API void fh_buffer_free(double* buf);

FH_API fh_status fh_infer_file(const fh_model* model, const char* in_wav, const char* out_wav,
                               const fh_infer_options* opts);

/* ---- evaluation ---- */
/* Writes the per-utterance LSD table as CSV. */
FH_API fh_status fh_eval(const fh_model* model, const char* eval_manifest, const char* csv_out, int ablate_postproc);
/* nfe_list may be NULL to use the configured list. */
FH_API fh_status fh_bench(const fh_model* model, const char* eval_manifest, const int* nfe_list, size_t nfe_count,
                          const char* csv_out);

#ifdef __cplusplus
}
#endif

#endif  /* FLOWHIGH_FLOWHIGH_H_ */
