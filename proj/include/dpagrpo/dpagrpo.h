/* C interface to the dpagrpo library.
 *
 * Every fallible call returns a dpa_status; on failure the message is
 * available from dpa_last_error() on the calling thread until the next call.
 * Handles are opaque and owned by the caller: release them with the matching
 * *_destroy function. String outputs use caller buffers; pass a null buffer
 * to query the required size (including the terminating NUL). */
#ifndef DPAGRPO_DPAGRPO_H
#define DPAGRPO_DPAGRPO_H

#include <stddef.h>
#include <stdint.h>

#if defined(DPA_BUILDING_LIBRARY)
#define DPA_API __attribute__((visibility("default")))
#else
#define DPA_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dpa_status {
  DPA_OK = 0,
  DPA_ERR_INVALID_ARGUMENT = 1,
  DPA_ERR_CONFIG = 2,
  DPA_ERR_NUMERIC = 3,
  DPA_ERR_IO = 4,
  DPA_ERR_INTERNAL = 5
} dpa_status;

/* Verifier action y and generator action a. */
enum { DPA_NS = 0, DPA_SAC = 1 };
enum { DPA_KEEP = 0, DPA_REVISE = 1 };

/* Case labels returned by dpa_classify_case. */
typedef enum dpa_case {
  DPA_C1 = 0,
  DPA_C2 = 1,
  DPA_C3 = 2,
  DPA_C4 = 3,
  DPA_C5A = 4,
  DPA_C5B = 5,
  DPA_C6A = 6,
  DPA_C6B = 7
} dpa_case;

typedef struct dpa_config dpa_config;
typedef struct dpa_corpus dpa_corpus;

DPA_API const char* dpa_version(void);
DPA_API const char* dpa_last_error(void);
DPA_API const char* dpa_status_name(dpa_status status);

/* Configuration: every key starts at its documented default. */
DPA_API dpa_status dpa_config_create(dpa_config** out);
DPA_API void dpa_config_destroy(dpa_config* config);
DPA_API dpa_status dpa_config_load_file(dpa_config* config, const char* path);
DPA_API dpa_status dpa_config_load_text(dpa_config* config, const char* text);
DPA_API dpa_status dpa_config_set(dpa_config* config, const char* key, const char* value);
DPA_API dpa_status dpa_config_get(const dpa_config* config, const char* key, char* buffer, size_t size,
                                  size_t* required);
DPA_API dpa_status dpa_config_to_text(const dpa_config* config, char* buffer, size_t size, size_t* required);
DPA_API int dpa_config_has_key(const char* key);

/* Runs run.command and writes its artifacts under run.out_dir. */
DPA_API dpa_status dpa_run(const dpa_config* config);

/* Corpus of synthetic tasks. Difficulty comes from the env.* keys of
 * `config`, or defaults when it is null. */
DPA_API dpa_status dpa_corpus_generate(const dpa_config* config, uint64_t seed, size_t num_tasks, dpa_corpus** out);
DPA_API dpa_status dpa_corpus_load(const char* path, dpa_corpus** out);
DPA_API dpa_status dpa_corpus_save(const dpa_corpus* corpus, const char* path);
DPA_API void dpa_corpus_destroy(dpa_corpus* corpus);
DPA_API size_t dpa_corpus_size(const dpa_corpus* corpus);
DPA_API dpa_status dpa_corpus_horizon(const dpa_corpus* corpus, size_t task, size_t* out);
/* Oracle value in cents of decision unit `unit` (1-based). */
DPA_API dpa_status dpa_corpus_oracle_value(const dpa_corpus* corpus, size_t task, size_t unit, int64_t* out);

/* Group-relative advantages; centered != 0 skips the std normalization. */
DPA_API dpa_status dpa_group_advantage(const double* rewards, size_t n, double epsilon, int centered, double* out);
/* s_z: 1/0 revision correctness, -1 when no revision exists. Required when
   s_x = 0 and the verifier intervened. */
DPA_API dpa_status dpa_classify_case(int s_x, int verifier_action, int generator_action, int s_z, dpa_case* out);
DPA_API dpa_status dpa_wilson_interval(uint64_t successes, uint64_t n, double* lo, double* hi);
/* pi*(a) proportional to ref(a) exp(reward(a) / beta). */
DPA_API dpa_status dpa_kl_best_response(const double* ref, const double* rewards, size_t n, double beta,
                                        double* out);

#ifdef __cplusplus
}
#endif

#endif
