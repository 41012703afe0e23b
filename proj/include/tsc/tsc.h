#ifndef TSC_TSC_H
#define TSC_TSC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TSC_API __declspec(dllexport)
#else
#define TSC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tsc_status {
  TSC_OK = 0,
  TSC_ERR_INVALID_ARGUMENT = 1, /* null pointer, bad length */
  TSC_ERR_VALIDATION = 2,       /* malformed config, network, dataset or checkpoint */
  TSC_ERR_DOMAIN = 3,
  TSC_ERR_SHAPE = 4,
  TSC_ERR_TRAINING_FAULT = 5,   /* non-finite values; a snapshot may have been written */
  TSC_ERR_DATA_CORRUPTION = 6,
  TSC_ERR_IO = 7,
  TSC_ERR_INTERNAL = 8
} tsc_status;

typedef struct tsc_experiment tsc_experiment;
typedef struct tsc_env tsc_env;

/* Called once per finished training episode with that episode's JSON row. */
typedef void (*tsc_progress_fn)(const char* row_json, void* user);

/* Message of the last failed call on this thread, "" if none. */
TSC_API const char* tsc_last_error(void);
TSC_API const char* tsc_version(void);

/* Strings returned through `char** out` are owned by the caller. */
TSC_API void tsc_free_string(char* s);

TSC_API tsc_status tsc_experiment_from_json(const char* config_json, tsc_experiment** out);
/* Relative paths in the file resolve against the file's directory. */
TSC_API tsc_status tsc_experiment_from_file(const char* path, tsc_experiment** out);
TSC_API void tsc_experiment_destroy(tsc_experiment* exp);
TSC_API tsc_status tsc_experiment_config(const tsc_experiment* exp, char** out_json);

TSC_API tsc_status tsc_run_eval(const tsc_experiment* exp, const char* controller, const char* checkpoint,
                                double noise_sigma, char** out_json);
TSC_API tsc_status tsc_run_train(const tsc_experiment* exp, const char* out_dir, int resume,
                                 tsc_progress_fn progress, void* user, char** out_json);
TSC_API tsc_status tsc_run_noise_sweep(const tsc_experiment* exp, const char* checkpoint, char** out_json);
TSC_API tsc_status tsc_run_ablation(const tsc_experiment* exp, const char* out_dir, tsc_progress_fn progress,
                                    void* user, char** out_json);
TSC_API tsc_status tsc_ingest_check(const char* roadnet, const char* const* flows, size_t num_flows,
                                    char** out_json);

/* Step-level access to the environment an experiment describes. */
TSC_API tsc_status tsc_env_create(const tsc_experiment* exp, uint64_t seed, double noise_sigma, tsc_env** out);
TSC_API void tsc_env_destroy(tsc_env* env);
TSC_API int tsc_env_num_agents(const tsc_env* env);
TSC_API int tsc_env_state_dim(const tsc_env* env);
TSC_API int tsc_env_done(const tsc_env* env);
/* Copies agent `agent`'s own state vector (state_dim values). */
TSC_API tsc_status tsc_env_state(const tsc_env* env, int agent, double* out, size_t len);
/* One phase index per agent; writes one reward per agent. */
TSC_API tsc_status tsc_env_step(tsc_env* env, const int* phases, size_t num_agents, double* rewards);
/* Episode metrics so far, as JSON. */
TSC_API tsc_status tsc_env_metrics(const tsc_env* env, char** out_json);

#ifdef __cplusplus
}
#endif

#endif
