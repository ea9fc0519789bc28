/* C API for the whole-body-control training and evaluation library.
 *
 * All functions return wbc_status; on any nonzero status wbc_last_error()
 * holds a thread-local message. Opaque handles must be released with the
 * matching _destroy call. Strings returned through char** are owned by the
 * caller and released with wbc_string_free.
 */
#ifndef WBC_C_H
#define WBC_C_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define WBC_API __declspec(dllexport)
#else
#define WBC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wbc_status {
  WBC_OK = 0,
  WBC_ERR_INVALID_ARG = 1, /* bad arguments or configuration */
  WBC_ERR_IO = 2,          /* missing/corrupt files */
  WBC_ERR_RUNTIME = 3,     /* planning/training/simulation failure */
} wbc_status;

typedef struct wbc_env wbc_env;
typedef struct wbc_policy wbc_policy;
typedef struct wbc_world wbc_world;

WBC_API const char* wbc_version(void);
WBC_API const char* wbc_last_error(void);
WBC_API const char* wbc_config_help(void);
WBC_API void wbc_string_free(char* s);

/* ---- coarse entry points (CLI subcommands) ---- */

/* config_path/overrides_json/resume_dir may be NULL. */
WBC_API wbc_status wbc_train(const char* config_path, const char* overrides_json,
                             const char* out_dir, const char* resume_dir);

/* method: "baseline" or a checkpoint path; task_ref: "1".."4" or a task
 * file. summary_out (optional) receives the human-readable summary table. */
WBC_API wbc_status wbc_eval(const char* config_path, const char* overrides_json,
                            const char* method, const char* task_ref, int n_runs, uint64_t seed,
                            const char* out_csv, char** summary_out);

WBC_API wbc_status wbc_plan(const char* config_path, const char* overrides_json,
                            const char* task_ref, uint64_t seed, const char* out_json);

WBC_API wbc_status wbc_replay(const char* config_path, const char* trace_path,
                              const char* out_dir, int* n_frames_out);

WBC_API wbc_status wbc_bench_inference(const char* config_path, const char* checkpoint,
                                       int n_iters, double* hz_out, double* mean_ms_out,
                                       double* p99_ms_out);

/* ---- environment handles ---- */

WBC_API wbc_status wbc_env_create(const char* config_path, const char* overrides_json,
                                  wbc_env** out);
WBC_API void wbc_env_destroy(wbc_env* env);
WBC_API int wbc_env_obs_size(const wbc_env* env);
WBC_API wbc_status wbc_env_set_tolerance(wbc_env* env, double d_h);

/* obs_out must hold wbc_env_obs_size floats. */
WBC_API wbc_status wbc_env_reset(wbc_env* env, uint64_t seed, float* obs_out);

/* action: 5 indices in 0..4. outcome_out (optional): 0 none, 1 hold_success,
 * 2 collision, 3 joint_limit, 4 timeout. */
WBC_API wbc_status wbc_env_step(wbc_env* env, const int action[5], float* obs_out,
                                double* reward_out, int* done_out, int* outcome_out);

/* ---- world handles ---- */

WBC_API wbc_status wbc_world_generate(const char* config_path, const char* overrides_json,
                                      uint64_t seed, wbc_world** out);
WBC_API wbc_status wbc_world_from_json(const char* json_text, wbc_world** out);
WBC_API wbc_status wbc_world_to_json(const wbc_world* world, char** json_out);
WBC_API void wbc_world_destroy(wbc_world* world);
WBC_API wbc_status wbc_world_raycast(const wbc_world* world, double ox, double oy, double dx,
                                     double dy, double max_range, double* distance_out);

/* ---- policy handles ---- */

WBC_API wbc_status wbc_policy_init_random(const char* config_path, const char* overrides_json,
                                          uint64_t seed, wbc_policy** out);
WBC_API wbc_status wbc_policy_load(const char* config_path, const char* overrides_json,
                                   const char* checkpoint, wbc_policy** out);
WBC_API wbc_status wbc_policy_save(const wbc_policy* policy, const char* path);
WBC_API void wbc_policy_destroy(wbc_policy* policy);
WBC_API int wbc_policy_obs_size(const wbc_policy* policy);

/* logits_out: 25 floats; value_out optional. */
WBC_API wbc_status wbc_policy_forward(wbc_policy* policy, const float* obs, int obs_len,
                                      float* logits_out, float* value_out);
WBC_API wbc_status wbc_policy_argmax(const float* logits25, int action_out[5]);

#ifdef __cplusplus
}
#endif

#endif /* WBC_C_H */
