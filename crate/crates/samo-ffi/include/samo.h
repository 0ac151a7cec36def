#ifndef SAMO_H
#define SAMO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum SamoStatus {
  SAMO_STATUS_OK = 0,
  SAMO_STATUS_NULL_POINTER = 1,
  SAMO_STATUS_INVALID_ARGUMENT = 2,
  SAMO_STATUS_UTF8 = 3,
  SAMO_STATUS_IO = 4,
  SAMO_STATUS_CONFIG = 5,
  SAMO_STATUS_FORMAT = 6,
  SAMO_STATUS_NUMERIC = 7,
  SAMO_STATUS_DOMAIN = 8,
  SAMO_STATUS_USAGE = 9,
  SAMO_STATUS_INTERRUPTED = 10,
  SAMO_STATUS_PANIC = 11,
} SamoStatus;

/**
 * Opaque run configuration handle.
 */
typedef struct SamoConfig SamoConfig;

/**
 * Opaque environment instance.
 */
typedef struct SamoEnv SamoEnv;

/**
 * Opaque trained option set (checkpoint contents).
 */
typedef struct SamoOptionSet SamoOptionSet;

/**
 * Opaque execution session: a loaded option set driven by the cascade
 * with its own RNG and dwell state.
 */
typedef struct SamoSession SamoSession;

/**
 * Flat evaluation report for C callers.
 */
typedef struct SamoEvalReport {
  uintptr_t episodes;
  double mean_length;
  uint32_t min_length;
  uint32_t max_length;
  double mean_return;
  /**
   * Negative when the environment has no goals.
   */
  double goal_success;
} SamoEvalReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Human-readable description of a status code. The returned pointer is
 * static and must not be freed.
 */
const char *samo_status_message(enum SamoStatus status);

/**
 * Library version as a static string; must not be freed.
 */
const char *samo_version(void);

/**
 * Loads and validates a TOML run configuration.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string; `out` must be a valid
 * pointer. On `Ok` the caller owns the handle and must free it with
 * [`samo_config_free`].
 */
enum SamoStatus samo_config_load(const char *path, struct SamoConfig **out);

/**
 * # Safety
 * `cfg` must come from [`samo_config_load`] and not be freed twice.
 */
void samo_config_free(struct SamoConfig *cfg);

/**
 * Trains (or resumes) one seed of the configured experiment, writing
 * metrics and checkpoints under `out_dir`.
 *
 * # Safety
 * `cfg` must be a live handle from [`samo_config_load`]; `out_dir` a
 * valid NUL-terminated path.
 */
enum SamoStatus samo_train_seed(const struct SamoConfig *cfg, uint64_t seed, const char *out_dir);

/**
 * Loads a checkpoint into an option-set handle.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string; `out` a valid pointer.
 * Free the handle with [`samo_option_set_free`].
 */
enum SamoStatus samo_checkpoint_load(const char *path, struct SamoOptionSet **out);

/**
 * # Safety
 * `set` must come from [`samo_checkpoint_load`] and not be freed twice;
 * any session created over it must be freed first.
 */
void samo_option_set_free(struct SamoOptionSet *set);

/**
 * Number of options in the set.
 *
 * # Safety
 * `set` must be a live handle.
 */
uintptr_t samo_option_count(const struct SamoOptionSet *set);

/**
 * Observation width the checkpointed policies expect.
 *
 * # Safety
 * `set` must be a live handle.
 */
uintptr_t samo_option_set_obs_dim(const struct SamoOptionSet *set);

/**
 * Creates an environment. Known names: corridor, color_corridor,
 * goal_corridor, two_zone.
 *
 * # Safety
 * `name` must be a valid NUL-terminated string; `out` a valid pointer.
 * Free with [`samo_env_free`].
 */
enum SamoStatus samo_env_create(const char *name,
                                uintptr_t k_frames,
                                uint32_t max_steps,
                                uint64_t seed,
                                struct SamoEnv **out);

/**
 * # Safety
 * `env` must come from [`samo_env_create`] and not be freed twice.
 */
void samo_env_free(struct SamoEnv *env);

/**
 * Observation width of the environment (frames already stacked).
 *
 * # Safety
 * `env` must be a live handle.
 */
uintptr_t samo_env_obs_dim(const struct SamoEnv *env);

/**
 * Action kind: 0 = continuous, 1 = discrete.
 *
 * # Safety
 * `env` must be a live handle.
 */
int32_t samo_env_action_kind(const struct SamoEnv *env);

/**
 * Continuous dimension or discrete action count.
 *
 * # Safety
 * `env` must be a live handle.
 */
uintptr_t samo_env_action_dim(const struct SamoEnv *env);

/**
 * Resets the environment and writes the first observation.
 *
 * # Safety
 * `env` must be a live handle; `obs_out` must point to `obs_len` f64s
 * with `obs_len >= samo_env_obs_dim(env)`.
 */
enum SamoStatus samo_env_reset(struct SamoEnv *env,
                               uint64_t seed,
                               double *obs_out,
                               uintptr_t obs_len);

/**
 * Advances one step. `info_out` receives 0 none, 1 failure, 2 goal,
 * 3 cap, 4 wrong-corridor.
 *
 * # Safety
 * `env` must be a live, reset handle; `action` must point to
 * `action_len` f64s; `obs_out` to `obs_len >= samo_env_obs_dim(env)`
 * f64s; `reward_out`, `done_out` and `info_out` must be valid pointers.
 */
enum SamoStatus samo_env_step(struct SamoEnv *env,
                              const double *action,
                              uintptr_t action_len,
                              double *obs_out,
                              uintptr_t obs_len,
                              double *reward_out,
                              bool *done_out,
                              int32_t *info_out);

/**
 * Creates an execution session over a loaded option set.
 *
 * # Safety
 * `set` must be a live handle that outlives the session; `out` a valid
 * pointer. Free with [`samo_session_free`]. `t_min = 0` uses the value
 * stored in the checkpoint.
 */
enum SamoStatus samo_session_create(const struct SamoOptionSet *set,
                                    uint64_t seed,
                                    uint32_t t_min,
                                    bool greedy,
                                    struct SamoSession **out);

/**
 * # Safety
 * `session` must come from [`samo_session_create`] and not be freed
 * twice.
 */
void samo_session_free(struct SamoSession *session);

/**
 * Resets the cascade state at an episode boundary.
 *
 * # Safety
 * `session` must be a live handle.
 */
enum SamoStatus samo_session_reset(struct SamoSession *session);

/**
 * Selects the cascade action for an observation. Continuous actions fill
 * `action_out[0..dim]`; discrete actions write the index to
 * `action_out[0]`. `active_out` receives the acting option (1-based).
 *
 * # Safety
 * `session` must be a live handle whose option set is still alive; `obs`
 * must point to `obs_len` f64s matching the checkpoint's observation
 * width; `action_out` must hold at least the action dimension;
 * `active_out` must be valid.
 */
enum SamoStatus samo_session_act(struct SamoSession *session,
                                 const double *obs,
                                 uintptr_t obs_len,
                                 double *action_out,
                                 uintptr_t action_len,
                                 uintptr_t *active_out);

/**
 * Evaluates a checkpointed option set on a named environment.
 *
 * # Safety
 * `set` must be a live handle; `env_name` a valid NUL-terminated string;
 * `report_out` a valid pointer.
 */
enum SamoStatus samo_evaluate(const struct SamoOptionSet *set,
                              const char *env_name,
                              uintptr_t episodes,
                              bool greedy,
                              uint64_t eval_seed,
                              uint32_t max_steps,
                              struct SamoEvalReport *report_out);

/**
 * Frees a string allocated by this library.
 *
 * # Safety
 * `s` must come from a samo allocation-returning function and not be
 * freed twice.
 */
void samo_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* SAMO_H */
