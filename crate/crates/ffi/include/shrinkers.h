#ifndef SHRINKERS_H
#define SHRINKERS_H

#include <stdint.h>

enum NspClassification
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  NSP_CLASSIFICATION_NEGATIVE = 0,
  NSP_CLASSIFICATION_POSITIVE = 1,
  NSP_CLASSIFICATION_SOLVER_ERROR = 2,
  NSP_CLASSIFICATION_INDETERMINATE = 3,
};
#ifndef __cplusplus
typedef int32_t NspClassification;
#endif // __cplusplus

/**
 * Result code of every call.
 */
enum NspStatus
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  NSP_STATUS_OK = 0,
  NSP_STATUS_NULL_POINTER = 1,
  NSP_STATUS_INVALID_PARAMETER = 2,
  NSP_STATUS_SINGULARITY = 3,
  NSP_STATUS_NON_FINITE = 4,
  NSP_STATUS_OUT_OF_RANGE = 5,
  NSP_STATUS_QUADRATURE_FAILURE = 6,
  NSP_STATUS_CONFIG = 7,
  NSP_STATUS_IO = 8,
  NSP_STATUS_PANIC = 9,
};
#ifndef __cplusplus
typedef int32_t NspStatus;
#endif // __cplusplus

enum NspTermination
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  NSP_TERMINATION_REACHED_R_MAX = 0,
  NSP_TERMINATION_BLOWUP = 1,
  NSP_TERMINATION_SINGULARITY = 2,
  NSP_TERMINATION_STEP_UNDERFLOW = 3,
  NSP_TERMINATION_STEP_BUDGET = 4,
  NSP_TERMINATION_NON_FINITE = 5,
};
#ifndef __cplusplus
typedef int32_t NspTermination;
#endif // __cplusplus

enum NspVelocity
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  /**
   * `U(δ) = -α`.
   */
  NSP_VELOCITY_FIXED = 0,
  /**
   * `U(δ) = -α δ`.
   */
  NSP_VELOCITY_SLOPE = 1,
};
#ifndef __cplusplus
typedef int32_t NspVelocity;
#endif // __cplusplus

/**
 * Opaque integrated profile.
 */
typedef struct NspTrajectory NspTrajectory;

typedef struct {
  double c_v;
  double r_gas;
  double kappa;
  double mu;
  double lambda;
  uint32_t d;
} NspConsts;

typedef struct {
  double rtol;
  double atol;
  double h_init;
  double h_min;
  double h_max;
  double r_max;
  double blowup_threshold;
  uint64_t max_steps;
  /**
   * Half-width of the excluded band around `r/2 + U = 0`, relative to `r`.
   */
  double guard_eps;
} NspIntegratorConfig;

/**
 * `(r, P, U, U', Θ, Θ')`.
 */
typedef struct {
  double r;
  double p;
  double u;
  double v;
  double theta;
  double s;
} NspState;

typedef struct {
  double dp;
  double du;
  double dv;
  double dtheta;
  double ds;
} NspDerivative;

typedef struct {
  double delta;
  double p_delta;
  double alpha;
  double theta0;
  NspVelocity velocity;
} NspCavitatingParams;

typedef struct {
  double delta;
  double p0;
  double theta0;
} NspSmoothParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *nsp_last_error_message(void);

/**
 * Reference constants `C_V = R = κ = λ = 1`, `μ = 2`, `d = 3`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
NspStatus nsp_consts_default(NspConsts *out);

/**
 * Default tolerances, step bounds and events.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
NspStatus nsp_integrator_config_default(NspIntegratorConfig *out);

/**
 * Right-hand side of the profile system at `state`.
 *
 * # Safety
 * Pointers must be null or valid.
 */
NspStatus nsp_rhs(const NspState *state,
                  const NspConsts *consts,
                  double guard_eps,
                  NspDerivative *out);

/**
 * Integrate from a cavitating launch. Integration failures are not errors:
 * they are reported by [`nsp_trajectory_termination`].
 *
 * # Safety
 * Pointers must be null or valid; `*out` receives a handle to free with
 * [`nsp_trajectory_free`].
 */
NspStatus nsp_integrate_cavitating(const NspCavitatingParams *params,
                                   const NspConsts *consts,
                                   const NspIntegratorConfig *config,
                                   NspTrajectory **out);

/**
 * Integrate from a smooth launch.
 *
 * # Safety
 * As [`nsp_integrate_cavitating`].
 */
NspStatus nsp_integrate_smooth(const NspSmoothParams *params,
                               const NspConsts *consts,
                               const NspIntegratorConfig *config,
                               NspTrajectory **out);

/**
 * Release a trajectory. Null is ignored.
 *
 * # Safety
 * `traj` must be null or a handle not yet freed.
 */
void nsp_trajectory_free(NspTrajectory *traj);

/**
 * Dense-output state at `r`.
 *
 * # Safety
 * `traj` must be a live handle or null; `out` null or valid.
 */
NspStatus nsp_trajectory_eval(const NspTrajectory *traj, double r, NspState *out);

/**
 * First and last radius covered.
 *
 * # Safety
 * As [`nsp_trajectory_eval`].
 */
NspStatus nsp_trajectory_span(const NspTrajectory *traj, double *r_start, double *r_end);

/**
 * Why the integration stopped and where. `radius` is `r_max` when it was reached.
 *
 * # Safety
 * As [`nsp_trajectory_eval`].
 */
NspStatus nsp_trajectory_termination(const NspTrajectory *traj,
                                     NspTermination *kind,
                                     double *radius);

/**
 * Number of accepted steps.
 *
 * # Safety
 * As [`nsp_trajectory_eval`].
 */
NspStatus nsp_trajectory_step_count(const NspTrajectory *traj, uint64_t *out);

/**
 * Sign classification of the terminal velocity.
 *
 * # Safety
 * As [`nsp_trajectory_eval`].
 */
NspStatus nsp_classify(const NspTrajectory *traj, double dead_band, NspClassification *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHRINKERS_H */
