#ifndef SGDLAB_H
#define SGDLAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SgdBoundMetric {
  SGD_BOUND_METRIC_MEAN_SQUARED_GRAD_NORM = 0,
  SGD_BOUND_METRIC_MEAN_GRAD_NORM = 1,
  SGD_BOUND_METRIC_MIN_GRAD_NORM = 2,
  SGD_BOUND_METRIC_GRAD_NORM_AT = 3,
} SgdBoundMetric;

typedef enum SgdStatus {
  SGD_STATUS_OK = 0,
  SGD_STATUS_NULL_POINTER = 1,
  SGD_STATUS_INVALID_UTF8 = 2,
  SGD_STATUS_OVERFLOW = 3,
  SGD_STATUS_DIMENSION = 4,
  SGD_STATUS_PRECONDITION = 5,
  SGD_STATUS_CONTRACT = 6,
  SGD_STATUS_DOMAIN = 7,
  SGD_STATUS_DEGENERATE = 8,
  SGD_STATUS_INDEX = 9,
  SGD_STATUS_KIND_MISMATCH = 10,
  SGD_STATUS_CONFIG = 11,
  SGD_STATUS_IO = 12,
  /**
   * The call failed its checks (for example a verdict or certification).
   */
  SGD_STATUS_FAILED = 13,
  SGD_STATUS_PANIC = 14,
} SgdStatus;

/**
 * A problem instance together with the gradient oracle it ships with
 * (exact unless the builder supplies noise).
 */
typedef struct SgdInstance SgdInstance;

typedef struct SgdTrajectory SgdTrajectory;

typedef struct SgdHardReport {
  uint64_t t0;
  double x_t0;
  double x_t0_plus1;
  double delta_tilde;
  double valley_scale;
  bool sign_flipped;
  bool used_double_double;
} SgdHardReport;

typedef struct SgdRecord {
  uint64_t t;
  double f_value;
  double grad_norm;
  double stoch_grad_norm;
  double effective_stepsize;
  double x1;
} SgdRecord;

/**
 * Bound parameters; NaN marks a parameter as absent.
 */
typedef struct SgdBoundRequest {
  double eta;
  double gamma;
  double l;
  double sigma;
  double delta;
  double v0;
  double g;
  double zeta;
  double beta2;
  double alpha;
  double horizon;
} SgdBoundRequest;

typedef struct SgdRateFit {
  double exponent;
  double log_intercept;
  double r_squared;
  double window_start;
  double window_end;
} SgdRateFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *sgdlab_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sgdlab_version(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library and not yet freed.
 */
void sgdlab_string_free(char *s);

/**
 * `f(x) = l‖x‖²/2` in `dimension` coordinates with gap `delta`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SgdStatus sgdlab_quadratic_new(double l,
                                    double delta,
                                    size_t dimension,
                                    struct SgdInstance **out);

/**
 * The piecewise-quadratic hard instance for untuned SGD. `report` may be NULL.
 *
 * # Safety
 * `out` must be valid; `report` must be NULL or valid.
 */
enum SgdStatus sgdlab_sgd_hard_new(double l,
                                   double delta,
                                   double eta,
                                   uint64_t horizon,
                                   struct SgdInstance **out,
                                   struct SgdHardReport *report);

/**
 * Momentum lower-bound quadratic for stepsize caps `eta/(t+1)^alpha`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SgdStatus sgdlab_momentum_lb_new(double l,
                                      double delta,
                                      double cap_eta,
                                      double cap_alpha,
                                      uint64_t horizon,
                                      struct SgdInstance **out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum SgdStatus sgdlab_amsgrad_oscillator_new(double v0,
                                             double gamma,
                                             double l,
                                             double delta,
                                             struct SgdInstance **out);

/**
 * NSGD nonconvergence instance; carries its sign-multiplicative oracle.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SgdStatus sgdlab_nsgd_noncvg_new(double l,
                                      double sigma,
                                      double epsilon,
                                      double delta,
                                      double gamma_max,
                                      struct SgdInstance **out);

/**
 * Heavy-tailed slow-AMSGrad instance; carries its Fréchet oracle.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SgdStatus sgdlab_amsgrad_slow_new(double l,
                                       double delta,
                                       double sigma,
                                       double zeta,
                                       double gamma,
                                       double beta2,
                                       uint64_t horizon,
                                       struct SgdInstance **out);

/**
 * Rebuild an instance from the JSON written by [`sgdlab_instance_to_json`].
 * The oracle is exact.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be valid.
 */
enum SgdStatus sgdlab_instance_from_json(const char *json, struct SgdInstance **out);

/**
 * # Safety
 * `h` must be a valid instance; `out` must be valid.
 */
enum SgdStatus sgdlab_instance_to_json(const struct SgdInstance *h, char **out);

/**
 * # Safety
 * `h` must be NULL or a handle from this library not yet freed.
 */
void sgdlab_instance_free(struct SgdInstance *h);

/**
 * Dimension of the instance, or 0 for NULL.
 *
 * # Safety
 * `h` must be NULL or a valid instance.
 */
size_t sgdlab_instance_dimension(const struct SgdInstance *h);

/**
 * Write the initial point into `x0[0..dimension]`.
 *
 * # Safety
 * `h` must be valid; `x0` must hold `dimension` doubles.
 */
enum SgdStatus sgdlab_instance_initial_point(const struct SgdInstance *h, double *x0, size_t len);

/**
 * Objective value and gradient at `x`. `grad` may be NULL.
 *
 * # Safety
 * `x` (and `grad`, when non-NULL) must hold `len` doubles; `value` must be valid.
 */
enum SgdStatus sgdlab_instance_evaluate(const struct SgdInstance *h,
                                        const double *x,
                                        size_t len,
                                        double *value,
                                        double *grad);

/**
 * Smoothness constant the instance is certified for.
 *
 * # Safety
 * `h` must be NULL or a valid instance.
 */
double sgdlab_instance_smoothness(const struct SgdInstance *h);

/**
 * Largest observed gradient-Lipschitz ratio over `n_probes` random pairs
 * (plus straddles at piece boundaries) drawn from stream `(seed, 0)`.
 *
 * # Safety
 * `h` and `ratio` must be valid.
 */
enum SgdStatus sgdlab_instance_verify_smoothness(const struct SgdInstance *h,
                                                 size_t n_probes,
                                                 uint64_t seed,
                                                 double *ratio);

/**
 * Run an optimizer on an instance. `optimizer_json` is an optimizer spec
 * such as `{"kind": "sgd", "eta": 1.0, "alpha": 0.5}`; `noise_json` is a
 * noise spec or NULL to use the instance's own oracle. When
 * `allow_overflow` is set, a run that leaves the representable range is
 * truncated instead of failing.
 *
 * # Safety
 * `h` and `out` must be valid; the strings must be NULL-terminated or NULL
 * where allowed.
 */
enum SgdStatus sgdlab_run(const struct SgdInstance *h,
                          const char *optimizer_json,
                          const char *noise_json,
                          uint64_t horizon,
                          uint64_t seed,
                          bool allow_overflow,
                          struct SgdTrajectory **out);

/**
 * # Safety
 * `h` must be NULL or a handle from this library not yet freed.
 */
void sgdlab_trajectory_free(struct SgdTrajectory *h);

/**
 * Number of records, or 0 for NULL.
 *
 * # Safety
 * `h` must be NULL or a valid trajectory.
 */
size_t sgdlab_trajectory_len(const struct SgdTrajectory *h);

/**
 * Iteration at which the run overflowed, or -1 if it completed.
 *
 * # Safety
 * `h` must be NULL or a valid trajectory.
 */
int64_t sgdlab_trajectory_overflow_at(const struct SgdTrajectory *h);

/**
 * Copy up to `cap` records into `records`; `written` receives the count.
 *
 * # Safety
 * `h` and `written` must be valid; `records` must hold `cap` entries.
 */
enum SgdStatus sgdlab_trajectory_records(const struct SgdTrajectory *h,
                                         struct SgdRecord *records,
                                         size_t cap,
                                         size_t *written);

/**
 * A request with every parameter absent and horizon `horizon`.
 */
struct SgdBoundRequest sgdlab_bound_request_new(double horizon);

/**
 * SGD upper bound on the mean squared gradient norm; `appendix` selects
 * the general form, otherwise the `alpha = 1/2` form.
 *
 * # Safety
 * `req` and `value` must be valid.
 */
enum SgdStatus sgdlab_sgd_upper_bound(const struct SgdBoundRequest *req,
                                      bool appendix,
                                      double *value);

/**
 * # Safety
 * `req` and `value` must be valid.
 */
enum SgdStatus sgdlab_sgd_bounded_grad_bound(const struct SgdBoundRequest *req, double *value);

/**
 * # Safety
 * `req` and `value` must be valid.
 */
enum SgdStatus sgdlab_nsgd_upper_bound(const struct SgdBoundRequest *req, double *value);

/**
 * # Safety
 * `req` and `value` must be valid.
 */
enum SgdStatus sgdlab_amsgrad_det_lower(const struct SgdBoundRequest *req, double *value);

/**
 * # Safety
 * `req` and `value` must be valid.
 */
enum SgdStatus sgdlab_amsgrad_stoch_lower(const struct SgdBoundRequest *req, double *value);

/**
 * # Safety
 * `req` and `value` must be valid.
 */
enum SgdStatus sgdlab_nsgdm_rate_template(const struct SgdBoundRequest *req, double *value);

/**
 * # Safety
 * `req` and `value` must be valid.
 */
enum SgdStatus sgdlab_adagrad_rate_template(const struct SgdBoundRequest *req, double *value);

/**
 * Deterministic AMSGrad upper bound; `metric` says which mean it controls.
 *
 * # Safety
 * All pointers must be valid.
 */
enum SgdStatus sgdlab_amsgrad_det_upper_bound(const struct SgdBoundRequest *req,
                                              double *value,
                                              enum SgdBoundMetric *metric);

/**
 * # Safety
 * `value` must be valid.
 */
enum SgdStatus sgdlab_nsgd_noncvg_threshold(double l,
                                            double delta,
                                            double sigma,
                                            double gamma_max,
                                            double *value);

/**
 * Gradient-norm lower curve of untuned SGD on the hard instance at `t`.
 *
 * # Safety
 * `value` must be valid.
 */
enum SgdStatus sgdlab_sgd_lower_curve(double eta,
                                      double l,
                                      double delta,
                                      uint64_t t,
                                      uint64_t t0,
                                      uint64_t horizon,
                                      double *value);

/**
 * # Safety
 * `tau` must be valid.
 */
enum SgdStatus sgdlab_tau_sgd(double eta, double l, double alpha, uint64_t *tau);

/**
 * Blow-up horizon of the hard instance.
 */
uint64_t sgdlab_hard_instance_t0(double eta, double l);

/**
 * # Safety
 * `value` must be valid.
 */
enum SgdStatus sgdlab_gamma(double x, double *value);

/**
 * Log-log least squares over the trailing `window_fraction` of `(t, y)`.
 *
 * # Safety
 * `t` and `y` must hold `len` doubles; `fit` must be valid.
 */
enum SgdStatus sgdlab_fit_power_law(const double *t,
                                    const double *y,
                                    size_t len,
                                    double window_fraction,
                                    struct SgdRateFit *fit);

/**
 * Run an experiment config (JSON) and return its summary JSON. `workers`
 * of 0 uses the available parallelism. `out_dir` may be NULL; otherwise
 * the CSV and summary files are written there too. Returns `Failed` when
 * any verdict fails; the summary is still produced.
 *
 * # Safety
 * `config_json` must be NUL-terminated; `out_dir` NULL or NUL-terminated;
 * `summary` valid.
 */
enum SgdStatus sgdlab_run_config(const char *config_json,
                                 uint32_t workers,
                                 const char *out_dir,
                                 char **summary);

/**
 * Run a named reproduction and return its summary JSON; see
 * [`sgdlab_run_config`] for the remaining arguments.
 *
 * # Safety
 * As for [`sgdlab_run_config`].
 */
enum SgdStatus sgdlab_run_reproduction(const char *name,
                                       uint32_t workers,
                                       const char *out_dir,
                                       char **summary);

/**
 * Newline-separated names of the catalog reproductions.
 *
 * # Safety
 * `out` must be valid.
 */
enum SgdStatus sgdlab_list_reproductions(char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SGDLAB_H */
