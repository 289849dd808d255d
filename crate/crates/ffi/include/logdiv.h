#ifndef LOGDIV_H
#define LOGDIV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Status code returned by every fallible call.
 */
typedef enum LogdivStatus {
  LOGDIV_STATUS_OK = 0,
  LOGDIV_STATUS_NULL_POINTER = 1,
  LOGDIV_STATUS_INVALID_ARGUMENT = 2,
  LOGDIV_STATUS_DIMENSION_MISMATCH = 3,
  LOGDIV_STATUS_NOT_SPD = 4,
  LOGDIV_STATUS_NON_CONVEX_POTENTIAL = 5,
  LOGDIV_STATUS_DOMAIN_ERROR = 6,
  LOGDIV_STATUS_INTEGRAL_DIVERGED = 7,
  LOGDIV_STATUS_NEGATIVE_FACTOR = 8,
  LOGDIV_STATUS_SINGULAR_HESSIAN = 9,
  LOGDIV_STATUS_OPTIMIZATION_FAILED = 10,
  LOGDIV_STATUS_GATE_VIOLATION = 11,
  LOGDIV_STATUS_CONFIG = 12,
  LOGDIV_STATUS_PANIC = 13,
} LogdivStatus;

/**
 * Generator families.
 */
typedef enum LogdivGeneratorKind {
  /**
   * `t^λ`, using the `lambda` field.
   */
  LOGDIV_GENERATOR_KIND_POWER = 0,
  /**
   * `log t`
   */
  LOGDIV_GENERATOR_KIND_LOG = 1,
  /**
   * `max(log t, 0)`
   */
  LOGDIV_GENERATOR_KIND_LOG_PLUS = 2,
  /**
   * `|t − 1|`
   */
  LOGDIV_GENERATOR_KIND_ABS_MINUS_ONE = 3,
  /**
   * `−t·log t`
   */
  LOGDIV_GENERATOR_KIND_NEG_T_LOG = 4,
  /**
   * `t·max(−log t, 0)`
   */
  LOGDIV_GENERATOR_KIND_NEG_T_LOG_PLUS = 5,
} LogdivGeneratorKind;

/**
 * Opaque handle to a log-concave function `c·e^{-ψ}`.
 */
typedef struct LogdivFunction LogdivFunction;

/**
 * A generator; `lambda` is read only for [`LogdivGeneratorKind::Power`].
 */
typedef struct LogdivGenerator {
  enum LogdivGeneratorKind kind;
  double lambda;
} LogdivGenerator;

/**
 * Value of an integral with its error estimate.
 */
typedef struct LogdivIntegral {
  double value;
  double error;
  size_t evaluations;
} LogdivIntegral;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failed call on this thread, or NULL after a
 * successful call. The pointer stays valid until the next call on this thread.
 */
const char *logdiv_last_error(void);

/**
 * Creates `c·e^{-⟨Ax,x⟩/2}`; `a` is a row-major symmetric positive definite `d×d` matrix.
 *
 * # Safety
 * `a` must point to `d·d` doubles and `out` must be writable.
 */
enum LogdivStatus logdiv_gaussian_new(double c,
                                      const double *a,
                                      size_t d,
                                      struct LogdivFunction **out);

/**
 * Creates `c·e^{-Σⱼ(cosh xⱼ − 1)}` in dimension `d`.
 *
 * # Safety
 * `out` must be writable.
 */
enum LogdivStatus logdiv_cosh_new(double c, size_t d, struct LogdivFunction **out);

/**
 * Creates `c·e^{-(|x|²/2 + |x|⁴/4)}` in dimension `d`.
 *
 * # Safety
 * `out` must be writable.
 */
enum LogdivStatus logdiv_quartic_new(double c, size_t d, struct LogdivFunction **out);

/**
 * Creates `x ↦ φ(Tx)` for an invertible row-major `d×d` matrix `t`.
 *
 * # Safety
 * `f` must be a live handle, `t` must point to `d·d` doubles with `d` the
 * dimension of `f`, and `out` must be writable.
 */
enum LogdivStatus logdiv_function_compose(const struct LogdivFunction *f,
                                          const double *t,
                                          struct LogdivFunction **out);

/**
 * Creates the dual function `φ° = e^{-ψ*}`.
 *
 * # Safety
 * `f` must be a live handle and `out` writable.
 */
enum LogdivStatus logdiv_function_dual(const struct LogdivFunction *f, struct LogdivFunction **out);

/**
 * Releases a handle. Passing NULL is a no-op.
 *
 * # Safety
 * `f` must be NULL or a handle not yet freed.
 */
void logdiv_function_free(struct LogdivFunction *f);

/**
 * Dimension of the function, or 0 for NULL.
 *
 * # Safety
 * `f` must be NULL or a live handle.
 */
size_t logdiv_function_dim(const struct LogdivFunction *f);

/**
 * Evaluates `φ(x)`.
 *
 * # Safety
 * `f` must be a live handle, `x` must point to `len` doubles, `out` writable.
 */
enum LogdivStatus logdiv_function_value(const struct LogdivFunction *f,
                                        const double *x,
                                        size_t len,
                                        double *out);

/**
 * Legendre transform `ψ*(y)` of the potential. When `maximizer` is not NULL
 * it receives the `len` coordinates of the maximizing `x`.
 *
 * # Safety
 * `f` must be a live handle, `y` must point to `len` doubles, `value` must be
 * writable and `maximizer` NULL or writable for `len` doubles.
 */
enum LogdivStatus logdiv_legendre(const struct LogdivFunction *f,
                                  const double *y,
                                  size_t len,
                                  double *value,
                                  double *maximizer);

/**
 * Mixed f-divergence of `n` functions with `n` generators, using the
 * default quadrature for the dimension.
 *
 * # Safety
 * `functions` must point to `n` live handles, `generators` to `n` entries,
 * and `out` must be writable.
 */
enum LogdivStatus logdiv_mixed(const struct LogdivFunction *const *functions,
                               const struct LogdivGenerator *generators,
                               size_t n,
                               struct LogdivIntegral *out);

/**
 * Classical f-divergence of one function.
 *
 * # Safety
 * `f` must be a live handle and `out` writable.
 */
enum LogdivStatus logdiv_classical(const struct LogdivFunction *f,
                                   struct LogdivGenerator generator,
                                   struct LogdivIntegral *out);

/**
 * Mixed Kullback–Leibler divergence (positive-part clamp) of `n` functions.
 *
 * # Safety
 * `functions` must point to `n` live handles and `out` must be writable.
 */
enum LogdivStatus logdiv_mixed_kl(const struct LogdivFunction *const *functions,
                                  size_t n,
                                  struct LogdivIntegral *out);

/**
 * Mixed L_λ affine surface area. `lambda` may be `±INFINITY`, in which case
 * the value is the extremal limit and `error` and `evaluations` are zero.
 *
 * # Safety
 * `functions` must point to `n` live handles and `out` must be writable.
 */
enum LogdivStatus logdiv_surface_area(const struct LogdivFunction *const *functions,
                                      size_t n,
                                      double lambda,
                                      struct LogdivIntegral *out);

/**
 * The Ω invariant of `n` functions.
 *
 * # Safety
 * `functions` must point to `n` live handles and `out` must be writable.
 */
enum LogdivStatus logdiv_omega(const struct LogdivFunction *const *functions,
                               size_t n,
                               double *out);

/**
 * Runs the inequality suite. `config_json` is a suite configuration
 * (`{}` selects the defaults). On success `*reports` receives the reports as
 * JSON lines, to be released with [`logdiv_string_free`], and `*exit_code`
 * the verdict summary: 0 all hold, 2 a violation, 3 inconclusive results.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `reports` and `exit_code`
 * must be writable.
 */
enum LogdivStatus logdiv_run_suite(const char *config_json,
                                   uint64_t seed,
                                   char **reports,
                                   int32_t *exit_code);

/**
 * Releases a string returned by this library. Passing NULL is a no-op.
 *
 * # Safety
 * `s` must be NULL or a string returned by this library and not yet freed.
 */
void logdiv_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOGDIV_H */
