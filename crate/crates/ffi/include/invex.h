#ifndef INVEX_H
#define INVEX_H

#include <stdbool.h>
#include <stddef.h>

typedef enum InvexOutcome {
  INVEX_OUTCOME_KERNEL = 0,
  INVEX_OUTCOME_CERTIFICATE = 1,
} InvexOutcome;

typedef enum InvexPairKind {
  INVEX_PAIR_KIND_INVEX = 0,
  INVEX_PAIR_KIND_STRICT_INVEX = 1,
  INVEX_PAIR_KIND_KT_INVEX = 2,
  INVEX_PAIR_KIND_STRICT_KT_INVEX = 3,
} InvexPairKind;

/**
 * Result codes shared by every fallible function.
 */
typedef enum InvexStatus {
  INVEX_STATUS_OK = 0,
  INVEX_STATUS_NULL_POINTER = 1,
  INVEX_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed problem, bad dimensions, point outside the box, infeasible
   * or degenerate pair, unknown fixture.
   */
  INVEX_STATUS_INVALID_INPUT = 3,
  /**
   * The LP layer could not reach a trustworthy answer.
   */
  INVEX_STATUS_NUMERICAL = 4,
  /**
   * A Rust panic was caught at the boundary.
   */
  INVEX_STATUS_INTERNAL = 5,
} InvexStatus;

/**
 * Opaque problem handle.
 */
typedef struct InvexProblem InvexProblem;

/**
 * Scalar part of a pair verdict. Vectors are copied into caller buffers.
 */
typedef struct InvexPairSummary {
  enum InvexOutcome outcome;
  /**
   * Minimum slack of the kernel; 0 for certificates.
   */
  double margin;
  /**
   * `lambda . (f(x) - f(xbar))` of the certificate; 0 for kernels.
   */
  double violation;
} InvexPairSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *invex_version(void);

/**
 * Message of the most recent failure on this thread, or null. Valid until
 * the next failing call on the same thread.
 */
const char *invex_last_error_message(void);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum InvexStatus invex_problem_from_json(const char *json, struct InvexProblem **out);

/**
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum InvexStatus invex_problem_from_fixture(const char *name, struct InvexProblem **out);

/**
 * # Safety
 * `problem` must be null or a handle not yet freed.
 */
void invex_problem_free(struct InvexProblem *problem);

/**
 * Writes the number of variables, objectives and constraints. Any output
 * pointer may be null.
 *
 * # Safety
 * `problem` must be a live handle; non-null outputs must be writable.
 */
enum InvexStatus invex_problem_dims(const struct InvexProblem *problem,
                                    size_t *variables,
                                    size_t *objectives,
                                    size_t *constraints);

/**
 * Evaluates objectives and constraints at `x`. `f_out` and `g_out` may be
 * null; otherwise they must hold `f_cap` and `g_cap` values.
 *
 * # Safety
 * `x` must point to `n` doubles; buffers must match their capacities.
 */
enum InvexStatus invex_evaluate(const struct InvexProblem *problem,
                                const double *x,
                                size_t n,
                                double *f_out,
                                size_t f_cap,
                                double *g_out,
                                size_t g_cap,
                                bool *feasible);

/**
 * Certifies one pair. For a kernel, `eta` (capacity `eta_cap`) receives the
 * direction; for a certificate, `lambda` (capacity `lambda_cap`) receives
 * the objective multipliers. Either buffer may be null.
 *
 * # Safety
 * `xbar` and `x` must point to `n` doubles; buffers must match capacities.
 */
enum InvexStatus invex_certify_pair(const struct InvexProblem *problem,
                                    enum InvexPairKind kind,
                                    const double *xbar,
                                    const double *x,
                                    size_t n,
                                    double *eta,
                                    size_t eta_cap,
                                    double *lambda,
                                    size_t lambda_cap,
                                    struct InvexPairSummary *summary);

/**
 * Same as `invex_certify_pair`, returning the full verdict as JSON.
 *
 * # Safety
 * As for `invex_certify_pair`; `out` must be writable.
 */
enum InvexStatus invex_certify_pair_json(const struct InvexProblem *problem,
                                         enum InvexPairKind kind,
                                         const double *xbar,
                                         const double *x,
                                         size_t n,
                                         char **out);

/**
 * Gordan alternative for the row-major `rows x cols` matrix `a`.
 *
 * # Safety
 * `a` must point to `rows * cols` doubles; `out` must be writable.
 */
enum InvexStatus invex_gordan_json(const double *a, size_t rows, size_t cols, char **out);

/**
 * Motzkin alternative for row-major `a` (`a_rows x cols`) and `b`
 * (`b_rows x cols`). `b` may be null when `b_rows` is 0.
 *
 * # Safety
 * Matrices must hold the stated number of doubles; `out` must be writable.
 */
enum InvexStatus invex_motzkin_json(const double *a,
                                    size_t a_rows,
                                    const double *b,
                                    size_t b_rows,
                                    size_t cols,
                                    char **out);

/**
 * Full analysis report with default settings, as stable JSON.
 *
 * # Safety
 * `problem` must be a live handle; `out` must be writable.
 */
enum InvexStatus invex_analyze_json(const struct InvexProblem *problem, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void invex_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INVEX_H */
