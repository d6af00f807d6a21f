#ifndef MEDIUM_H
#define MEDIUM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MediumStatus {
  MEDIUM_STATUS_OK = 0,
  MEDIUM_STATUS_NULL_POINTER = 1,
  MEDIUM_STATUS_INVALID_ARGUMENT = 2,
  MEDIUM_STATUS_INVALID_UTF8 = 3,
  MEDIUM_STATUS_CONFIG = 4,
  MEDIUM_STATUS_SIMULATION = 5,
  MEDIUM_STATUS_ANALYSIS = 6,
  MEDIUM_STATUS_IO = 7,
  MEDIUM_STATUS_BUFFER_TOO_SMALL = 8,
  MEDIUM_STATUS_PANIC = 9,
} MediumStatus;

/**
 * Weight coefficient handle.
 */
typedef struct MediumCoeff MediumCoeff;

/**
 * Result rows of one experiment run.
 */
typedef struct MediumResults MediumResults;

/**
 * Block tree handle.
 */
typedef struct MediumTree MediumTree;

typedef struct MediumParams {
  uint32_t n;
  uint32_t t;
  double p;
  uint32_t q;
  double epsilon;
  uint64_t lambda;
  double delta;
} MediumParams;

typedef struct MediumDerived {
  double alpha;
  double beta;
  double gamma;
  double gamma_u;
  double f;
  double g;
  double k;
  uint64_t k_terms;
  uint64_t k_threshold;
  uint64_t r;
  uint64_t r_hat;
  double u;
  uint64_t u_rounds;
  double tau_growth;
  bool throughput_ok;
} MediumDerived;

/**
 * One result row. The strings belong to the results handle.
 */
typedef struct MediumRow {
  const char *protocol;
  const char *metric;
  double var;
  uint64_t seed;
  double value;
} MediumRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call on the same thread.
 */
const char *medium_last_error(void);

/**
 * Parses `ghost`, `bitcoin`, `P^(1/k)`, `a/b` or an integer.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out` a valid pointer.
 */
enum MediumStatus medium_coeff_parse(const char *spec, struct MediumCoeff **out);

/**
 * Floating-point value of the coefficient (infinity for the longest-chain limit).
 *
 * # Safety
 * `coeff` must be null or a live handle.
 */
double medium_coeff_approx(const struct MediumCoeff *coeff);

/**
 * # Safety
 * `coeff` must be null or a handle from [`medium_coeff_parse`] not yet freed.
 */
void medium_coeff_free(struct MediumCoeff *coeff);

/**
 * Exact comparison of two weight polynomials given as per-level block
 * counts. Writes -1, 0 or 1 to `out`. Under the longest-chain limit the
 * deeper polynomial wins.
 *
 * # Safety
 * `a` and `b` must point to `a_len` and `b_len` values; `coeff` and `out`
 * must be valid.
 */
enum MediumStatus medium_compare_weight(const uint64_t *a,
                                        size_t a_len,
                                        const uint64_t *b,
                                        size_t b_len,
                                        const struct MediumCoeff *coeff,
                                        int32_t *out);

/**
 * New tree holding only genesis (id 0).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum MediumStatus medium_tree_new(struct MediumTree **out);

/**
 * # Safety
 * `tree` must be null or a handle from [`medium_tree_new`] not yet freed.
 */
void medium_tree_free(struct MediumTree *tree);

/**
 * Number of blocks including genesis, 0 for a null handle.
 *
 * # Safety
 * `tree` must be null or a live handle.
 */
size_t medium_tree_len(const struct MediumTree *tree);

/**
 * Appends an honest block mined by `party` below `parent`.
 *
 * # Safety
 * `tree` must be a live handle and `out_id` a valid pointer.
 */
enum MediumStatus medium_tree_extend(struct MediumTree *tree,
                                     uint64_t parent,
                                     uint32_t party,
                                     uint64_t *out_id);

/**
 * Writes the main chain, genesis first, into `buf`. `out_len` receives the
 * chain length; when it exceeds `cap` nothing is written and
 * `BufferTooSmall` is returned.
 *
 * # Safety
 * `tree` and `coeff` must be live handles, `buf` must hold `cap` values and
 * `out_len` must be valid.
 */
enum MediumStatus medium_tree_main_chain(const struct MediumTree *tree,
                                         const struct MediumCoeff *coeff,
                                         uint64_t *buf,
                                         size_t cap,
                                         size_t *out_len);

/**
 * Default configuration: n = 100, t = 20, p = 1e-3, q = 10, ε = 0.5, λ = 200.
 */
struct MediumParams medium_params_default(void);

/**
 * Closed-form quantities of a configuration under a finite coefficient.
 *
 * # Safety
 * `params`, `coeff` and `out` must be valid.
 */
enum MediumStatus medium_derive(const struct MediumParams *params,
                                const struct MediumCoeff *coeff,
                                struct MediumDerived *out);

/**
 * Runs the experiment described by `config` (`key = value` lines).
 * `kind` is the experiment used when the text does not name one:
 * `simulate`, `throughput`, `balance` or `params`.
 *
 * # Safety
 * `config` and `kind` must be NUL-terminated strings, `out` a valid pointer.
 */
enum MediumStatus medium_experiment_run(const char *config,
                                        const char *kind,
                                        struct MediumResults **out);

/**
 * # Safety
 * `results` must be null or a live handle.
 */
size_t medium_results_len(const struct MediumResults *results);

/**
 * # Safety
 * `results` must be a live handle and `out` a valid pointer.
 */
enum MediumStatus medium_results_row(const struct MediumResults *results,
                                     size_t index,
                                     struct MediumRow *out);

/**
 * Writes the rows as CSV to `path`.
 *
 * # Safety
 * `results` must be a live handle and `path` a NUL-terminated string.
 */
enum MediumStatus medium_results_write_csv(const struct MediumResults *results, const char *path);

/**
 * # Safety
 * `results` must be null or a handle from [`medium_experiment_run`] not yet freed.
 */
void medium_results_free(struct MediumResults *results);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MEDIUM_H */
