/* C interface to the sbs side-by-side bidding solver. */

#ifndef SBS_H
#define SBS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of a call crossing the C boundary.
 */
typedef enum SbsStatus {
  SbsStatus_Ok = 0,
  SbsStatus_NullPointer = 1,
  SbsStatus_InvalidUtf8 = 2,
  SbsStatus_InvalidConfig = 3,
  SbsStatus_SolverFailure = 4,
  SbsStatus_InvalidArgument = 5,
} SbsStatus;

/**
 * Opaque validated market handle.
 */
typedef struct SbsMarket SbsMarket;

/**
 * Equilibrium of the sequential best-response dynamics.
 */
typedef struct SbsEquilibrium {
  double b1;
  double b2;
  double foc1;
  double foc2;
  uint64_t iterations;
  bool converged;
} SbsEquilibrium;

/**
 * Flattened Monte Carlo summary; `*_err` fields are standard errors.
 */
typedef struct SbsSimStats {
  uint64_t n;
  uint64_t seed;
  double win_rate_1;
  double win_rate_2;
  double buyer_win_rate;
  double mean_payoff_1;
  double mean_payoff_1_err;
  double mean_payoff_2;
  double mean_payoff_2_err;
  double mean_buyer_cost;
  double mean_buyer_cost_err;
  double mean_overpayment;
  double mean_overpayment_err;
} SbsSimStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the message of the most recent failure on this thread into
 * `buf` (NUL terminated, truncated to `len` bytes) and returns the full
 * message length in bytes excluding the terminator. With a null `buf` or
 * zero `len`, only the length is reported.
 *
 * # Safety
 *
 * `buf`, when non-null, must point to `len` writable bytes.
 */
uintptr_t sbs_last_error_message(char *buf, uintptr_t len);

/**
 * Returns the library version as a static NUL-terminated string.
 */
const char *sbs_version(void);

/**
 * Parses and validates a JSON market configuration (the CLI schema) and
 * writes an owned handle to `out`. The handle must be released with
 * [`sbs_market_free`].
 *
 * # Safety
 *
 * `json` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum SbsStatus sbs_market_from_json(const char *json, struct SbsMarket **out);

/**
 * Releases a market handle. A null handle is ignored.
 *
 * # Safety
 *
 * `market` must be a handle from [`sbs_market_from_json`] not yet freed.
 */
void sbs_market_free(struct SbsMarket *market);

/**
 * Computes bidder `bidder` (1 or 2)'s best response to the twin bidding
 * `b_opp` and writes it to `out`.
 *
 * # Safety
 *
 * `market` must be a live handle and `out` a valid pointer.
 */
enum SbsStatus sbs_best_response(const struct SbsMarket *market,
                                 uint32_t bidder,
                                 double b_opp,
                                 double *out);

/**
 * Runs the sequential best-response dynamics from seed bid `b2_start` and
 * writes the limit pair, its FOC residuals (NaN at a support boundary),
 * and the round count to `out`. `converged` is false when the run ended
 * on the iteration cap instead of the tolerance.
 *
 * # Safety
 *
 * `market` must be a live handle and `out` a valid pointer.
 */
enum SbsStatus sbs_equilibrium(const struct SbsMarket *market,
                               double b2_start,
                               double tol,
                               uint64_t max_iter,
                               struct SbsEquilibrium *out);

/**
 * Runs the uniqueness probe over `starts` (at least two seed bids) and
 * writes the maximum pairwise spread of the limits to `out`.
 *
 * # Safety
 *
 * `market` must be a live handle, `starts` must point to `n_starts`
 * doubles, and `out` must be a valid pointer.
 */
enum SbsStatus sbs_uniqueness_spread(const struct SbsMarket *market,
                                     const double *starts,
                                     uintptr_t n_starts,
                                     double tol,
                                     uint64_t max_iter,
                                     double *out);

/**
 * Writes the endpoints of the counterexample's equilibrium continuum for
 * buyer value `v` (the interval `[v/2, 2v/3]`, detected by grid scan).
 *
 * # Safety
 *
 * `lo` and `hi` must be valid pointers.
 */
enum SbsStatus sbs_counterexample_interval(double v, double *lo, double *hi);

/**
 * Simulates `n` noisy auctions at planned bids `(b1, b2)` and writes the
 * summary statistics to `out`. Results are bit-identical for a given
 * `(market, bids, n, seed)` regardless of `shards`.
 *
 * # Safety
 *
 * `market` must be a live handle and `out` a valid pointer.
 */
enum SbsStatus sbs_simulate(const struct SbsMarket *market,
                            double b1,
                            double b2,
                            uint64_t n,
                            uint64_t seed,
                            uint32_t shards,
                            struct SbsSimStats *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SBS_H */
