#ifndef ROUNDTAX_H
#define ROUNDTAX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RtSense {
  RT_SENSE_MAX = 0,
  RT_SENSE_MIN = 1,
} RtSense;

typedef enum RtStatus {
  RT_STATUS_OK = 0,
  /**
   * A required pointer was null or a string was not UTF-8.
   */
  RT_STATUS_NULL_OR_ENCODING = 1,
  /**
   * Bad input data, file or argument.
   */
  RT_STATUS_INPUT = 2,
  RT_STATUS_INFEASIBLE = 3,
  RT_STATUS_INTERNAL = 4,
  /**
   * An index or store name did not refer to an existing entry.
   */
  RT_STATUS_NOT_FOUND = 5,
} RtStatus;

typedef enum RtWeights {
  RT_WEIGHTS_REVENUE = 0,
  RT_WEIGHTS_TRANSACTIONS = 1,
} RtWeights;

/**
 * Store types with per-transaction taxes, built up one store at a time.
 */
typedef struct RtMarket RtMarket;

/**
 * A validated set of store profiles.
 */
typedef struct RtProfileSet RtProfileSet;

/**
 * A parsed rounding rule.
 */
typedef struct RtRule RtRule;

typedef struct RtSimulationResult {
  double mean_tax;
  double std_error;
  uint64_t n;
} RtSimulationResult;

typedef struct RtDerivedMetrics {
  double per_capita_nis;
  double per_capita_cents;
  double share_of_revenue;
} RtDerivedMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next `rt_*` call on the same thread.
 */
const char *rt_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rt_version(void);

/**
 * Parses `israel_2008`, `symmetric_<grid>` or `grid=..; down=..; up=..`.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RtStatus rt_rule_parse(const char *text, struct RtRule **out);

/**
 * # Safety
 * `rule` must be null or a handle from [`rt_rule_parse`] not yet freed.
 */
void rt_rule_free(struct RtRule *rule);

/**
 * Grid size in minor units, or 0 for a null handle.
 *
 * # Safety
 * `rule` must be null or a live handle.
 */
uint32_t rt_rule_grid(const struct RtRule *rule);

/**
 * Rounds a non-negative amount in minor units.
 *
 * # Safety
 * `rule` must be a live handle and `out` a valid pointer.
 */
enum RtStatus rt_round_amount(const struct RtRule *rule, int64_t amount, int64_t *out);

/**
 * Signed rounding delta in minor units (positive: customer pays more).
 *
 * # Safety
 * `rule` must be a live handle and `out` a valid pointer.
 */
enum RtStatus rt_rounding_delta(const struct RtRule *rule, int64_t amount, int64_t *out);

/**
 * Loads `endings.csv`, `baskets.csv` and `profiles.csv` from `dir`.
 *
 * # Safety
 * `dir` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RtStatus rt_profiles_load_dir(const char *dir,
                                   double share_tolerance,
                                   struct RtProfileSet **out);

/**
 * Loads profiles from in-memory CSV contents of the three files.
 *
 * # Safety
 * The three strings must be NUL-terminated and `out` a valid pointer.
 */
enum RtStatus rt_profiles_load_csv(const char *endings,
                                   const char *baskets,
                                   const char *profiles,
                                   double share_tolerance,
                                   struct RtProfileSet **out);

/**
 * # Safety
 * `set` must be null or a live handle.
 */
void rt_profiles_free(struct RtProfileSet *set);

/**
 * # Safety
 * `set` must be null or a live handle.
 */
size_t rt_profiles_len(const struct RtProfileSet *set);

/**
 * Store name at `index`, or null when out of range. Owned by the set.
 *
 * # Safety
 * `set` must be null or a live handle.
 */
const char *rt_profiles_name(const struct RtProfileSet *set, size_t index);

/**
 * Exact expected tax per cash transaction, NIS.
 *
 * # Safety
 * `set` and `rule` must be live handles and `out` a valid pointer.
 */
enum RtStatus rt_expected_tax(const struct RtProfileSet *set,
                              size_t index,
                              const struct RtRule *rule,
                              double *out);

/**
 * Monte Carlo estimate for one store type. Deterministic in `seed`.
 *
 * # Safety
 * `set` and `rule` must be live handles and `out` a valid pointer.
 */
enum RtStatus rt_simulate(const struct RtProfileSet *set,
                          size_t index,
                          const struct RtRule *rule,
                          uint64_t n_transactions,
                          uint64_t seed,
                          struct RtSimulationResult *out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum RtStatus rt_market_new(double total_revenue, struct RtMarket **out);

/**
 * # Safety
 * `market` must be null or a live handle.
 */
void rt_market_free(struct RtMarket *market);

/**
 * Appends a store type. Stores keep insertion order in every array argument.
 *
 * # Safety
 * `market` must be a live handle and `name` a NUL-terminated string.
 */
enum RtStatus rt_market_add_store(struct RtMarket *market,
                                  const char *name,
                                  double revenue_share,
                                  double annual_transactions_thousands,
                                  double tax_per_transaction);

/**
 * # Safety
 * `market` must be null or a live handle.
 */
size_t rt_market_len(const struct RtMarket *market);

/**
 * Annual totals for explicit cash shares (`shares[i]` for store `i`).
 * `per_store_out` may be null; otherwise it receives `len` values.
 *
 * # Safety
 * `shares` must point to `len` doubles, `per_store_out` must be null or
 * point to `len` writable doubles, and `total_out` must be valid.
 */
enum RtStatus rt_market_aggregate(const struct RtMarket *market,
                                  const double *shares,
                                  size_t len,
                                  double *per_store_out,
                                  double *total_out);

/**
 * Cash shares that maximize or minimize the annual total with the weighted
 * mean share fixed at `overall`. Writes `len` shares and the total.
 *
 * # Safety
 * `shares_out` must point to `len` writable doubles and `total_out` must
 * be valid.
 */
enum RtStatus rt_market_extremize(const struct RtMarket *market,
                                  double overall,
                                  enum RtSense sense,
                                  enum RtWeights weights,
                                  double *shares_out,
                                  size_t len,
                                  double *total_out);

/**
 * Per-capita and share-of-revenue figures for an annual total.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum RtStatus rt_derived_metrics(double total_tax,
                                 double population,
                                 double exchange_rate,
                                 double total_revenue,
                                 struct RtDerivedMetrics *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* ROUNDTAX_H */
