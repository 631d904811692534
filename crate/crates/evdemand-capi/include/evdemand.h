#ifndef EVDEMAND_H
#define EVDEMAND_H

/* Generated from the evdemand-capi sources; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible API call.
 */
typedef enum EvdStatus {
  EVD_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  EVD_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  EVD_STATUS_INVALID_UTF8 = 2,
  /**
   * The request contradicts the model or config contract.
   */
  EVD_STATUS_INVALID_ARGUMENT = 3,
  /**
   * A numerical routine could not reach its accuracy target.
   */
  EVD_STATUS_NUMERIC = 4,
  /**
   * The destination buffer cannot hold the result.
   */
  EVD_STATUS_BUFFER_TOO_SMALL = 5,
  /**
   * An internal invariant failed; the handle is still valid.
   */
  EVD_STATUS_PANIC = 6,
} EvdStatus;

/**
 * A daily demand profile (opaque).
 */
typedef struct EvdProfile EvdProfile;

/**
 * An experiment description (opaque).
 */
typedef struct EvdScenario EvdScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message of the current thread, or null when the most recent
 * call succeeded. The pointer stays valid until the next failing call on
 * this thread; do not free it.
 */
const char *evd_last_error_message(void);

/**
 * Builds one of the shipped presets by name (`fig9-uniform`,
 * `fig8-trunc-gauss`, `fig8-rician`, `fig8-exponential`).
 *
 * # Safety
 * `name` must be a valid NUL-terminated string; `out` must be writable.
 */
enum EvdStatus evd_scenario_preset(const char *name, struct EvdScenario **out);

/**
 * Parses a scenario from TOML text. `default_label` names the scenario
 * when the text does not; it may be null.
 *
 * # Safety
 * `toml_text` must be a valid NUL-terminated string; `default_label`
 * must be valid or null; `out` must be writable.
 */
enum EvdStatus evd_scenario_from_toml(const char *toml_text,
                                      const char *default_label,
                                      struct EvdScenario **out);

/**
 * Releases a scenario handle. Null is a no-op.
 *
 * # Safety
 * `handle` must come from this library and must not be used afterwards.
 */
void evd_scenario_free(struct EvdScenario *handle);

/**
 * Reads the scenario's RNG seed.
 *
 * # Safety
 * `handle` must be live; `out` must be writable.
 */
enum EvdStatus evd_scenario_seed(const struct EvdScenario *handle, uint64_t *out);

/**
 * Replaces the scenario's RNG seed.
 *
 * # Safety
 * `handle` must be a live, exclusively held scenario handle.
 */
enum EvdStatus evd_scenario_set_seed(struct EvdScenario *handle, uint64_t seed);

/**
 * Reads the scenario's fleet size.
 *
 * # Safety
 * `handle` must be live; `out` must be writable.
 */
enum EvdStatus evd_scenario_fleet_size(const struct EvdScenario *handle, uint64_t *out);

/**
 * Writes the scenario's result-relevant content hash.
 *
 * # Safety
 * `handle` must be live; `out` must be writable.
 */
enum EvdStatus evd_scenario_hash(const struct EvdScenario *handle, uint64_t *out);

/**
 * Returns the scenario's label as a heap string; release it with
 * [`evd_string_free`].
 *
 * # Safety
 * `handle` must be live; `out` must be writable.
 */
enum EvdStatus evd_scenario_label(const struct EvdScenario *handle, char **out);

/**
 * Computes the analytic per-vehicle expected profile.
 *
 * # Safety
 * `handle` must be live; `out` must be writable.
 */
enum EvdStatus evd_scenario_expected_profile(const struct EvdScenario *handle,
                                             struct EvdProfile **out);

/**
 * Runs the Monte Carlo simulation over the scenario's fleet.
 * `workers = 0` uses one thread per core; the result is identical for
 * every worker count.
 *
 * # Safety
 * `handle` must be live; `out` must be writable.
 */
enum EvdStatus evd_scenario_simulate(const struct EvdScenario *handle,
                                     size_t workers,
                                     struct EvdProfile **out);

/**
 * Releases a profile handle. Null is a no-op.
 *
 * # Safety
 * `handle` must come from this library and must not be used afterwards.
 */
void evd_profile_free(struct EvdProfile *handle);

/**
 * Number of bins in the profile's day grid.
 *
 * # Safety
 * `handle` must be live; `out` must be writable.
 */
enum EvdStatus evd_profile_bin_count(const struct EvdProfile *handle, size_t *out);

/**
 * Bin width in hours.
 *
 * # Safety
 * `handle` must be live; `out` must be writable.
 */
enum EvdStatus evd_profile_resolution_hours(const struct EvdProfile *handle, double *out);

/**
 * Energy of one day under the profile, kWh.
 *
 * # Safety
 * `handle` must be live; `out` must be writable.
 */
enum EvdStatus evd_profile_daily_energy_kwh(const struct EvdProfile *handle, double *out);

/**
 * Peak demand and the clock time (bin center, hours) where it occurs.
 * Either out-pointer may be null to skip that value.
 *
 * # Safety
 * `handle` must be live; non-null out-pointers must be writable.
 */
enum EvdStatus evd_profile_peak(const struct EvdProfile *handle,
                                double *peak_kw,
                                double *peak_time_h);

/**
 * Copies the per-bin expected demand (kW) into `buf`.
 *
 * # Safety
 * `handle` must be live; `buf` must point to at least `capacity` doubles.
 */
enum EvdStatus evd_profile_values(const struct EvdProfile *handle, double *buf, size_t capacity);

/**
 * Whether the profile carries a per-bin standard-error column (Monte
 * Carlo runs with at least two sessions do; analytic runs do not).
 *
 * # Safety
 * `handle` must be live; `out` must be writable.
 */
enum EvdStatus evd_profile_has_stderr(const struct EvdProfile *handle, bool *out);

/**
 * Copies the per-bin standard errors (kW) into `buf`. Fails with
 * `InvalidArgument` when the profile has none.
 *
 * # Safety
 * `handle` must be live; `buf` must point to at least `capacity` doubles.
 */
enum EvdStatus evd_profile_stderr(const struct EvdProfile *handle, double *buf, size_t capacity);

/**
 * Serializes the profile to CSV; release the string with
 * [`evd_string_free`].
 *
 * # Safety
 * `handle` must be live; `out` must be writable.
 */
enum EvdStatus evd_profile_to_csv(const struct EvdProfile *handle, char **out);

/**
 * Parses a profile from CSV text produced by [`evd_profile_to_csv`] (or
 * any file in the same schema).
 *
 * # Safety
 * `text` must be a valid NUL-terminated string; `out` must be writable.
 */
enum EvdStatus evd_profile_from_csv(const char *text, struct EvdProfile **out);

/**
 * Releases a string returned by this library. Null is a no-op.
 *
 * # Safety
 * `text` must come from this library and must not be used afterwards.
 */
void evd_string_free(char *text);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EVDEMAND_H */
