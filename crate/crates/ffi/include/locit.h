#ifndef LOCIT_H
#define LOCIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum LocitStatus {
  LOCIT_STATUS_OK = 0,
  LOCIT_STATUS_NULL_ARGUMENT = 1,
  LOCIT_STATUS_INVALID_UTF8 = 2,
  LOCIT_STATUS_PARSE = 3,
  LOCIT_STATUS_PARAMS = 4,
  LOCIT_STATUS_TOPOLOGY = 5,
  LOCIT_STATUS_MODEL = 6,
  LOCIT_STATUS_IO = 7,
  LOCIT_STATUS_TRACE = 8,
  LOCIT_STATUS_INTERNAL = 9,
  LOCIT_STATUS_PANIC = 10,
  LOCIT_STATUS_BUFFER_TOO_SMALL = 11,
  LOCIT_STATUS_NOT_APPLICABLE = 12,
} LocitStatus;

/**
 * The trace and verdicts of one run.
 */
typedef struct LocitOutcome LocitOutcome;

/**
 * A parsed scenario.
 */
typedef struct LocitScenario LocitScenario;

/**
 * Summary metrics of a run. Absent values are `-1`.
 */
typedef struct LocitSummary {
  uint64_t n;
  uint32_t delta;
  uint64_t rounds;
  uint64_t bit_rounds;
  int64_t stab_rounds;
  uint64_t palette;
  int64_t adj_radius;
  uint64_t max_bits_per_edge;
  bool proper_every_round;
  /**
   * 0 ok, 2 bound violation, 3 oracle violation.
   */
  int32_t exit_code;
} LocitSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into the library on the same thread.
 */
const char *locit_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *locit_version(void);

/**
 * Parses a scenario from TOML text.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a writable pointer.
 */
enum LocitStatus locit_scenario_parse(const char *toml, struct LocitScenario **out);

/**
 * Reads and parses a scenario file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum LocitStatus locit_scenario_load(const char *path, struct LocitScenario **out);

/**
 * Releases a scenario. Null is ignored.
 *
 * # Safety
 * `scenario` must come from this library and not be used afterwards.
 */
void locit_scenario_free(struct LocitScenario *scenario);

/**
 * Overrides the seed of the scenario and of its graph generator.
 *
 * # Safety
 * `scenario` must be a live handle.
 */
enum LocitStatus locit_scenario_set_seed(struct LocitScenario *scenario, uint64_t seed);

/**
 * Overrides the round model: `local`, `congest:B`, `bit` or `set-local`.
 *
 * # Safety
 * `scenario` must be a live handle and `model` a NUL-terminated string.
 */
enum LocitStatus locit_scenario_set_model(struct LocitScenario *scenario, const char *model);

/**
 * Runs a scenario. Oracle and bound verdicts are reported through the
 * outcome, not the status.
 *
 * # Safety
 * `scenario` must be a live handle and `out` a writable pointer.
 */
enum LocitStatus locit_run(const struct LocitScenario *scenario, struct LocitOutcome **out);

/**
 * Releases an outcome. Null is ignored.
 *
 * # Safety
 * `outcome` must come from this library and not be used afterwards.
 */
void locit_outcome_free(struct LocitOutcome *outcome);

/**
 * Fills `out` with the run's summary metrics.
 *
 * # Safety
 * `outcome` must be a live handle and `out` a writable pointer.
 */
enum LocitStatus locit_outcome_summary(const struct LocitOutcome *outcome,
                                       struct LocitSummary *out);

/**
 * Final vertex colors. Writes vertex IDs to `ids` and colors to `colors`.
 *
 * # Safety
 * `outcome` must be a live handle, `len` writable, and `ids`/`colors`
 * valid for `cap` entries (or null with `cap == 0`).
 */
enum LocitStatus locit_outcome_vertex_colors(const struct LocitOutcome *outcome,
                                             uint32_t *ids,
                                             uint64_t *colors,
                                             size_t cap,
                                             size_t *len);

/**
 * Final edge colors as `(us[i], vs[i]) -> colors[i]` with `us[i] < vs[i]`.
 *
 * # Safety
 * As [`locit_outcome_vertex_colors`], with three buffers.
 */
enum LocitStatus locit_outcome_edge_colors(const struct LocitOutcome *outcome,
                                           uint32_t *us,
                                           uint32_t *vs,
                                           uint64_t *colors,
                                           size_t cap,
                                           size_t *len);

/**
 * The run's trace as line-delimited JSON. Release with
 * [`locit_string_free`].
 *
 * # Safety
 * `outcome` must be a live handle and `out` a writable pointer.
 */
enum LocitStatus locit_outcome_trace_jsonl(const struct LocitOutcome *outcome, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void locit_string_free(char *s);

/**
 * Re-checks a JSONL trace with the oracles. `*exit_code` receives 0 when
 * the trace verifies, 2 for a bound violation and 3 for an oracle
 * violation.
 *
 * # Safety
 * `trace` must be a NUL-terminated string and `exit_code` writable.
 */
enum LocitStatus locit_verify_trace(const char *trace, int32_t *exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOCIT_H */
