#ifndef LOOPSHIELD_H
#define LOOPSHIELD_H

/* Generated by cbindgen from loopshield-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible call.
typedef enum LsStatus {
  // Success.
  LS_STATUS_OK = 0,
  // A required pointer argument was null.
  LS_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  LS_STATUS_INVALID_UTF8 = 2,
  // Scenario file or text failed to parse or validate.
  LS_STATUS_CONFIG_ERROR = 3,
  // No golden scenario has the requested name.
  LS_STATUS_UNKNOWN_GOLDEN = 4,
  // The simulation rejected the scenario or failed mid-run.
  LS_STATUS_RUN_ERROR = 5,
  // Filesystem error while writing an artifact.
  LS_STATUS_IO_ERROR = 6,
  // The run produced no stability region to export.
  LS_STATUS_NO_REGION = 7,
  // A panic was caught at the boundary; see ls_last_error_message.
  LS_STATUS_INTERNAL = 8,
} LsStatus;

// Opaque result handle: the full log plus its summary.
typedef struct LsRunResult LsRunResult;

// Opaque scenario handle.
typedef struct LsScenario LsScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy the message of the most recent error on this thread into `buf`
// (NUL-terminated, truncated to `capacity`). Returns the full message
// length in bytes, excluding the NUL; call with a null `buf` to size a
// buffer.
//
// # Safety
// `buf` must be null or point to at least `capacity` writable bytes.
size_t ls_last_error_message(char *buf, size_t capacity);

// Library version as a static string; do not free.
const char *ls_version(void);

// Number of built-in golden scenarios.
size_t ls_golden_count(void);

// Name of golden scenario `index` as a newly allocated string, or null if
// out of range. Free with [`ls_string_free`].
char *ls_golden_name(size_t index);

// Load the golden scenario with the given name.
//
// # Safety
// `name` must be a valid NUL-terminated string; `out` must be a valid
// pointer. On success `*out` owns the scenario.
enum LsStatus ls_scenario_golden(const char *name, struct LsScenario **out);

// Parse a scenario from file contents already in memory.
//
// # Safety
// `text` must be a valid NUL-terminated string; `out` must be valid.
enum LsStatus ls_scenario_from_str(const char *text, struct LsScenario **out);

// Load a scenario file from disk.
//
// # Safety
// `path` must be a valid NUL-terminated string; `out` must be valid.
enum LsStatus ls_scenario_from_file(const char *path, struct LsScenario **out);

// Enable or disable the intrusion detector. Disabling it also disables
// compensation.
//
// # Safety
// `scenario` must be a live handle from a scenario constructor.
enum LsStatus ls_scenario_set_ids_enabled(struct LsScenario *scenario, bool enabled);

// Enable or disable the controller swap (detection still runs).
//
// # Safety
// `scenario` must be a live handle from a scenario constructor.
enum LsStatus ls_scenario_set_compensation_enabled(struct LsScenario *scenario, bool enabled);

// Release a scenario handle. Null is a no-op.
//
// # Safety
// `scenario` must be null or a live handle, not yet freed.
void ls_scenario_free(struct LsScenario *scenario);

// Run a scenario to completion.
//
// # Safety
// `scenario` must be a live handle; `out` must be valid. On success `*out`
// owns the result.
enum LsStatus ls_run(const struct LsScenario *scenario, struct LsRunResult **out);

// Release a run result. Null is a no-op.
//
// # Safety
// `result` must be null or a live handle, not yet freed.
void ls_run_result_free(struct LsRunResult *result);

// Release a string returned by this library. Null is a no-op.
//
// # Safety
// `s` must be null or a string allocated by this library, not yet freed.
void ls_string_free(char *s);

// The run summary as a JSON document. Free with [`ls_string_free`].
//
// # Safety
// `result` must be a live handle; `out` must be valid.
enum LsStatus ls_run_result_summary_json(const struct LsRunResult *result, char **out);

// Detection time in seconds; `*has` is false when the detector never fired.
//
// # Safety
// All pointers must be valid; `result` must be a live handle.
enum LsStatus ls_run_result_detection_time(const struct LsRunResult *result,
                                           bool *has,
                                           double *value);

// Controller swap time in seconds; `*has` is false when no swap happened.
//
// # Safety
// All pointers must be valid; `result` must be a live handle.
enum LsStatus ls_run_result_swap_time(const struct LsRunResult *result, bool *has, double *value);

// Mean |r - y| over the final 5% of samples.
//
// # Safety
// All pointers must be valid; `result` must be a live handle.
enum LsStatus ls_run_result_steady_state_error(const struct LsRunResult *result, double *value);

// Largest |y| over the whole run.
//
// # Safety
// All pointers must be valid; `result` must be a live handle.
enum LsStatus ls_run_result_peak_output(const struct LsRunResult *result, double *value);

// Whether the output hit the divergence clamp at any point.
//
// # Safety
// All pointers must be valid; `result` must be a live handle.
enum LsStatus ls_run_result_diverged(const struct LsRunResult *result, bool *value);

// Write the per-sample timeseries CSV to `path`.
//
// # Safety
// `result` must be a live handle; `path` a valid NUL-terminated string.
enum LsStatus ls_run_result_write_csv(const struct LsRunResult *result, const char *path);

// Write the stability region computed from the identified model, when the
// compensation pipeline ran; [`LsStatus::NoRegion`] otherwise.
//
// # Safety
// `result` must be a live handle; `path` a valid NUL-terminated string.
enum LsStatus ls_run_result_write_region_csv(const struct LsRunResult *result, const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOOPSHIELD_H */
