#ifndef SMALLCOVER_H
#define SMALLCOVER_H

/* Generated by cbindgen from smallcover-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes of every fallible call.
 */
typedef enum ScStatus {
  ScStatus_Ok = 0,
  /**
   * A required pointer argument was null.
   */
  ScStatus_NullPointer = 1,
  /**
   * An input string was not valid UTF-8.
   */
  ScStatus_InvalidUtf8 = 2,
  /**
   * The configuration failed to parse or validate.
   */
  ScStatus_ConfigError = 3,
  /**
   * An exact operation exceeded its enumeration budget.
   */
  ScStatus_BudgetExceeded = 4,
  /**
   * The command ran and reported a violation (CLI exit code 1).
   */
  ScStatus_ViolationFound = 5,
  ScStatus_InternalError = 6,
} ScStatus;

/**
 * Opaque handle around a validated instance.
 */
typedef struct ScInstance ScInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *sc_last_error_message(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *sc_version(void);

/**
 * Parses an instance from its JSON wire form
 * `{d, n, p, f, T, K, delta, L | Kprime}` into an opaque handle.
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` a valid pointer.
 */
enum ScStatus sc_instance_parse(const char *json, struct ScInstance **out);

/**
 * Releases an instance handle. Null is a no-op.
 *
 * # Safety
 * `inst` must come from [`sc_instance_parse`] and not be freed twice.
 */
void sc_instance_free(struct ScInstance *inst);

/**
 * Dimension d of the instance.
 *
 * # Safety
 * `inst` must be a live handle; `out` a valid pointer.
 */
enum ScStatus sc_instance_dim(const struct ScInstance *inst, size_t *out);

/**
 * Exact expected supremum as a "num/den" string.
 *
 * # Safety
 * `inst` must be a live handle; `out` receives an owned string.
 */
enum ScStatus sc_expected_supremum(const struct ScInstance *inst, uint64_t budget, char **out);

/**
 * Seeded Monte Carlo estimate of the expected supremum.
 *
 * # Safety
 * `inst` must be a live handle; the out-pointers must be valid.
 */
enum ScStatus sc_expected_supremum_mc(const struct ScInstance *inst,
                                      uint64_t samples,
                                      uint64_t seed,
                                      double *out_estimate,
                                      double *out_std_error);

/**
 * Number of configurations in the threshold family.
 *
 * # Safety
 * `inst` must be a live handle; `out` a valid pointer.
 */
enum ScStatus sc_family_size(const struct ScInstance *inst, uint64_t budget, uint64_t *out);

/**
 * Runs one CLI command (`estimate`, `family`, `witness`, `cover`,
 * `classes`, `reduce`, `verify`, `selector`) over a full JSON config
 * document and returns the rendered report. Seeds, sample counts, mode and
 * budget are read from the config document itself.
 *
 * The status mirrors the CLI exit codes: `Ok` for exit 0,
 * `ViolationFound` for exit 1, `ConfigError` for exit 2 and
 * `BudgetExceeded` for exit 3. The report is written in every case.
 *
 * # Safety
 * `command` and `config_json` must be nul-terminated strings; `out_report`
 * receives an owned string.
 */
enum ScStatus sc_run(const char *command, const char *config_json, char **out_report);

/**
 * Releases a string produced by this library. Null is a no-op.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void sc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SMALLCOVER_H */
