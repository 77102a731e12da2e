#ifndef SHAPERECON_H
#define SHAPERECON_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum sr_status {
  SR_OK = 0,
  /**
   * Bad arguments, configuration, input data, or I/O.
   */
  SR_ERR_INPUT = 2,
  /**
   * Numerical failure (solver breakdown, line-search stagnation, ...).
   */
  SR_ERR_NUMERIC = 3,
  /**
   * A required pointer argument was NULL or not valid UTF-8.
   */
  SR_ERR_POINTER = 4,
  /**
   * Internal panic; the library state is still consistent.
   */
  SR_ERR_INTERNAL = 5,
} sr_status;

/**
 * Opaque run-configuration handle.
 */
typedef struct sr_config sr_config;

/**
 * Opaque measured-data handle.
 */
typedef struct sr_data sr_data;

/**
 * Opaque finished-run handle.
 */
typedef struct sr_result sr_result;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the message of the most recent error on this thread into `buf`
 * (NUL-terminated, truncated to `len` bytes). Returns the full message
 * length in bytes, excluding the terminator.
 */
uintptr_t sr_last_error(char *buf, uintptr_t len);

/**
 * Reads a data CSV and its JSON sidecar into a new handle.
 */
enum sr_status sr_data_read(const char *csv_path, const char *json_path, struct sr_data **out);

void sr_data_free(struct sr_data *data);

/**
 * Creates a configuration with the built-in defaults.
 */
enum sr_status sr_config_new(struct sr_config **out);

/**
 * Sets one configuration key (same keys as the config file format).
 */
enum sr_status sr_config_set(struct sr_config *config, const char *key, const char *value);

/**
 * Loads the true inclusion boundary from an `x,y` CSV so the run records
 * Hausdorff distances; optional.
 */
enum sr_status sr_config_set_reference(struct sr_config *config, const char *truth_csv);

void sr_config_free(struct sr_config *config);

/**
 * Runs a reconstruction. On success `*out` owns the run history and final
 * geometry. A run that aborted numerically still returns SR_ERR_NUMERIC,
 * but `*out` is populated with the partial history.
 */
enum sr_status sr_run(const struct sr_config *config,
                      const struct sr_data *data,
                      struct sr_result **out);

/**
 * Number of recorded iterations (including the initial record).
 */
uintptr_t sr_result_len(const struct sr_result *result);

/**
 * Copies one history record into the seven provided slots
 * (J, G, J_norm, hausdorff, t, primal_residual after the iteration index).
 */
enum sr_status sr_result_record(const struct sr_result *result,
                                uintptr_t index,
                                uintptr_t *k,
                                double *values);

/**
 * Writes the run history CSV to `path`.
 */
enum sr_status sr_result_write_history(const struct sr_result *result, const char *path);

/**
 * Writes the final inclusion boundary as an `x,y` CSV.
 */
enum sr_status sr_result_write_boundary(const struct sr_result *result, const char *path);

void sr_result_free(struct sr_result *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHAPERECON_H */
