#ifndef INVAR_H
#define INVAR_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum InvarStatus {
  INVAR_STATUS_OK = 0,
  INVAR_STATUS_NULL_POINTER = 1,
  INVAR_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed JSON or data rejected by validation.
   */
  INVAR_STATUS_INVALID_INPUT = 3,
  /**
   * The request has no solution (e.g. a non-projective fan).
   */
  INVAR_STATUS_INFEASIBLE = 4,
  /**
   * Cell index outside the table.
   */
  INVAR_STATUS_OUT_OF_RANGE = 5,
  /**
   * An unknown cell was read or the table is incomplete.
   */
  INVAR_STATUS_UNKNOWN = 6,
  INVAR_STATUS_SEARCH_LIMIT = 7,
  INVAR_STATUS_PANIC = 8,
} InvarStatus;

typedef enum InvarTableKind {
  INVAR_TABLE_KIND_LYUBEZNIK = 0,
  INVAR_TABLE_KIND_CECH_DE_RHAM = 1,
} InvarTableKind;

/**
 * Opaque table handle.
 */
typedef struct InvarTable InvarTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next library call on the same thread.
 */
const char *invar_last_error(void);

/**
 * Closed-form λ-table for an ideal of dimension `dim` (0, 1 or 2); `a` is
 * the number of connected components of the punctured spectrum.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum InvarStatus invar_tables_small(size_t dim, uint64_t a, struct InvarTable **out);

/**
 * ρ-table of the arrangement described by the JSON document `json`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum InvarStatus invar_arrangement_cdr(const char *json, struct InvarTable **out);

/**
 * λ-table of an arrangement whose components have dimension at most 2.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum InvarStatus invar_arrangement_lyubeznik(const char *json, struct InvarTable **out);

/**
 * λ-table of the cone over a projective toric 3-fold. A complete but
 * non-projective fan yields `Infeasible`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum InvarStatus invar_fan_lyubeznik(const char *json, struct InvarTable **out);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum InvarStatus invar_fan_picard_rank(const char *json, size_t *out);

/**
 * Parses a table document `{"kind", "dim", "entries", ...}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum InvarStatus invar_table_from_json(const char *json, struct InvarTable **out);

/**
 * # Safety
 * `table` must be null or a handle returned by this library and not yet
 * freed.
 */
void invar_table_free(struct InvarTable *table);

/**
 * # Safety
 * `table` must be a live handle; `out` must be writable.
 */
enum InvarStatus invar_table_dim(const struct InvarTable *table, size_t *out);

/**
 * # Safety
 * `table` must be a live handle; `out` must be writable.
 */
enum InvarStatus invar_table_kind(const struct InvarTable *table, enum InvarTableKind *out);

/**
 * Entry `(p, q)`. Unknown cells return `Unknown` and leave `out` alone.
 *
 * # Safety
 * `table` must be a live handle; `out` must be writable.
 */
enum InvarStatus invar_table_entry(const struct InvarTable *table,
                                   size_t p,
                                   size_t q,
                                   uint64_t *out);

/**
 * `Σ (-1)^{p+q} T_{p,q}`.
 *
 * # Safety
 * `table` must be a live handle; `out` must be writable.
 */
enum InvarStatus invar_table_euler_sum(const struct InvarTable *table, int64_t *out);

/**
 * Whether some choice of differentials makes a complete λ-table
 * converge. Structural violations count as not converging.
 *
 * # Safety
 * `table` must be a live handle; `out` must be writable.
 */
enum InvarStatus invar_table_check_convergence(const struct InvarTable *table, bool *out);

/**
 * Serializes the table; release the result with [`invar_string_free`].
 *
 * # Safety
 * `table` must be a live handle; `out` must be writable.
 */
enum InvarStatus invar_table_to_json(const struct InvarTable *table, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void invar_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INVAR_H */
