#ifndef CHAINGRAPH_H
#define CHAINGRAPH_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Values 1 to 3 match the command-line exit codes.
 */
typedef enum CgStatus {
  CG_STATUS_OK = 0,
  CG_STATUS_INVALID_MODEL = 1,
  CG_STATUS_USAGE = 2,
  CG_STATUS_RESOURCE = 3,
  CG_STATUS_NULL_ARGUMENT = 10,
  CG_STATUS_INVALID_UTF8 = 11,
  CG_STATUS_IO = 12,
  CG_STATUS_INTERNAL = 13,
} CgStatus;

/**
 * Output notation for [`cg_factorize`].
 */
typedef enum CgFormat {
  CG_FORMAT_TEXT = 0,
  CG_FORMAT_LATEX = 1,
} CgFormat;

/**
 * Opaque handle to a resolved model.
 */
typedef struct CgModel CgModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses model source text into a new handle stored in `*out`.
 *
 * # Safety
 * `src` must be a valid NUL-terminated string and `out` a writable pointer.
 */
enum CgStatus cg_model_parse(const char *src, struct CgModel **out);

/**
 * Reads and parses the model file at `path`.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a writable pointer.
 */
enum CgStatus cg_model_load(const char *path, struct CgModel **out);

/**
 * Releases a model handle. Null is ignored.
 *
 * # Safety
 * `m` must come from this library and not be used afterwards.
 */
void cg_model_free(struct CgModel *m);

/**
 * Number of nodes in the template graph.
 *
 * # Safety
 * `m` must be a live handle and `out` writable.
 */
enum CgStatus cg_node_count(const struct CgModel *m, size_t *out);

/**
 * Chain components, one per line with space-separated names.
 *
 * # Safety
 * `m` must be a live handle and `out` writable.
 */
enum CgStatus cg_components(const struct CgModel *m, char **out);

/**
 * Component subgraphs, one per line with space-separated names.
 *
 * # Safety
 * `m` must be a live handle and `out` writable.
 */
enum CgStatus cg_subgraphs(const struct CgModel *m, char **out);

/**
 * Renders the factorization. `bindings` is null or a `;`-separated list
 * of `SYM=INT[,INT...]` assignments; with bindings the plates are
 * expanded, without them plated models render symbolically.
 *
 * # Safety
 * `m` must be a live handle, `bindings` null or NUL-terminated, `out`
 * writable.
 */
enum CgStatus cg_factorize(const struct CgModel *m,
                           enum CgFormat format,
                           const char *bindings,
                           char **out);

/**
 * Decides an independence statement such as `a,b _||_ c | d`, storing
 * the answer in `*out`.
 *
 * # Safety
 * `m` must be a live handle, `query` NUL-terminated, `out` writable.
 */
enum CgStatus cg_query(const struct CgModel *m, const char *query, bool *out);

/**
 * Graphviz DOT text for the model, plates drawn as clusters.
 *
 * # Safety
 * `m` must be a live handle and `out` writable.
 */
enum CgStatus cg_dot(const struct CgModel *m, char **out);

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next call into the library on this thread.
 */
const char *cg_last_error(void);

/**
 * Releases a string returned by the library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void cg_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHAINGRAPH_H */
