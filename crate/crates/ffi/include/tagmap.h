#ifndef TAGMAP_H
#define TAGMAP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TagmapSolver {
  TAGMAP_SOLVER_JACOBI = 0,
  TAGMAP_SOLVER_DIRECT = 1,
} TagmapSolver;

/**
 * Result of every fallible call.
 */
typedef enum TagmapStatus {
  TAGMAP_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  TAGMAP_STATUS_NULL_ARGUMENT = 1,
  TAGMAP_STATUS_INVALID_UTF8 = 2,
  TAGMAP_STATUS_IO = 3,
  /**
   * Malformed input file.
   */
  TAGMAP_STATUS_PARSE = 4,
  TAGMAP_STATUS_CONFIG = 5,
  TAGMAP_STATUS_VALIDATION = 6,
  /**
   * A named tag, token or concept was not found.
   */
  TAGMAP_STATUS_LOOKUP = 7,
  /**
   * Some graph component has no known vector.
   */
  TAGMAP_STATUS_INFEASIBLE = 8,
  TAGMAP_STATUS_SINGULAR = 9,
  TAGMAP_STATUS_EVAL = 10,
  /**
   * The library panicked; the handles passed in should not be reused.
   */
  TAGMAP_STATUS_PANIC = 11,
} TagmapStatus;

typedef enum TagmapStrategy {
  TAGMAP_STRATEGY_AVG = 0,
  TAGMAP_STRATEGY_SIF = 1,
} TagmapStrategy;

/**
 * Vectors keyed by tag or concept id.
 */
typedef struct TagmapEmbeddings TagmapEmbeddings;

/**
 * Typed concept graph.
 */
typedef struct TagmapGraph TagmapGraph;

/**
 * Token vectors with frequency ranks.
 */
typedef struct TagmapTokenTable TagmapTokenTable;

typedef struct TagmapRetrofitParams {
  enum TagmapSolver solver;
  /**
   * Jacobi stopping threshold on the largest coordinate change.
   */
  double tol;
  size_t max_iter;
  /**
   * Count only relatedness neighbours in `1/degree` weights.
   */
  bool relatedness_only_degree;
} TagmapRetrofitParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *tagmap_last_error(void);

/**
 * Library version as a static string.
 */
const char *tagmap_version(void);

/**
 * Default solver settings: Jacobi, tol 1e-6, 1000 sweeps, all neighbours.
 */
struct TagmapRetrofitParams tagmap_retrofit_params_default(void);

/**
 * Loads a `source<TAB>relation<TAB>target` edge list. `relations` names a
 * `relation=class` file and may be null for the built-in classes.
 *
 * # Safety
 * String arguments must be null or NUL-terminated; `out` must be writable.
 */
enum TagmapStatus tagmap_graph_load(const char *path,
                                    const char *relations,
                                    struct TagmapGraph **out);

/**
 * # Safety
 * `g` must be null or a live graph handle.
 */
size_t tagmap_graph_concept_count(const struct TagmapGraph *g);

/**
 * # Safety
 * `g` must be null or a live graph handle.
 */
size_t tagmap_graph_edge_count(const struct TagmapGraph *g);

/**
 * # Safety
 * `g` must be null or a handle from `tagmap_graph_load`, not yet freed.
 */
void tagmap_graph_free(struct TagmapGraph *g);

/**
 * Loads word vectors; line order gives frequency ranks. `max_rank` of 0
 * reads the whole file.
 *
 * # Safety
 * `path` must be NUL-terminated; `out` must be writable.
 */
enum TagmapStatus tagmap_token_table_load(const char *path,
                                          size_t max_rank,
                                          struct TagmapTokenTable **out);

/**
 * # Safety
 * `t` must be null or a live token table handle.
 */
size_t tagmap_token_table_len(const struct TagmapTokenTable *t);

/**
 * # Safety
 * `t` must be null or a live token table handle.
 */
size_t tagmap_token_table_dim(const struct TagmapTokenTable *t);

/**
 * # Safety
 * `t` must be null or a handle from `tagmap_token_table_load`, not yet freed.
 */
void tagmap_token_table_free(struct TagmapTokenTable *t);

/**
 * Loads vectors keyed by id. All-zero rows are marked unknown.
 *
 * # Safety
 * `path` must be NUL-terminated; `out` must be writable.
 */
enum TagmapStatus tagmap_embeddings_load(const char *path, struct TagmapEmbeddings **out);

/**
 * # Safety
 * `e` must be a live embeddings handle; `path` must be NUL-terminated.
 */
enum TagmapStatus tagmap_embeddings_save(const struct TagmapEmbeddings *e, const char *path);

/**
 * # Safety
 * `e` must be null or a live embeddings handle.
 */
size_t tagmap_embeddings_len(const struct TagmapEmbeddings *e);

/**
 * # Safety
 * `e` must be null or a live embeddings handle.
 */
size_t tagmap_embeddings_dim(const struct TagmapEmbeddings *e);

/**
 * Copies the vector of `id` into `buf`, which must hold exactly `dim`
 * values.
 *
 * # Safety
 * `e` must be a live handle, `id` NUL-terminated and `buf` writable for
 * `buf_len` doubles.
 */
enum TagmapStatus tagmap_embeddings_get(const struct TagmapEmbeddings *e,
                                        const char *id,
                                        double *buf,
                                        size_t buf_len);

/**
 * # Safety
 * `e` must be null or an embeddings handle from this library, not yet freed.
 */
void tagmap_embeddings_free(struct TagmapEmbeddings *e);

/**
 * Composes one vector per tag label. SIF uses smoothing constant `a` and
 * removes the first singular direction of the resulting tag matrix; `a`
 * is ignored for averaging. Tags without any known token get a zero vector.
 *
 * # Safety
 * `table` must be a live handle, `tags` must point to `n_tags`
 * NUL-terminated strings and `out` must be writable.
 */
enum TagmapStatus tagmap_compose(const struct TagmapTokenTable *table,
                                 const char *const *tags,
                                 size_t n_tags,
                                 enum TagmapStrategy strategy,
                                 double a,
                                 struct TagmapEmbeddings **out);

/**
 * Number of graph components that hold no known vector; retrofitting
 * succeeds only when this is 0.
 *
 * # Safety
 * Handles must be live; `out_count` must be writable.
 */
enum TagmapStatus tagmap_uncovered_components(const struct TagmapGraph *graph,
                                              const struct TagmapEmbeddings *initial,
                                              size_t *out_count);

/**
 * Retrofits `initial` onto `graph`. Entries of `initial` with a non-zero
 * vector are the known concepts; ids missing from the graph join it as
 * isolated concepts. `params` may be null for the defaults and
 * `out_iterations` may be null.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum TagmapStatus tagmap_retrofit(const struct TagmapGraph *graph,
                                  const struct TagmapEmbeddings *initial,
                                  const struct TagmapRetrofitParams *params,
                                  struct TagmapEmbeddings **out,
                                  size_t *out_iterations);

/**
 * Cosine similarity; 0 when either vector is zero.
 *
 * # Safety
 * `u` and `v` must be readable for `len` doubles; `out` must be writable.
 */
enum TagmapStatus tagmap_cosine(const double *u, const double *v, size_t len, double *out);

/**
 * ROC AUC with ties counted as one half. `labels` holds 0 or 1 per item.
 * When every label is equal the AUC is undefined: `*out_defined` is set to
 * false and `*out_auc` to NaN.
 *
 * # Safety
 * `scores` and `labels` must be readable for `n` items; outputs writable.
 */
enum TagmapStatus tagmap_roc_auc(const double *scores,
                                 const uint8_t *labels,
                                 size_t n,
                                 double *out_auc,
                                 bool *out_defined);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TAGMAP_H */
