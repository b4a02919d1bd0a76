#ifndef UDLEARN_H
#define UDLEARN_H

/* Generated by cbindgen from the udlearn-ffi crate. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum UdlStatus {
  UDL_STATUS_OK = 0,
  UDL_STATUS_NULL_POINTER = 1,
  UDL_STATUS_INVALID_UTF8 = 2,
  UDL_STATUS_FORMAT = 3,
  UDL_STATUS_INVALID_TREE = 4,
  UDL_STATUS_INVALID_ARGUMENT = 5,
  UDL_STATUS_IO = 6,
  UDL_STATUS_MODEL = 7,
  UDL_STATUS_MISMATCH = 8,
  UDL_STATUS_PANIC = 9,
} UdlStatus;

/**
 * A list of sentences.
 */
typedef struct UdlCorpus UdlCorpus;

/**
 * A trained parser.
 */
typedef struct UdlModel UdlModel;

typedef struct UdlTransformStats {
  bool changed;
  size_t arcs_rewritten;
  size_t repairs_applied;
} UdlTransformStats;

typedef struct UdlMetrics {
  /**
   * False when the corpus has no arc between two words; `distance` is then NaN.
   */
  bool has_distance;
  double distance;
  double predictability_bits;
  double derivation_perplexity;
  uint64_t derivation_complexity;
} UdlMetrics;

typedef struct UdlUas {
  size_t correct;
  size_t total;
  /**
   * Percentage.
   */
  double uas;
} UdlUas;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *udl_last_error(void);

/**
 * Free a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void udl_string_free(char *s);

/**
 * Parse CoNLL-U text into a new corpus.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum UdlStatus udl_corpus_parse(const char *text, struct UdlCorpus **out);

/**
 * Read a CoNLL-U file into a new corpus.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum UdlStatus udl_corpus_read(const char *path, struct UdlCorpus **out);

/**
 * # Safety
 * `corpus` must be NULL or a live handle from this library.
 */
void udl_corpus_free(struct UdlCorpus *corpus);

/**
 * Number of sentences; 0 for NULL.
 *
 * # Safety
 * `corpus` must be NULL or a live handle.
 */
size_t udl_corpus_len(const struct UdlCorpus *corpus);

/**
 * Number of tokens over all sentences; 0 for NULL.
 *
 * # Safety
 * `corpus` must be NULL or a live handle.
 */
size_t udl_corpus_token_count(const struct UdlCorpus *corpus);

/**
 * Serialise to CoNLL-U. Free the result with [`udl_string_free`].
 *
 * # Safety
 * `corpus` must be a live handle; `out` must be writable.
 */
enum UdlStatus udl_corpus_write(const struct UdlCorpus *corpus, char **out);

/**
 * Apply a transformation by name (`case`, `mark`, `det`, `mwe`, `name`,
 * `copula`, `coordination`) into a new corpus.
 *
 * # Safety
 * `corpus` must be a live handle, `name` a NUL-terminated string, and both
 * out pointers writable. `stats` may be NULL.
 */
enum UdlStatus udl_transform(const struct UdlCorpus *corpus,
                             const char *name,
                             struct UdlCorpus **out,
                             struct UdlTransformStats *stats);

/**
 * Learnability metrics with default options.
 *
 * # Safety
 * `corpus` must be a live handle; `out` must be writable.
 */
enum UdlStatus udl_metrics(const struct UdlCorpus *corpus, struct UdlMetrics *out);

/**
 * Train a parser. `dev` may be NULL.
 *
 * # Safety
 * `train_set` must be a live handle, `dev` NULL or a live handle, and `out`
 * writable.
 */
enum UdlStatus udl_train(const struct UdlCorpus *train_set,
                         const struct UdlCorpus *dev,
                         size_t epochs,
                         uint64_t seed,
                         size_t explore_k,
                         double explore_p,
                         struct UdlModel **out);

/**
 * # Safety
 * `model` must be NULL or a live handle from this library.
 */
void udl_model_free(struct UdlModel *model);

/**
 * # Safety
 * `model` must be a live handle and `path` a NUL-terminated string.
 */
enum UdlStatus udl_model_save(const struct UdlModel *model, const char *path);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum UdlStatus udl_model_load(const char *path, struct UdlModel **out);

/**
 * Parse every sentence of `corpus` into a new corpus.
 *
 * # Safety
 * `model` and `corpus` must be live handles; `out` must be writable.
 */
enum UdlStatus udl_parse(const struct UdlModel *model,
                         const struct UdlCorpus *corpus,
                         struct UdlCorpus **out);

/**
 * Unlabeled attachment score of `predicted` against `gold`, punctuation
 * excluded.
 *
 * # Safety
 * Both corpora must be live handles; `out` must be writable.
 */
enum UdlStatus udl_evaluate(const struct UdlCorpus *gold,
                            const struct UdlCorpus *predicted,
                            struct UdlUas *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UDLEARN_H */
