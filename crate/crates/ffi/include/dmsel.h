#ifndef DMSEL_H
#define DMSEL_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DmselStatus {
  DMSEL_STATUS_OK = 0,
  DMSEL_STATUS_NULL_POINTER = 1,
  DMSEL_STATUS_INVALID_UTF8 = 2,
  DMSEL_STATUS_PARSE = 3,
  DMSEL_STATUS_SCHEMA = 4,
  DMSEL_STATUS_OVERFLOW = 5,
  DMSEL_STATUS_NONCONFORMING = 6,
  DMSEL_STATUS_INVALID_FRACTION = 7,
  DMSEL_STATUS_TOO_SMALL = 8,
  DMSEL_STATUS_GRAPH = 9,
  DMSEL_STATUS_NOT_DECOMPOSABLE = 10,
  DMSEL_STATUS_ARITY_MISMATCH = 11,
  DMSEL_STATUS_MODEL_MISMATCH = 12,
  DMSEL_STATUS_NOT_NESTED = 13,
  DMSEL_STATUS_INVALID_DOF = 14,
  DMSEL_STATUS_INVALID_CONFIG = 15,
  DMSEL_STATUS_EMPTY_TEST_SET = 16,
  DMSEL_STATUS_NOTATION = 17,
  DMSEL_STATUS_IO = 18,
  DMSEL_STATUS_PANIC = 99,
} DmselStatus;

typedef enum DmselDirection {
  DMSEL_DIRECTION_FORWARD = 0,
  DMSEL_DIRECTION_BACKWARD = 1,
} DmselDirection;

typedef enum DmselCriterion {
  DMSEL_CRITERION_AIC = 0,
  DMSEL_CRITERION_BIC = 1,
  DMSEL_CRITERION_CHI2 = 2,
  DMSEL_CRITERION_EXACT = 3,
} DmselCriterion;

/**
 * Opaque dataset handle.
 */
typedef struct DmselDataset DmselDataset;

/**
 * Opaque model handle: a graph bound to the schema it was built for.
 */
typedef struct DmselModel DmselModel;

typedef struct DmselMetrics {
  double accuracy;
  double recall;
  uint64_t n_test;
  uint64_t n_correct;
  uint64_t n_abstained;
} DmselMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until
 * the next failing call on the same thread.
 */
const char *dmsel_last_error_message(void);

void dmsel_string_free(char *s);

/**
 * Parses delimited text with a header row. `delimiter` is an ASCII byte.
 */
enum DmselStatus dmsel_dataset_parse(const char *text,
                                     const char *class_column,
                                     char delimiter,
                                     struct DmselDataset **out);

void dmsel_dataset_free(struct DmselDataset *ds);

/**
 * Sample size N, or 0 for a null handle.
 */
uint64_t dmsel_dataset_total(const struct DmselDataset *ds);

/**
 * Splits off a test share of `test_num / test_den` of the instances.
 */
enum DmselStatus dmsel_dataset_split(const struct DmselDataset *ds,
                                     uint64_t test_num,
                                     uint64_t test_den,
                                     uint64_t seed,
                                     struct DmselDataset **out_train,
                                     struct DmselDataset **out_test);

/**
 * Sequential search. `alpha` is read by chi2 and exact; `mc_replicates`
 * and `seed` by exact only.
 */
enum DmselStatus dmsel_select(const struct DmselDataset *ds,
                              enum DmselDirection direction,
                              enum DmselCriterion criterion,
                              double alpha,
                              size_t mc_replicates,
                              uint64_t seed,
                              struct DmselModel **out);

/**
 * Builds a model from clique notation over the dataset's column names.
 */
enum DmselStatus dmsel_model_parse(const struct DmselDataset *ds,
                                   const char *model_notation,
                                   struct DmselModel **out);

void dmsel_model_free(struct DmselModel *m);

/**
 * Number of edges, or 0 for a null handle.
 */
size_t dmsel_model_complexity(const struct DmselModel *m);

/**
 * Clique notation; release with [`dmsel_string_free`].
 */
enum DmselStatus dmsel_model_notation(const struct DmselModel *m, char **out);

/**
 * Fits `model` on `train` and classifies `test`.
 */
enum DmselStatus dmsel_evaluate(const struct DmselModel *m,
                                const struct DmselDataset *train,
                                const struct DmselDataset *test,
                                struct DmselMetrics *out);

/**
 * P(X ≤ x) for a χ² variable with `dof` degrees of freedom.
 */
enum DmselStatus dmsel_chi_square_cdf(double x, int64_t dof, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DMSEL_H */
