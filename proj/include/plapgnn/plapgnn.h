#ifndef PLAPGNN_H
#define PLAPGNN_H

/*
 * C interface to the plapgnn library: graph denoising by p-Laplacian
 * regularized weight recovery plus a two-layer graph convolutional
 * classifier, with attack simulation and experiment orchestration.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Functions that can fail return plap_status; on failure a message is
 * available from plap_last_error() until the next call on the same thread.
 * Strings returned by accessor functions are owned by their handle and stay
 * valid until the handle is freed.
 */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum plap_status {
  PLAP_OK = 0,
  PLAP_ERR_INVALID_ARGUMENT = 1,
  PLAP_ERR_DIMENSION = 2,
  PLAP_ERR_PARSE = 3,
  PLAP_ERR_VALIDATION = 4,
  PLAP_ERR_CAPACITY = 5,
  PLAP_ERR_NUMERIC = 6,
  PLAP_ERR_IO = 7,
  PLAP_ERR_UNKNOWN = 8
} plap_status;

const char* plap_version(void);

/* Message for the most recent failure on the calling thread; empty string if
 * none. */
const char* plap_last_error(void);

typedef struct plap_config plap_config;
typedef struct plap_dataset plap_dataset;
typedef struct plap_denoise_result plap_denoise_result;
typedef struct plap_train_result plap_train_result;
typedef struct plap_report plap_report;

/* ---- configuration ----------------------------------------------------- */

/* Fresh config with library defaults. */
plap_config* plap_config_new(void);
void plap_config_free(plap_config* cfg);

/* Sets one field by key; keys match the config-file format exactly
 * ("alpha", "beta", "p", "rates", "epochs", ...). Unknown keys fail and the
 * error message lists the valid ones. */
plap_status plap_config_set(plap_config* cfg, const char* key,
                            const char* value);

/* Reads a "key = value" file ('#' comments allowed) into cfg. */
plap_status plap_config_load_file(plap_config* cfg, const char* path);

/* Canonical "key = value" serialization of the full config; owned by cfg. */
const char* plap_config_serialize(plap_config* cfg);

/* Current value of one key, formatted as plap_config_serialize would; NULL
 * for unknown keys. Owned by cfg, valid until the next get or free. */
const char* plap_config_get(plap_config* cfg, const char* key);

/* ---- datasets ---------------------------------------------------------- */

plap_status plap_dataset_load(const char* edge_file, const char* feature_file,
                              const char* label_file, plap_dataset** out);

/* Planted-partition generator driven by the synth_* / split_* / seed keys of
 * cfg. */
plap_status plap_dataset_generate(const plap_config* cfg, plap_dataset** out);

/* Writes canonical files; any NULL or empty path skips that file. */
plap_status plap_dataset_save(const plap_dataset* ds, const char* edge_file,
                              const char* feature_file,
                              const char* label_file);

void plap_dataset_free(plap_dataset* ds);

int64_t plap_dataset_num_nodes(const plap_dataset* ds);
int64_t plap_dataset_num_edges(const plap_dataset* ds);
int64_t plap_dataset_num_classes(const plap_dataset* ds);
int64_t plap_dataset_feature_dim(const plap_dataset* ds);
int plap_dataset_has_split(const plap_dataset* ds);

/* Stratified train/val/test masks at the given fractions. */
plap_status plap_dataset_split(plap_dataset* ds, double f_train, double f_val,
                               double f_test, uint64_t seed);

/* kind is "random" or "dissimilar"; inserts floor(rate * m) edges. */
plap_status plap_dataset_perturb(const plap_dataset* ds, const char* kind,
                                 double rate, uint64_t seed,
                                 plap_dataset** out);

/* Edge-set difference between two datasets on the same nodes. */
plap_status plap_dataset_diff(const plap_dataset* clean,
                              const plap_dataset* perturbed, int64_t* added,
                              int64_t* removed, double* ratio);

/* Graph-signal smoothness; p = 2 gives the quadratic form. */
plap_status plap_dataset_dirichlet_energy(const plap_dataset* ds, double p,
                                          double* out);

/* ---- denoising --------------------------------------------------------- */

/* Runs weight recovery on the dataset's graph using the denoise settings in
 * cfg (alpha, beta, p, step_mode, c_mode, ...). */
plap_status plap_denoise(const plap_dataset* ds, const plap_config* cfg,
                         plap_denoise_result** out);
void plap_denoise_result_free(plap_denoise_result* res);

int64_t plap_denoise_result_iterations(const plap_denoise_result* res);
int plap_denoise_result_converged(const plap_denoise_result* res);
int64_t plap_denoise_result_trace_len(const plap_denoise_result* res);
double plap_denoise_result_objective(const plap_denoise_result* res,
                                     int64_t i);
const char* plap_denoise_result_trace_csv(plap_denoise_result* res);

/* Dataset with the recovered adjacency (weights below threshold dropped when
 * threshold > 0) and the base dataset's features and labels. */
plap_status plap_denoise_result_apply(const plap_denoise_result* res,
                                      const plap_dataset* base,
                                      double threshold, plap_dataset** out);

/* ---- classifier -------------------------------------------------------- */

/* Trains the two-layer classifier with the train settings in cfg (lr_gnn,
 * epochs, hidden, patience); the dataset must carry split masks. */
plap_status plap_train(const plap_dataset* ds, const plap_config* cfg,
                       plap_train_result** out);
void plap_train_result_free(plap_train_result* res);

/* split is "train", "val" or "test"; returns accuracy in [0, 1], negative on
 * error. */
double plap_train_result_accuracy(const plap_train_result* res,
                                  const char* split);
int64_t plap_train_result_epochs(const plap_train_result* res);
const char* plap_train_result_history_csv(plap_train_result* res);

/* ---- experiment runners ------------------------------------------------ */

plap_status plap_pipeline_run(const plap_config* cfg, plap_report** out);
plap_status plap_energy_curve_run(const plap_config* cfg, plap_report** out);
plap_status plap_p_sweep_run(const plap_config* cfg, plap_report** out);
void plap_report_free(plap_report* report);

const char* plap_report_json(const plap_report* report);

/* which is "results", "energy" or "p_sweep"; NULL if the report does not
 * carry that table. */
const char* plap_report_csv(const plap_report* report, const char* which);

/* Nonzero when any experiment cell failed. */
int plap_report_any_failed(const plap_report* report);

#ifdef __cplusplus
}
#endif

#endif /* PLAPGNN_H */
