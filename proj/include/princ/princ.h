/* princ: prototype-based generalized few-shot intent detection.
 *
 * Every function returns a princ_status. On failure princ_last_error()
 * returns a message for the calling thread, valid until its next call into
 * the library. Handles are opaque and owned by the caller; release them with
 * the matching *_free function (NULL is accepted). */
#ifndef PRINC_PRINC_H
#define PRINC_PRINC_H

#include <stddef.h>
#include <stdint.h>

#if defined(PRINC_BUILDING_LIBRARY)
#define PRINC_API __attribute__((visibility("default")))
#else
#define PRINC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum princ_status {
  PRINC_OK = 0,
  PRINC_ERR_INVALID_ARGUMENT = 1,
  PRINC_ERR_DIMENSION_MISMATCH = 2,
  PRINC_ERR_DEGENERATE_VECTOR = 3,
  PRINC_ERR_IO = 4,
  PRINC_ERR_FORMAT = 5,
  PRINC_ERR_STATE = 6,
  PRINC_ERR_INTERNAL = 7
} princ_status;

typedef enum princ_preservation {
  PRINC_PRESERVE_NONE = 0,
  PRINC_PRESERVE_DAKP = 1,
  PRINC_PRESERVE_DDKP = 2
} princ_preservation;

typedef struct princ_dataset princ_dataset;
typedef struct princ_model princ_model;
typedef struct princ_eval_report princ_eval_report;
typedef struct princ_gradcheck_report princ_gradcheck_report;

PRINC_API const char* princ_last_error(void);
PRINC_API const char* princ_status_string(princ_status status);

/* ---- datasets ---- */

PRINC_API princ_status princ_dataset_generate(size_t seen, size_t novel, size_t per_intent, uint64_t seed,
                                              princ_dataset** out);
/* manifest_path may be NULL: the manifest next to the dataset is used. */
PRINC_API princ_status princ_dataset_load(const char* path, const char* manifest_path, princ_dataset** out);
PRINC_API princ_status princ_dataset_save(const princ_dataset* ds, const char* path, const char* manifest_path);
/* Attaches precomputed hidden vectors keyed by dataset index. */
PRINC_API princ_status princ_dataset_load_embeddings(princ_dataset* ds, const char* path);
PRINC_API size_t princ_dataset_size(const princ_dataset* ds);
PRINC_API size_t princ_dataset_seen_count(const princ_dataset* ds);
PRINC_API size_t princ_dataset_novel_count(const princ_dataset* ds);
PRINC_API void princ_dataset_free(princ_dataset* ds);

/* ---- training ---- */

typedef struct princ_train_options {
  double phase1_lr;
  double phase2_lr;
  size_t phase1_epochs;
  size_t phase2_epochs;
  size_t batch_size;
  size_t phase2_batch_size;
  double lambda;
  double memory_ratio;
  double tau;
  double tau_kd;
  uint64_t seed;
  size_t embedding_dim;
  size_t hidden_dim;
  size_t prototype_dim;
  princ_preservation preservation;
} princ_train_options;

PRINC_API void princ_train_options_default(princ_train_options* opts);
/* "desk" (the defaults) or "paper" (pretrained-encoder learning rates and batch sizes). */
PRINC_API princ_status princ_train_options_preset(princ_train_options* opts, const char* name);
/* Merges a JSON object of training settings into opts; unknown keys fail. */
PRINC_API princ_status princ_train_options_merge_json(princ_train_options* opts, const char* json_text);

/* Phase 1 on the seen-train pool of the split drawn with split_seed. */
PRINC_API princ_status princ_train_phase1(const princ_dataset* ds, const princ_train_options* opts,
                                          uint64_t split_seed, princ_model** out);
/* Phase 2 from a phase-1 model with k_shot supports per intent. */
PRINC_API princ_status princ_train_phase2(const princ_dataset* ds, const princ_model* phase1,
                                          const princ_train_options* opts, size_t k_shot, princ_model** out);

/* ---- models ---- */

PRINC_API princ_status princ_model_save(const princ_model* model, const char* path);
PRINC_API princ_status princ_model_load(const char* path, princ_model** out);
PRINC_API int princ_model_phase(const princ_model* model);
PRINC_API size_t princ_model_prototype_count(const princ_model* model);
PRINC_API uint64_t princ_model_checksum(const princ_model* model);
PRINC_API int princ_model_has_memory(const princ_model* model);
PRINC_API int princ_model_has_snapshot(const princ_model* model);
/* Per-epoch loss records of the run that produced the model. */
PRINC_API princ_status princ_model_write_train_report(const princ_model* model, const char* path);
/* Copies the JSON run description into buf (NUL-terminated, truncated to cap).
 * Returns the full length via *len when len is not NULL. */
PRINC_API princ_status princ_model_config_json(const princ_model* model, char* buf, size_t cap, size_t* len);
PRINC_API void princ_model_free(princ_model* model);

/* ---- evaluation ---- */

/* Phase-1 models are scored on the seen-test pool; phase-2 models on the joint test pool. */
PRINC_API princ_status princ_eval_nonepisodic(const princ_model* model, const princ_dataset* ds,
                                              princ_eval_report** out);
PRINC_API princ_status princ_eval_episodic(const princ_model* model, const princ_dataset* ds, size_t ways,
                                           size_t shots, size_t queries, size_t episodes, int novel_only,
                                           uint64_t seed, princ_eval_report** out);
PRINC_API double princ_eval_accuracy(const princ_eval_report* report);
PRINC_API double princ_eval_seen_accuracy(const princ_eval_report* report);
PRINC_API double princ_eval_novel_accuracy(const princ_eval_report* report);
PRINC_API size_t princ_eval_total(const princ_eval_report* report);
PRINC_API size_t princ_eval_correct(const princ_eval_report* report);
PRINC_API princ_status princ_eval_write(const princ_eval_report* report, const char* path);
/* Human-readable table; same buffer contract as princ_model_config_json. */
PRINC_API princ_status princ_eval_format(const princ_eval_report* report, char* buf, size_t cap, size_t* len);
PRINC_API void princ_eval_report_free(princ_eval_report* report);

/* ---- gradient oracle ---- */

typedef struct princ_gradcheck_options {
  double step;
  size_t dims;
  uint64_t seed;
  size_t fixtures;
  const char* corrupt; /* NULL or a check name */
} princ_gradcheck_options;

PRINC_API void princ_gradcheck_options_default(princ_gradcheck_options* opts);
PRINC_API princ_status princ_gradcheck_run(const princ_gradcheck_options* opts, princ_gradcheck_report** out);
PRINC_API int princ_gradcheck_passed(const princ_gradcheck_report* report);
PRINC_API size_t princ_gradcheck_count(const princ_gradcheck_report* report);
PRINC_API const char* princ_gradcheck_name(const princ_gradcheck_report* report, size_t i);
PRINC_API double princ_gradcheck_max_rel_error(const princ_gradcheck_report* report, size_t i);
PRINC_API princ_status princ_gradcheck_format(const princ_gradcheck_report* report, char* buf, size_t cap,
                                              size_t* len);
PRINC_API void princ_gradcheck_report_free(princ_gradcheck_report* report);

#ifdef __cplusplus
}
#endif

#endif
