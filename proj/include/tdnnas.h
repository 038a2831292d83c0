/* tdnnas.h - public C API of the TDNN architecture-search library.
 *
 * Copyright 2026  tdnnas contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *  http://www.apache.org/licenses/LICENSE-2.0
 *
 * THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
 * KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
 * WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
 * MERCHANTABLITY OR NON-INFRINGEMENT.
 * See the Apache 2 License for the specific language governing permissions and
 * limitations under the License.
 *
 * All functions return tdnnas_status; on any failure tdnnas_last_error()
 * holds a human-readable message for the calling thread.  Objects returned
 * through out-parameters are owned by the caller and released with the
 * matching _free function.
 */

#ifndef TDNNAS_H_
#define TDNNAS_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tdnnas_status {
  TDNNAS_OK = 0,
  TDNNAS_EINVAL = 1, /* invalid argument or failed validation */
  TDNNAS_EIO = 2,    /* file missing, unreadable, or malformed */
  TDNNAS_EFAIL = 3   /* runtime failure (e.g. diverged training) */
} tdnnas_status;

typedef struct tdnnas_config tdnnas_config;
typedef struct tdnnas_dataset tdnnas_dataset;

const char *tdnnas_version(void);

/* Message for the most recent failing call on this thread ("" if none). */
const char *tdnnas_last_error(void);

/* -- configuration ------------------------------------------------------- */

tdnnas_status tdnnas_config_create(tdnnas_config **out);
tdnnas_status tdnnas_config_load(const char *path, tdnnas_config **out);
tdnnas_status tdnnas_config_set(tdnnas_config *cfg, const char *key, const char *value);
/* Writes the value into buf (NUL-terminated); fails if bufsize is short. */
tdnnas_status tdnnas_config_get(const tdnnas_config *cfg, const char *key, char *buf,
                                size_t bufsize);
tdnnas_status tdnnas_config_save(const tdnnas_config *cfg, const char *path);
uint64_t tdnnas_config_hash(const tdnnas_config *cfg);
void tdnnas_config_free(tdnnas_config *cfg);

/* -- datasets ------------------------------------------------------------ */

tdnnas_status tdnnas_dataset_generate(const tdnnas_config *cfg, uint64_t seed,
                                      int32_t n_seq, tdnnas_dataset **out);
tdnnas_status tdnnas_dataset_load(const char *path, tdnnas_dataset **out);
tdnnas_status tdnnas_dataset_save(const tdnnas_dataset *data, const char *path);
tdnnas_status tdnnas_dataset_info(const tdnnas_dataset *data, uint32_t *n_seq,
                                  uint32_t *feature_dim, uint32_t *classes);
void tdnnas_dataset_free(tdnnas_dataset *data);

/* Writes train.ds and test.ds under out_dir from the task.* keys. */
tdnnas_status tdnnas_gen_data(const tdnnas_config *cfg, const char *out_dir);

/* -- pipelines ----------------------------------------------------------- */

/* Search (DARTS variants), then derive, retrain from scratch and evaluate.
 * Artifacts under out_dir: checkpoint.ck (+ stage1.ck when pipelined),
 * trajectory.jsonl, derived.spec, model.ck, run.json. */
tdnnas_status tdnnas_search(const tdnnas_config *cfg, const char *train_path,
                            const char *test_path, const char *out_dir);

/* Argmax architecture from a supernet checkpoint into a spec file. */
tdnnas_status tdnnas_derive(const tdnnas_config *cfg, const char *checkpoint_path,
                            const char *out_spec_path);

/* From-scratch training of a spec file; writes model.ck, metrics.json,
 * run.json under out_dir. */
tdnnas_status tdnnas_train(const tdnnas_config *cfg, const char *spec_path,
                           const char *train_path, const char *test_path,
                           const char *out_dir);

/* Best of search.random_candidates uniformly sampled architectures. */
tdnnas_status tdnnas_random_search(const tdnnas_config *cfg, const char *train_path,
                                   const char *test_path, const char *out_dir);

/* Trains every candidate in the space (refused when larger than
 * search.enumerate_cap); writes ranking.csv under out_dir. */
tdnnas_status tdnnas_enumerate(const tdnnas_config *cfg, const char *train_path,
                               const char *test_path, const char *out_dir);

/* Evaluates model.ck + spec on a dataset; accuracy/mean loss out-params are
 * optional, metrics_path may be NULL to skip the metrics file. */
tdnnas_status tdnnas_evaluate(const tdnnas_config *cfg, const char *model_path,
                              const char *spec_path, const char *data_path,
                              const char *metrics_path, double *accuracy,
                              double *mean_loss);

/* CSV + markdown comparison over run.json files. */
tdnnas_status tdnnas_report(const char *const *run_paths, size_t n_runs,
                            const char *csv_path, const char *md_path);

/* -- architecture strings and space accounting --------------------------- */

/* Table-style architecture string for a spec file. */
tdnnas_status tdnnas_spec_format(const char *spec_path, char *buf, size_t bufsize);

/* Parses an architecture string into a spec file with the configured
 * geometry (model.* keys plus the dataset's feature dim / classes). */
tdnnas_status tdnnas_spec_parse(const tdnnas_config *cfg, const char *text,
                                int32_t feature_dim, int32_t classes,
                                const char *out_spec_path);

/* Exact search-space size as a decimal string (arbitrary precision). */
tdnnas_status tdnnas_space_size(const tdnnas_config *cfg, int32_t feature_dim,
                                int32_t classes, char *buf, size_t bufsize);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* TDNNAS_H_ */
