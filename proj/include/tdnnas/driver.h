// tdnnas/driver.h

// Copyright 2026  tdnnas contributors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef TDNNAS_DRIVER_H_
#define TDNNAS_DRIVER_H_

#include <string>
#include <vector>

#include "tdnnas/config.h"
#include "tdnnas/run-record.h"

namespace tdnnas {

// File-level entry points behind the public API.  Each writes its artifacts
// under out_dir (created if needed) and returns what the caller reports.

// train.ds + test.ds from the task.* configuration.
void GenDataFiles(const Config &cfg, const std::string &out_dir);

// Full protocol for the DARTS methods: search, derive, retrain from
// scratch, evaluate.  Artifacts: checkpoint.ck (+ stage1.ck for pipelined
// variants), trajectory.jsonl, derived.spec, model.ck, run.json.
RunRecord RunSearchPipeline(const Config &cfg, const std::string &train_path,
                            const std::string &test_path, const std::string &out_dir);

// Architecture extraction from a supernet checkpoint (config must match the
// checkpoint's embedded hash).
CandidateSpec DeriveFromCheckpoint(const Config &cfg, const std::string &ckpt_path,
                                   const std::string &out_spec_path);

// From-scratch training of a spec file; writes model.ck, metrics.json and
// run.json under out_dir.
RunRecord TrainSpecFile(const Config &cfg, const std::string &spec_path,
                        const std::string &train_path, const std::string &test_path,
                        const std::string &out_dir);

// Best of search.random_candidates uniform samples; writes candidates.csv,
// best.spec, model.ck and run.json.
RunRecord RunRandomSearch(const Config &cfg, const std::string &train_path,
                          const std::string &test_path, const std::string &out_dir);

// Exhaustive oracle ranking; writes ranking.csv (and ranking.json).
// Refuses oversized spaces, citing the exact size.
std::vector<RankedCandidate> RunEnumerate(const Config &cfg,
                                          const std::string &train_path,
                                          const std::string &test_path,
                                          const std::string &out_dir);

// Evaluation of a trained model checkpoint against a dataset.
Metrics EvalModelFile(const Config &cfg, const std::string &model_path,
                      const std::string &spec_path, const std::string &data_path,
                      const std::string &out_metrics_path);

// Comparison report over run records.
void ReportFiles(const std::vector<std::string> &run_paths, const std::string &csv_path,
                 const std::string &md_path);

// Shared helpers.
void EnsureDir(const std::string &dir);
void CheckConfigHash(const Config &cfg, uint64_t artifact_hash, const std::string &what);

}  // namespace tdnnas

#endif  // TDNNAS_DRIVER_H_
