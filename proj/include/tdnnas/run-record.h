// tdnnas/run-record.h

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

#ifndef TDNNAS_RUN_RECORD_H_
#define TDNNAS_RUN_RECORD_H_

#include <cstdint>
#include <string>
#include <vector>

#include "tdnnas/search.h"
#include "tdnnas/tasks.h"
#include "tdnnas/tdnnf.h"

namespace tdnnas {

// One completed run: configuration snapshot, the selected architecture, the
// metric trail, and pointers to sibling artifacts.  Serialized as JSON with
// a leading magic/version pair; wall_time_sec is the only field allowed to
// differ between identically seeded runs.
struct RunRecord {
  std::string id;
  std::string method;
  double eta = 0.0;
  uint64_t seed = 0;
  std::string config_text;
  std::string config_hash;  // hex
  CandidateSpec spec;
  std::string spec_string;
  int64_t param_count = 0;
  std::vector<EpochMetrics> epochs;
  Metrics heldout;
  Metrics test;
  std::vector<std::vector<std::vector<int64_t>>> stage1_counts;  // may be empty
  std::string trajectory_file;
  std::string checkpoint_file;
  std::string stage1_checkpoint_file;
  std::string spec_file;
  std::string model_file;
  double wall_time_sec = 0.0;
};

void WriteRunRecord(const RunRecord &rec, const std::string &path);
RunRecord ReadRunRecord(const std::string &path);

// Line-delimited architecture-weight trajectory: a header record followed by
// one JSON object per (step, layer, axis).
void WriteTrajectory(const std::vector<TrajectoryPoint> &trajectory,
                     const std::string &path);
std::vector<TrajectoryPoint> ReadTrajectory(const std::string &path);

// Small standalone metrics file (JSON).
void WriteMetricsFile(const Metrics &heldout, const Metrics &test,
                      const std::string &path);

}  // namespace tdnnas

#endif  // TDNNAS_RUN_RECORD_H_
