// tdnnas/config.h

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

#ifndef TDNNAS_CONFIG_H_
#define TDNNAS_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "tdnnas/search.h"
#include "tdnnas/supernet.h"
#include "tdnnas/tasks.h"

namespace tdnnas {

// Typed key-value configuration.  Keys are dotted paths; unknown keys are
// rejected, every key has a documented default, and Format/Parse round-trip
// losslessly.  Files start with the header line "# TDNNAS-CFG1 1" (written
// always, validated when present).
struct Config {
  std::string run_id;  // empty: derived as <method>-s<seed>
  std::string out_dir = "out";

  int model_layers = 2;
  int model_hidden = 32;
  int model_bottleneck = 8;
  int model_context_left = 1;
  int model_context_right = 1;

  bool search_context = true;
  bool search_dims = false;
  bool search_skip = false;
  int d_max = 3;
  std::vector<int> dim_menu = {2, 4, 8, 16};

  std::string method = "pipe-gumbel";
  double eta = 0.0;
  double temp_start = 1.0;
  double temp_end = 0.03;
  int gumbel_samples = 4;
  int epochs_search = 3;
  int epochs_arch = 3;
  int epochs_retrain = 3;
  double heldout_frac = 0.05;
  bool arch_on_train = false;
  int batch_seqs = 8;
  int arch_batch_seqs = 0;
  uint64_t seed = 1234;
  int random_candidates = 5;
  uint64_t enumerate_cap = 256;
  int threads = 0;

  double lr_model = 0.01;
  double lr_arch = 0.003;
  double momentum = 0.9;
  int ortho_interval = 4;
  double ortho_nu = 0.5;

  std::string task_kind = "lagged-product";
  uint64_t task_seed = 99;
  int task_lag = 2;
  int task_rank = 4;
  int task_n_seq = 2000;
  int task_n_seq_test = 500;
  int task_seq_len = 200;
  int task_feature_dim = 8;
  int task_classes = 4;  // planted-bottleneck only; lagged-product is binary

  std::string loss_kind = "cross-entropy";
};

// All known keys in canonical order, with one-line docs.
std::vector<std::pair<std::string, std::string>> ConfigKeyDocs();

void ConfigSet(Config *cfg, const std::string &key, const std::string &value);
std::string ConfigGet(const Config &cfg, const std::string &key);

// Canonical text form (header + every key in schema order).
std::string FormatConfig(const Config &cfg);
Config ParseConfig(const std::string &text);

void SaveConfig(const Config &cfg, const std::string &path);
Config LoadConfig(const std::string &path);

// FNV-1a 64 over the canonical text; embedded in artifacts for tamper checks.
uint64_t ConfigHash(const Config &cfg);
std::string HashHex(uint64_t hash);

// Derived objects ------------------------------------------------------------

SearchConfig ToSearchConfig(const Config &cfg);

// Search space for datasets with the given feature dim / class count.
SearchSpace BuildSearchSpace(const Config &cfg, int feature_dim, int classes);

// Synthetic datasets per the task.* keys; the test set draws from
// MixSeed(task.seed, 1) with task.n_seq_test sequences.
Dataset GenerateTrainDataset(const Config &cfg);
Dataset GenerateTestDataset(const Config &cfg);
Dataset GenerateDataset(const Config &cfg, uint64_t seed, int n_seq);

std::string RunId(const Config &cfg);

}  // namespace tdnnas

#endif  // TDNNAS_CONFIG_H_
