// tdnnas/search.h

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

#ifndef TDNNAS_SEARCH_H_
#define TDNNAS_SEARCH_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tdnnas/supernet.h"
#include "tdnnas/tasks.h"

namespace tdnnas {

enum class SearchMethod {
  kSoftmaxDarts,
  kGumbelDarts,
  kPipeSoftmax,
  kPipeGumbel,
  kRandom,
  kExhaustive,
};

SearchMethod SearchMethodFromString(const std::string &s);
std::string SearchMethodToString(SearchMethod m);
bool IsPipelined(SearchMethod m);
bool IsGumbel(SearchMethod m);

struct SearchConfig {
  SearchMethod method = SearchMethod::kPipeGumbel;
  double eta = 0.0;
  double temp_start = 1.0;
  double temp_end = 0.03;
  int gumbel_samples = 4;  // J
  int epochs_search = 3;
  int epochs_arch = 3;
  int epochs_retrain = 3;
  double heldout_frac = 0.05;
  bool arch_on_train = false;  // footnote replication: stage 2 on training data
  int batch_seqs = 8;
  int arch_batch_seqs = 0;  // 0: same as batch_seqs
  uint64_t seed = 1234;
  double lr_model = 0.01;
  double lr_arch = 0.003;
  double momentum = 0.9;
  int ortho_interval = 4;
  double ortho_nu = 0.5;
  int random_candidates = 5;
  uint64_t enumerate_cap = 256;
  LossKind loss = LossKind::kCrossEntropy;
  int threads = 0;  // 0: hardware, capped by TDNNAS_THREADS

  void Validate() const;
};

// Exponential anneal between the endpoints; step 0 gives t_start and
// step == total_steps gives t_end exactly.  total_steps == 0 gives t_end.
double AnnealTemperature(int64_t step, int64_t total_steps, double t_start,
                         double t_end);

struct EpochMetrics {
  int epoch = 0;
  std::string stage;  // "search", "arch", "retrain"
  double train_loss = 0.0;
  double heldout_loss = 0.0;
  double heldout_accuracy = 0.0;
};

struct TrajectoryPoint {
  int64_t step = 0;
  int layer = 0;          // 1-based
  std::string axis;
  std::vector<double> lambda;
  double temperature = 0.0;
};

struct SearchOutcome {
  CandidateSpec derived;
  std::vector<EpochMetrics> epochs;
  std::vector<TrajectoryPoint> trajectory;
  // stage-1 one-hot pick counts: [layer][axis][candidate]
  std::vector<std::vector<std::vector<int64_t>>> stage1_counts;
  int64_t steps = 0;
};

// Joint training of model parameters and architecture weights from the same
// per-batch loss (size-penalized when eta > 0).  Gumbel variants draw J
// weight samples per batch and anneal T per step.
SearchOutcome JointDartsSearch(Supernet *net, const SearchConfig &cfg,
                               const Dataset &train, const Dataset &heldout);

// Two stages: model parameters trained under uniformly sampled one-hot
// architectures, then architecture weights fitted on the held-out split
// (or the training split when arch_on_train is set) with model parameters
// frozen.  after_stage1 runs between the stages (checkpoint hook).
SearchOutcome PipelinedSearch(Supernet *net, const SearchConfig &cfg,
                              const Dataset &train, const Dataset &heldout,
                              const std::function<void(Supernet &)> &after_stage1 = {});

// Per-layer, per-axis argmax of the architecture weights; exact ties fall to
// the cheaper candidate, then to the lower index.
int SelectCandidate(const std::vector<double> &lambda, const std::vector<int64_t> &costs);
CandidateSpec DeriveArchitecture(const ArchWeights &arch, const SearchSpace &space);

// Checks a spec against the space's geometry and dimension menu.
void ValidateSpec(const SearchSpace &space, const CandidateSpec &spec);

struct RetrainResult {
  CandidateSpec spec;
  std::vector<EpochMetrics> epochs;
  Metrics heldout;
  Metrics test;
  int64_t param_count = 0;
};

// Trains the candidate from scratch (fresh init from init_seed, search
// weights discarded) and reports held-out and test metrics.
RetrainResult Retrain(const CandidateSpec &spec, const SearchSpace &space,
                      const SearchConfig &cfg, const Dataset &train,
                      const Dataset &heldout, const Dataset &test, uint64_t init_seed,
                      std::unique_ptr<CandidateModel> *trained_out = nullptr);

struct RankedCandidate {
  uint64_t index = 0;  // enumeration or sample index
  CandidateSpec spec;
  double heldout_accuracy = 0.0;
  double heldout_loss = 0.0;
  double test_accuracy = 0.0;
  int64_t param_count = 0;
};

struct RandomSearchResult {
  RankedCandidate best;
  RetrainResult best_retrain;
  std::vector<RankedCandidate> all;  // in sample order
};

// Best of n uniform samples by held-out accuracy (ties: fewer parameters,
// then lower sample index).  Candidate i trains from MixSeed(seed, i).
RandomSearchResult RandomSearch(const SearchSpace &space, const SearchConfig &cfg,
                                const Dataset &train, const Dataset &heldout,
                                const Dataset &test, int n);

// Retrains every candidate in the space identically and returns the full
// ranking, best held-out accuracy first.  Refuses spaces larger than
// cfg.enumerate_cap, citing the exact size.
std::vector<RankedCandidate> ExhaustiveOracle(const SearchSpace &space,
                                              const SearchConfig &cfg,
                                              const Dataset &train,
                                              const Dataset &heldout,
                                              const Dataset &test);

// Worker count for candidate-parallel loops: min(jobs, configured or
// hardware), additionally capped by the TDNNAS_THREADS environment variable.
int WorkerCount(int configured, int jobs);

}  // namespace tdnnas

#endif  // TDNNAS_SEARCH_H_
