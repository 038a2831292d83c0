// tdnnas/tasks.h

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

#ifndef TDNNAS_TASKS_H_
#define TDNNAS_TASKS_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tdnnas/matrix.h"
#include "tdnnas/rng.h"
#include "tdnnas/tdnnf.h"

namespace tdnnas {

struct DatasetProvenance {
  std::string generator;  // "lagged-product" or "planted-bottleneck"
  std::string params;     // canonical "key=value;..." string
  uint64_t seed = 0;

  bool operator==(const DatasetProvenance &) const = default;
};

struct Dataset {
  int feature_dim = 0;
  int classes = 0;
  std::vector<Sequence> sequences;
  DatasetProvenance provenance;

  int64_t TotalFrames() const;
  int64_t MaskedFrames() const;
};

// Planted temporal structure: frames are iid standard normal, and
// y[t] = 1 iff x[t-k][0] * x[t+k][0] > 0.  Frames closer than k to either
// boundary are masked out.  A model whose receptive field misses offset -k
// or +k cannot beat chance.
Dataset GenLaggedProduct(uint64_t seed, int lag, int n_seq, int seq_len, int feature_dim);

// Frozen random teacher for the dimensionality search space:
// logits = V * relu(U * splice(x, {-1,0,1})), where U has exactly `rank`
// rows, each supported on a single tap so a bottleneck of width `rank` can
// represent the teacher and a narrower one cannot.
struct TeacherNet {
  Matrix u;  // rank x 3F
  Matrix v;  // classes x rank
  Matrix LogitsFor(const Matrix &frames) const;
};

// Labels are the teacher's argmax.  The teacher is resampled (bounded
// retries) until every class covers at least 5% of the masked-in frames.
Dataset GenPlantedBottleneck(uint64_t seed, int rank, int n_seq, int seq_len,
                             int feature_dim, int classes);

// Deterministic teacher reconstruction for a planted-bottleneck dataset.
TeacherNet TeacherFromProvenance(const DatasetProvenance &prov);

// Regenerates a dataset from its embedded provenance; the result is
// identical to the original.
Dataset RegenerateFromProvenance(const DatasetProvenance &prov);

// Splits by whole sequences: round(frac * n_seq) held out, at least 1.
// Deterministic given the rng state; the two parts are disjoint and
// exhaustive, each keeping the original relative order.
void SplitHeldout(const Dataset &all, double frac, Rng *rng, Dataset *train,
                  Dataset *heldout);

struct Metrics {
  double accuracy = 0.0;
  double mean_loss = 0.0;
  int64_t frames = 0;
  std::vector<int64_t> per_class;

  bool operator==(const Metrics &) const = default;
};

// Masked frame accuracy and mean loss under `logits_fn`, which maps a T x F
// frame matrix to T x classes logits.
Metrics Evaluate(const std::function<Matrix(const Matrix &)> &logits_fn,
                 const Dataset &data, LossKind kind);

// Same, with an input-dimension check against the model.
Metrics Evaluate(const CandidateModel &model, const Dataset &data, LossKind kind);

}  // namespace tdnnas

#endif  // TDNNAS_TASKS_H_
