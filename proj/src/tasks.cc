// src/tasks.cc

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

#include "tdnnas/tasks.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace tdnnas {

int64_t Dataset::TotalFrames() const {
  int64_t n = 0;
  for (const Sequence &s : sequences) n += s.frames.rows;
  return n;
}

int64_t Dataset::MaskedFrames() const {
  int64_t n = 0;
  for (const Sequence &s : sequences) {
    for (uint8_t m : s.mask) n += m ? 1 : 0;
  }
  return n;
}

namespace {

std::map<std::string, std::string> ParseParams(const std::string &params) {
  std::map<std::string, std::string> out;
  std::stringstream ss(params);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.empty()) continue;
    const size_t eq = item.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("bad provenance params: " + params);
    }
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

int ParamInt(const std::map<std::string, std::string> &m, const std::string &key) {
  auto it = m.find(key);
  if (it == m.end()) throw std::invalid_argument("provenance missing key: " + key);
  return std::stoi(it->second);
}

}  // namespace

Dataset GenLaggedProduct(uint64_t seed, int lag, int n_seq, int seq_len, int feature_dim) {
  if (lag < 1) throw std::invalid_argument("gen_lagged_product: lag must be >= 1");
  if (seq_len <= 2 * lag) {
    throw std::invalid_argument("gen_lagged_product: seq_len must exceed 2*lag");
  }
  if (n_seq < 1 || feature_dim < 1) {
    throw std::invalid_argument("gen_lagged_product: bad sizes");
  }
  Dataset ds;
  ds.feature_dim = feature_dim;
  ds.classes = 2;
  {
    std::ostringstream p;
    p << "lag=" << lag << ";n_seq=" << n_seq << ";seq_len=" << seq_len
      << ";feature_dim=" << feature_dim;
    ds.provenance = DatasetProvenance{"lagged-product", p.str(), seed};
  }
  Rng rng(seed, rngstream::kDataGen);
  ds.sequences.reserve(n_seq);
  for (int s = 0; s < n_seq; s++) {
    Sequence seq;
    seq.frames = Matrix(seq_len, feature_dim);
    for (double &v : seq.frames.data) v = rng.Gaussian();
    seq.labels.resize(seq_len, 0);
    seq.mask.resize(seq_len, 0);
    for (int t = 0; t < seq_len; t++) {
      if (t < lag || t >= seq_len - lag) continue;
      seq.mask[t] = 1;
      seq.labels[t] = seq.frames(t - lag, 0) * seq.frames(t + lag, 0) > 0.0 ? 1 : 0;
    }
    ds.sequences.push_back(std::move(seq));
  }
  return ds;
}

Matrix TeacherNet::LogitsFor(const Matrix &frames) const {
  const Matrix spliced = Splice(frames, {-1, 0, 1});
  Matrix hidden(frames.rows, u.rows);
  GemmNTAccum(spliced, u, &hidden);
  for (double &v : hidden.data) v = v > 0.0 ? v : 0.0;
  Matrix logits(frames.rows, v.rows);
  GemmNTAccum(hidden, v, &logits);
  return logits;
}

namespace {

TeacherNet MakeTeacher(uint64_t seed, int rank, int feature_dim, int classes,
                       int attempt) {
  Rng rng(MixSeed(seed, 7777 + static_cast<uint64_t>(attempt)), rngstream::kInit);
  TeacherNet t;
  t.u = Matrix(rank, 3 * feature_dim);
  const double uscale = 1.0 / std::sqrt(static_cast<double>(feature_dim));
  for (int r = 0; r < rank; r++) {
    // Each teacher feature reads exactly one tap of the +-1 splice, so that
    // a factored layer with bottleneck width `rank` can realize the teacher
    // while any narrower bottleneck cannot.
    const int tap = rng.UniformInt(3);
    for (int k = 0; k < feature_dim; k++) {
      t.u(r, tap * feature_dim + k) = rng.Gaussian() * uscale;
    }
  }
  t.v = Matrix(classes, rank);
  const double vscale = 1.0 / std::sqrt(static_cast<double>(rank));
  for (double &v : t.v.data) v = rng.Gaussian() * vscale;
  return t;
}

}  // namespace

Dataset GenPlantedBottleneck(uint64_t seed, int rank, int n_seq, int seq_len,
                             int feature_dim, int classes) {
  if (rank < 1 || rank > 3 * feature_dim) {
    throw std::invalid_argument("gen_planted_bottleneck: bad rank");
  }
  if (n_seq < 1 || seq_len < 3 || feature_dim < 1 || classes < 2) {
    throw std::invalid_argument("gen_planted_bottleneck: bad sizes");
  }
  Dataset ds;
  ds.feature_dim = feature_dim;
  ds.classes = classes;
  Rng rng(seed, rngstream::kDataGen);
  ds.sequences.reserve(n_seq);
  for (int s = 0; s < n_seq; s++) {
    Sequence seq;
    seq.frames = Matrix(seq_len, feature_dim);
    for (double &v : seq.frames.data) v = rng.Gaussian();
    seq.labels.assign(seq_len, 0);
    seq.mask.assign(seq_len, 0);
    for (int t = 1; t < seq_len - 1; t++) seq.mask[t] = 1;
    ds.sequences.push_back(std::move(seq));
  }
  // Resample the teacher until no class is starved (< 5% of masked frames).
  const int kMaxAttempts = 100;
  int attempt = 0;
  for (; attempt < kMaxAttempts; attempt++) {
    const TeacherNet teacher = MakeTeacher(seed, rank, feature_dim, classes, attempt);
    std::vector<int64_t> histogram(classes, 0);
    int64_t total = 0;
    for (Sequence &seq : ds.sequences) {
      const Matrix logits = teacher.LogitsFor(seq.frames);
      for (int t = 0; t < logits.rows; t++) {
        int best = 0;
        for (int j = 1; j < classes; j++) {
          if (logits(t, j) > logits(t, best)) best = j;
        }
        seq.labels[t] = best;
        if (seq.mask[t]) {
          histogram[best]++;
          total++;
        }
      }
    }
    bool ok = true;
    for (int64_t h : histogram) {
      if (h * 20 < total) ok = false;  // below 5%
    }
    if (ok) break;
  }
  if (attempt == kMaxAttempts) {
    throw std::runtime_error("gen_planted_bottleneck: could not balance classes");
  }
  std::ostringstream p;
  p << "rank=" << rank << ";n_seq=" << n_seq << ";seq_len=" << seq_len
    << ";feature_dim=" << feature_dim << ";classes=" << classes
    << ";teacher_attempt=" << attempt;
  ds.provenance = DatasetProvenance{"planted-bottleneck", p.str(), seed};
  return ds;
}

TeacherNet TeacherFromProvenance(const DatasetProvenance &prov) {
  if (prov.generator != "planted-bottleneck") {
    throw std::invalid_argument("teacher requested for generator " + prov.generator);
  }
  const auto m = ParseParams(prov.params);
  return MakeTeacher(prov.seed, ParamInt(m, "rank"), ParamInt(m, "feature_dim"),
                     ParamInt(m, "classes"), ParamInt(m, "teacher_attempt"));
}

Dataset RegenerateFromProvenance(const DatasetProvenance &prov) {
  const auto m = ParseParams(prov.params);
  if (prov.generator == "lagged-product") {
    return GenLaggedProduct(prov.seed, ParamInt(m, "lag"), ParamInt(m, "n_seq"),
                            ParamInt(m, "seq_len"), ParamInt(m, "feature_dim"));
  }
  if (prov.generator == "planted-bottleneck") {
    return GenPlantedBottleneck(prov.seed, ParamInt(m, "rank"), ParamInt(m, "n_seq"),
                                ParamInt(m, "seq_len"), ParamInt(m, "feature_dim"),
                                ParamInt(m, "classes"));
  }
  throw std::invalid_argument("unknown generator: " + prov.generator);
}

void SplitHeldout(const Dataset &all, double frac, Rng *rng, Dataset *train,
                  Dataset *heldout) {
  const int n = static_cast<int>(all.sequences.size());
  if (n < 2) throw std::invalid_argument("split_heldout: need at least 2 sequences");
  if (frac <= 0.0 || frac >= 1.0) {
    throw std::invalid_argument("split_heldout: frac must be in (0,1)");
  }
  int h = static_cast<int>(std::lround(frac * n));
  h = std::max(1, std::min(h, n - 1));
  std::vector<int> order(n);
  for (int i = 0; i < n; i++) order[i] = i;
  for (int i = n - 1; i > 0; i--) {
    std::swap(order[i], order[rng->UniformInt(i + 1)]);
  }
  std::vector<uint8_t> is_heldout(n, 0);
  for (int i = 0; i < h; i++) is_heldout[order[i]] = 1;
  train->feature_dim = heldout->feature_dim = all.feature_dim;
  train->classes = heldout->classes = all.classes;
  train->provenance = heldout->provenance = all.provenance;
  train->sequences.clear();
  heldout->sequences.clear();
  for (int i = 0; i < n; i++) {
    (is_heldout[i] ? heldout : train)->sequences.push_back(all.sequences[i]);
  }
}

Metrics Evaluate(const std::function<Matrix(const Matrix &)> &logits_fn,
                 const Dataset &data, LossKind kind) {
  Metrics m;
  m.per_class.assign(data.classes, 0);
  double loss_sum = 0.0;
  int64_t correct = 0;
  for (const Sequence &seq : data.sequences) {
    const Matrix logits = logits_fn(seq.frames);
    if (logits.cols != data.classes) {
      throw std::invalid_argument("evaluate: class count mismatch");
    }
    int64_t cnt = 0;
    loss_sum += MaskedLossSum(logits, seq.labels, seq.mask, kind, &cnt, nullptr);
    m.frames += cnt;
    for (int t = 0; t < logits.rows; t++) {
      if (!seq.mask[t]) continue;
      int best = 0;
      for (int j = 1; j < logits.cols; j++) {
        if (logits(t, j) > logits(t, best)) best = j;
      }
      if (best == seq.labels[t]) correct++;
      m.per_class[seq.labels[t]]++;
    }
  }
  if (m.frames == 0) throw std::runtime_error("no supervised frames");
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.frames);
  m.mean_loss = loss_sum / static_cast<double>(m.frames);
  return m;
}

Metrics Evaluate(const CandidateModel &model, const Dataset &data, LossKind kind) {
  if (model.spec().input_dim != data.feature_dim) {
    throw std::invalid_argument("evaluate: model input dim " +
                                std::to_string(model.spec().input_dim) +
                                " != dataset feature dim " +
                                std::to_string(data.feature_dim));
  }
  return Evaluate([&model](const Matrix &f) { return model.ForwardLogits(f); }, data,
                  kind);
}

}  // namespace tdnnas
