// tests/tasks-test.cc

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

#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "tdnnas/tasks.h"
#include "test-util.h"

using namespace tdnnas;

TEST_SUITE_BEGIN("tasks");

TEST_CASE("lagged product labels are balanced") {
  const Dataset ds = GenLaggedProduct(2026, 2, 25, 200, 4);
  int64_t ones = 0, total = 0;
  for (const Sequence &s : ds.sequences) {
    for (size_t t = 0; t < s.mask.size(); t++) {
      if (!s.mask[t]) continue;
      total++;
      ones += s.labels[t];
    }
  }
  CHECK(total > 4000);
  CHECK(std::abs(static_cast<double>(ones) / total - 0.5) <= 0.02);
}

TEST_CASE("lagged product labels depend only on channel zero") {
  const Dataset ds = GenLaggedProduct(5, 3, 4, 40, 6);
  for (const Sequence &s : ds.sequences) {
    for (int t = 0; t < s.frames.rows; t++) {
      if (!s.mask[t]) {
        CHECK((t < 3 || t >= s.frames.rows - 3));
        continue;
      }
      const int expect = s.frames(t - 3, 0) * s.frames(t + 3, 0) > 0.0 ? 1 : 0;
      CHECK(s.labels[t] == expect);
    }
  }
}

TEST_CASE("lagged product is deterministic per seed") {
  const Dataset a = GenLaggedProduct(9, 2, 3, 20, 4);
  const Dataset b = GenLaggedProduct(9, 2, 3, 20, 4);
  const Dataset c = GenLaggedProduct(10, 2, 3, 20, 4);
  REQUIRE(a.sequences.size() == b.sequences.size());
  bool any_diff_c = false;
  for (size_t i = 0; i < a.sequences.size(); i++) {
    CHECK(a.sequences[i].frames.data == b.sequences[i].frames.data);
    CHECK(a.sequences[i].labels == b.sequences[i].labels);
    if (a.sequences[i].frames.data != c.sequences[i].frames.data) any_diff_c = true;
  }
  CHECK(any_diff_c);
}

TEST_CASE("lagged product rejects too-short sequences") {
  CHECK_THROWS_AS(GenLaggedProduct(1, 5, 2, 10, 3), std::invalid_argument);
  CHECK_THROWS_AS(GenLaggedProduct(1, 0, 2, 10, 3), std::invalid_argument);
}

TEST_CASE("planted bottleneck teacher is self-consistent") {
  const Dataset ds = GenPlantedBottleneck(31, 3, 6, 50, 6, 3);
  const TeacherNet teacher = TeacherFromProvenance(ds.provenance);
  const Metrics m = Evaluate(
      [&teacher](const Matrix &f) { return teacher.LogitsFor(f); }, ds,
      LossKind::kMse);
  CHECK(m.accuracy == 1.0);
}

TEST_CASE("planted bottleneck classes are not starved") {
  const Dataset ds = GenPlantedBottleneck(31, 4, 20, 100, 8, 4);
  int64_t total = 0;
  std::vector<int64_t> hist(4, 0);
  for (const Sequence &s : ds.sequences) {
    for (int t = 0; t < s.frames.rows; t++) {
      if (!s.mask[t]) continue;
      hist[s.labels[t]]++;
      total++;
    }
  }
  for (int64_t h : hist) CHECK(h * 20 >= total);
}

TEST_CASE("planted bottleneck regenerates identically from provenance") {
  const Dataset ds = GenPlantedBottleneck(77, 4, 5, 40, 8, 4);
  const Dataset again = RegenerateFromProvenance(ds.provenance);
  REQUIRE(ds.sequences.size() == again.sequences.size());
  for (size_t i = 0; i < ds.sequences.size(); i++) {
    CHECK(ds.sequences[i].frames.data == again.sequences[i].frames.data);
    CHECK(ds.sequences[i].labels == again.sequences[i].labels);
    CHECK(ds.sequences[i].mask == again.sequences[i].mask);
  }
  CHECK(ds.provenance == again.provenance);
}

TEST_CASE("planted bottleneck rejects bad shapes") {
  CHECK_THROWS_AS(GenPlantedBottleneck(1, 0, 5, 40, 8, 4), std::invalid_argument);
  CHECK_THROWS_AS(GenPlantedBottleneck(1, 25, 5, 40, 8, 4), std::invalid_argument);
}

TEST_CASE("held-out split honors the five percent rule") {
  const Dataset ds = GenLaggedProduct(3, 1, 100, 10, 2);
  Rng rng(50, rngstream::kDataSplit);
  Dataset train, heldout;
  SplitHeldout(ds, 0.05, &rng, &train, &heldout);
  CHECK(train.sequences.size() == 95);
  CHECK(heldout.sequences.size() == 5);
}

TEST_CASE("held-out split always keeps at least one sequence") {
  const Dataset ds = GenLaggedProduct(3, 1, 8, 10, 2);
  Rng rng(51, rngstream::kDataSplit);
  Dataset train, heldout;
  SplitHeldout(ds, 0.01, &rng, &train, &heldout);  // round(0.08) == 0
  CHECK(heldout.sequences.size() == 1);
  CHECK(train.sequences.size() == 7);
}

TEST_CASE("held-out split partitions the dataset") {
  Rng sizes(7, 0);
  for (int trial = 0; trial < 25; trial++) {
    const int n = 2 + sizes.UniformInt(30);
    const double frac = 0.05 + 0.9 * sizes.Uniform01();
    Dataset ds = GenLaggedProduct(trial, 1, n, 8, 2);
    // tag sequences through frame values so identity is visible after split
    for (int i = 0; i < n; i++) ds.sequences[i].frames(0, 0) = 1000.0 + i;
    Rng rng(trial, rngstream::kDataSplit);
    Dataset train, heldout;
    SplitHeldout(ds, frac, &rng, &train, &heldout);
    CHECK(train.sequences.size() + heldout.sequences.size() == static_cast<size_t>(n));
    std::vector<int> seen(n, 0);
    for (const Sequence &s : train.sequences) seen[static_cast<int>(s.frames(0, 0) - 1000)]++;
    for (const Sequence &s : heldout.sequences) seen[static_cast<int>(s.frames(0, 0) - 1000)]++;
    for (int v : seen) CHECK(v == 1);
  }
}

TEST_CASE("held-out split rejects degenerate inputs") {
  const Dataset ds = GenLaggedProduct(3, 1, 1, 10, 2);
  Rng rng(1, 0);
  Dataset a, b;
  CHECK_THROWS_AS(SplitHeldout(ds, 0.05, &rng, &a, &b), std::invalid_argument);
  const Dataset ds2 = GenLaggedProduct(3, 1, 4, 10, 2);
  CHECK_THROWS_AS(SplitHeldout(ds2, 0.0, &rng, &a, &b), std::invalid_argument);
  CHECK_THROWS_AS(SplitHeldout(ds2, 1.0, &rng, &a, &b), std::invalid_argument);
}

TEST_CASE("constant logits scores near chance on a balanced task") {
  const Dataset ds = GenLaggedProduct(123, 2, 20, 120, 4);
  const Metrics m = Evaluate(
      [](const Matrix &f) {
        Matrix logits(f.rows, 2);
        for (int t = 0; t < f.rows; t++) logits(t, 0) = 0.25;  // constant choice
        return logits;
      },
      ds, LossKind::kCrossEntropy);
  CHECK(std::abs(m.accuracy - 0.5) <= 0.02);
}

TEST_CASE("evaluate is deterministic and checks dimensions") {
  const Dataset ds = GenPlantedBottleneck(8, 2, 4, 30, 5, 3);
  CandidateSpec spec;
  spec.input_dim = 5;
  spec.hidden_dim = 6;
  spec.classes = 3;
  spec.layers = {LayerChoice{1, 1, 2, false}};
  CandidateModel model(spec, 2);
  Rng rng(77, rngstream::kInit);
  model.Init(&rng);
  const Metrics a = Evaluate(model, ds, LossKind::kCrossEntropy);
  const Metrics b = Evaluate(model, ds, LossKind::kCrossEntropy);
  CHECK(a == b);

  CandidateSpec bad = spec;
  bad.input_dim = 4;
  CandidateModel wrong(bad, 2);
  wrong.Init(&rng);
  CHECK_THROWS_AS(Evaluate(wrong, ds, LossKind::kCrossEntropy), std::invalid_argument);
}

TEST_SUITE_END();
