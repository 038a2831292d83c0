// tests/search-test.cc

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
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "tdnnas/search.h"
#include "test-util.h"

using namespace tdnnas;

namespace {

SearchSpace LeftAxisSpace(const std::vector<int> &left, int right_fixed, int input_dim,
                          int hidden, int dim, int classes, int layers = 1) {
  SearchSpace space;
  space.num_layers = layers;
  space.input_dim = input_dim;
  space.hidden_dim = hidden;
  space.classes = classes;
  space.default_dim = dim;
  for (int l = 0; l < layers; l++) {
    LayerSpace ls;
    ls.fixed_right = right_fixed;
    ls.axes.push_back(AxisSpace{AxisKind::kContextLeft, left, {}});
    space.layers.push_back(ls);
  }
  return space;
}

SearchConfig SmallConfig(SearchMethod method, uint64_t seed) {
  SearchConfig cfg;
  cfg.method = method;
  cfg.seed = seed;
  cfg.epochs_search = 2;
  cfg.epochs_arch = 2;
  cfg.epochs_retrain = 2;
  cfg.batch_seqs = 4;
  cfg.gumbel_samples = 2;
  return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("search");

TEST_CASE("temperature anneal endpoints and midpoint") {
  CHECK(AnnealTemperature(0, 100, 1.0, 0.03) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(AnnealTemperature(100, 100, 1.0, 0.03) == doctest::Approx(0.03).epsilon(1e-12));
  CHECK(AnnealTemperature(50, 100, 1.0, 0.03) ==
        doctest::Approx(std::sqrt(0.03)).epsilon(1e-12));
  CHECK(AnnealTemperature(0, 0, 1.0, 0.03) == 0.03);
  CHECK_THROWS_AS(AnnealTemperature(0, 10, 0.03, 1.0), std::invalid_argument);
}

TEST_CASE("candidate selection breaks ties toward smaller cost then lower index") {
  CHECK(SelectCandidate({0.1, 0.7, 0.2}, {10, 10, 10}) == 1);
  CHECK(SelectCandidate({0.5, 0.5}, {200, 100}) == 1);
  CHECK(SelectCandidate({0.5, 0.5}, {100, 200}) == 0);
  CHECK(SelectCandidate({0.25, 0.25, 0.25, 0.25}, {4, 4, 2, 4}) == 2);
  CHECK(SelectCandidate({0.25, 0.25, 0.25, 0.25}, {4, 4, 4, 4}) == 0);
}

TEST_CASE("candidate selection is permutation-consistent") {
  const std::vector<double> lam = {0.15, 0.4, 0.05, 0.4};
  const std::vector<int64_t> costs = {7, 9, 3, 5};
  const int chosen = SelectCandidate(lam, costs);
  // apply a permutation and check the selected element is the same one
  const std::vector<int> perm = {2, 0, 3, 1};
  std::vector<double> plam(4);
  std::vector<int64_t> pcosts(4);
  for (int i = 0; i < 4; i++) {
    plam[i] = lam[perm[i]];
    pcosts[i] = costs[perm[i]];
  }
  const int pchosen = SelectCandidate(plam, pcosts);
  CHECK(perm[pchosen] == chosen);
}

TEST_CASE("derive architecture takes the per-layer argmax") {
  SearchSpace space = LeftAxisSpace({0, 1, 2}, 1, 3, 4, 2, 2, 2);
  space.FillParamCounts();
  ArchWeights arch;
  arch.InitZero(space);
  arch.log_alpha[0][0](0, 1) = 2.0;   // layer 1 -> c=1
  arch.log_alpha[1][0](0, 2) = 1.5;   // layer 2 -> c=2
  const CandidateSpec spec = DeriveArchitecture(arch, space);
  CHECK(spec.layers[0].left == 1);
  CHECK(spec.layers[1].left == 2);
  CHECK(spec.layers[0].right == 1);
  CHECK(spec.layers[0].dim == 0);  // dim not searched: left unspecified

  // untouched log alpha: exact tie, context c=0 is cheapest
  ArchWeights flat;
  flat.InitZero(space);
  const CandidateSpec tie = DeriveArchitecture(flat, space);
  CHECK(tie.layers[0].left == 0);
}

TEST_CASE("joint search on a single-candidate space reduces to plain training") {
  SearchSpace space = LeftAxisSpace({1}, 1, 3, 6, 3, 2);
  Supernet net(space);
  const Dataset ds = GenLaggedProduct(900, 1, 24, 20, 3);
  Rng srng(900, rngstream::kDataSplit);
  Dataset train, heldout;
  SplitHeldout(ds, 0.1, &srng, &train, &heldout);
  SearchConfig cfg = SmallConfig(SearchMethod::kSoftmaxDarts, 900);
  cfg.epochs_search = 8;
  const SearchOutcome out = JointDartsSearch(&net, cfg, train, heldout);
  for (const TrajectoryPoint &p : out.trajectory) {
    REQUIRE(p.lambda.size() == 1);
    CHECK(p.lambda[0] == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(out.derived.layers[0].left == 1);
  // the loss must actually have been trained down
  CHECK(out.epochs.back().train_loss < std::log(2.0));
}

TEST_CASE("trajectory weights stay on the simplex") {
  SearchSpace space = LeftAxisSpace({0, 1, 2}, 2, 3, 6, 3, 2);
  Supernet net(space);
  const Dataset ds = GenLaggedProduct(901, 2, 24, 24, 3);
  Rng srng(901, rngstream::kDataSplit);
  Dataset train, heldout;
  SplitHeldout(ds, 0.1, &srng, &train, &heldout);
  const SearchOutcome out =
      JointDartsSearch(&net, SmallConfig(SearchMethod::kGumbelDarts, 901), train, heldout);
  CHECK(!out.trajectory.empty());
  for (const TrajectoryPoint &p : out.trajectory) {
    double sum = 0.0;
    for (double v : p.lambda) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("joint search moves weight toward the functional branch") {
  // Left context {0,2} with fixed right 2 on the k=2 lagged-product task:
  // only c=2 covers the planted -2 offset, so lambda(c=2) must win.
  int wins = 0;
  for (uint64_t seed : {11ull, 12ull, 13ull, 14ull, 15ull}) {
    SearchSpace space;
    space.num_layers = 1;
    space.input_dim = 4;
    space.hidden_dim = 16;
    space.classes = 2;
    space.default_dim = 4;
    LayerSpace ls;
    ls.fixed_right = 1;
    ls.axes.push_back(AxisSpace{AxisKind::kContextLeft, {0, 1}, {}});
    space.layers.push_back(ls);
    const Dataset ds = GenLaggedProduct(seed * 31, 1, 150, 50, 4);
    Rng srng(seed, rngstream::kDataSplit);
    Dataset train, heldout;
    SplitHeldout(ds, 0.1, &srng, &train, &heldout);
    SearchConfig cfg = SmallConfig(SearchMethod::kSoftmaxDarts, seed);
    cfg.epochs_search = 25;
    cfg.lr_arch = 0.02;
    cfg.lr_model = 0.02;
    Supernet fresh(space);
    const SearchOutcome out = JointDartsSearch(&fresh, cfg, train, heldout);
    const TrajectoryPoint &last = out.trajectory.back();
    if (last.lambda[1] > 0.5) wins++;
  }
  CHECK(wins == 5);
}

TEST_CASE("pipelined stage two leaves model parameters bit-identical") {
  SearchSpace space = LeftAxisSpace({0, 1, 2}, 1, 3, 6, 3, 2);
  Supernet net(space);
  const Dataset ds = GenLaggedProduct(902, 1, 30, 20, 3);
  Rng srng(902, rngstream::kDataSplit);
  Dataset train, heldout;
  SplitHeldout(ds, 0.1, &srng, &train, &heldout);
  std::vector<std::vector<double>> snapshot;
  const auto capture = [&snapshot](Supernet &n) {
    for (auto &[name, m] : n.ModelTensors()) snapshot.push_back(m->data);
  };
  const SearchOutcome out = PipelinedSearch(
      &net, SmallConfig(SearchMethod::kPipeGumbel, 902), train, heldout, capture);
  (void)out;
  auto tensors = net.ModelTensors();
  REQUIRE(tensors.size() == snapshot.size());
  for (size_t i = 0; i < tensors.size(); i++) {
    CHECK(tensors[i].second->data == snapshot[i]);
  }
}

TEST_CASE("stage-one uniform sampling is unbiased over ten thousand batches") {
  SearchSpace space = LeftAxisSpace({0, 1, 2, 3}, 0, 2, 2, 1, 2);
  Supernet net(space);
  // 100 sequences, batch 1 -> 100 batches/epoch; 100 search epochs = 10,000
  const Dataset ds = GenLaggedProduct(903, 1, 101, 6, 2);
  Rng srng(903, rngstream::kDataSplit);
  Dataset train, heldout;
  SplitHeldout(ds, 0.01, &srng, &train, &heldout);
  REQUIRE(train.sequences.size() == 100);
  SearchConfig cfg = SmallConfig(SearchMethod::kPipeGumbel, 903);
  cfg.epochs_search = 100;
  cfg.epochs_arch = 1;
  cfg.batch_seqs = 1;
  const SearchOutcome out = PipelinedSearch(&net, cfg, train, heldout);
  int64_t total = 0;
  for (int64_t c : out.stage1_counts[0][0]) total += c;
  CHECK(total == 10000);
  for (int64_t c : out.stage1_counts[0][0]) {
    CHECK(std::abs(c / 10000.0 - 0.25) <= 0.02);
  }
}

TEST_CASE("dominant penalty drives stage two to the cheapest candidates") {
  SearchSpace space;
  space.num_layers = 2;
  space.input_dim = 3;
  space.hidden_dim = 6;
  space.classes = 2;
  space.default_dim = 4;
  for (int l = 0; l < 2; l++) {
    LayerSpace ls;
    ls.fixed_left = 1;
    ls.fixed_right = 1;
    ls.axes.push_back(AxisSpace{AxisKind::kBottleneckDim, {2, 4}, {}});
    space.layers.push_back(ls);
  }
  const Dataset ds = GenLaggedProduct(904, 1, 30, 20, 3);
  Rng srng(904, rngstream::kDataSplit);
  Dataset train, heldout;
  SplitHeldout(ds, 0.1, &srng, &train, &heldout);
  Supernet net(space);
  SearchConfig cfg = SmallConfig(SearchMethod::kPipeGumbel, 904);
  cfg.eta = 10.0;  // overwhelms the data term by orders of magnitude
  cfg.epochs_arch = 4;
  const SearchOutcome out = PipelinedSearch(&net, cfg, train, heldout);
  for (const LayerChoice &ch : out.derived.layers) CHECK(ch.dim == 2);
}

TEST_CASE("retrain learns the planted lag with the right contexts") {
  SearchSpace space;
  space.num_layers = 1;
  space.input_dim = 2;
  space.hidden_dim = 32;
  space.classes = 2;
  space.default_dim = 4;
  LayerSpace ls;
  ls.fixed_left = 2;
  ls.fixed_right = 2;
  space.layers.push_back(ls);
  space.FillParamCounts();
  const Dataset ds = GenLaggedProduct(905, 2, 400, 60, 2);
  Rng srng(905, rngstream::kDataSplit);
  Dataset train, heldout;
  SplitHeldout(ds, 0.05, &srng, &train, &heldout);
  const Dataset test = GenLaggedProduct(906, 2, 40, 60, 2);
  SearchConfig cfg = SmallConfig(SearchMethod::kPipeGumbel, 905);
  cfg.epochs_retrain = 3;
  CandidateSpec spec;
  spec.input_dim = 2;
  spec.hidden_dim = 32;
  spec.classes = 2;
  spec.layers = {LayerChoice{2, 2, 0, false}};
  const RetrainResult good = Retrain(spec, space, cfg, train, heldout, test, 1);
  CHECK(good.test.accuracy > 0.95);
  CHECK(good.param_count ==
        LayerParamCountResolved(2, 32, 2, 2, 4) + 2 * 32 + 2);

  // missing the planted lag: accuracy cannot beat chance by much
  CandidateSpec blind = spec;
  blind.layers = {LayerChoice{0, 0, 2, false}};
  SearchSpace bspace = space;
  bspace.layers[0].fixed_left = 0;
  bspace.layers[0].fixed_right = 0;
  bspace.default_dim = 2;
  const RetrainResult bad = Retrain(blind, bspace, cfg, train, heldout, test, 1);
  CHECK(bad.test.accuracy <= 0.55);
}

TEST_CASE("random search returns its single sample when n is one") {
  SearchSpace space = LeftAxisSpace({0, 1, 2}, 1, 4, 8, 4, 2);
  const Dataset ds = GenLaggedProduct(907, 1, 30, 20, 4);
  Rng srng(907, rngstream::kDataSplit);
  Dataset train, heldout;
  SplitHeldout(ds, 0.1, &srng, &train, &heldout);
  SearchConfig cfg = SmallConfig(SearchMethod::kRandom, 907);
  const RandomSearchResult r = RandomSearch(space, cfg, train, heldout, heldout, 1);
  CHECK(r.all.size() == 1);
  CHECK(r.best.index == 0);
  CHECK(r.best.spec == r.all[0].spec);
}

TEST_CASE("random search on a singleton space always returns the same spec") {
  SearchSpace space = LeftAxisSpace({2}, 1, 4, 6, 3, 2);
  const Dataset ds = GenLaggedProduct(908, 1, 24, 18, 4);
  Rng srng(908, rngstream::kDataSplit);
  Dataset train, heldout;
  SplitHeldout(ds, 0.1, &srng, &train, &heldout);
  SearchConfig cfg = SmallConfig(SearchMethod::kRandom, 908);
  const RandomSearchResult r = RandomSearch(space, cfg, train, heldout, heldout, 3);
  for (const RankedCandidate &c : r.all) {
    CHECK(c.spec.layers[0].left == 2);
  }
}

TEST_CASE("best-of-five is at least as good as the average single sample") {
  SearchSpace space = LeftAxisSpace({0, 1, 2, 3}, 1, 4, 8, 4, 2, 2);
  SearchConfig cfg = SmallConfig(SearchMethod::kRandom, 909);
  const Dataset ds = GenLaggedProduct(909, 2, 60, 30, 4);
  Rng srng(909, rngstream::kDataSplit);
  Dataset train, heldout;
  SplitHeldout(ds, 0.1, &srng, &train, &heldout);
  double best_sum = 0.0, mean_sum = 0.0;
  for (uint64_t seed = 0; seed < 10; seed++) {
    cfg.seed = 1000 + seed;
    const RandomSearchResult r = RandomSearch(space, cfg, train, heldout, heldout, 5);
    best_sum += r.best.heldout_accuracy;
    double mean = 0.0;
    for (const RankedCandidate &c : r.all) mean += c.heldout_accuracy;
    mean_sum += mean / r.all.size();
  }
  CHECK(best_sum >= mean_sum);
}

TEST_CASE("exhaustive oracle enumerates and ranks a small space") {
  // 2 layers x right-context {0..2}: 9 candidates
  SearchSpace space;
  space.num_layers = 2;
  space.input_dim = 4;
  space.hidden_dim = 6;
  space.classes = 2;
  space.default_dim = 3;
  for (int l = 0; l < 2; l++) {
    LayerSpace ls;
    ls.fixed_left = 0;
    ls.axes.push_back(AxisSpace{AxisKind::kContextRight, {0, 1, 2}, {}});
    space.layers.push_back(ls);
  }
  const Dataset ds = GenLaggedProduct(910, 1, 40, 24, 4);
  Rng srng(910, rngstream::kDataSplit);
  Dataset train, heldout;
  SplitHeldout(ds, 0.1, &srng, &train, &heldout);
  SearchConfig cfg = SmallConfig(SearchMethod::kExhaustive, 910);
  const auto rows = ExhaustiveOracle(space, cfg, train, heldout, heldout);
  REQUIRE(rows.size() == 9);
  for (size_t i = 1; i < rows.size(); i++) {
    CHECK(rows[i - 1].heldout_accuracy >= rows[i].heldout_accuracy);
  }
  // all nine (d1, d2) pairs appear exactly once
  std::set<std::pair<int, int>> seen;
  for (const auto &r : rows) {
    seen.insert({r.spec.layers[0].right, r.spec.layers[1].right});
  }
  CHECK(seen.size() == 9);
}

TEST_CASE("exhaustive oracle refuses oversized spaces with the exact size") {
  SearchSpace space = LeftAxisSpace({0, 1, 2, 3}, 1, 2, 4, 2, 2, 14);
  SearchConfig cfg = SmallConfig(SearchMethod::kExhaustive, 911);
  const Dataset ds = GenLaggedProduct(911, 1, 4, 10, 2);
  Rng srng(911, rngstream::kDataSplit);
  Dataset train, heldout;
  SplitHeldout(ds, 0.25, &srng, &train, &heldout);
  try {
    ExhaustiveOracle(space, cfg, train, heldout, heldout);
    FAIL("expected a refusal");
  } catch (const std::invalid_argument &e) {
    const std::string msg = e.what();
    CHECK(msg.find("268435456") != std::string::npos);  // 4^14
    CHECK(msg.find("256") != std::string::npos);
  }
  // degenerate one-candidate space enumerates a single row
  SearchSpace tiny = LeftAxisSpace({1}, 1, 2, 4, 2, 2);
  const auto rows = ExhaustiveOracle(tiny, cfg, train, heldout, heldout);
  CHECK(rows.size() == 1);
}

TEST_CASE("identical configuration and seed reproduce the search outcome") {
  SearchSpace space = LeftAxisSpace({0, 1, 2}, 2, 3, 6, 3, 2);
  const Dataset ds = GenLaggedProduct(912, 2, 30, 24, 3);
  Rng s1(912, rngstream::kDataSplit), s2(912, rngstream::kDataSplit);
  Dataset train1, held1, train2, held2;
  SplitHeldout(ds, 0.1, &s1, &train1, &held1);
  SplitHeldout(ds, 0.1, &s2, &train2, &held2);
  SearchConfig cfg = SmallConfig(SearchMethod::kPipeGumbel, 912);
  Supernet a(space), b(space);
  const SearchOutcome ra = PipelinedSearch(&a, cfg, train1, held1);
  const SearchOutcome rb = PipelinedSearch(&b, cfg, train2, held2);
  CHECK(ra.derived == rb.derived);
  REQUIRE(ra.trajectory.size() == rb.trajectory.size());
  for (size_t i = 0; i < ra.trajectory.size(); i++) {
    CHECK(ra.trajectory[i].lambda == rb.trajectory[i].lambda);
  }
  auto ta = a.ModelTensors();
  auto tb = b.ModelTensors();
  for (size_t i = 0; i < ta.size(); i++) {
    CHECK(ta[i].second->data == tb[i].second->data);
  }
}

TEST_CASE("worker count respects the environment cap") {
  setenv("TDNNAS_THREADS", "1", 1);
  CHECK(WorkerCount(8, 100) == 1);
  unsetenv("TDNNAS_THREADS");
  CHECK(WorkerCount(3, 100) == 3);
  CHECK(WorkerCount(3, 2) == 2);
}

TEST_SUITE_END();
