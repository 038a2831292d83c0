// tests/driver-test.cc

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

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "doctest.h"
#include "json.hpp"
#include "tdnnas/driver.h"
#include "tdnnas/io.h"
#include "tdnnas/spec-format.h"
#include "test-util.h"

using namespace tdnnas;

namespace {

std::string FreshDir(const std::string &name) {
  const auto dir = std::filesystem::temp_directory_path() / "tdnnas-driver-test" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

Config TinyConfig() {
  Config cfg;
  cfg.model_layers = 1;
  cfg.model_hidden = 12;
  cfg.model_bottleneck = 4;
  cfg.d_max = 2;
  cfg.method = "pipe-gumbel";
  cfg.epochs_search = 2;
  cfg.epochs_arch = 2;
  cfg.epochs_retrain = 2;
  cfg.batch_seqs = 4;
  cfg.gumbel_samples = 2;
  cfg.seed = 31;
  cfg.task_kind = "lagged-product";
  cfg.task_lag = 1;
  cfg.task_n_seq = 40;
  cfg.task_n_seq_test = 12;
  cfg.task_seq_len = 24;
  cfg.task_feature_dim = 4;
  return cfg;
}

std::vector<uint8_t> Slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
}

// run.json text with the wall-time line dropped (the one permitted delta).
std::string RunRecordStableText(const std::string &path) {
  nlohmann::ordered_json j;
  std::ifstream in(path);
  in >> j;
  j.erase("wall_time_sec");
  return j.dump();
}

}  // namespace

TEST_SUITE_BEGIN("driver");

TEST_CASE("gen-data writes loadable train and test files") {
  const Config cfg = TinyConfig();
  const std::string dir = FreshDir("gendata");
  GenDataFiles(cfg, dir);
  const Dataset train = LoadDataset(dir + "/train.ds");
  const Dataset test = LoadDataset(dir + "/test.ds");
  CHECK(train.sequences.size() == 40);
  CHECK(test.sequences.size() == 12);
  CHECK(train.provenance.seed != test.provenance.seed);
  // bytes match an in-memory regeneration
  CHECK(SerializeDataset(GenerateTrainDataset(cfg)) == Slurp(dir + "/train.ds"));
}

TEST_CASE("search pipeline emits its artifact set and freezes stage one") {
  const Config cfg = TinyConfig();
  const std::string data = FreshDir("search-data");
  GenDataFiles(cfg, data);
  const std::string out = FreshDir("search-out");
  const RunRecord rec =
      RunSearchPipeline(cfg, data + "/train.ds", data + "/test.ds", out);
  for (const char *f : {"checkpoint.ck", "stage1.ck", "trajectory.jsonl",
                        "derived.spec", "model.ck", "run.json"}) {
    CHECK(std::filesystem::exists(out + "/" + f));
  }
  // pipeline freeze at the byte level: every model/ tensor in stage1.ck is
  // bitwise identical in the final supernet checkpoint
  const Checkpoint stage1 = LoadCheckpoint(out + "/stage1.ck");
  const Checkpoint final_ck = LoadCheckpoint(out + "/checkpoint.ck");
  int compared = 0;
  for (const Checkpoint::Entry &e : stage1.entries) {
    if (e.name.rfind("model/", 0) != 0) continue;
    const Checkpoint::Entry *f = final_ck.Find(e.name);
    REQUIRE(f != nullptr);
    CHECK(f->data == e.data);
    compared++;
  }
  CHECK(compared > 0);
  // arch tensors did move in stage 2
  bool arch_moved = false;
  for (const Checkpoint::Entry &e : stage1.entries) {
    if (e.name.rfind("arch/", 0) != 0) continue;
    const Checkpoint::Entry *f = final_ck.Find(e.name);
    REQUIRE(f != nullptr);
    if (f->data != e.data) arch_moved = true;
  }
  CHECK(arch_moved);

  // the derived spec round-trips and matches the run record
  const CandidateSpec derived = ReadSpecFile(out + "/derived.spec");
  CHECK(derived == rec.spec);
  CHECK(FormatSpecString(derived) == rec.spec_string);

  // trajectory rows stay on the simplex
  const auto traj = ReadTrajectory(out + "/trajectory.jsonl");
  CHECK(!traj.empty());
  for (const TrajectoryPoint &p : traj) {
    double sum = 0.0;
    for (double v : p.lambda) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("identical config and seed reproduce run records and checkpoint bytes") {
  const Config cfg = TinyConfig();
  const std::string data = FreshDir("det-data");
  GenDataFiles(cfg, data);
  const std::string out1 = FreshDir("det-out1");
  const std::string out2 = FreshDir("det-out2");
  RunSearchPipeline(cfg, data + "/train.ds", data + "/test.ds", out1);
  RunSearchPipeline(cfg, data + "/train.ds", data + "/test.ds", out2);
  CHECK(RunRecordStableText(out1 + "/run.json") == RunRecordStableText(out2 + "/run.json"));
  CHECK(Slurp(out1 + "/checkpoint.ck") == Slurp(out2 + "/checkpoint.ck"));
  CHECK(Slurp(out1 + "/stage1.ck") == Slurp(out2 + "/stage1.ck"));
  CHECK(Slurp(out1 + "/model.ck") == Slurp(out2 + "/model.ck"));
  CHECK(Slurp(out1 + "/trajectory.jsonl") == Slurp(out2 + "/trajectory.jsonl"));
}

TEST_CASE("derive rejects a mismatched configuration") {
  const Config cfg = TinyConfig();
  const std::string data = FreshDir("derive-data");
  GenDataFiles(cfg, data);
  const std::string out = FreshDir("derive-out");
  RunSearchPipeline(cfg, data + "/train.ds", data + "/test.ds", out);

  const CandidateSpec again =
      DeriveFromCheckpoint(cfg, out + "/checkpoint.ck", out + "/rederived.spec");
  CHECK(again == ReadSpecFile(out + "/derived.spec"));

  Config tampered = cfg;
  tampered.eta = 0.5;
  CHECK_THROWS_AS(DeriveFromCheckpoint(tampered, out + "/checkpoint.ck",
                                       out + "/bad.spec"),
                  std::invalid_argument);
}

TEST_CASE("train and eval agree with the recorded metrics") {
  const Config cfg = TinyConfig();
  const std::string data = FreshDir("train-data");
  GenDataFiles(cfg, data);
  const std::string search_out = FreshDir("train-search");
  RunSearchPipeline(cfg, data + "/train.ds", data + "/test.ds", search_out);
  const std::string train_out = FreshDir("train-out");
  const RunRecord rec = TrainSpecFile(cfg, search_out + "/derived.spec",
                                      data + "/train.ds", data + "/test.ds", train_out);
  CHECK(std::filesystem::exists(train_out + "/metrics.json"));
  CHECK(std::filesystem::exists(train_out + "/model.ck"));
  const Metrics test_metrics =
      EvalModelFile(cfg, train_out + "/model.ck", search_out + "/derived.spec",
                    data + "/test.ds", train_out + "/eval.json");
  CHECK(test_metrics.accuracy == rec.test.accuracy);
  CHECK(test_metrics.mean_loss == doctest::Approx(rec.test.mean_loss).epsilon(1e-12));
}

TEST_CASE("search refuses non-darts methods") {
  Config cfg = TinyConfig();
  cfg.method = "random";
  const std::string data = FreshDir("refuse-data");
  GenDataFiles(cfg, data);
  CHECK_THROWS_AS(RunSearchPipeline(cfg, data + "/train.ds", data + "/test.ds",
                                    FreshDir("refuse-out")),
                  std::invalid_argument);
}

TEST_CASE("random search and enumerate write their artifacts") {
  Config cfg = TinyConfig();
  cfg.random_candidates = 3;
  const std::string data = FreshDir("rs-data");
  GenDataFiles(cfg, data);
  const std::string rs_out = FreshDir("rs-out");
  const RunRecord rec =
      RunRandomSearch(cfg, data + "/train.ds", data + "/test.ds", rs_out);
  CHECK(rec.method == "random");
  CHECK(std::filesystem::exists(rs_out + "/candidates.csv"));
  CHECK(std::filesystem::exists(rs_out + "/best.spec"));

  const std::string enum_out = FreshDir("enum-out");
  const auto rows = RunEnumerate(cfg, data + "/train.ds", data + "/test.ds", enum_out);
  CHECK(rows.size() == 9);  // (d_max+1)^2 for one layer
  CHECK(std::filesystem::exists(enum_out + "/ranking.csv"));
}

TEST_SUITE_END();
