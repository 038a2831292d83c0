// tests/capi-test.cc

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

// Exercises the shared library through the C surface only.

#include <cstring>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "tdnnas.h"

namespace {

std::string FreshDir(const std::string &name) {
  const auto dir = std::filesystem::temp_directory_path() / "tdnnas-capi-test" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

struct ConfigHandle {
  tdnnas_config *cfg = nullptr;
  ~ConfigHandle() { tdnnas_config_free(cfg); }
};

void SetTiny(tdnnas_config *cfg) {
  const char *pairs[][2] = {
      {"model.layers", "1"},       {"model.hidden_dim", "12"},
      {"model.bottleneck_dim", "4"}, {"space.d_max", "2"},
      {"search.method", "pipe-gumbel"}, {"search.epochs_search", "2"},
      {"search.epochs_arch", "2"}, {"search.epochs_retrain", "2"},
      {"search.batch_seqs", "4"},  {"search.gumbel_samples", "2"},
      {"search.seed", "31"},       {"task.lag", "1"},
      {"task.n_seq", "40"},        {"task.n_seq_test", "12"},
      {"task.seq_len", "24"},      {"task.feature_dim", "4"},
  };
  for (const auto &p : pairs) {
    REQUIRE(tdnnas_config_set(cfg, p[0], p[1]) == TDNNAS_OK);
  }
}

}  // namespace

TEST_SUITE_BEGIN("capi");

TEST_CASE("version and error state") {
  CHECK(std::string(tdnnas_version()) == "0.1.0");
  CHECK(std::string(tdnnas_last_error()).empty());
}

TEST_CASE("config lifecycle, errors carry messages and codes") {
  ConfigHandle h;
  REQUIRE(tdnnas_config_create(&h.cfg) == TDNNAS_OK);
  CHECK(tdnnas_config_set(h.cfg, "search.eta", "0.03") == TDNNAS_OK);
  char buf[64];
  CHECK(tdnnas_config_get(h.cfg, "search.eta", buf, sizeof(buf)) == TDNNAS_OK);
  CHECK(std::string(buf) == "0.03");

  CHECK(tdnnas_config_set(h.cfg, "bogus.key", "1") == TDNNAS_EINVAL);
  CHECK(std::string(tdnnas_last_error()).find("unknown config key") != std::string::npos);
  CHECK(tdnnas_config_set(nullptr, "a", "b") == TDNNAS_EINVAL);

  char tiny[2];
  CHECK(tdnnas_config_get(h.cfg, "search.method", tiny, sizeof(tiny)) == TDNNAS_EINVAL);

  const uint64_t h1 = tdnnas_config_hash(h.cfg);
  CHECK(tdnnas_config_set(h.cfg, "search.seed", "777") == TDNNAS_OK);
  CHECK(tdnnas_config_hash(h.cfg) != h1);

  const std::string dir = FreshDir("config");
  const std::string path = dir + "/c.cfg";
  CHECK(tdnnas_config_save(h.cfg, path.c_str()) == TDNNAS_OK);
  tdnnas_config *loaded = nullptr;
  REQUIRE(tdnnas_config_load(path.c_str(), &loaded) == TDNNAS_OK);
  CHECK(tdnnas_config_hash(loaded) == tdnnas_config_hash(h.cfg));
  tdnnas_config_free(loaded);

  CHECK(tdnnas_config_load((dir + "/missing.cfg").c_str(), &loaded) != TDNNAS_OK);
}

TEST_CASE("datasets through the C surface") {
  ConfigHandle h;
  REQUIRE(tdnnas_config_create(&h.cfg) == TDNNAS_OK);
  SetTiny(h.cfg);
  tdnnas_dataset *data = nullptr;
  REQUIRE(tdnnas_dataset_generate(h.cfg, 5, 9, &data) == TDNNAS_OK);
  uint32_t n_seq = 0, feat = 0, classes = 0;
  CHECK(tdnnas_dataset_info(data, &n_seq, &feat, &classes) == TDNNAS_OK);
  CHECK(n_seq == 9);
  CHECK(feat == 4);
  CHECK(classes == 2);
  const std::string dir = FreshDir("dataset");
  const std::string path = dir + "/d.ds";
  CHECK(tdnnas_dataset_save(data, path.c_str()) == TDNNAS_OK);
  tdnnas_dataset_free(data);
  tdnnas_dataset *loaded = nullptr;
  REQUIRE(tdnnas_dataset_load(path.c_str(), &loaded) == TDNNAS_OK);
  CHECK(tdnnas_dataset_info(loaded, &n_seq, &feat, &classes) == TDNNAS_OK);
  CHECK(n_seq == 9);
  tdnnas_dataset_free(loaded);
  CHECK(tdnnas_dataset_load((dir + "/missing.ds").c_str(), &loaded) == TDNNAS_EIO);
}

TEST_CASE("space size string matches the published counts") {
  ConfigHandle h;
  REQUIRE(tdnnas_config_create(&h.cfg) == TDNNAS_OK);
  REQUIRE(tdnnas_config_set(h.cfg, "model.layers", "14") == TDNNAS_OK);
  REQUIRE(tdnnas_config_set(h.cfg, "model.hidden_dim", "240") == TDNNAS_OK);
  REQUIRE(tdnnas_config_set(h.cfg, "space.d_max", "3") == TDNNAS_OK);
  char buf[128];
  REQUIRE(tdnnas_space_size(h.cfg, 240, 2, buf, sizeof(buf)) == TDNNAS_OK);
  CHECK(std::string(buf) == "72057594037927936");
  REQUIRE(tdnnas_config_set(h.cfg, "space.d_max", "6") == TDNNAS_OK);
  REQUIRE(tdnnas_space_size(h.cfg, 240, 2, buf, sizeof(buf)) == TDNNAS_OK);
  CHECK(std::string(buf) == "459986536544739960976801");
  REQUIRE(tdnnas_config_set(h.cfg, "space.search_context", "false") == TDNNAS_OK);
  REQUIRE(tdnnas_config_set(h.cfg, "space.search_dims", "true") == TDNNAS_OK);
  REQUIRE(tdnnas_config_set(h.cfg, "space.dim_menu",
                            "25,50,80,100,120,160,200,240") == TDNNAS_OK);
  REQUIRE(tdnnas_space_size(h.cfg, 240, 2, buf, sizeof(buf)) == TDNNAS_OK);
  CHECK(std::string(buf) == "4398046511104");
}

TEST_CASE("full pipeline through the C API") {
  ConfigHandle h;
  REQUIRE(tdnnas_config_create(&h.cfg) == TDNNAS_OK);
  SetTiny(h.cfg);
  const std::string data = FreshDir("pipe-data");
  REQUIRE(tdnnas_gen_data(h.cfg, data.c_str()) == TDNNAS_OK);
  const std::string out = FreshDir("pipe-out");
  const std::string train = data + "/train.ds", test = data + "/test.ds";
  REQUIRE(tdnnas_search(h.cfg, train.c_str(), test.c_str(), out.c_str()) == TDNNAS_OK);

  char spec_text[512];
  REQUIRE(tdnnas_spec_format((out + "/derived.spec").c_str(), spec_text,
                             sizeof(spec_text)) == TDNNAS_OK);
  CHECK(std::strlen(spec_text) > 0);

  REQUIRE(tdnnas_derive(h.cfg, (out + "/checkpoint.ck").c_str(),
                        (out + "/rederived.spec").c_str()) == TDNNAS_OK);
  char spec_text2[512];
  REQUIRE(tdnnas_spec_format((out + "/rederived.spec").c_str(), spec_text2,
                             sizeof(spec_text2)) == TDNNAS_OK);
  CHECK(std::string(spec_text) == spec_text2);

  const std::string train_out = FreshDir("pipe-train");
  REQUIRE(tdnnas_train(h.cfg, (out + "/derived.spec").c_str(), train.c_str(),
                       test.c_str(), train_out.c_str()) == TDNNAS_OK);
  CHECK(std::filesystem::exists(train_out + "/metrics.json"));

  double acc = -1.0, loss = -1.0;
  REQUIRE(tdnnas_evaluate(h.cfg, (train_out + "/model.ck").c_str(),
                          (out + "/derived.spec").c_str(), test.c_str(), nullptr, &acc,
                          &loss) == TDNNAS_OK);
  CHECK(acc >= 0.0);
  CHECK(acc <= 1.0);
  CHECK(loss > 0.0);

  const std::string rs_out = FreshDir("pipe-rs");
  REQUIRE(tdnnas_config_set(h.cfg, "search.random_candidates", "2") == TDNNAS_OK);
  REQUIRE(tdnnas_random_search(h.cfg, train.c_str(), test.c_str(), rs_out.c_str()) ==
          TDNNAS_OK);

  const std::string report_dir = FreshDir("pipe-report");
  const std::string run1 = out + "/run.json";
  const std::string run2 = rs_out + "/run.json";
  const char *runs[] = {run1.c_str(), run2.c_str()};
  REQUIRE(tdnnas_report(runs, 2, (report_dir + "/report.csv").c_str(),
                        (report_dir + "/report.md").c_str()) == TDNNAS_OK);
  CHECK(std::filesystem::exists(report_dir + "/report.csv"));
}

TEST_CASE("enumerate refuses an astronomically large space through the C API") {
  ConfigHandle h;
  REQUIRE(tdnnas_config_create(&h.cfg) == TDNNAS_OK);
  SetTiny(h.cfg);
  REQUIRE(tdnnas_config_set(h.cfg, "model.layers", "14") == TDNNAS_OK);
  REQUIRE(tdnnas_config_set(h.cfg, "model.hidden_dim", "16") == TDNNAS_OK);
  REQUIRE(tdnnas_config_set(h.cfg, "space.d_max", "6") == TDNNAS_OK);
  const std::string data = FreshDir("enum-data");
  REQUIRE(tdnnas_gen_data(h.cfg, data.c_str()) == TDNNAS_OK);
  const std::string out = FreshDir("enum-out");
  CHECK(tdnnas_enumerate(h.cfg, (data + "/train.ds").c_str(),
                         (data + "/test.ds").c_str(), out.c_str()) == TDNNAS_EINVAL);
  const std::string msg = tdnnas_last_error();
  CHECK(msg.find("459986536544739960976801") != std::string::npos);
  CHECK(msg.find("256") != std::string::npos);
}

TEST_CASE("spec parse through the C API") {
  ConfigHandle h;
  REQUIRE(tdnnas_config_create(&h.cfg) == TDNNAS_OK);
  const std::string dir = FreshDir("spec");
  const std::string path = dir + "/parsed.spec";
  REQUIRE(tdnnas_spec_parse(h.cfg, "{[1,3]}:{-1,1}; {4}:{0}; {[5,14]}:{-3,3}", 8, 2,
                            path.c_str()) == TDNNAS_OK);
  char buf[256];
  REQUIRE(tdnnas_spec_format(path.c_str(), buf, sizeof(buf)) == TDNNAS_OK);
  CHECK(std::string(buf) == "{[1,3]}:{-1,1}; {4}:{0}; {[5,14]}:{-3,3}");
  CHECK(tdnnas_spec_parse(h.cfg, "{1}:{oops", 8, 2, path.c_str()) == TDNNAS_EINVAL);
  CHECK(std::string(tdnnas_last_error()).find("position") != std::string::npos);
}

TEST_SUITE_END();
