// src/driver.cc

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

#include "tdnnas/driver.h"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tdnnas/io.h"
#include "tdnnas/report.h"
#include "tdnnas/spec-format.h"

namespace tdnnas {

namespace {

// Retrained candidates inside a search run draw their init seed from this
// fixed stream index so reruns are reproducible.
constexpr uint64_t kRetrainSeedIndex = 0x52455452;  // "RETR"

double Seconds(std::chrono::steady_clock::time_point from) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - from).count();
}

struct LoadedData {
  Dataset train_full;
  Dataset train;
  Dataset heldout;
  Dataset test;
};

LoadedData LoadAndSplit(const Config &cfg, const std::string &train_path,
                        const std::string &test_path) {
  LoadedData d;
  d.train_full = LoadDataset(train_path);
  d.test = LoadDataset(test_path);
  if (d.train_full.feature_dim != d.test.feature_dim ||
      d.train_full.classes != d.test.classes) {
    throw std::invalid_argument("train/test datasets disagree on geometry");
  }
  Rng split_rng(cfg.seed, rngstream::kDataSplit);
  SplitHeldout(d.train_full, cfg.heldout_frac, &split_rng, &d.train, &d.heldout);
  return d;
}

Checkpoint SupernetCheckpoint(Supernet *net, uint64_t config_hash) {
  Checkpoint ck;
  ck.config_hash = config_hash;
  for (const auto &[name, m] : net->ModelTensors()) ck.Add(name, *m);
  for (const auto &[name, m] : net->ArchTensors()) ck.Add(name, *m);
  return ck;
}

Checkpoint ModelCheckpoint(CandidateModel *model, uint64_t config_hash) {
  Checkpoint ck;
  ck.config_hash = config_hash;
  for (const auto &[name, m] : model->NamedTensors()) ck.Add(name, *m);
  return ck;
}

RunRecord BaseRecord(const Config &cfg, const std::string &method_override = "") {
  RunRecord rec;
  const std::string method = method_override.empty() ? cfg.method : method_override;
  rec.id = cfg.run_id.empty() ? method + "-s" + std::to_string(cfg.seed) : cfg.run_id;
  rec.method = method;
  rec.eta = cfg.eta;
  rec.seed = cfg.seed;
  rec.config_text = FormatConfig(cfg);
  rec.config_hash = HashHex(ConfigHash(cfg));
  return rec;
}

}  // namespace

void EnsureDir(const std::string &dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir + ": " + ec.message());
}

void CheckConfigHash(const Config &cfg, uint64_t artifact_hash, const std::string &what) {
  if (artifact_hash != ConfigHash(cfg)) {
    throw std::invalid_argument(what + " was produced under config hash " +
                                HashHex(artifact_hash) + " but the supplied config hashes to " +
                                HashHex(ConfigHash(cfg)));
  }
}

void GenDataFiles(const Config &cfg, const std::string &out_dir) {
  EnsureDir(out_dir);
  SaveDataset(GenerateTrainDataset(cfg), out_dir + "/train.ds");
  SaveDataset(GenerateTestDataset(cfg), out_dir + "/test.ds");
}

RunRecord RunSearchPipeline(const Config &cfg, const std::string &train_path,
                            const std::string &test_path, const std::string &out_dir) {
  const auto started = std::chrono::steady_clock::now();
  const SearchMethod method = SearchMethodFromString(cfg.method);
  if (method == SearchMethod::kRandom || method == SearchMethod::kExhaustive) {
    throw std::invalid_argument(
        "search: method '" + cfg.method +
        "' belongs to the random-search/enumerate commands");
  }
  EnsureDir(out_dir);
  const LoadedData data = LoadAndSplit(cfg, train_path, test_path);
  SearchSpace space =
      BuildSearchSpace(cfg, data.train.feature_dim, data.train.classes);
  const SearchConfig scfg = ToSearchConfig(cfg);
  const uint64_t config_hash = ConfigHash(cfg);

  Supernet net(space);
  SearchOutcome outcome;
  RunRecord rec = BaseRecord(cfg);
  if (IsPipelined(method)) {
    const std::string stage1_path = out_dir + "/stage1.ck";
    outcome = PipelinedSearch(&net, scfg, data.train, data.heldout,
                              [&](Supernet &n) {
                                SaveCheckpoint(SupernetCheckpoint(&n, config_hash),
                                               stage1_path);
                              });
    rec.stage1_checkpoint_file = "stage1.ck";
    rec.stage1_counts = outcome.stage1_counts;
  } else {
    outcome = JointDartsSearch(&net, scfg, data.train, data.heldout);
  }
  SaveCheckpoint(SupernetCheckpoint(&net, config_hash), out_dir + "/checkpoint.ck");
  WriteTrajectory(outcome.trajectory, out_dir + "/trajectory.jsonl");
  WriteSpecFile(outcome.derived, out_dir + "/derived.spec");

  std::unique_ptr<CandidateModel> model;
  const RetrainResult retrain =
      Retrain(outcome.derived, space, scfg, data.train, data.heldout, data.test,
              MixSeed(cfg.seed, kRetrainSeedIndex), &model);
  SaveCheckpoint(ModelCheckpoint(model.get(), config_hash), out_dir + "/model.ck");

  rec.spec = outcome.derived;
  rec.spec_string = FormatSpecString(outcome.derived);
  rec.param_count = retrain.param_count;
  rec.epochs = outcome.epochs;
  rec.epochs.insert(rec.epochs.end(), retrain.epochs.begin(), retrain.epochs.end());
  rec.heldout = retrain.heldout;
  rec.test = retrain.test;
  rec.trajectory_file = "trajectory.jsonl";
  rec.checkpoint_file = "checkpoint.ck";
  rec.spec_file = "derived.spec";
  rec.model_file = "model.ck";
  rec.wall_time_sec = Seconds(started);
  WriteRunRecord(rec, out_dir + "/run.json");
  return rec;
}

CandidateSpec DeriveFromCheckpoint(const Config &cfg, const std::string &ckpt_path,
                                   const std::string &out_spec_path) {
  const Checkpoint ck = LoadCheckpoint(ckpt_path);
  CheckConfigHash(cfg, ck.config_hash, "checkpoint " + ckpt_path);
  // The space needs the dataset geometry; recover it from the checkpoint's
  // first-layer linear block and the classifier.
  const Checkpoint::Entry *lin0 = ck.Find("model/layer1/linear/0");
  const Checkpoint::Entry *clsw = ck.Find("model/classifier/weight");
  if (lin0 == nullptr || clsw == nullptr) {
    throw std::runtime_error("checkpoint " + ckpt_path + " is not a supernet checkpoint");
  }
  SearchSpace space = BuildSearchSpace(cfg, static_cast<int>(lin0->rows),
                                       static_cast<int>(clsw->rows));
  ArchWeights arch;
  arch.InitZero(space);
  for (int l = 0; l < space.num_layers; l++) {
    for (size_t a = 0; a < space.layers[l].axes.size(); a++) {
      const std::string name = "arch/layer" + std::to_string(l + 1) + "/" +
                               AxisKindToString(space.layers[l].axes[a].kind) +
                               "/log_alpha";
      ck.CopyTo(name, &arch.log_alpha[l][a]);
    }
  }
  const CandidateSpec spec = DeriveArchitecture(arch, space);
  WriteSpecFile(spec, out_spec_path);
  return spec;
}

RunRecord TrainSpecFile(const Config &cfg, const std::string &spec_path,
                        const std::string &train_path, const std::string &test_path,
                        const std::string &out_dir) {
  const auto started = std::chrono::steady_clock::now();
  EnsureDir(out_dir);
  const CandidateSpec spec = ReadSpecFile(spec_path);
  const LoadedData data = LoadAndSplit(cfg, train_path, test_path);
  SearchSpace space = BuildSearchSpace(cfg, data.train.feature_dim, data.train.classes);
  const SearchConfig scfg = ToSearchConfig(cfg);
  std::unique_ptr<CandidateModel> model;
  const RetrainResult retrain =
      Retrain(spec, space, scfg, data.train, data.heldout, data.test,
              MixSeed(cfg.seed, kRetrainSeedIndex), &model);
  SaveCheckpoint(ModelCheckpoint(model.get(), ConfigHash(cfg)), out_dir + "/model.ck");
  WriteMetricsFile(retrain.heldout, retrain.test, out_dir + "/metrics.json");

  RunRecord rec = BaseRecord(cfg, "train");
  rec.spec = model->spec();
  rec.spec_string = FormatSpecString(spec);
  rec.param_count = retrain.param_count;
  rec.epochs = retrain.epochs;
  rec.heldout = retrain.heldout;
  rec.test = retrain.test;
  rec.spec_file = spec_path;
  rec.model_file = "model.ck";
  rec.wall_time_sec = Seconds(started);
  WriteRunRecord(rec, out_dir + "/run.json");
  return rec;
}

RunRecord RunRandomSearch(const Config &cfg, const std::string &train_path,
                          const std::string &test_path, const std::string &out_dir) {
  const auto started = std::chrono::steady_clock::now();
  EnsureDir(out_dir);
  const LoadedData data = LoadAndSplit(cfg, train_path, test_path);
  SearchSpace space = BuildSearchSpace(cfg, data.train.feature_dim, data.train.classes);
  const SearchConfig scfg = ToSearchConfig(cfg);
  const RandomSearchResult result = RandomSearch(space, scfg, data.train, data.heldout,
                                                 data.test, scfg.random_candidates);
  {
    std::ofstream out(out_dir + "/candidates.csv", std::ios::trunc);
    out << "# TDNNAS-RSCAND1 1\n";
    out << "sample,architecture,heldout_accuracy,test_accuracy,params\n";
    for (const RankedCandidate &c : result.all) {
      out << c.index << ",\"" << FormatSpecString(c.spec) << "\","
          << c.heldout_accuracy << "," << c.test_accuracy << "," << c.param_count
          << "\n";
    }
  }
  WriteSpecFile(result.best.spec, out_dir + "/best.spec");
  std::unique_ptr<CandidateModel> model;
  const RetrainResult best = Retrain(result.best.spec, space, scfg, data.train,
                                     data.heldout, data.test,
                                     MixSeed(cfg.seed, result.best.index), &model);
  SaveCheckpoint(ModelCheckpoint(model.get(), ConfigHash(cfg)), out_dir + "/model.ck");

  RunRecord rec = BaseRecord(cfg, "random");
  rec.spec = result.best.spec;
  rec.spec_string = FormatSpecString(result.best.spec);
  rec.param_count = best.param_count;
  rec.epochs = best.epochs;
  rec.heldout = best.heldout;
  rec.test = best.test;
  rec.spec_file = "best.spec";
  rec.model_file = "model.ck";
  rec.wall_time_sec = Seconds(started);
  WriteRunRecord(rec, out_dir + "/run.json");
  return rec;
}

std::vector<RankedCandidate> RunEnumerate(const Config &cfg,
                                          const std::string &train_path,
                                          const std::string &test_path,
                                          const std::string &out_dir) {
  EnsureDir(out_dir);
  const LoadedData data = LoadAndSplit(cfg, train_path, test_path);
  SearchSpace space = BuildSearchSpace(cfg, data.train.feature_dim, data.train.classes);
  const SearchConfig scfg = ToSearchConfig(cfg);
  const std::vector<RankedCandidate> rows =
      ExhaustiveOracle(space, scfg, data.train, data.heldout, data.test);
  std::ofstream out(out_dir + "/ranking.csv", std::ios::trunc);
  out << "# TDNNAS-RANK1 1\n";
  out << "rank,index,architecture,heldout_accuracy,test_accuracy,params\n";
  for (size_t i = 0; i < rows.size(); i++) {
    out << (i + 1) << "," << rows[i].index << ",\"" << FormatSpecString(rows[i].spec)
        << "\"," << rows[i].heldout_accuracy << "," << rows[i].test_accuracy << ","
        << rows[i].param_count << "\n";
  }
  return rows;
}

Metrics EvalModelFile(const Config &cfg, const std::string &model_path,
                      const std::string &spec_path, const std::string &data_path,
                      const std::string &out_metrics_path) {
  const CandidateSpec spec = ReadSpecFile(spec_path);
  const Checkpoint ck = LoadCheckpoint(model_path);
  CheckConfigHash(cfg, ck.config_hash, "model checkpoint " + model_path);
  CandidateModel model(spec, cfg.model_bottleneck);
  for (auto &[name, m] : model.NamedTensors()) ck.CopyTo(name, m);
  const Dataset data = LoadDataset(data_path);
  const Metrics metrics = Evaluate(model, data, LossKindFromString(cfg.loss_kind));
  if (!out_metrics_path.empty()) {
    WriteMetricsFile(metrics, metrics, out_metrics_path);
  }
  return metrics;
}

void ReportFiles(const std::vector<std::string> &run_paths, const std::string &csv_path,
                 const std::string &md_path) {
  std::vector<RunRecord> records;
  for (const std::string &p : run_paths) records.push_back(ReadRunRecord(p));
  for (const std::string &p : {csv_path, md_path}) {
    const auto parent = std::filesystem::path(p).parent_path();
    if (!parent.empty()) EnsureDir(parent.string());
  }
  WriteReport(records, csv_path, md_path);
}

}  // namespace tdnnas
