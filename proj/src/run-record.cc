// src/run-record.cc

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

#include "tdnnas/run-record.h"

#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "tdnnas/spec-format.h"

namespace tdnnas {

namespace {

using OrderedJson = nlohmann::ordered_json;

OrderedJson SpecToJson(const CandidateSpec &spec) {
  OrderedJson j;
  j["input_dim"] = spec.input_dim;
  j["hidden_dim"] = spec.hidden_dim;
  j["classes"] = spec.classes;
  OrderedJson layers = OrderedJson::array();
  for (const LayerChoice &ch : spec.layers) {
    layers.push_back(OrderedJson{
        {"left", ch.left}, {"right", ch.right}, {"dim", ch.dim}, {"skip", ch.skip}});
  }
  j["layers"] = layers;
  return j;
}

CandidateSpec SpecFromJson(const OrderedJson &j) {
  CandidateSpec spec;
  spec.input_dim = j.at("input_dim").get<int>();
  spec.hidden_dim = j.at("hidden_dim").get<int>();
  spec.classes = j.at("classes").get<int>();
  for (const auto &lj : j.at("layers")) {
    spec.layers.push_back(LayerChoice{lj.at("left").get<int>(), lj.at("right").get<int>(),
                                      lj.at("dim").get<int>(), lj.at("skip").get<bool>()});
  }
  return spec;
}

OrderedJson MetricsToJson(const Metrics &m) {
  OrderedJson j;
  j["accuracy"] = m.accuracy;
  j["mean_loss"] = m.mean_loss;
  j["frames"] = m.frames;
  j["per_class"] = m.per_class;
  return j;
}

Metrics MetricsFromJson(const OrderedJson &j) {
  Metrics m;
  m.accuracy = j.at("accuracy").get<double>();
  m.mean_loss = j.at("mean_loss").get<double>();
  m.frames = j.at("frames").get<int64_t>();
  m.per_class = j.at("per_class").get<std::vector<int64_t>>();
  return m;
}

}  // namespace

void WriteRunRecord(const RunRecord &rec, const std::string &path) {
  OrderedJson j;
  j["magic"] = "TDNNAS-RUN1";
  j["version"] = 1;
  j["id"] = rec.id;
  j["method"] = rec.method;
  j["eta"] = rec.eta;
  j["seed"] = rec.seed;
  j["config_hash"] = rec.config_hash;
  j["spec"] = SpecToJson(rec.spec);
  j["spec_string"] = rec.spec_string;
  j["param_count"] = rec.param_count;
  OrderedJson epochs = OrderedJson::array();
  for (const EpochMetrics &em : rec.epochs) {
    epochs.push_back(OrderedJson{{"epoch", em.epoch},
                                 {"stage", em.stage},
                                 {"train_loss", em.train_loss},
                                 {"heldout_loss", em.heldout_loss},
                                 {"heldout_accuracy", em.heldout_accuracy}});
  }
  j["epochs"] = epochs;
  j["heldout"] = MetricsToJson(rec.heldout);
  j["test"] = MetricsToJson(rec.test);
  if (!rec.stage1_counts.empty()) j["stage1_counts"] = rec.stage1_counts;
  j["trajectory_file"] = rec.trajectory_file;
  j["checkpoint_file"] = rec.checkpoint_file;
  j["stage1_checkpoint_file"] = rec.stage1_checkpoint_file;
  j["spec_file"] = rec.spec_file;
  j["model_file"] = rec.model_file;
  j["config"] = rec.config_text;
  j["wall_time_sec"] = rec.wall_time_sec;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write run record: " + path);
  out << j.dump(2) << "\n";
}

RunRecord ReadRunRecord(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read run record: " + path);
  OrderedJson j;
  in >> j;
  if (j.value("magic", "") != std::string("TDNNAS-RUN1")) {
    throw std::runtime_error("run record: bad magic in " + path);
  }
  if (j.value("version", 0) != 1) {
    throw std::runtime_error("run record: unsupported version in " + path);
  }
  RunRecord rec;
  rec.id = j.at("id").get<std::string>();
  rec.method = j.at("method").get<std::string>();
  rec.eta = j.at("eta").get<double>();
  rec.seed = j.at("seed").get<uint64_t>();
  rec.config_hash = j.at("config_hash").get<std::string>();
  rec.spec = SpecFromJson(j.at("spec"));
  rec.spec_string = j.at("spec_string").get<std::string>();
  rec.param_count = j.at("param_count").get<int64_t>();
  for (const auto &ej : j.at("epochs")) {
    rec.epochs.push_back(EpochMetrics{ej.at("epoch").get<int>(),
                                      ej.at("stage").get<std::string>(),
                                      ej.at("train_loss").get<double>(),
                                      ej.at("heldout_loss").get<double>(),
                                      ej.at("heldout_accuracy").get<double>()});
  }
  rec.heldout = MetricsFromJson(j.at("heldout"));
  rec.test = MetricsFromJson(j.at("test"));
  if (j.contains("stage1_counts")) {
    rec.stage1_counts =
        j.at("stage1_counts").get<std::vector<std::vector<std::vector<int64_t>>>>();
  }
  rec.trajectory_file = j.at("trajectory_file").get<std::string>();
  rec.checkpoint_file = j.at("checkpoint_file").get<std::string>();
  rec.stage1_checkpoint_file = j.at("stage1_checkpoint_file").get<std::string>();
  rec.spec_file = j.at("spec_file").get<std::string>();
  rec.model_file = j.at("model_file").get<std::string>();
  rec.config_text = j.at("config").get<std::string>();
  rec.wall_time_sec = j.at("wall_time_sec").get<double>();
  return rec;
}

void WriteTrajectory(const std::vector<TrajectoryPoint> &trajectory,
                     const std::string &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write trajectory: " + path);
  out << OrderedJson{{"magic", "TDNNAS-TRAJ1"}, {"version", 1}}.dump() << "\n";
  for (const TrajectoryPoint &p : trajectory) {
    OrderedJson j;
    j["step"] = p.step;
    j["layer"] = p.layer;
    j["axis"] = p.axis;
    j["lambda"] = p.lambda;
    j["T"] = p.temperature;
    out << j.dump() << "\n";
  }
}

std::vector<TrajectoryPoint> ReadTrajectory(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read trajectory: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trajectory: empty file");
  const OrderedJson header = OrderedJson::parse(line);
  if (header.value("magic", "") != std::string("TDNNAS-TRAJ1") ||
      header.value("version", 0) != 1) {
    throw std::runtime_error("trajectory: bad header in " + path);
  }
  std::vector<TrajectoryPoint> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const OrderedJson j = OrderedJson::parse(line);
    TrajectoryPoint p;
    p.step = j.at("step").get<int64_t>();
    p.layer = j.at("layer").get<int>();
    p.axis = j.at("axis").get<std::string>();
    p.lambda = j.at("lambda").get<std::vector<double>>();
    p.temperature = j.at("T").get<double>();
    out.push_back(std::move(p));
  }
  return out;
}

void WriteMetricsFile(const Metrics &heldout, const Metrics &test,
                      const std::string &path) {
  OrderedJson j;
  j["magic"] = "TDNNAS-MET1";
  j["version"] = 1;
  j["heldout"] = MetricsToJson(heldout);
  j["test"] = MetricsToJson(test);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write metrics: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace tdnnas
