// src/config.cc

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

#include "tdnnas/config.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace tdnnas {

namespace {

constexpr const char *kHeader = "# TDNNAS-CFG1 1";

std::string DoubleStr(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double ParseDouble(const std::string &key, const std::string &s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("config key " + key + ": bad number '" + s + "'");
  }
  return v;
}

int64_t ParseInt(const std::string &key, const std::string &s) {
  int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("config key " + key + ": bad integer '" + s + "'");
  }
  return v;
}

uint64_t ParseU64(const std::string &key, const std::string &s) {
  uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("config key " + key + ": bad integer '" + s + "'");
  }
  return v;
}

bool ParseBool(const std::string &key, const std::string &s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw std::invalid_argument("config key " + key + ": expected true/false, got '" + s +
                              "'");
}

std::string IntListStr(const std::vector<int> &v) {
  std::ostringstream os;
  for (size_t i = 0; i < v.size(); i++) {
    if (i) os << ",";
    os << v[i];
  }
  return os.str();
}

std::vector<int> ParseIntList(const std::string &key, const std::string &s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(static_cast<int>(ParseInt(key, item)));
  }
  if (out.empty()) throw std::invalid_argument("config key " + key + ": empty list");
  return out;
}

struct Entry {
  std::string key;
  std::string doc;
  std::function<std::string(const Config &)> get;
  std::function<void(Config *, const std::string &)> set;
};

const std::vector<Entry> &Schema() {
  static const std::vector<Entry> schema = {
      {"run.id", "run identifier; empty derives <method>-s<seed>",
       [](const Config &c) { return c.run_id; },
       [](Config *c, const std::string &v) { c->run_id = v; }},
      {"output.dir", "artifact output directory",
       [](const Config &c) { return c.out_dir; },
       [](Config *c, const std::string &v) { c->out_dir = v; }},
      {"model.layers", "number of factored layers",
       [](const Config &c) { return std::to_string(c.model_layers); },
       [](Config *c, const std::string &v) {
         c->model_layers = static_cast<int>(ParseInt("model.layers", v));
       }},
      {"model.hidden_dim", "hidden width of every layer",
       [](const Config &c) { return std::to_string(c.model_hidden); },
       [](Config *c, const std::string &v) {
         c->model_hidden = static_cast<int>(ParseInt("model.hidden_dim", v));
       }},
      {"model.bottleneck_dim", "bottleneck width when dims are not searched",
       [](const Config &c) { return std::to_string(c.model_bottleneck); },
       [](Config *c, const std::string &v) {
         c->model_bottleneck = static_cast<int>(ParseInt("model.bottleneck_dim", v));
       }},
      {"model.context_left", "fixed left offset when contexts are not searched",
       [](const Config &c) { return std::to_string(c.model_context_left); },
       [](Config *c, const std::string &v) {
         c->model_context_left = static_cast<int>(ParseInt("model.context_left", v));
       }},
      {"model.context_right", "fixed right offset when contexts are not searched",
       [](const Config &c) { return std::to_string(c.model_context_right); },
       [](Config *c, const std::string &v) {
         c->model_context_right = static_cast<int>(ParseInt("model.context_right", v));
       }},
      {"space.search_context", "search left/right context offsets",
       [](const Config &c) { return c.search_context ? "true" : "false"; },
       [](Config *c, const std::string &v) {
         c->search_context = ParseBool("space.search_context", v);
       }},
      {"space.search_dims", "search bottleneck dimensionality",
       [](const Config &c) { return c.search_dims ? "true" : "false"; },
       [](Config *c, const std::string &v) {
         c->search_dims = ParseBool("space.search_dims", v);
       }},
      {"space.search_skip", "search per-layer skip connections",
       [](const Config &c) { return c.search_skip ? "true" : "false"; },
       [](Config *c, const std::string &v) {
         c->search_skip = ParseBool("space.search_skip", v);
       }},
      {"space.d_max", "largest context offset candidate",
       [](const Config &c) { return std::to_string(c.d_max); },
       [](Config *c, const std::string &v) {
         c->d_max = static_cast<int>(ParseInt("space.d_max", v));
       }},
      {"space.dim_menu", "bottleneck dimensionality candidates, ascending",
       [](const Config &c) { return IntListStr(c.dim_menu); },
       [](Config *c, const std::string &v) {
         c->dim_menu = ParseIntList("space.dim_menu", v);
       }},
      {"search.method",
       "softmax-darts | gumbel-darts | pipe-softmax | pipe-gumbel | random | exhaustive",
       [](const Config &c) { return c.method; },
       [](Config *c, const std::string &v) {
         SearchMethodFromString(v);  // validates
         c->method = v;
       }},
      {"search.eta", "resource penalty factor (>= 0)",
       [](const Config &c) { return DoubleStr(c.eta); },
       [](Config *c, const std::string &v) { c->eta = ParseDouble("search.eta", v); }},
      {"search.temperature_start", "Gumbel-Softmax anneal start",
       [](const Config &c) { return DoubleStr(c.temp_start); },
       [](Config *c, const std::string &v) {
         c->temp_start = ParseDouble("search.temperature_start", v);
       }},
      {"search.temperature_end", "Gumbel-Softmax anneal end",
       [](const Config &c) { return DoubleStr(c.temp_end); },
       [](Config *c, const std::string &v) {
         c->temp_end = ParseDouble("search.temperature_end", v);
       }},
      {"search.gumbel_samples", "J, weight samples per batch",
       [](const Config &c) { return std::to_string(c.gumbel_samples); },
       [](Config *c, const std::string &v) {
         c->gumbel_samples = static_cast<int>(ParseInt("search.gumbel_samples", v));
       }},
      {"search.epochs_search", "supernet training epochs",
       [](const Config &c) { return std::to_string(c.epochs_search); },
       [](Config *c, const std::string &v) {
         c->epochs_search = static_cast<int>(ParseInt("search.epochs_search", v));
       }},
      {"search.epochs_arch", "architecture-weight epochs (pipelined stage 2)",
       [](const Config &c) { return std::to_string(c.epochs_arch); },
       [](Config *c, const std::string &v) {
         c->epochs_arch = static_cast<int>(ParseInt("search.epochs_arch", v));
       }},
      {"search.epochs_retrain", "from-scratch epochs for derived candidates",
       [](const Config &c) { return std::to_string(c.epochs_retrain); },
       [](Config *c, const std::string &v) {
         c->epochs_retrain = static_cast<int>(ParseInt("search.epochs_retrain", v));
       }},
      {"search.heldout_frac", "held-out fraction of training sequences",
       [](const Config &c) { return DoubleStr(c.heldout_frac); },
       [](Config *c, const std::string &v) {
         c->heldout_frac = ParseDouble("search.heldout_frac", v);
       }},
      {"search.arch_on_train", "update architecture weights on training data",
       [](const Config &c) { return c.arch_on_train ? "true" : "false"; },
       [](Config *c, const std::string &v) {
         c->arch_on_train = ParseBool("search.arch_on_train", v);
       }},
      {"search.batch_seqs", "sequences per minibatch",
       [](const Config &c) { return std::to_string(c.batch_seqs); },
       [](Config *c, const std::string &v) {
         c->batch_seqs = static_cast<int>(ParseInt("search.batch_seqs", v));
       }},
      {"search.arch_batch_seqs", "stage-2 batch size (0: same as batch_seqs)",
       [](const Config &c) { return std::to_string(c.arch_batch_seqs); },
       [](Config *c, const std::string &v) {
         c->arch_batch_seqs = static_cast<int>(ParseInt("search.arch_batch_seqs", v));
       }},
      {"search.seed", "root seed; all streams derive from it",
       [](const Config &c) { return std::to_string(c.seed); },
       [](Config *c, const std::string &v) { c->seed = ParseU64("search.seed", v); }},
      {"search.random_candidates", "N for the random-search baseline",
       [](const Config &c) { return std::to_string(c.random_candidates); },
       [](Config *c, const std::string &v) {
         c->random_candidates = static_cast<int>(ParseInt("search.random_candidates", v));
       }},
      {"search.enumerate_cap", "largest space the exhaustive oracle accepts",
       [](const Config &c) { return std::to_string(c.enumerate_cap); },
       [](Config *c, const std::string &v) {
         c->enumerate_cap = ParseU64("search.enumerate_cap", v);
       }},
      {"search.threads", "worker threads for candidate-parallel loops (0: auto)",
       [](const Config &c) { return std::to_string(c.threads); },
       [](Config *c, const std::string &v) {
         c->threads = static_cast<int>(ParseInt("search.threads", v));
       }},
      {"optim.lr_model", "model-parameter learning rate",
       [](const Config &c) { return DoubleStr(c.lr_model); },
       [](Config *c, const std::string &v) {
         c->lr_model = ParseDouble("optim.lr_model", v);
       }},
      {"optim.lr_arch", "architecture-weight learning rate",
       [](const Config &c) { return DoubleStr(c.lr_arch); },
       [](Config *c, const std::string &v) {
         c->lr_arch = ParseDouble("optim.lr_arch", v);
       }},
      {"optim.momentum", "SGD momentum coefficient",
       [](const Config &c) { return DoubleStr(c.momentum); },
       [](Config *c, const std::string &v) {
         c->momentum = ParseDouble("optim.momentum", v);
       }},
      {"optim.ortho_interval", "optimizer steps between projections",
       [](const Config &c) { return std::to_string(c.ortho_interval); },
       [](Config *c, const std::string &v) {
         c->ortho_interval = static_cast<int>(ParseInt("optim.ortho_interval", v));
       }},
      {"optim.ortho_nu", "semi-orthogonal projection step size, in (0, 0.5]",
       [](const Config &c) { return DoubleStr(c.ortho_nu); },
       [](Config *c, const std::string &v) {
         c->ortho_nu = ParseDouble("optim.ortho_nu", v);
       }},
      {"task.kind", "lagged-product | planted-bottleneck",
       [](const Config &c) { return c.task_kind; },
       [](Config *c, const std::string &v) {
         if (v != "lagged-product" && v != "planted-bottleneck") {
           throw std::invalid_argument("config key task.kind: unknown task '" + v + "'");
         }
         c->task_kind = v;
       }},
      {"task.seed", "dataset generator seed",
       [](const Config &c) { return std::to_string(c.task_seed); },
       [](Config *c, const std::string &v) { c->task_seed = ParseU64("task.seed", v); }},
      {"task.lag", "planted lag k (lagged-product)",
       [](const Config &c) { return std::to_string(c.task_lag); },
       [](Config *c, const std::string &v) {
         c->task_lag = static_cast<int>(ParseInt("task.lag", v));
       }},
      {"task.rank", "planted teacher rank r (planted-bottleneck)",
       [](const Config &c) { return std::to_string(c.task_rank); },
       [](Config *c, const std::string &v) {
         c->task_rank = static_cast<int>(ParseInt("task.rank", v));
       }},
      {"task.n_seq", "training sequences",
       [](const Config &c) { return std::to_string(c.task_n_seq); },
       [](Config *c, const std::string &v) {
         c->task_n_seq = static_cast<int>(ParseInt("task.n_seq", v));
       }},
      {"task.n_seq_test", "test sequences",
       [](const Config &c) { return std::to_string(c.task_n_seq_test); },
       [](Config *c, const std::string &v) {
         c->task_n_seq_test = static_cast<int>(ParseInt("task.n_seq_test", v));
       }},
      {"task.seq_len", "frames per sequence",
       [](const Config &c) { return std::to_string(c.task_seq_len); },
       [](Config *c, const std::string &v) {
         c->task_seq_len = static_cast<int>(ParseInt("task.seq_len", v));
       }},
      {"task.feature_dim", "feature dimensionality F",
       [](const Config &c) { return std::to_string(c.task_feature_dim); },
       [](Config *c, const std::string &v) {
         c->task_feature_dim = static_cast<int>(ParseInt("task.feature_dim", v));
       }},
      {"task.classes", "classes for planted-bottleneck labels",
       [](const Config &c) { return std::to_string(c.task_classes); },
       [](Config *c, const std::string &v) {
         c->task_classes = static_cast<int>(ParseInt("task.classes", v));
       }},
      {"loss.kind", "cross-entropy | mse",
       [](const Config &c) { return c.loss_kind; },
       [](Config *c, const std::string &v) {
         LossKindFromString(v);  // validates
         c->loss_kind = v;
       }},
  };
  return schema;
}

const Entry &FindEntry(const std::string &key) {
  for (const Entry &e : Schema()) {
    if (e.key == key) return e;
  }
  throw std::invalid_argument("unknown config key: " + key);
}

}  // namespace

std::vector<std::pair<std::string, std::string>> ConfigKeyDocs() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Entry &e : Schema()) out.emplace_back(e.key, e.doc);
  return out;
}

void ConfigSet(Config *cfg, const std::string &key, const std::string &value) {
  FindEntry(key).set(cfg, value);
}

std::string ConfigGet(const Config &cfg, const std::string &key) {
  return FindEntry(key).get(cfg);
}

std::string FormatConfig(const Config &cfg) {
  std::ostringstream os;
  os << kHeader << "\n";
  for (const Entry &e : Schema()) os << e.key << " = " << e.get(cfg) << "\n";
  return os.str();
}

Config ParseConfig(const std::string &text) {
  Config cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    lineno++;
    if (lineno == 1 && line.rfind("# TDNNAS-CFG1", 0) == 0) {
      if (line != kHeader) {
        throw std::invalid_argument("config: unsupported version header '" + line + "'");
      }
      continue;
    }
    // strip comments and whitespace
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto notspace = [](char c) { return !std::isspace(static_cast<unsigned char>(c)); };
    const auto b = std::find_if(line.begin(), line.end(), notspace);
    const auto e = std::find_if(line.rbegin(), line.rend(), notspace).base();
    if (b >= e) continue;
    line = std::string(b, e);
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected 'key = value'");
    }
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) {
      key.pop_back();
    }
    while (!value.empty() && std::isspace(static_cast<unsigned char>(value.front()))) {
      value.erase(value.begin());
    }
    ConfigSet(&cfg, key, value);
  }
  return cfg;
}

void SaveConfig(const Config &cfg, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write config file: " + path);
  out << FormatConfig(cfg);
}

Config LoadConfig(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return ParseConfig(os.str());
}

uint64_t ConfigHash(const Config &cfg) {
  const std::string text = FormatConfig(cfg);
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string HashHex(uint64_t hash) {
  char buf[17];
  snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return std::string(buf);
}

SearchConfig ToSearchConfig(const Config &cfg) {
  SearchConfig s;
  s.method = SearchMethodFromString(cfg.method);
  s.eta = cfg.eta;
  s.temp_start = cfg.temp_start;
  s.temp_end = cfg.temp_end;
  s.gumbel_samples = cfg.gumbel_samples;
  s.epochs_search = cfg.epochs_search;
  s.epochs_arch = cfg.epochs_arch;
  s.epochs_retrain = cfg.epochs_retrain;
  s.heldout_frac = cfg.heldout_frac;
  s.arch_on_train = cfg.arch_on_train;
  s.batch_seqs = cfg.batch_seqs;
  s.arch_batch_seqs = cfg.arch_batch_seqs;
  s.seed = cfg.seed;
  s.lr_model = cfg.lr_model;
  s.lr_arch = cfg.lr_arch;
  s.momentum = cfg.momentum;
  s.ortho_interval = cfg.ortho_interval;
  s.ortho_nu = cfg.ortho_nu;
  s.random_candidates = cfg.random_candidates;
  s.enumerate_cap = cfg.enumerate_cap;
  s.loss = LossKindFromString(cfg.loss_kind);
  s.threads = cfg.threads;
  s.Validate();
  return s;
}

SearchSpace BuildSearchSpace(const Config &cfg, int feature_dim, int classes) {
  SearchSpace space;
  space.num_layers = cfg.model_layers;
  space.input_dim = feature_dim;
  space.hidden_dim = cfg.model_hidden;
  space.classes = classes;
  space.default_dim = cfg.model_bottleneck;
  for (int l = 0; l < cfg.model_layers; l++) {
    LayerSpace ls;
    ls.fixed_left = cfg.model_context_left;
    ls.fixed_right = cfg.model_context_right;
    ls.fixed_dim = 0;  // keep derived specs dim-unspecified unless searched
    ls.fixed_skip = false;
    if (cfg.search_context) {
      std::vector<int> offsets;
      for (int v = 0; v <= cfg.d_max; v++) offsets.push_back(v);
      ls.axes.push_back(AxisSpace{AxisKind::kContextLeft, offsets, {}});
      ls.axes.push_back(AxisSpace{AxisKind::kContextRight, offsets, {}});
    }
    if (cfg.search_dims) {
      ls.axes.push_back(AxisSpace{AxisKind::kBottleneckDim, cfg.dim_menu, {}});
    }
    // a skip connection needs equal widths; layer 1 only qualifies when the
    // features already have the hidden width
    const int in = (l == 0) ? feature_dim : cfg.model_hidden;
    if (cfg.search_skip && in == cfg.model_hidden) {
      ls.axes.push_back(AxisSpace{AxisKind::kSkip, {0, 1}, {}});
    }
    space.layers.push_back(ls);
  }
  space.Validate();
  space.FillParamCounts();
  return space;
}

Dataset GenerateDataset(const Config &cfg, uint64_t seed, int n_seq) {
  if (cfg.task_kind == "lagged-product") {
    return GenLaggedProduct(seed, cfg.task_lag, n_seq, cfg.task_seq_len,
                            cfg.task_feature_dim);
  }
  return GenPlantedBottleneck(seed, cfg.task_rank, n_seq, cfg.task_seq_len,
                              cfg.task_feature_dim, cfg.task_classes);
}

Dataset GenerateTrainDataset(const Config &cfg) {
  return GenerateDataset(cfg, cfg.task_seed, cfg.task_n_seq);
}

Dataset GenerateTestDataset(const Config &cfg) {
  return GenerateDataset(cfg, MixSeed(cfg.task_seed, 1), cfg.task_n_seq_test);
}

std::string RunId(const Config &cfg) {
  if (!cfg.run_id.empty()) return cfg.run_id;
  return cfg.method + "-s" + std::to_string(cfg.seed);
}

}  // namespace tdnnas
