// tools/tdnnas-main.cc

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

// Command-line front end.  Links only the public C API (tdnnas.h); all
// behavior lives in the shared library.

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tdnnas.h"

namespace {

struct ConfigDeleter {
  void operator()(tdnnas_config *c) const { tdnnas_config_free(c); }
};
using ConfigPtr = std::unique_ptr<tdnnas_config, ConfigDeleter>;

int FailWith(const char *what) {
  std::fprintf(stderr, "error: %s: %s\n", what, tdnnas_last_error());
  return 1;
}

// Shared per-subcommand options that fold into the configuration.
struct CommonOpts {
  std::string config_path;
  std::vector<std::string> sets;
  std::string method;
  std::string eta;
  std::string seed;
  std::string out = "out";
};

void AddCommon(CLI::App *cmd, CommonOpts *opts, bool with_out = true) {
  cmd->add_option("--config", opts->config_path, "configuration file (.cfg)");
  cmd->add_option("--set", opts->sets, "override a config key, e.g. --set task.lag=3")
      ->type_name("KEY=VALUE");
  cmd->add_option("--method", opts->method, "override search.method");
  cmd->add_option("--eta", opts->eta, "override search.eta");
  cmd->add_option("--seed", opts->seed, "override search.seed");
  if (with_out) cmd->add_option("--out", opts->out, "output directory");
}

// Builds the effective config: file, then --set pairs, then named flags.
int BuildConfig(const CommonOpts &opts, ConfigPtr *out) {
  tdnnas_config *cfg = nullptr;
  if (!opts.config_path.empty()) {
    if (tdnnas_config_load(opts.config_path.c_str(), &cfg)) {
      return FailWith("loading config");
    }
  } else if (tdnnas_config_create(&cfg)) {
    return FailWith("creating config");
  }
  out->reset(cfg);
  for (const std::string &kv : opts.sets) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects KEY=VALUE, got '%s'\n", kv.c_str());
      return 1;
    }
    if (tdnnas_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str())) {
      return FailWith("applying --set");
    }
  }
  if (!opts.method.empty() &&
      tdnnas_config_set(cfg, "search.method", opts.method.c_str())) {
    return FailWith("setting search.method");
  }
  if (!opts.eta.empty() && tdnnas_config_set(cfg, "search.eta", opts.eta.c_str())) {
    return FailWith("setting search.eta");
  }
  if (!opts.seed.empty() && tdnnas_config_set(cfg, "search.seed", opts.seed.c_str())) {
    return FailWith("setting search.seed");
  }
  return 0;
}

std::string TrainPath(const std::string &data_dir, const std::string &explicit_path) {
  return explicit_path.empty() ? data_dir + "/train.ds" : explicit_path;
}

std::string TestPath(const std::string &data_dir, const std::string &explicit_path) {
  return explicit_path.empty() ? data_dir + "/test.ds" : explicit_path;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"tdnnas - differentiable architecture search for factored TDNNs"};
  app.require_subcommand(1);

  CommonOpts gen_opts;
  CLI::App *gen = app.add_subcommand("gen-data", "generate train.ds/test.ds");
  AddCommon(gen, &gen_opts);

  CommonOpts search_opts;
  std::string data_dir = "data", train_file, test_file;
  CLI::App *search = app.add_subcommand(
      "search", "run a DARTS search, derive, retrain and evaluate");
  AddCommon(search, &search_opts);
  search->add_option("--data", data_dir, "directory holding train.ds/test.ds");
  search->add_option("--train", train_file, "training dataset file");
  search->add_option("--test", test_file, "test dataset file");

  CommonOpts derive_opts;
  std::string ckpt_path, spec_out = "derived.spec";
  CLI::App *derive = app.add_subcommand("derive", "extract the argmax architecture");
  AddCommon(derive, &derive_opts, false);
  derive->add_option("--checkpoint", ckpt_path, "supernet checkpoint")->required();
  derive->add_option("--out", spec_out, "output spec file");

  CommonOpts train_opts;
  std::string train_spec, train_data_dir = "data", train_train, train_test;
  CLI::App *train = app.add_subcommand("train", "train a spec from scratch");
  AddCommon(train, &train_opts);
  train->add_option("--spec", train_spec, "architecture spec file")->required();
  train->add_option("--data", train_data_dir, "directory holding train.ds/test.ds");
  train->add_option("--train", train_train, "training dataset file");
  train->add_option("--test", train_test, "test dataset file");

  CommonOpts rs_opts;
  std::string rs_data_dir = "data", rs_train, rs_test, rs_n;
  CLI::App *rs = app.add_subcommand("random-search", "best of N random candidates");
  AddCommon(rs, &rs_opts);
  rs->add_option("--data", rs_data_dir, "directory holding train.ds/test.ds");
  rs->add_option("--train", rs_train, "training dataset file");
  rs->add_option("--test", rs_test, "test dataset file");
  rs->add_option("--n", rs_n, "override search.random_candidates");

  CommonOpts enum_opts;
  std::string enum_data_dir = "data", enum_train, enum_test;
  CLI::App *enumerate =
      app.add_subcommand("enumerate", "train every candidate (exhaustive oracle)");
  AddCommon(enumerate, &enum_opts);
  enumerate->add_option("--data", enum_data_dir, "directory holding train.ds/test.ds");
  enumerate->add_option("--train", enum_train, "training dataset file");
  enumerate->add_option("--test", enum_test, "test dataset file");

  CommonOpts eval_opts;
  std::string eval_model, eval_spec, eval_data, eval_out = "metrics.json";
  CLI::App *eval = app.add_subcommand("eval", "evaluate a trained model");
  AddCommon(eval, &eval_opts, false);
  eval->add_option("--model", eval_model, "model checkpoint")->required();
  eval->add_option("--spec", eval_spec, "architecture spec file")->required();
  eval->add_option("--data-file", eval_data, "dataset file")->required();
  eval->add_option("--out", eval_out, "metrics output file");

  std::vector<std::string> report_runs;
  std::string report_out = "report";
  CLI::App *report = app.add_subcommand("report", "comparison table over run records");
  report->add_option("--runs", report_runs, "run.json files")->required();
  report->add_option("--out", report_out, "output directory prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    std::fprintf(stderr, "%s\n", app.help().c_str());
    return 2;
  }

  if (gen->parsed()) {
    ConfigPtr cfg;
    if (int rc = BuildConfig(gen_opts, &cfg)) return rc;
    if (tdnnas_gen_data(cfg.get(), gen_opts.out.c_str())) {
      return FailWith("gen-data");
    }
    std::printf("wrote %s/train.ds and %s/test.ds\n", gen_opts.out.c_str(),
                gen_opts.out.c_str());
    return 0;
  }
  if (search->parsed()) {
    ConfigPtr cfg;
    if (int rc = BuildConfig(search_opts, &cfg)) return rc;
    if (tdnnas_search(cfg.get(), TrainPath(data_dir, train_file).c_str(),
                      TestPath(data_dir, test_file).c_str(), search_opts.out.c_str())) {
      return FailWith("search");
    }
    char spec[4096];
    if (tdnnas_spec_format((search_opts.out + "/derived.spec").c_str(), spec,
                           sizeof(spec)) == TDNNAS_OK) {
      std::printf("derived architecture: %s\n", spec);
    }
    std::printf("artifacts in %s (run.json, checkpoint.ck, derived.spec, model.ck)\n",
                search_opts.out.c_str());
    return 0;
  }
  if (derive->parsed()) {
    ConfigPtr cfg;
    if (int rc = BuildConfig(derive_opts, &cfg)) return rc;
    if (tdnnas_derive(cfg.get(), ckpt_path.c_str(), spec_out.c_str())) {
      return FailWith("derive");
    }
    char spec[4096];
    if (tdnnas_spec_format(spec_out.c_str(), spec, sizeof(spec)) == TDNNAS_OK) {
      std::printf("%s\n", spec);
    }
    return 0;
  }
  if (train->parsed()) {
    ConfigPtr cfg;
    if (int rc = BuildConfig(train_opts, &cfg)) return rc;
    if (tdnnas_train(cfg.get(), train_spec.c_str(),
                     TrainPath(train_data_dir, train_train).c_str(),
                     TestPath(train_data_dir, train_test).c_str(),
                     train_opts.out.c_str())) {
      return FailWith("train");
    }
    std::printf("artifacts in %s (model.ck, metrics.json, run.json)\n",
                train_opts.out.c_str());
    return 0;
  }
  if (rs->parsed()) {
    ConfigPtr cfg;
    if (int rc = BuildConfig(rs_opts, &cfg)) return rc;
    if (!rs_n.empty() &&
        tdnnas_config_set(cfg.get(), "search.random_candidates", rs_n.c_str())) {
      return FailWith("setting search.random_candidates");
    }
    if (tdnnas_random_search(cfg.get(), TrainPath(rs_data_dir, rs_train).c_str(),
                             TestPath(rs_data_dir, rs_test).c_str(),
                             rs_opts.out.c_str())) {
      return FailWith("random-search");
    }
    std::printf("artifacts in %s (candidates.csv, best.spec, model.ck, run.json)\n",
                rs_opts.out.c_str());
    return 0;
  }
  if (enumerate->parsed()) {
    ConfigPtr cfg;
    if (int rc = BuildConfig(enum_opts, &cfg)) return rc;
    if (tdnnas_enumerate(cfg.get(), TrainPath(enum_data_dir, enum_train).c_str(),
                         TestPath(enum_data_dir, enum_test).c_str(),
                         enum_opts.out.c_str())) {
      return FailWith("enumerate");
    }
    std::printf("ranking in %s/ranking.csv\n", enum_opts.out.c_str());
    return 0;
  }
  if (eval->parsed()) {
    ConfigPtr cfg;
    if (int rc = BuildConfig(eval_opts, &cfg)) return rc;
    double acc = 0.0, loss = 0.0;
    if (tdnnas_evaluate(cfg.get(), eval_model.c_str(), eval_spec.c_str(),
                        eval_data.c_str(), eval_out.c_str(), &acc, &loss)) {
      return FailWith("eval");
    }
    std::printf("accuracy %.4f  mean loss %.5f  (metrics in %s)\n", acc, loss,
                eval_out.c_str());
    return 0;
  }
  if (report->parsed()) {
    std::vector<const char *> paths;
    for (const std::string &p : report_runs) paths.push_back(p.c_str());
    const std::string csv = report_out + "/report.csv";
    const std::string md = report_out + "/report.md";
    if (tdnnas_report(paths.data(), paths.size(), csv.c_str(), md.c_str())) {
      return FailWith("report");
    }
    std::printf("wrote %s and %s\n", csv.c_str(), md.c_str());
    return 0;
  }
  return 2;
}
