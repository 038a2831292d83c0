// src/c-api.cc

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

#include "tdnnas.h"

#include <cstring>
#include <stdexcept>
#include <string>

#include "tdnnas/driver.h"
#include "tdnnas/io.h"
#include "tdnnas/spec-format.h"

namespace {

thread_local std::string g_last_error;

tdnnas_status Fail(tdnnas_status code, const std::string &message) {
  g_last_error = message;
  return code;
}

// Maps C++ exceptions onto status codes at the library boundary.
template <typename Fn>
tdnnas_status Guard(Fn &&fn) {
  try {
    g_last_error.clear();
    fn();
    return TDNNAS_OK;
  } catch (const std::invalid_argument &e) {
    return Fail(TDNNAS_EINVAL, e.what());
  } catch (const std::ios_base::failure &e) {
    return Fail(TDNNAS_EIO, e.what());
  } catch (const std::runtime_error &e) {
    const std::string what = e.what();
    // file-shaped failures surface as EIO, everything else as EFAIL
    if (what.find("cannot") != std::string::npos ||
        what.find("bad magic") != std::string::npos ||
        what.find("truncated") != std::string::npos ||
        what.find("unsupported version") != std::string::npos ||
        what.find("missing tensor") != std::string::npos ||
        what.find("trailing bytes") != std::string::npos) {
      return Fail(TDNNAS_EIO, what);
    }
    return Fail(TDNNAS_EFAIL, what);
  } catch (const std::exception &e) {
    return Fail(TDNNAS_EFAIL, e.what());
  }
}

tdnnas_status CopyOut(const std::string &s, char *buf, size_t bufsize) {
  if (buf == nullptr || bufsize == 0) {
    return Fail(TDNNAS_EINVAL, "output buffer is null or empty");
  }
  if (s.size() + 1 > bufsize) {
    return Fail(TDNNAS_EINVAL, "output buffer too small: need " +
                                   std::to_string(s.size() + 1) + " bytes");
  }
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return TDNNAS_OK;
}

tdnnas_status RequireArg(bool ok, const char *message) {
  if (ok) return TDNNAS_OK;
  return Fail(TDNNAS_EINVAL, message);
}

}  // namespace

struct tdnnas_config {
  tdnnas::Config cfg;
};

struct tdnnas_dataset {
  tdnnas::Dataset data;
};

extern "C" {

const char *tdnnas_version(void) { return "0.1.0"; }

const char *tdnnas_last_error(void) { return g_last_error.c_str(); }

tdnnas_status tdnnas_config_create(tdnnas_config **out) {
  if (RequireArg(out != nullptr, "out is null")) return TDNNAS_EINVAL;
  return Guard([&] { *out = new tdnnas_config(); });
}

tdnnas_status tdnnas_config_load(const char *path, tdnnas_config **out) {
  if (RequireArg(path != nullptr && out != nullptr, "path/out is null")) {
    return TDNNAS_EINVAL;
  }
  return Guard([&] { *out = new tdnnas_config{tdnnas::LoadConfig(path)}; });
}

tdnnas_status tdnnas_config_set(tdnnas_config *cfg, const char *key, const char *value) {
  if (RequireArg(cfg != nullptr && key != nullptr && value != nullptr,
                 "cfg/key/value is null")) {
    return TDNNAS_EINVAL;
  }
  return Guard([&] { tdnnas::ConfigSet(&cfg->cfg, key, value); });
}

tdnnas_status tdnnas_config_get(const tdnnas_config *cfg, const char *key, char *buf,
                                size_t bufsize) {
  if (RequireArg(cfg != nullptr && key != nullptr, "cfg/key is null")) {
    return TDNNAS_EINVAL;
  }
  std::string value;
  const tdnnas_status rc = Guard([&] { value = tdnnas::ConfigGet(cfg->cfg, key); });
  if (rc != TDNNAS_OK) return rc;
  return CopyOut(value, buf, bufsize);
}

tdnnas_status tdnnas_config_save(const tdnnas_config *cfg, const char *path) {
  if (RequireArg(cfg != nullptr && path != nullptr, "cfg/path is null")) {
    return TDNNAS_EINVAL;
  }
  return Guard([&] { tdnnas::SaveConfig(cfg->cfg, path); });
}

uint64_t tdnnas_config_hash(const tdnnas_config *cfg) {
  if (cfg == nullptr) return 0;
  return tdnnas::ConfigHash(cfg->cfg);
}

void tdnnas_config_free(tdnnas_config *cfg) { delete cfg; }

tdnnas_status tdnnas_dataset_generate(const tdnnas_config *cfg, uint64_t seed,
                                      int32_t n_seq, tdnnas_dataset **out) {
  if (RequireArg(cfg != nullptr && out != nullptr, "cfg/out is null")) {
    return TDNNAS_EINVAL;
  }
  return Guard([&] {
    *out = new tdnnas_dataset{tdnnas::GenerateDataset(cfg->cfg, seed, n_seq)};
  });
}

tdnnas_status tdnnas_dataset_load(const char *path, tdnnas_dataset **out) {
  if (RequireArg(path != nullptr && out != nullptr, "path/out is null")) {
    return TDNNAS_EINVAL;
  }
  return Guard([&] { *out = new tdnnas_dataset{tdnnas::LoadDataset(path)}; });
}

tdnnas_status tdnnas_dataset_save(const tdnnas_dataset *data, const char *path) {
  if (RequireArg(data != nullptr && path != nullptr, "data/path is null")) {
    return TDNNAS_EINVAL;
  }
  return Guard([&] { tdnnas::SaveDataset(data->data, path); });
}

tdnnas_status tdnnas_dataset_info(const tdnnas_dataset *data, uint32_t *n_seq,
                                  uint32_t *feature_dim, uint32_t *classes) {
  if (RequireArg(data != nullptr, "data is null")) return TDNNAS_EINVAL;
  g_last_error.clear();
  if (n_seq != nullptr) *n_seq = static_cast<uint32_t>(data->data.sequences.size());
  if (feature_dim != nullptr) *feature_dim = static_cast<uint32_t>(data->data.feature_dim);
  if (classes != nullptr) *classes = static_cast<uint32_t>(data->data.classes);
  return TDNNAS_OK;
}

void tdnnas_dataset_free(tdnnas_dataset *data) { delete data; }

tdnnas_status tdnnas_gen_data(const tdnnas_config *cfg, const char *out_dir) {
  if (RequireArg(cfg != nullptr && out_dir != nullptr, "cfg/out_dir is null")) {
    return TDNNAS_EINVAL;
  }
  return Guard([&] { tdnnas::GenDataFiles(cfg->cfg, out_dir); });
}

tdnnas_status tdnnas_search(const tdnnas_config *cfg, const char *train_path,
                            const char *test_path, const char *out_dir) {
  if (RequireArg(cfg != nullptr && train_path != nullptr && test_path != nullptr &&
                     out_dir != nullptr,
                 "null argument")) {
    return TDNNAS_EINVAL;
  }
  return Guard(
      [&] { tdnnas::RunSearchPipeline(cfg->cfg, train_path, test_path, out_dir); });
}

tdnnas_status tdnnas_derive(const tdnnas_config *cfg, const char *checkpoint_path,
                            const char *out_spec_path) {
  if (RequireArg(cfg != nullptr && checkpoint_path != nullptr && out_spec_path != nullptr,
                 "null argument")) {
    return TDNNAS_EINVAL;
  }
  return Guard(
      [&] { tdnnas::DeriveFromCheckpoint(cfg->cfg, checkpoint_path, out_spec_path); });
}

tdnnas_status tdnnas_train(const tdnnas_config *cfg, const char *spec_path,
                           const char *train_path, const char *test_path,
                           const char *out_dir) {
  if (RequireArg(cfg != nullptr && spec_path != nullptr && train_path != nullptr &&
                     test_path != nullptr && out_dir != nullptr,
                 "null argument")) {
    return TDNNAS_EINVAL;
  }
  return Guard([&] {
    tdnnas::TrainSpecFile(cfg->cfg, spec_path, train_path, test_path, out_dir);
  });
}

tdnnas_status tdnnas_random_search(const tdnnas_config *cfg, const char *train_path,
                                   const char *test_path, const char *out_dir) {
  if (RequireArg(cfg != nullptr && train_path != nullptr && test_path != nullptr &&
                     out_dir != nullptr,
                 "null argument")) {
    return TDNNAS_EINVAL;
  }
  return Guard(
      [&] { tdnnas::RunRandomSearch(cfg->cfg, train_path, test_path, out_dir); });
}

tdnnas_status tdnnas_enumerate(const tdnnas_config *cfg, const char *train_path,
                               const char *test_path, const char *out_dir) {
  if (RequireArg(cfg != nullptr && train_path != nullptr && test_path != nullptr &&
                     out_dir != nullptr,
                 "null argument")) {
    return TDNNAS_EINVAL;
  }
  return Guard([&] { tdnnas::RunEnumerate(cfg->cfg, train_path, test_path, out_dir); });
}

tdnnas_status tdnnas_evaluate(const tdnnas_config *cfg, const char *model_path,
                              const char *spec_path, const char *data_path,
                              const char *metrics_path, double *accuracy,
                              double *mean_loss) {
  if (RequireArg(cfg != nullptr && model_path != nullptr && spec_path != nullptr &&
                     data_path != nullptr,
                 "null argument")) {
    return TDNNAS_EINVAL;
  }
  return Guard([&] {
    const tdnnas::Metrics m =
        tdnnas::EvalModelFile(cfg->cfg, model_path, spec_path, data_path,
                              metrics_path != nullptr ? metrics_path : "");
    if (accuracy != nullptr) *accuracy = m.accuracy;
    if (mean_loss != nullptr) *mean_loss = m.mean_loss;
  });
}

tdnnas_status tdnnas_report(const char *const *run_paths, size_t n_runs,
                            const char *csv_path, const char *md_path) {
  if (RequireArg(run_paths != nullptr && n_runs > 0 && csv_path != nullptr &&
                     md_path != nullptr,
                 "null argument or empty run list")) {
    return TDNNAS_EINVAL;
  }
  return Guard([&] {
    std::vector<std::string> paths(run_paths, run_paths + n_runs);
    tdnnas::ReportFiles(paths, csv_path, md_path);
  });
}

tdnnas_status tdnnas_spec_format(const char *spec_path, char *buf, size_t bufsize) {
  if (RequireArg(spec_path != nullptr, "spec_path is null")) return TDNNAS_EINVAL;
  std::string text;
  const tdnnas_status rc = Guard(
      [&] { text = tdnnas::FormatSpecString(tdnnas::ReadSpecFile(spec_path)); });
  if (rc != TDNNAS_OK) return rc;
  return CopyOut(text, buf, bufsize);
}

tdnnas_status tdnnas_spec_parse(const tdnnas_config *cfg, const char *text,
                                int32_t feature_dim, int32_t classes,
                                const char *out_spec_path) {
  if (RequireArg(cfg != nullptr && text != nullptr && out_spec_path != nullptr,
                 "null argument")) {
    return TDNNAS_EINVAL;
  }
  return Guard([&] {
    tdnnas::CandidateSpec spec = tdnnas::ParseSpecString(text);
    spec.input_dim = feature_dim;
    spec.hidden_dim = cfg->cfg.model_hidden;
    spec.classes = classes;
    tdnnas::WriteSpecFile(spec, out_spec_path);
  });
}

tdnnas_status tdnnas_space_size(const tdnnas_config *cfg, int32_t feature_dim,
                                int32_t classes, char *buf, size_t bufsize) {
  if (RequireArg(cfg != nullptr, "cfg is null")) return TDNNAS_EINVAL;
  std::string text;
  const tdnnas_status rc = Guard([&] {
    const tdnnas::SearchSpace space =
        tdnnas::BuildSearchSpace(cfg->cfg, feature_dim, classes);
    text = tdnnas::SearchSpaceSize(space).ToString();
  });
  if (rc != TDNNAS_OK) return rc;
  return CopyOut(text, buf, bufsize);
}

}  // extern "C"
