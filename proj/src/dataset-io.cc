// src/dataset-io.cc

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

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "tdnnas/io.h"

namespace tdnnas {

namespace {

constexpr char kDatasetMagic[] = "TDNNAS-DS1";  // 10 bytes, no terminator stored
constexpr uint32_t kDatasetVersion = 1;

void PutU32(std::vector<uint8_t> *out, uint32_t v) {
  for (int i = 0; i < 4; i++) out->push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

void PutU64(std::vector<uint8_t> *out, uint64_t v) {
  for (int i = 0; i < 8; i++) out->push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

void PutF32(std::vector<uint8_t> *out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  PutU32(out, bits);
}

void PutStr(std::vector<uint8_t> *out, const std::string &s) {
  PutU32(out, static_cast<uint32_t>(s.size()));
  out->insert(out->end(), s.begin(), s.end());
}

struct Reader {
  const uint8_t *p;
  const uint8_t *end;
  const char *what;

  void Need(size_t n) const {
    if (static_cast<size_t>(end - p) < n) {
      throw std::runtime_error(std::string(what) + ": truncated file");
    }
  }
  uint32_t U32() {
    Need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; i++) v |= static_cast<uint32_t>(p[i]) << (8 * i);
    p += 4;
    return v;
  }
  uint64_t U64() {
    Need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; i++) v |= static_cast<uint64_t>(p[i]) << (8 * i);
    p += 8;
    return v;
  }
  float F32() {
    const uint32_t bits = U32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  std::string Str() {
    const uint32_t n = U32();
    Need(n);
    std::string s(reinterpret_cast<const char *>(p), n);
    p += n;
    return s;
  }
};

std::vector<uint8_t> ReadFile(const std::string &path, const char *what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(std::string(what) + ": cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return bytes;
}

void WriteFile(const std::string &path, const std::vector<uint8_t> &bytes,
               const char *what) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(std::string(what) + ": cannot write " + path);
  out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error(std::string(what) + ": short write to " + path);
}

}  // namespace

std::vector<uint8_t> SerializeDataset(const Dataset &data) {
  std::vector<uint8_t> out;
  out.insert(out.end(), kDatasetMagic, kDatasetMagic + 10);
  PutU32(&out, kDatasetVersion);
  PutU32(&out, static_cast<uint32_t>(data.feature_dim));
  PutU32(&out, static_cast<uint32_t>(data.classes));
  PutU32(&out, static_cast<uint32_t>(data.sequences.size()));
  PutU64(&out, data.provenance.seed);
  PutStr(&out, data.provenance.generator);
  PutStr(&out, data.provenance.params);
  for (const Sequence &s : data.sequences) {
    const int T = s.frames.rows;
    PutU32(&out, static_cast<uint32_t>(T));
    for (double v : s.frames.data) PutF32(&out, static_cast<float>(v));
    for (int32_t v : s.labels) PutU32(&out, static_cast<uint32_t>(v));
    for (int base = 0; base < T; base += 8) {
      uint8_t byte = 0;
      for (int bit = 0; bit < 8 && base + bit < T; bit++) {
        if (s.mask[base + bit]) byte |= static_cast<uint8_t>(1u << bit);
      }
      out.push_back(byte);
    }
  }
  return out;
}

void SaveDataset(const Dataset &data, const std::string &path) {
  WriteFile(path, SerializeDataset(data), "dataset");
}

Dataset LoadDataset(const std::string &path) {
  const std::vector<uint8_t> bytes = ReadFile(path, "dataset");
  Reader r{bytes.data(), bytes.data() + bytes.size(), "dataset"};
  r.Need(10);
  if (std::memcmp(r.p, kDatasetMagic, 10) != 0) {
    throw std::runtime_error("dataset: bad magic in " + path);
  }
  r.p += 10;
  const uint32_t version = r.U32();
  if (version != kDatasetVersion) {
    throw std::runtime_error("dataset: unsupported version " + std::to_string(version) +
                             " in " + path);
  }
  Dataset data;
  data.feature_dim = static_cast<int>(r.U32());
  data.classes = static_cast<int>(r.U32());
  const uint32_t n_seq = r.U32();
  data.provenance.seed = r.U64();
  data.provenance.generator = r.Str();
  data.provenance.params = r.Str();
  data.sequences.reserve(n_seq);
  for (uint32_t i = 0; i < n_seq; i++) {
    Sequence s;
    const uint32_t T = r.U32();
    s.frames = Matrix(static_cast<int>(T), data.feature_dim);
    for (double &v : s.frames.data) v = static_cast<double>(r.F32());
    s.labels.resize(T);
    for (uint32_t t = 0; t < T; t++) s.labels[t] = static_cast<int32_t>(r.U32());
    s.mask.assign(T, 0);
    for (uint32_t base = 0; base < T; base += 8) {
      r.Need(1);
      const uint8_t byte = *r.p++;
      for (uint32_t bit = 0; bit < 8 && base + bit < T; bit++) {
        s.mask[base + bit] = (byte >> bit) & 1u;
      }
    }
    data.sequences.push_back(std::move(s));
  }
  if (r.p != r.end) throw std::runtime_error("dataset: trailing bytes in " + path);
  return data;
}

namespace {

constexpr char kCheckpointMagic[] = "TDNNAS-CK1";
constexpr uint32_t kCheckpointVersion = 1;

}  // namespace

const Checkpoint::Entry *Checkpoint::Find(const std::string &name) const {
  for (const Entry &e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

void Checkpoint::Add(const std::string &name, const Matrix &m, int dtype) {
  Entry e;
  e.name = name;
  e.dtype = dtype;
  e.rows = static_cast<uint32_t>(m.rows);
  e.cols = static_cast<uint32_t>(m.cols);
  e.data = m.data;
  if (dtype == 0) {
    for (double &v : e.data) v = static_cast<double>(static_cast<float>(v));
  }
  entries.push_back(std::move(e));
}

void Checkpoint::CopyTo(const std::string &name, Matrix *out) const {
  const Entry *e = Find(name);
  if (e == nullptr) throw std::runtime_error("checkpoint: missing tensor " + name);
  if (static_cast<int>(e->rows) != out->rows || static_cast<int>(e->cols) != out->cols) {
    throw std::runtime_error("checkpoint: tensor " + name + " has shape " +
                             std::to_string(e->rows) + "x" + std::to_string(e->cols) +
                             ", expected " + ShapeStr(*out));
  }
  out->data = e->data;
}

std::vector<uint8_t> SerializeCheckpoint(const Checkpoint &ck) {
  std::vector<uint8_t> out;
  out.insert(out.end(), kCheckpointMagic, kCheckpointMagic + 10);
  PutU32(&out, kCheckpointVersion);
  PutU64(&out, ck.config_hash);
  PutU32(&out, static_cast<uint32_t>(ck.entries.size()));
  for (const Checkpoint::Entry &e : ck.entries) {
    PutStr(&out, e.name);
    out.push_back(static_cast<uint8_t>(e.dtype));
    PutU32(&out, 2);  // ndim; matrices throughout
    PutU32(&out, e.rows);
    PutU32(&out, e.cols);
  }
  for (const Checkpoint::Entry &e : ck.entries) {
    if (e.dtype == 0) {
      for (double v : e.data) PutF32(&out, static_cast<float>(v));
    } else {
      for (double v : e.data) {
        uint64_t bits;
        std::memcpy(&bits, &v, 8);
        PutU64(&out, bits);
      }
    }
  }
  return out;
}

void SaveCheckpoint(const Checkpoint &ck, const std::string &path) {
  WriteFile(path, SerializeCheckpoint(ck), "checkpoint");
}

Checkpoint LoadCheckpoint(const std::string &path) {
  const std::vector<uint8_t> bytes = ReadFile(path, "checkpoint");
  Reader r{bytes.data(), bytes.data() + bytes.size(), "checkpoint"};
  r.Need(10);
  if (std::memcmp(r.p, kCheckpointMagic, 10) != 0) {
    throw std::runtime_error("checkpoint: bad magic in " + path);
  }
  r.p += 10;
  const uint32_t version = r.U32();
  if (version != kCheckpointVersion) {
    throw std::runtime_error("checkpoint: unsupported version " +
                             std::to_string(version) + " in " + path);
  }
  Checkpoint ck;
  ck.config_hash = r.U64();
  const uint32_t count = r.U32();
  ck.entries.resize(count);
  for (uint32_t i = 0; i < count; i++) {
    Checkpoint::Entry &e = ck.entries[i];
    e.name = r.Str();
    r.Need(1);
    e.dtype = *r.p++;
    if (e.dtype != 0 && e.dtype != 1) {
      throw std::runtime_error("checkpoint: bad dtype for " + e.name);
    }
    const uint32_t ndim = r.U32();
    if (ndim != 2) throw std::runtime_error("checkpoint: bad rank for " + e.name);
    e.rows = r.U32();
    e.cols = r.U32();
  }
  for (uint32_t i = 0; i < count; i++) {
    Checkpoint::Entry &e = ck.entries[i];
    const size_t n = static_cast<size_t>(e.rows) * e.cols;
    e.data.resize(n);
    for (size_t j = 0; j < n; j++) {
      if (e.dtype == 0) {
        e.data[j] = static_cast<double>(r.F32());
      } else {
        const uint64_t bits = r.U64();
        double v;
        std::memcpy(&v, &bits, 8);
        e.data[j] = v;
      }
    }
  }
  if (r.p != r.end) throw std::runtime_error("checkpoint: trailing bytes in " + path);
  return ck;
}

Checkpoint CheckpointFromTensors(
    const std::vector<std::pair<std::string, Matrix *>> &tensors, uint64_t config_hash) {
  Checkpoint ck;
  ck.config_hash = config_hash;
  for (const auto &[name, m] : tensors) ck.Add(name, *m);
  return ck;
}

}  // namespace tdnnas
