// tdnnas/io.h

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

#ifndef TDNNAS_IO_H_
#define TDNNAS_IO_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tdnnas/matrix.h"
#include "tdnnas/tasks.h"
#include "tdnnas/tdnnf.h"

namespace tdnnas {

// Binary dataset container, little-endian throughout:
//   magic "TDNNAS-DS1", u32 version, u32 F, u32 classes, u32 n_seq,
//   u64 seed, str generator, str params, then per sequence:
//   u32 T, T*F f32 frames (row-major), T i32 labels, ceil(T/8) mask bytes
//   (LSB-first).  str = u32 length + bytes.
void SaveDataset(const Dataset &data, const std::string &path);
Dataset LoadDataset(const std::string &path);
std::vector<uint8_t> SerializeDataset(const Dataset &data);

// Binary checkpoint of named tensors:
//   magic "TDNNAS-CK1", u32 version, u64 config_hash, u32 count, then per
//   tensor a manifest entry (str name, u8 dtype 0=f32/1=f64, u32 ndim,
//   u32 dims...) followed by all payloads in manifest order (row-major,
//   little-endian).  Serialization is byte-identical for identical state.
struct Checkpoint {
  struct Entry {
    std::string name;
    int dtype = 1;  // 0 = f32, 1 = f64
    uint32_t rows = 0, cols = 0;
    std::vector<double> data;
  };
  uint64_t config_hash = 0;
  std::vector<Entry> entries;

  const Entry *Find(const std::string &name) const;
  void Add(const std::string &name, const Matrix &m, int dtype = 1);
  // copies into an existing matrix, checking the shape
  void CopyTo(const std::string &name, Matrix *out) const;
};

void SaveCheckpoint(const Checkpoint &ck, const std::string &path);
Checkpoint LoadCheckpoint(const std::string &path);
std::vector<uint8_t> SerializeCheckpoint(const Checkpoint &ck);

Checkpoint CheckpointFromTensors(
    const std::vector<std::pair<std::string, Matrix *>> &tensors, uint64_t config_hash);

}  // namespace tdnnas

#endif  // TDNNAS_IO_H_
