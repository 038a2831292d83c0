// tdnnas/rng.h

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

#ifndef TDNNAS_RNG_H_
#define TDNNAS_RNG_H_

#include <cstdint>

namespace tdnnas {

// Seeded xoshiro256** generator with named sub-streams.
//
// Stream derivation rule (the reproducibility contract): the four 64-bit
// state words are drawn from a SplitMix64 sequence initialized with
//   z0 = seed + kGolden * (stream + 1)   (mod 2^64)
// so any (seed, stream) pair can be re-created independently of every other
// stream.  Identical (seed, stream, call sequence) reproduces identical
// outputs bit-for-bit on one build.
class Rng {
 public:
  static constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ull;

  Rng(uint64_t seed, uint64_t stream);

  uint64_t NextU64();

  // Uniform on the open interval (0,1): ((x >> 11) + 0.5) * 2^-53.
  double Uniform01();

  // Standard normal via Box-Muller; consumes exactly two uniforms per call.
  double Gaussian();

  // Uniform integer in [0, n), n >= 1, by rejection (no modulo bias).
  int UniformInt(int n);

  uint64_t seed() const { return seed_; }
  uint64_t stream() const { return stream_; }

 private:
  uint64_t state_[4];
  uint64_t seed_ = 0;
  uint64_t stream_ = 0;
};

// SplitMix64 step; also the documented (root, index) -> derived-seed rule
// used for per-candidate init seeds.
uint64_t SplitMix64(uint64_t *state);
uint64_t MixSeed(uint64_t root, uint64_t index);

// Named purposes for sub-streams of one root seed.
namespace rngstream {
constexpr uint64_t kDataGen = 1;    // synthetic dataset sampling
constexpr uint64_t kDataSplit = 2;  // held-out split selection
constexpr uint64_t kInit = 3;       // parameter initialization
constexpr uint64_t kGumbel = 4;     // Gumbel-Softmax noise
constexpr uint64_t kOneHot = 5;     // stage-1 uniform one-hot sampling
constexpr uint64_t kShuffle = 6;    // minibatch order
constexpr uint64_t kSample = 7;     // random-search candidate sampling
}  // namespace rngstream

}  // namespace tdnnas

#endif  // TDNNAS_RNG_H_
