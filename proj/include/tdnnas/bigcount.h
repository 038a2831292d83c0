// tdnnas/bigcount.h

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

#ifndef TDNNAS_BIGCOUNT_H_
#define TDNNAS_BIGCOUNT_H_

#include <cstdint>
#include <string>
#include <vector>

namespace tdnnas {

// Arbitrary-precision non-negative integer.  Search spaces like (d+1)^{2L}
// overflow 53-bit doubles and can overflow 64-bit integers, so candidate
// counting is done exactly.
class BigCount {
 public:
  BigCount() : limbs_{0} {}
  explicit BigCount(uint64_t v);

  void MulU64(uint64_t v);

  bool IsZero() const { return limbs_.size() == 1 && limbs_[0] == 0; }
  bool FitsU64() const { return limbs_.size() <= 2; }
  uint64_t AsU64() const;  // requires FitsU64()

  std::string ToString() const;

  bool operator==(const BigCount &o) const { return limbs_ == o.limbs_; }
  bool operator==(uint64_t v) const;
  // true if *this > v (used for enumeration caps)
  bool GreaterThan(uint64_t v) const;

  static BigCount Pow(uint64_t base, unsigned exp);

 private:
  void Trim();
  std::vector<uint32_t> limbs_;  // little-endian base 2^32
};

}  // namespace tdnnas

#endif  // TDNNAS_BIGCOUNT_H_
