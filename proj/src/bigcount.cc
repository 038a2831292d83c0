// src/bigcount.cc

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

#include "tdnnas/bigcount.h"

#include <algorithm>
#include <stdexcept>

namespace tdnnas {

BigCount::BigCount(uint64_t v) {
  limbs_.push_back(static_cast<uint32_t>(v & 0xffffffffull));
  limbs_.push_back(static_cast<uint32_t>(v >> 32));
  Trim();
}

void BigCount::Trim() {
  while (limbs_.size() > 1 && limbs_.back() == 0) limbs_.pop_back();
}

void BigCount::MulU64(uint64_t v) {
  const uint32_t lo = static_cast<uint32_t>(v & 0xffffffffull);
  const uint32_t hi = static_cast<uint32_t>(v >> 32);
  std::vector<uint32_t> out(limbs_.size() + 2, 0);
  auto mul_add = [&out](const std::vector<uint32_t> &a, uint32_t m, size_t shift) {
    if (m == 0) return;
    uint64_t carry = 0;
    for (size_t i = 0; i < a.size(); i++) {
      uint64_t cur = static_cast<uint64_t>(a[i]) * m + out[i + shift] + carry;
      out[i + shift] = static_cast<uint32_t>(cur & 0xffffffffull);
      carry = cur >> 32;
    }
    size_t pos = a.size() + shift;
    while (carry != 0) {
      uint64_t cur = out[pos] + carry;
      out[pos] = static_cast<uint32_t>(cur & 0xffffffffull);
      carry = cur >> 32;
      pos++;
    }
  };
  mul_add(limbs_, lo, 0);
  mul_add(limbs_, hi, 1);
  limbs_ = std::move(out);
  Trim();
}

uint64_t BigCount::AsU64() const {
  if (!FitsU64()) throw std::overflow_error("BigCount does not fit in 64 bits");
  uint64_t v = limbs_[0];
  if (limbs_.size() == 2) v |= static_cast<uint64_t>(limbs_[1]) << 32;
  return v;
}

bool BigCount::operator==(uint64_t v) const {
  return FitsU64() && AsU64() == v;
}

bool BigCount::GreaterThan(uint64_t v) const {
  if (!FitsU64()) return true;
  return AsU64() > v;
}

std::string BigCount::ToString() const {
  if (IsZero()) return "0";
  std::vector<uint32_t> tmp = limbs_;
  std::string digits;
  while (!(tmp.size() == 1 && tmp[0] == 0)) {
    uint64_t rem = 0;
    for (size_t i = tmp.size(); i-- > 0;) {
      uint64_t cur = (rem << 32) | tmp[i];
      tmp[i] = static_cast<uint32_t>(cur / 1000000000ull);
      rem = cur % 1000000000ull;
    }
    while (tmp.size() > 1 && tmp.back() == 0) tmp.pop_back();
    const bool last = (tmp.size() == 1 && tmp[0] == 0);
    for (int k = 0; k < 9; k++) {
      digits.push_back(static_cast<char>('0' + rem % 10));
      rem /= 10;
      if (last && rem == 0) break;
    }
  }
  std::reverse(digits.begin(), digits.end());
  return digits;
}

BigCount BigCount::Pow(uint64_t base, unsigned exp) {
  BigCount r(1);
  for (unsigned i = 0; i < exp; i++) r.MulU64(base);
  return r;
}

}  // namespace tdnnas
