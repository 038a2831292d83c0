// src/spec-format.cc

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

#include "tdnnas/spec-format.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace tdnnas {

namespace {

std::string FormatLayerSet(const std::vector<int> &layers) {
  // layers are 1-based and ascending; compress runs of >= 3 to [a,b]
  std::ostringstream os;
  size_t i = 0;
  bool first = true;
  while (i < layers.size()) {
    size_t j = i;
    while (j + 1 < layers.size() && layers[j + 1] == layers[j] + 1) j++;
    if (!first) os << ",";
    first = false;
    const size_t run = j - i + 1;
    if (run >= 3) {
      os << "[" << layers[i] << "," << layers[j] << "]";
      i = j + 1;
    } else {
      os << layers[i];
      i++;
    }
  }
  return os.str();
}

std::string FormatOffsets(int left, int right) {
  std::ostringstream os;
  if (left == 0 && right == 0) {
    os << "{0}";
  } else {
    os << "{";
    if (left > 0) os << "-";
    os << left << "," << right << "}";
  }
  return os.str();
}

}  // namespace

std::string FormatSpecString(const CandidateSpec &spec) {
  const int L = static_cast<int>(spec.layers.size());
  // group layers by (left, right), ordered by first occurrence
  std::vector<std::pair<std::pair<int, int>, std::vector<int>>> groups;
  for (int l = 0; l < L; l++) {
    const std::pair<int, int> key = {spec.layers[l].left, spec.layers[l].right};
    bool found = false;
    for (auto &g : groups) {
      if (g.first == key) {
        g.second.push_back(l + 1);
        found = true;
        break;
      }
    }
    if (!found) groups.push_back({key, {l + 1}});
  }
  std::ostringstream os;
  for (size_t g = 0; g < groups.size(); g++) {
    if (g) os << "; ";
    os << "{" << FormatLayerSet(groups[g].second) << "}:"
       << FormatOffsets(groups[g].first.first, groups[g].first.second);
  }
  bool any_dim = false, any_skip = false;
  for (const LayerChoice &ch : spec.layers) {
    if (ch.dim > 0) any_dim = true;
    if (ch.skip) any_skip = true;
  }
  if (any_dim) {
    os << " | dims:";
    for (const LayerChoice &ch : spec.layers) {
      os << " ";
      if (ch.dim > 0) {
        os << ch.dim;
      } else {
        os << "-";
      }
    }
  }
  if (any_skip) {
    os << " | skip:";
    for (const LayerChoice &ch : spec.layers) os << " " << (ch.skip ? 1 : 0);
  }
  return os.str();
}

namespace {

class Cursor {
 public:
  explicit Cursor(const std::string &text) : text_(text) {}

  [[noreturn]] void Fail(const std::string &expected) const {
    throw std::invalid_argument("spec string parse error at position " +
                                std::to_string(pos_) + ": expected " + expected);
  }
  bool AtEnd() const { return pos_ >= text_.size(); }
  char Peek() const { return AtEnd() ? '\0' : text_[pos_]; }
  bool TryEat(char c) {
    if (Peek() == c) {
      pos_++;
      return true;
    }
    return false;
  }
  bool TryEat(const std::string &s) {
    if (text_.compare(pos_, s.size(), s) == 0) {
      pos_ += s.size();
      return true;
    }
    return false;
  }
  void Eat(char c) {
    if (!TryEat(c)) Fail(std::string("'") + c + "'");
  }
  int Int() {
    size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      pos_++;
    }
    if (pos_ == start) Fail("a number");
    return std::stoi(text_.substr(start, pos_ - start));
  }
  size_t pos() const { return pos_; }

 private:
  const std::string &text_;
  size_t pos_ = 0;
};

}  // namespace

CandidateSpec ParseSpecString(const std::string &text) {
  Cursor c(text);
  std::map<int, std::pair<int, int>> contexts;  // layer (1-based) -> (left, right)
  // context groups
  while (true) {
    c.Eat('{');
    std::vector<int> layers;
    while (true) {
      if (c.TryEat('[')) {
        const int a = c.Int();
        c.Eat(',');
        const int b = c.Int();
        c.Eat(']');
        if (b < a) c.Fail("an ascending layer range");
        for (int l = a; l <= b; l++) layers.push_back(l);
      } else {
        layers.push_back(c.Int());
      }
      if (!c.TryEat(',')) break;
    }
    c.Eat('}');
    c.Eat(':');
    c.Eat('{');
    int left = 0, right = 0;
    const bool neg = c.TryEat('-');
    const int first = c.Int();
    if (c.TryEat(',')) {
      left = neg ? first : (first == 0 ? 0 : -1);
      if (!neg && first != 0) c.Fail("a non-positive left offset");
      right = c.Int();
    } else {
      if (neg || first != 0) c.Fail("'{0}' for an empty context");
    }
    c.Eat('}');
    for (int l : layers) {
      if (l < 1) c.Fail("a positive layer index");
      if (contexts.count(l)) {
        throw std::invalid_argument("spec string parse error at position " +
                                    std::to_string(c.pos()) + ": layer " +
                                    std::to_string(l) + " defined twice");
      }
      contexts[l] = {left, right};
    }
    if (!c.TryEat("; ")) break;
  }
  const int L = contexts.empty() ? 0 : contexts.rbegin()->first;
  if (static_cast<int>(contexts.size()) != L) {
    throw std::invalid_argument("spec string parse error: layers 1.." +
                                std::to_string(L) + " are not all covered");
  }
  CandidateSpec spec;
  spec.layers.resize(L);
  for (const auto &[layer, ctx] : contexts) {
    spec.layers[layer - 1].left = ctx.first;
    spec.layers[layer - 1].right = ctx.second;
  }
  // optional segments
  while (c.TryEat(" | ")) {
    if (c.TryEat("dims:")) {
      for (int l = 0; l < L; l++) {
        c.Eat(' ');
        if (c.TryEat('-')) {
          spec.layers[l].dim = 0;
        } else {
          spec.layers[l].dim = c.Int();
        }
      }
    } else if (c.TryEat("skip:")) {
      for (int l = 0; l < L; l++) {
        c.Eat(' ');
        const int v = c.Int();
        if (v != 0 && v != 1) c.Fail("a 0/1 skip flag");
        spec.layers[l].skip = (v != 0);
      }
    } else {
      c.Fail("'dims:' or 'skip:'");
    }
  }
  if (!c.AtEnd()) c.Fail("end of string");
  return spec;
}

void WriteSpecFile(const CandidateSpec &spec, const std::string &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write spec file: " + path);
  out << "TDNNAS-SPEC1 1\n";
  out << "input_dim " << spec.input_dim << "\n";
  out << "hidden_dim " << spec.hidden_dim << "\n";
  out << "classes " << spec.classes << "\n";
  out << "layers " << spec.layers.size() << "\n";
  for (size_t l = 0; l < spec.layers.size(); l++) {
    const LayerChoice &ch = spec.layers[l];
    out << "layer " << (l + 1) << " left " << ch.left << " right " << ch.right
        << " dim ";
    if (ch.dim > 0) {
      out << ch.dim;
    } else {
      out << "-";
    }
    out << " skip " << (ch.skip ? 1 : 0) << "\n";
  }
  out << "arch " << FormatSpecString(spec) << "\n";
}

CandidateSpec ReadSpecFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read spec file: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("TDNNAS-SPEC1", 0) != 0) {
    throw std::runtime_error("spec file: bad magic in " + path);
  }
  if (line != "TDNNAS-SPEC1 1") {
    throw std::runtime_error("spec file: unsupported version in " + path);
  }
  CandidateSpec spec;
  int layers = -1;
  std::string arch_line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "input_dim") {
      ls >> spec.input_dim;
    } else if (key == "hidden_dim") {
      ls >> spec.hidden_dim;
    } else if (key == "classes") {
      ls >> spec.classes;
    } else if (key == "layers") {
      ls >> layers;
      if (layers < 1) throw std::runtime_error("spec file: bad layer count");
      spec.layers.resize(layers);
    } else if (key == "layer") {
      int idx = 0;
      std::string kl, kr, kd, ks, dim_str;
      int left = 0, right = 0, skip = 0;
      ls >> idx >> kl >> left >> kr >> right >> kd >> dim_str >> ks >> skip;
      if (!ls || kl != "left" || kr != "right" || kd != "dim" || ks != "skip" ||
          idx < 1 || layers < idx) {
        throw std::runtime_error("spec file: malformed layer line: " + line);
      }
      LayerChoice &ch = spec.layers[idx - 1];
      ch.left = left;
      ch.right = right;
      ch.dim = dim_str == "-" ? 0 : std::stoi(dim_str);
      ch.skip = skip != 0;
    } else if (key == "arch") {
      arch_line = line.substr(5);
    } else {
      throw std::runtime_error("spec file: unknown key '" + key + "'");
    }
  }
  if (layers < 1) throw std::runtime_error("spec file: missing layers");
  if (!arch_line.empty() && arch_line != FormatSpecString(spec)) {
    throw std::runtime_error("spec file: arch string does not match the layer fields");
  }
  return spec;
}

}  // namespace tdnnas
