// tdnnas/spec-format.h

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

#ifndef TDNNAS_SPEC_FORMAT_H_
#define TDNNAS_SPEC_FORMAT_H_

#include <string>

#include "tdnnas/tdnnf.h"

namespace tdnnas {

// Human-readable architecture string, e.g.
//   {[1,3]}:{-1,1}; {4}:{0}; {[5,14]}:{-3,3}
// Layers sharing context offsets are merged into one group; consecutive runs
// of three or more compress to [a,b].  {0} abbreviates a layer with no
// context on either side.  When any layer carries an explicit bottleneck
// width a " | dims: ..." segment lists one value per layer ("-" for
// unspecified); " | skip: ..." likewise appears when any layer has a skip
// connection.  FormatSpecString(ParseSpecString(s)) is the identity, and so
// is the inverse on the per-layer fields.
std::string FormatSpecString(const CandidateSpec &spec);

// Inverse of FormatSpecString; geometry fields are left zero.  Malformed
// input raises std::invalid_argument naming the character position.
CandidateSpec ParseSpecString(const std::string &text);

// Spec file: a small structured text document carrying the geometry, the
// per-layer fields, and the display string (validated on load).
//   TDNNAS-SPEC1 1
//   input_dim 8
//   hidden_dim 32
//   classes 2
//   layers 2
//   layer 1 left 2 right 2 dim - skip 0
//   layer 2 left 0 right 1 dim 8 skip 0
//   arch {1}:{-2,2}; {2}:{0,1} | dims: - 8
void WriteSpecFile(const CandidateSpec &spec, const std::string &path);
CandidateSpec ReadSpecFile(const std::string &path);

}  // namespace tdnnas

#endif  // TDNNAS_SPEC_FORMAT_H_
