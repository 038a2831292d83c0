// tdnnas/matrix.h

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

#ifndef TDNNAS_MATRIX_H_
#define TDNNAS_MATRIX_H_

#include <cstdint>
#include <string>
#include <vector>

namespace tdnnas {

// Dense row-major matrix of doubles.  All training-time math runs in 64-bit;
// 32-bit only appears in serialized payloads.  Vectors are stored as 1 x n.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

  double &operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

  const double *Row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }
  double *Row(int r) { return data.data() + static_cast<size_t>(r) * cols; }

  void SetZero() { std::fill(data.begin(), data.end(), 0.0); }
  bool SameShape(const Matrix &o) const { return rows == o.rows && cols == o.cols; }
  bool AllFinite() const;
  int64_t NumElements() const { return static_cast<int64_t>(rows) * cols; }
};

// Clamped row index; out-of-range time offsets replicate the edge frame.
inline int ClampRow(int t, int num_rows) {
  if (t < 0) return 0;
  if (t >= num_rows) return num_rows - 1;
  return t;
}

// The kernels below take an explicit column count `n` so that callers can
// operate on the first n columns of a wider shared matrix (candidate
// sub-views of supernet parameters).  All loops run in a fixed order so
// results are bit-reproducible for identical inputs.

// out(T x n) += x[clamp(t + offset)] * w[:, 0:n], x is T x d, w is d x >=n.
void GemmShiftAccum(const Matrix &x, int offset, const Matrix &w, int n, Matrix *out);

// w_grad[:, 0:n] += x[clamp(t + offset)]^T * g, g is T x n, w_grad is d x >=n.
void GemmShiftTransAccum(const Matrix &x, int offset, const Matrix &g, int n,
                         Matrix *w_grad);

// out(T x h) += a[clamp(t + offset)] [:, 0:n] * (b[:, 0:n])^T, b is h x >=n.
void GemmShiftNTAccum(const Matrix &a, int offset, const Matrix &b, int n, Matrix *out);

// out[clamp(t + offset)] += (g * b[:, 0:n])[t]; g is T x h, b is h x >=n,
// out is T x >=n.  This is the adjoint of the row-shift in GemmShiftNTAccum.
void GemmNNScatterAccum(const Matrix &g, const Matrix &b, int n, int offset, Matrix *out);

// b_grad[:, 0:n] += sum_t a[clamp(t + offset)]_h * g[t]_j accumulated as
// b_grad(h, j) += g^T-style product with the shifted rows of a; a is T x h.
void GemmTNShiftAccum(const Matrix &g, const Matrix &a, int offset, int n,
                      Matrix *b_grad);

// out[clamp(t + offset)][k] += sum_{j<n} g(t, j) * w(k, j); g is T x n,
// w is k_dim x >=n, out is T x k_dim.
void GemmNTScatterAccum(const Matrix &g, const Matrix &w, int n, int offset, Matrix *out);

// Plain dense products (no shifting).
void GemmNNAccum(const Matrix &a, const Matrix &b, Matrix *out);   // out += a*b
void GemmNTAccum(const Matrix &a, const Matrix &b, Matrix *out);   // out += a*b^T
void GemmTNAccum(const Matrix &a, const Matrix &b, Matrix *out);   // out += a^T*b

double DotAll(const Matrix &a, const Matrix &b);  // sum of elementwise products

// Frobenius norm of (w^T w - I) restricted to the first n columns of w.
double OrthonormalityError(const Matrix &w, int n);

// Modified Gram-Schmidt on the first n columns, in place.  Requires n <= rows.
void OrthonormalizeColumns(Matrix *w, int n);

std::string ShapeStr(const Matrix &m);

}  // namespace tdnnas

#endif  // TDNNAS_MATRIX_H_
