// src/matrix.cc

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

#include "tdnnas/matrix.h"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tdnnas {

bool Matrix::AllFinite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void GemmShiftAccum(const Matrix &x, int offset, const Matrix &w, int n, Matrix *out) {
  const int T = out->rows, d = x.cols;
  for (int t = 0; t < T; t++) {
    const double *xr = x.Row(ClampRow(t + offset, x.rows));
    double *or_ = out->Row(t);
    for (int k = 0; k < d; k++) {
      const double xv = xr[k];
      if (xv == 0.0) continue;
      const double *wr = w.Row(k);
      for (int j = 0; j < n; j++) or_[j] += xv * wr[j];
    }
  }
}

void GemmShiftTransAccum(const Matrix &x, int offset, const Matrix &g, int n,
                         Matrix *w_grad) {
  const int T = g.rows, d = x.cols;
  for (int t = 0; t < T; t++) {
    const double *xr = x.Row(ClampRow(t + offset, x.rows));
    const double *gr = g.Row(t);
    for (int k = 0; k < d; k++) {
      const double xv = xr[k];
      if (xv == 0.0) continue;
      double *wr = w_grad->Row(k);
      for (int j = 0; j < n; j++) wr[j] += xv * gr[j];
    }
  }
}

void GemmShiftNTAccum(const Matrix &a, int offset, const Matrix &b, int n, Matrix *out) {
  const int T = out->rows, h = b.rows;
  for (int t = 0; t < T; t++) {
    const double *ar = a.Row(ClampRow(t + offset, a.rows));
    double *or_ = out->Row(t);
    for (int i = 0; i < h; i++) {
      const double *br = b.Row(i);
      double acc = 0.0;
      for (int j = 0; j < n; j++) acc += ar[j] * br[j];
      or_[i] += acc;
    }
  }
}

void GemmNNScatterAccum(const Matrix &g, const Matrix &b, int n, int offset, Matrix *out) {
  const int T = g.rows, h = g.cols;
  for (int t = 0; t < T; t++) {
    const double *gr = g.Row(t);
    double *or_ = out->Row(ClampRow(t + offset, out->rows));
    for (int i = 0; i < h; i++) {
      const double gv = gr[i];
      if (gv == 0.0) continue;
      const double *br = b.Row(i);
      for (int j = 0; j < n; j++) or_[j] += gv * br[j];
    }
  }
}

void GemmTNShiftAccum(const Matrix &g, const Matrix &a, int offset, int n,
                      Matrix *b_grad) {
  const int T = g.rows, h = g.cols;
  for (int t = 0; t < T; t++) {
    const double *gr = g.Row(t);
    const double *ar = a.Row(ClampRow(t + offset, a.rows));
    for (int i = 0; i < h; i++) {
      const double gv = gr[i];
      if (gv == 0.0) continue;
      double *br = b_grad->Row(i);
      for (int j = 0; j < n; j++) br[j] += gv * ar[j];
    }
  }
}

void GemmNTScatterAccum(const Matrix &g, const Matrix &w, int n, int offset, Matrix *out) {
  const int T = g.rows, kd = w.rows;
  for (int t = 0; t < T; t++) {
    const double *gr = g.Row(t);
    double *or_ = out->Row(ClampRow(t + offset, out->rows));
    for (int k = 0; k < kd; k++) {
      const double *wr = w.Row(k);
      double acc = 0.0;
      for (int j = 0; j < n; j++) acc += gr[j] * wr[j];
      or_[k] += acc;
    }
  }
}

void GemmNNAccum(const Matrix &a, const Matrix &b, Matrix *out) {
  for (int t = 0; t < a.rows; t++) {
    const double *ar = a.Row(t);
    double *or_ = out->Row(t);
    for (int k = 0; k < a.cols; k++) {
      const double av = ar[k];
      if (av == 0.0) continue;
      const double *br = b.Row(k);
      for (int j = 0; j < b.cols; j++) or_[j] += av * br[j];
    }
  }
}

void GemmNTAccum(const Matrix &a, const Matrix &b, Matrix *out) {
  for (int t = 0; t < a.rows; t++) {
    const double *ar = a.Row(t);
    double *or_ = out->Row(t);
    for (int i = 0; i < b.rows; i++) {
      const double *br = b.Row(i);
      double acc = 0.0;
      for (int j = 0; j < a.cols; j++) acc += ar[j] * br[j];
      or_[i] += acc;
    }
  }
}

void GemmTNAccum(const Matrix &a, const Matrix &b, Matrix *out) {
  for (int t = 0; t < a.rows; t++) {
    const double *ar = a.Row(t);
    const double *br = b.Row(t);
    for (int i = 0; i < a.cols; i++) {
      const double av = ar[i];
      if (av == 0.0) continue;
      double *or_ = out->Row(i);
      for (int j = 0; j < b.cols; j++) or_[j] += av * br[j];
    }
  }
}

double DotAll(const Matrix &a, const Matrix &b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.data.size(); i++) acc += a.data[i] * b.data[i];
  return acc;
}

double OrthonormalityError(const Matrix &w, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; i++) {
    for (int j = 0; j < n; j++) {
      double g = 0.0;
      for (int r = 0; r < w.rows; r++) g += w(r, i) * w(r, j);
      const double d = g - (i == j ? 1.0 : 0.0);
      acc += d * d;
    }
  }
  return std::sqrt(acc);
}

void OrthonormalizeColumns(Matrix *w, int n) {
  if (n > w->rows) {
    throw std::invalid_argument("OrthonormalizeColumns: cannot be column-orthonormal, " +
                                ShapeStr(*w) + " with n=" + std::to_string(n));
  }
  for (int j = 0; j < n; j++) {
    for (int k = 0; k < j; k++) {
      double dot = 0.0;
      for (int r = 0; r < w->rows; r++) dot += (*w)(r, k) * (*w)(r, j);
      for (int r = 0; r < w->rows; r++) (*w)(r, j) -= dot * (*w)(r, k);
    }
    double norm = 0.0;
    for (int r = 0; r < w->rows; r++) norm += (*w)(r, j) * (*w)(r, j);
    norm = std::sqrt(norm);
    if (norm < 1e-12) {
      throw std::runtime_error("OrthonormalizeColumns: rank-deficient column " +
                               std::to_string(j));
    }
    for (int r = 0; r < w->rows; r++) (*w)(r, j) /= norm;
  }
}

std::string ShapeStr(const Matrix &m) {
  std::ostringstream os;
  os << m.rows << "x" << m.cols;
  return os.str();
}

}  // namespace tdnnas
