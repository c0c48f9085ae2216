// src/numerics.cc

// Copyright 2026  The ldmi Authors
//
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

#include "ldmi/numerics.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <utility>

namespace ldmi {

namespace {

std::string shape_of(const Matrix &m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const Matrix &a, const Matrix &b, const char *what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(what) + ": shape mismatch " + shape_of(a) +
                     " vs " + shape_of(b));
}

void require_square(const Matrix &a, const char *what) {
  if (!a.is_square())
    throw ShapeError(std::string(what) + ": expected a square matrix, got " +
                     shape_of(a));
}

std::string det_message(double det) {
  std::ostringstream os;
  os << "matrix is singular to working tolerance (det = " << det << ")";
  return os.str();
}

}  // namespace

SingularMatrixError::SingularMatrixError(double det)
    : std::runtime_error(det_message(det)), det_(det) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_)
    throw ShapeError("Matrix: " + std::to_string(data_.size()) +
                     " entries supplied for a " + std::to_string(rows_) + "x" +
                     std::to_string(cols_) + " matrix");
  if (!all_finite()) throw std::invalid_argument("Matrix: non-finite entry");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto &r : rows) {
    if (r.size() != cols_) throw ShapeError("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  if (!all_finite()) throw std::invalid_argument("Matrix: non-finite entry");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

double Matrix::sum() const {
  double s = 0.0;
  for (double v : data_) s += v;
  return s;
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

Matrix matmul(const Matrix &a, const Matrix &b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: inner dimensions differ (" + shape_of(a) + " * " +
                     shape_of(b) + ")");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto b_row = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

Matrix transpose(const Matrix &a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Matrix add(const Matrix &a, const Matrix &b) {
  require_same_shape(a, b, "add");
  Matrix out = a;
  auto o = out.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bv[i];
  return out;
}

Matrix subtract(const Matrix &a, const Matrix &b) {
  require_same_shape(a, b, "subtract");
  Matrix out = a;
  auto o = out.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bv[i];
  return out;
}

Matrix scale(const Matrix &a, double s) {
  Matrix out = a;
  for (double &v : out.values()) v *= s;
  return out;
}

LuFactorization lu_factor(const Matrix &a) {
  require_square(a, "lu_factor");
  const std::size_t n = a.rows();
  LuFactorization f{a, std::vector<std::size_t>(n), 1, false};
  Matrix &lu = f.lu;
  for (std::size_t i = 0; i < n; ++i) f.pivots[i] = i;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(lu(i, k)) > best) {
        best = std::abs(lu(i, k));
        p = i;
      }
    }
    if (best == 0.0) {
      f.singular = true;
      continue;
    }
    if (p != k) {
      auto rk = lu.row(k);
      auto rp = lu.row(p);
      std::swap_ranges(rk.begin(), rk.end(), rp.begin());
      std::swap(f.pivots[k], f.pivots[p]);
      f.sign = -f.sign;
    }
    const double pivot = lu(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = lu(i, k) / pivot;
      lu(i, k) = m;
      if (m == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= m * lu(k, j);
    }
  }
  return f;
}

double lu_det(const Matrix &a) {
  LuFactorization f = lu_factor(a);
  if (f.singular) return 0.0;
  double det = f.sign;
  for (std::size_t i = 0; i < a.rows(); ++i) det *= f.lu(i, i);
  return det;
}

Matrix inverse(const Matrix &a) {
  LuFactorization f = lu_factor(a);
  const std::size_t n = a.rows();
  double det = 0.0;
  if (!f.singular) {
    det = f.sign;
    for (std::size_t i = 0; i < n; ++i) det *= f.lu(i, i);
  }
  if (f.singular || std::abs(det) < kSingularDetTolerance)
    throw SingularMatrixError(det);

  // Solve LU x = P e_j for every column j.
  Matrix inv(n, n);
  std::vector<double> x(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) x[i] = f.pivots[i] == j ? 1.0 : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = x[i];
      for (std::size_t k = 0; k < i; ++k) s -= f.lu(i, k) * x[k];
      x[i] = s;
    }
    for (std::size_t ii = n; ii-- > 0;) {
      double s = x[ii];
      for (std::size_t k = ii + 1; k < n; ++k) s -= f.lu(ii, k) * x[k];
      x[ii] = s / f.lu(ii, ii);
    }
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = x[i];
  }
  return inv;
}

double max_abs(const Matrix &a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const Matrix &a, const Matrix &b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) m = std::max(m, std::abs(av[i] - bv[i]));
  return m;
}

double frobenius_norm(const Matrix &a) {
  double s = 0.0;
  for (double v : a.values()) s += v * v;
  return std::sqrt(s);
}

std::string to_string(const Matrix &a, int precision) {
  std::ostringstream os;
  os << std::setprecision(precision);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    os << "[";
    for (std::size_t j = 0; j < a.cols(); ++j) os << (j ? " " : "") << a(i, j);
    os << "]\n";
  }
  return os.str();
}

}  // namespace ldmi
