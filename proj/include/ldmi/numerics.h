// ldmi/numerics.h

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

#ifndef LDMI_NUMERICS_H_
#define LDMI_NUMERICS_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ldmi {

/// Thrown when operand shapes are incompatible.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a matrix that must be inverted is (numerically) singular.
class SingularMatrixError : public std::runtime_error {
 public:
  explicit SingularMatrixError(double det);
  double determinant() const { return det_; }

 private:
  double det_;
};

/// |det| below this is treated as singular by inverse().
inline constexpr double kSingularDetTolerance = 1e-15;

/// Dense row-major matrix of doubles.  Every operation returns a fresh
/// matrix; nothing here mutates its arguments.
class Matrix {
 public:
  Matrix() = default;
  /// rows x cols, zero-filled.
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Takes ownership of row-major entries; throws ShapeError on a length
  /// mismatch and std::invalid_argument on non-finite input.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }
  bool is_square() const { return rows_ == cols_; }

  double &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> values() const { return data_; }
  std::span<double> values() { return data_; }

  double sum() const;
  bool all_finite() const;

  friend bool operator==(const Matrix &, const Matrix &) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix &a, const Matrix &b);
Matrix transpose(const Matrix &a);
Matrix add(const Matrix &a, const Matrix &b);
Matrix subtract(const Matrix &a, const Matrix &b);
Matrix scale(const Matrix &a, double s);

/// Packed LU factorization PA = LU with partial pivoting.  L has an
/// implicit unit diagonal and lives below the diagonal of `lu`.
struct LuFactorization {
  Matrix lu;
  std::vector<std::size_t> pivots;  // row i of PA is row pivots[i] of A
  int sign = 1;                     // parity of the row permutation
  bool singular = false;            // an exact zero pivot was met
};

LuFactorization lu_factor(const Matrix &a);

/// Signed determinant via LU with partial pivoting.
double lu_det(const Matrix &a);

/// Inverse via LU.  Throws SingularMatrixError when |det| <
/// kSingularDetTolerance.
Matrix inverse(const Matrix &a);

double max_abs(const Matrix &a);
double max_abs_diff(const Matrix &a, const Matrix &b);
double frobenius_norm(const Matrix &a);

std::string to_string(const Matrix &a, int precision = 6);

}  // namespace ldmi

#endif  // LDMI_NUMERICS_H_
