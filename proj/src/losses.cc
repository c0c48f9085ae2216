// src/losses.cc

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

#include "ldmi/losses.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ldmi {

namespace {

void require_matching(const OutputBatch &o, const LabelMatrix &l, const char *what) {
  if (o.size() != l.size() || o.classes() != l.classes())
    throw ShapeError(std::string(what) + ": outputs are " + std::to_string(o.classes()) + "x" +
                     std::to_string(o.size()) + " but labels are " + std::to_string(l.size()) +
                     "x" + std::to_string(l.classes()));
  if (o.size() == 0) throw ShapeError(std::string(what) + ": empty batch");
}

}  // namespace

OutputBatch::OutputBatch(Matrix o) : o_(std::move(o)) {
  if (o_.rows() == 0) throw std::invalid_argument("OutputBatch: no classes");
  for (std::size_t i = 0; i < o_.cols(); ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < o_.rows(); ++c) {
      const double v = o_(c, i);
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("OutputBatch: column " + std::to_string(i) +
                                    " has an entry outside [0, 1]");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-6)
      throw std::invalid_argument("OutputBatch: column " + std::to_string(i) +
                                  " is not a distribution");
  }
}

LabelMatrix::LabelMatrix(std::vector<Label> labels, std::size_t classes)
    : labels_(std::move(labels)), classes_(classes) {
  if (classes_ == 0) throw std::invalid_argument("LabelMatrix: no classes");
  for (Label y : labels_)
    if (y < 0 || static_cast<std::size_t>(y) >= classes_)
      throw std::invalid_argument("LabelMatrix: label " + std::to_string(y) + " out of range");
}

LabelMatrix LabelMatrix::from_dense(const Matrix &l) {
  std::vector<Label> labels;
  labels.reserve(l.rows());
  for (std::size_t i = 0; i < l.rows(); ++i) {
    int ones = 0;
    Label hot = 0;
    for (std::size_t c = 0; c < l.cols(); ++c) {
      if (l(i, c) == 1.0) {
        ++ones;
        hot = static_cast<Label>(c);
      } else if (l(i, c) != 0.0) {
        ones = -1;
        break;
      }
    }
    if (ones != 1)
      throw std::invalid_argument("LabelMatrix: row " + std::to_string(i) + " is not one-hot");
    labels.push_back(hot);
  }
  return LabelMatrix(std::move(labels), l.cols());
}

Matrix LabelMatrix::dense() const {
  Matrix l(labels_.size(), classes_);
  for (std::size_t i = 0; i < labels_.size(); ++i) l(i, labels_[i]) = 1.0;
  return l;
}

EmpiricalJoint::EmpiricalJoint(Matrix u) : u_(std::move(u)) {
  if (u_.empty() || !u_.is_square())
    throw std::invalid_argument("EmpiricalJoint: expected a non-empty square matrix");
  for (double v : u_.values())
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("EmpiricalJoint: entry outside [0, 1]");
  if (std::abs(u_.sum() - 1.0) > kProbabilityTolerance)
    throw std::invalid_argument("EmpiricalJoint: entries must sum to 1");
}

EmpiricalJoint empirical_joint(const OutputBatch &o, const LabelMatrix &l) {
  require_matching(o, l, "empirical_joint");
  const std::size_t c = o.classes();
  const std::size_t n = o.size();
  // O L picks, for each example, the output column into the label's column.
  Matrix u(c, c);
  const auto labels = l.labels();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < c; ++k) u(k, labels[i]) += o.matrix()(k, i);
  return EmpiricalJoint(scale(u, 1.0 / static_cast<double>(n)));
}

DmiLoss dmi_loss(const EmpiricalJoint &u) {
  DmiLoss out;
  out.det = lu_det(u.matrix());
  const double mag = std::abs(out.det);
  out.degenerate = mag < kDegenerateDet;
  out.value = -std::log(std::max(mag, kDegenerateDet));
  return out;
}

Matrix dmi_loss_grad(const OutputBatch &o, const LabelMatrix &l) {
  const EmpiricalJoint u = empirical_joint(o, l);
  const std::size_t c = o.classes();
  const std::size_t n = o.size();

  Matrix u_inv;
  if (std::abs(lu_det(u.matrix())) < kRegularizeDet) {
    Matrix ridge = u.matrix();
    for (std::size_t k = 0; k < c; ++k) ridge(k, k) += kGradientRidge;
    u_inv = inverse(ridge);
  } else {
    u_inv = inverse(u.matrix());
  }

  // dL/dU = -U^{-T};  dL/dO = dL/dU * (dU/dO) = -(1/N) U^{-T} L^T, so
  // column i is -(1/N) times row y_i of U^{-1}.
  const double inv_n = 1.0 / static_cast<double>(n);
  const auto labels = l.labels();
  Matrix grad(c, n);
  for (std::size_t i = 0; i < n; ++i) {
    auto inv_row = u_inv.row(labels[i]);
    for (std::size_t k = 0; k < c; ++k) grad(k, i) = -inv_n * inv_row[k];
  }
  return grad;
}

double ce_loss(const OutputBatch &o, const LabelMatrix &l) {
  require_matching(o, l, "ce_loss");
  const auto labels = l.labels();
  double total = 0.0;
  for (std::size_t i = 0; i < o.size(); ++i)
    total -= std::log(std::max(o.matrix()(labels[i], i), kCeProbabilityFloor));
  return total / static_cast<double>(o.size());
}

Matrix ce_grad(const OutputBatch &o, const LabelMatrix &l) {
  require_matching(o, l, "ce_grad");
  const auto labels = l.labels();
  const double inv_n = 1.0 / static_cast<double>(o.size());
  Matrix grad(o.classes(), o.size());
  for (std::size_t i = 0; i < o.size(); ++i) {
    const double p = o.matrix()(labels[i], i);
    if (p > kCeProbabilityFloor) grad(labels[i], i) = -inv_n / p;
  }
  return grad;
}

}  // namespace ldmi
