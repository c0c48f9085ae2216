// ldmi/losses.h

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

// Batch losses on classifier outputs.
//
// Shapes follow the column convention: an OutputBatch is C x N with one
// probability vector per column, a LabelMatrix is N x C with one one-hot
// row per example, and their scaled product U = O L / N is the C x C
// empirical joint of (prediction, observed label).  The DMI loss is
// -ln |det U|; its gradient with respect to O is -(1/N) U^{-T} L^T.

#ifndef LDMI_LOSSES_H_
#define LDMI_LOSSES_H_

#include <span>
#include <vector>

#include "ldmi/info.h"
#include "ldmi/numerics.h"

namespace ldmi {

/// |det U| below this saturates the DMI loss and flags the batch.
inline constexpr double kDegenerateDet = 1e-15;
/// |det U| below this switches the gradient to (U + ridge I)^{-1}.
inline constexpr double kRegularizeDet = 1e-12;
inline constexpr double kGradientRidge = 1e-8;
/// Probabilities are clamped to this before the cross-entropy log.
inline constexpr double kCeProbabilityFloor = 1e-12;

class OutputBatch {
 public:
  /// Throws std::invalid_argument unless every column is a distribution
  /// (entries in [0, 1], column sums 1 within 1e-6).
  explicit OutputBatch(Matrix o);

  std::size_t classes() const { return o_.rows(); }
  std::size_t size() const { return o_.cols(); }
  const Matrix &matrix() const { return o_; }

 private:
  Matrix o_;
};

class LabelMatrix {
 public:
  LabelMatrix(std::vector<Label> labels, std::size_t classes);
  /// From a dense N x C 0/1 matrix; every row must be one-hot.
  static LabelMatrix from_dense(const Matrix &l);

  std::size_t classes() const { return classes_; }
  std::size_t size() const { return labels_.size(); }
  std::span<const Label> labels() const { return labels_; }
  Matrix dense() const;

 private:
  std::vector<Label> labels_;
  std::size_t classes_;
};

class EmpiricalJoint {
 public:
  /// Throws std::invalid_argument unless entries lie in [0, 1] and sum to 1
  /// within 1e-9.
  explicit EmpiricalJoint(Matrix u);

  std::size_t classes() const { return u_.rows(); }
  const Matrix &matrix() const { return u_; }

 private:
  Matrix u_;
};

/// U = (1/N) O L.
EmpiricalJoint empirical_joint(const OutputBatch &o, const LabelMatrix &l);

struct DmiLoss {
  double value = 0.0;       // -ln max(|det U|, kDegenerateDet)
  double det = 0.0;         // signed det U
  bool degenerate = false;  // |det U| < kDegenerateDet; value is saturated
};

DmiLoss dmi_loss(const EmpiricalJoint &u);

/// dL/dO for L = -ln |det((1/N) O L)|, a C x N matrix.  Uses the ridge
/// path when |det U| < kRegularizeDet; throws SingularMatrixError if even
/// the ridge-regularized U cannot be inverted.
Matrix dmi_loss_grad(const OutputBatch &o, const LabelMatrix &l);

/// Mean over the batch of -ln max(o[y_i][i], kCeProbabilityFloor).
double ce_loss(const OutputBatch &o, const LabelMatrix &l);
/// d ce_loss / dO; zero wherever the floor is active.
Matrix ce_grad(const OutputBatch &o, const LabelMatrix &l);

}  // namespace ldmi

#endif  // LDMI_LOSSES_H_
