// ldmi/info.h

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

// Discrete information measures on C x C joint distributions, noise
// channels (row-stochastic transition matrices) and label corruption.
//
// All logarithms are natural; information is reported in nats.

#ifndef LDMI_INFO_H_
#define LDMI_INFO_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ldmi/numerics.h"

namespace ldmi {

using Label = int;

inline constexpr double kProbabilityTolerance = 1e-9;

/// Joint pmf of two C-valued variables: q(w1, w2) = Pr[W1 = w1, W2 = w2].
class JointDistribution {
 public:
  /// Throws std::invalid_argument unless q is square, entries lie in
  /// [0, 1] and sum to 1 within kProbabilityTolerance.
  explicit JointDistribution(Matrix q);

  std::size_t classes() const { return q_.rows(); }
  const Matrix &matrix() const { return q_; }
  double operator()(std::size_t i, std::size_t j) const { return q_(i, j); }

  std::vector<double> row_marginal() const;
  std::vector<double> col_marginal() const;
  JointDistribution transposed() const;

 private:
  Matrix q_;
};

/// Noise channel t(y, y~) = Pr[Y~ = y~ | Y = y].
class TransitionMatrix {
 public:
  /// Throws std::invalid_argument unless t is square with entries in [0, 1]
  /// and every row summing to 1 within kProbabilityTolerance.
  explicit TransitionMatrix(Matrix t, std::optional<double> noise_rate = std::nullopt);

  std::size_t classes() const { return t_.rows(); }
  const Matrix &matrix() const { return t_; }
  double operator()(std::size_t i, std::size_t j) const { return t_(i, j); }
  /// Set when built from a parametric family.
  std::optional<double> noise_rate() const { return noise_rate_; }

 private:
  Matrix t_;
  std::optional<double> noise_rate_;
};

enum class NoisePattern { kClassIndependent, kDiagonallyDominant, kDiagonallyNonDominant };

std::string_view to_string(NoisePattern p);

/// DMI(W1, W2) = |det Q|.
double dmi(const JointDistribution &q);

/// Shannon mutual information in nats, with 0 ln 0 = 0.
double shannon_mi(const JointDistribution &q);

/// Shannon entropy in nats of a probability vector.
double entropy(std::span<const double> p);

/// Joint of (W1, W3) when W3 is W2 passed through t:  q * t.
JointDistribution push_through_channel(const JointDistribution &q, const TransitionMatrix &t);

/// (1 - r) I + (r / C) J: with probability r the label is replaced by a
/// uniform draw over all C classes (which may return the true class).
TransitionMatrix uniform_channel(std::size_t classes, double r);

struct Flip {
  Label from;
  Label to;
  double probability;
};

/// Identity channel with the listed off-diagonal flips; the diagonal takes
/// the remaining mass of each row.
TransitionMatrix flip_channel(std::size_t classes, std::span<const Flip> flips);

/// The three binary cases of the imbalanced experiment (class 0 is the
/// minority class): 1 = uniform, 2 = 0 -> 1 with prob r, 3 = 1 -> 0.
TransitionMatrix noise_case_channel(int noise_case, double r);

/// 10-class channel with truck->automobile, bird->airplane, deer->horse and
/// cat->dog flips at rate r (CIFAR-10 class order).
TransitionMatrix cifar10_channel(double r);

NoisePattern classify_pattern(const TransitionMatrix &t);

/// Invertible to tolerance: |det t| > 1e-12.
bool is_informative(const TransitionMatrix &t);

/// Draws y~_i from row t[y_i] independently for every label.  The stream is
/// derived from (seed, stream) so distinct call sites never share draws.
std::vector<Label> corrupt_labels(std::span<const Label> labels, const TransitionMatrix &t,
                                  std::uint64_t seed,
                                  std::string_view stream = "corrupt_labels");

/// Plain-text channel files: one row per line, whitespace-separated
/// decimals.  Blank lines and lines starting with '#' are ignored.
void write_channel(std::ostream &os, const TransitionMatrix &t);
TransitionMatrix read_channel(std::istream &is);
TransitionMatrix load_channel(const std::string &path);

/// Builds a channel from a builtin spec:
///   identity:C | uniform:C:r | case1:r | case2:r | case3:r | cifar:r |
///   flip:C:a>b@p[,a>b@p...]
/// Anything else is treated as a path to a channel file.
TransitionMatrix channel_from_spec(const std::string &spec);

}  // namespace ldmi

#endif  // LDMI_INFO_H_
