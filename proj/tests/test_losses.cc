// tests/test_losses.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "ldmi/losses.h"
#include "oracles.h"

using namespace ldmi;

namespace {

// Outputs correlated with balanced labels: softmax(sharpness * onehot + noise).
// Keeps det U well above the regularization threshold even at C = 10.
struct Batch {
  Matrix o;
  std::vector<Label> labels;
};

Batch correlated_batch(std::size_t c, std::size_t n, double sharpness, std::mt19937_64 &rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  Batch b{Matrix(c, n), std::vector<Label>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    b.labels[i] = static_cast<Label>(i % c);
    double s = 0.0;
    for (std::size_t k = 0; k < c; ++k) s += b.o(k, i) = std::exp((k == i % c ? sharpness : 0.0) + noise(rng));
    for (std::size_t k = 0; k < c; ++k) b.o(k, i) /= s;
  }
  return b;
}

}  // namespace

TEST_CASE("batch types validate") {
  CHECK_THROWS(OutputBatch(Matrix{{0.5, 0.2}, {0.4, 0.8}}));
  CHECK_THROWS(OutputBatch(Matrix{{1.2, 0.2}, {-0.2, 0.8}}));
  CHECK_NOTHROW(OutputBatch(Matrix{{0.5, 0.2}, {0.5, 0.8}}));
  CHECK_THROWS(LabelMatrix({0, 2}, 2));
  CHECK_THROWS(LabelMatrix::from_dense(Matrix{{1, 1}, {0, 1}}));
  CHECK_THROWS(LabelMatrix::from_dense(Matrix{{0, 0}, {0, 1}}));
  const auto l = LabelMatrix::from_dense(Matrix{{0, 1}, {1, 0}, {0, 1}});
  CHECK(std::vector<Label>(l.labels().begin(), l.labels().end()) == std::vector<Label>{1, 0, 1});
  CHECK(l.dense() == Matrix{{0, 1}, {1, 0}, {0, 1}});
  CHECK_THROWS(EmpiricalJoint(Matrix{{0.5, 0.5}, {0.5, 0.5}}));
}

TEST_CASE("empirical_joint") {
  const OutputBatch perfect(Matrix{{1, 0}, {0, 1}});
  CHECK(empirical_joint(perfect, LabelMatrix({0, 1}, 2)).matrix() == Matrix{{0.5, 0}, {0, 0.5}});

  // uniform outputs factorize: u[c][j] = (1/C) * freq(j)
  const std::size_t c = 3;
  const std::vector<Label> labels{0, 2, 2, 1, 2, 0};
  const auto u = empirical_joint(OutputBatch(Matrix(c, labels.size(), 1.0 / c)), LabelMatrix(labels, c));
  for (std::size_t k = 0; k < c; ++k)
    for (std::size_t j = 0; j < c; ++j) {
      const double freq = static_cast<double>(std::count(labels.begin(), labels.end(), static_cast<Label>(j))) / 6.0;
      CHECK(u.matrix()(k, j) == doctest::Approx(freq / c));
    }
  CHECK(std::abs(lu_det(u.matrix())) < 1e-15);

  // equals (1/N) O L with the dense label matrix
  std::mt19937_64 rng(1);
  const Batch b = correlated_batch(4, 40, 1.0, rng);
  const LabelMatrix l(b.labels, 4);
  const Matrix dense = scale(matmul(b.o, l.dense()), 1.0 / 40);
  CHECK(max_abs_diff(empirical_joint(OutputBatch(b.o), l).matrix(), dense) < 1e-15);

  CHECK_THROWS(empirical_joint(OutputBatch(b.o), LabelMatrix(b.labels, 5)));
  CHECK_THROWS(empirical_joint(OutputBatch(b.o), LabelMatrix({0, 1}, 4)));
}

TEST_CASE("dmi_loss") {
  const auto half = dmi_loss(EmpiricalJoint(Matrix{{0.5, 0}, {0, 0.5}}));
  CHECK(half.value == doctest::Approx(-std::log(0.25)));
  CHECK(half.value == doctest::Approx(1.3863).epsilon(1e-4));
  CHECK_FALSE(half.degenerate);

  const auto fixed = dmi_loss(EmpiricalJoint(Matrix{{0.1, 0.4}, {0.2, 0.3}}));
  CHECK(fixed.value == doctest::Approx(-std::log(0.05)));
  CHECK(fixed.value == doctest::Approx(2.9957).epsilon(1e-4));
  CHECK(fixed.det == doctest::Approx(-0.05));

  const auto singular = dmi_loss(EmpiricalJoint(Matrix(2, 2, 0.25)));
  CHECK(singular.degenerate);
  CHECK(singular.value == doctest::Approx(-std::log(kDegenerateDet)));

  // strictly decreasing in |det|
  double previous = std::numeric_limits<double>::infinity();
  for (double a = 0.26; a <= 0.5; a += 0.02) {
    const double v = dmi_loss(EmpiricalJoint(Matrix{{a, 0.5 - a}, {0.5 - a, a}})).value;
    CHECK(v < previous);
    previous = v;
  }
}

TEST_CASE("dmi_loss_grad closed form") {
  // u = I / 2: dL/dU = -2 I, so dL/dO = -(1/N) 2 I L^T
  const Matrix o{{1, 0}, {0, 1}};
  const LabelMatrix l({0, 1}, 2);
  CHECK(max_abs_diff(dmi_loss_grad(OutputBatch(o), l), Matrix{{-1, 0}, {0, -1}}) < 1e-15);

  const Matrix o4{{1, 0, 1, 0}, {0, 1, 0, 1}};
  const LabelMatrix l4({0, 1, 0, 1}, 2);
  CHECK(max_abs_diff(dmi_loss_grad(OutputBatch(o4), l4), scale(transpose(l4.dense()), -0.5)) < 1e-15);
}

TEST_CASE("dmi_loss_grad matches central differences") {
  std::mt19937_64 rng(2);
  for (std::size_t c : {2u, 4u, 10u}) {
    for (std::size_t n : {64u, 256u}) {
      CAPTURE(c);
      CAPTURE(n);
      const Batch b = correlated_batch(c, n, c == 10 ? 4.0 : 1.0, rng);
      const LabelMatrix l(b.labels, c);
      REQUIRE(std::abs(lu_det(empirical_joint(OutputBatch(b.o), l).matrix())) > kRegularizeDet);
      const Matrix got = dmi_loss_grad(OutputBatch(b.o), l);
      const auto fd = oracle::central_difference(
          [&](const oracle::Grid &g) { return oracle::dmi_loss(g, b.labels); }, oracle::to_grid(b.o));
      CHECK(oracle::relative_error(oracle::to_grid(got), fd) < 1e-5);
    }
  }
}

TEST_CASE("dmi_loss_grad near singular batches") {
  // rank one U: the ridge path returns a finite gradient
  const OutputBatch flat(Matrix(2, 4, 0.5));
  const Matrix g = dmi_loss_grad(flat, LabelMatrix({0, 1, 0, 1}, 2));
  CHECK(g.all_finite());
  // with ten classes even the ridge determinant is far below the tolerance
  CHECK_THROWS_AS(dmi_loss_grad(OutputBatch(Matrix(10, 20, 0.1)), LabelMatrix(std::vector<Label>(20, 3), 10)),
                  SingularMatrixError);
}

TEST_CASE("cross entropy") {
  const OutputBatch perfect(Matrix{{1, 0, 1}, {0, 1, 0}});
  CHECK(ce_loss(perfect, LabelMatrix({0, 1, 0}, 2)) == 0.0);
  const OutputBatch uniform(Matrix(5, 7, 0.2));
  CHECK(ce_loss(uniform, LabelMatrix({0, 1, 2, 3, 4, 0, 1}, 5)) == doctest::Approx(std::log(5.0)));
  // clamped, never infinite
  CHECK(ce_loss(perfect, LabelMatrix({1, 0, 1}, 2)) == doctest::Approx(-std::log(kCeProbabilityFloor)));
  const Matrix floor_grad = ce_grad(perfect, LabelMatrix({1, 0, 1}, 2));
  CHECK(floor_grad == Matrix(2, 3));

  std::mt19937_64 rng(3);
  for (std::size_t c : {2u, 5u}) {
    const Batch b = correlated_batch(c, 30, 0.5, rng);
    const LabelMatrix l(b.labels, c);
    const auto fd = oracle::central_difference(
        [&](const oracle::Grid &o) {
          double s = 0.0;
          for (std::size_t i = 0; i < b.labels.size(); ++i) s -= std::log(o[b.labels[i]][i]);
          return s / static_cast<double>(b.labels.size());
        },
        oracle::to_grid(b.o));
    CHECK(oracle::relative_error(oracle::to_grid(ce_grad(OutputBatch(b.o), l)), fd) < 1e-6);
  }
}
