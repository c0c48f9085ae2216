// tests/test_numerics.cc

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
#include <limits>
#include <numeric>
#include <random>

#include "ldmi/numerics.h"
#include "oracles.h"

using namespace ldmi;

TEST_CASE("matrix construction checks its invariants") {
  CHECK_THROWS_AS(Matrix(2, 2, std::vector<double>{1, 2, 3}), ShapeError);
  CHECK_THROWS_AS(Matrix(1, 2, std::vector<double>{1, std::nan("")}), std::invalid_argument);
  CHECK_THROWS_AS(Matrix(1, 1, std::vector<double>{std::numeric_limits<double>::infinity()}),
                  std::invalid_argument);
  CHECK_THROWS_AS((Matrix{{1, 2}, {3}}), ShapeError);
  const Matrix m{{1, 2, 3}, {4, 5, 6}};
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m(1, 2) == 6);
  CHECK(m.sum() == 21);
}

TEST_CASE("matmul") {
  SUBCASE("identity is neutral") {
    const Matrix x{{0.3, -1.2}, {2.5, 7.0}};
    CHECK(matmul(Matrix::identity(2), x) == x);
    CHECK(matmul(x, Matrix::identity(2)) == x);
  }
  SUBCASE("two-by-two product") {
    const Matrix p = matmul(Matrix{{0.1, 0.4}, {0.2, 0.3}}, Matrix{{0.8, 0.2}, {0.4, 0.6}});
    CHECK(max_abs_diff(p, Matrix{{0.24, 0.26}, {0.28, 0.22}}) < 1e-15);
  }
  SUBCASE("random 5x3 by 3x4 against the triple loop") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
      const auto a = oracle::random_grid(5, 3, rng);
      const auto b = oracle::random_grid(3, 4, rng);
      const Matrix got = matmul(oracle::to_matrix(a), oracle::to_matrix(b));
      CHECK(oracle::max_abs_diff(oracle::to_grid(got), oracle::matmul(a, b)) < 1e-14);
    }
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 3)), ShapeError);
    CHECK_THROWS_AS(add(Matrix(2, 3), Matrix(3, 2)), ShapeError);
  }
  SUBCASE("associativity up to rounding") {
    std::mt19937_64 rng(8);
    const Matrix a = oracle::to_matrix(oracle::random_grid(4, 5, rng));
    const Matrix b = oracle::to_matrix(oracle::random_grid(5, 3, rng));
    const Matrix c = oracle::to_matrix(oracle::random_grid(3, 6, rng));
    CHECK(max_abs_diff(matmul(matmul(a, b), c), matmul(a, matmul(b, c))) < 1e-13);
  }
}

TEST_CASE("lu_det") {
  CHECK(lu_det(Matrix::identity(7)) == doctest::Approx(1.0));
  CHECK(lu_det(Matrix{{0.1, 0.4}, {0.2, 0.3}}) == doctest::Approx(0.1 * 0.3 - 0.4 * 0.2).epsilon(1e-14));
  CHECK(lu_det(Matrix{{0.1, 0.4}, {0.2, 0.3}}) == doctest::Approx(-0.05).epsilon(1e-14));
  CHECK(lu_det(Matrix(3, 3)) == 0.0);
  CHECK_THROWS_AS(lu_det(Matrix(2, 3)), ShapeError);

  SUBCASE("agrees with cofactor expansion for n <= 5") {
    // Near-singular draws are skipped: there the rounding in either method
    // scales with the condition number and 1e-12 is out of reach for both.
    std::mt19937_64 rng(11);
    int compared = 0;
    for (int trial = 0; trial < 600; ++trial) {
      const std::size_t n = 1 + trial % 5;
      const auto a = oracle::random_grid(n, n, rng);
      if (oracle::condition_number(a) > 100.0) continue;
      ++compared;
      const double want = oracle::cofactor_det(a);
      const double got = lu_det(oracle::to_matrix(a));
      CHECK(std::abs(got - want) <= 1e-12 * std::abs(want));
    }
    CHECK(compared >= 300);
  }
  SUBCASE("10x10 against full pivoting in extended precision") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 50; ++trial) {
      const auto a = oracle::random_grid(10, 10, rng);
      const double want = static_cast<double>(oracle::full_pivot_det(a));
      CHECK(std::abs(lu_det(oracle::to_matrix(a)) - want) <= 1e-10 * std::abs(want));
    }
  }
  SUBCASE("transpose and permutations") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 1 + trial % 8;
      const Matrix a = oracle::to_matrix(oracle::random_grid(n, n, rng));
      CHECK(lu_det(transpose(a)) == doctest::Approx(lu_det(a)).epsilon(1e-10));
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      Matrix p(n, n);
      for (std::size_t i = 0; i < n; ++i) p(i, perm[i]) = 1.0;
      CHECK(std::abs(lu_det(p)) == 1.0);
    }
  }
  SUBCASE("multiplicative") {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 1 + trial % 9;
      const Matrix a = oracle::to_matrix(oracle::random_grid(n, n, rng));
      const Matrix b = oracle::to_matrix(oracle::random_grid(n, n, rng));
      const double want = lu_det(a) * lu_det(b);
      CHECK(std::abs(lu_det(matmul(a, b)) - want) <= 1e-10 * std::abs(want));
    }
  }
}

TEST_CASE("inverse") {
  const std::vector<double> d{2.0, 4.0};
  CHECK(inverse(Matrix::diagonal(d)) == Matrix{{0.5, 0.0}, {0.0, 0.25}});

  const Matrix a{{0.24, 0.26}, {0.28, 0.22}};
  CHECK(max_abs_diff(matmul(a, inverse(a)), Matrix::identity(2)) < 1e-10);
  CHECK(max_abs_diff(matmul(inverse(a), a), Matrix::identity(2)) < 1e-10);

  try {
    inverse(Matrix(3, 3));
    FAIL("zero matrix inverted");
  } catch (const SingularMatrixError &e) {
    CHECK(e.determinant() == 0.0);
  }
  // rank one but not exactly zero: still rejected, determinant reported
  CHECK_THROWS_AS(inverse(Matrix{{1.0, 2.0}, {0.5, 1.0 + 1e-17}}), SingularMatrixError);
  CHECK_THROWS_AS(inverse(Matrix(2, 3)), ShapeError);

  SUBCASE("against Gauss-Jordan, and the double inverse") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 1 + trial % 10;
      auto g = oracle::random_grid(n, n, rng);
      for (std::size_t i = 0; i < n; ++i) g[i][i] += static_cast<double>(n);  // well conditioned
      const Matrix m = oracle::to_matrix(g);
      CHECK(oracle::max_abs_diff(oracle::to_grid(inverse(m)), oracle::gauss_jordan_inverse(g)) < 1e-12);
      CHECK(max_abs_diff(inverse(inverse(m)), m) < 1e-8);
      CHECK(max_abs_diff(matmul(m, inverse(m)), Matrix::identity(n)) < 1e-10);
    }
  }
}

TEST_CASE("norms and helpers") {
  const Matrix a{{3, -4}, {0, 0}};
  CHECK(frobenius_norm(a) == doctest::Approx(5.0));
  CHECK(max_abs(a) == 4.0);
  CHECK(transpose(a) == Matrix{{3, 0}, {-4, 0}});
  CHECK(scale(a, 2.0) == Matrix{{6, -8}, {0, 0}});
  CHECK(subtract(a, a) == Matrix(2, 2));
  CHECK(to_string(Matrix{{0.5, 1}}) == "[0.5 1]\n");
}
