// tests/test_verify.cc

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
#include <sstream>

#include "ldmi/verify.h"
#include "oracles.h"

using namespace ldmi;

TEST_CASE("verify_theorems") {
  const VerificationReport report = verify_theorems(0, 200);
  CHECK(report.checks.size() >= 10);
  for (const auto &c : report.checks) {
    INFO(c.name << ": " << c.max_error << " " << c.failing_instance);
    CHECK(c.passed);
    CHECK(c.instances > 0);
  }
  CHECK(report.passed());
  std::ostringstream os;
  print_report(os, report);
  CHECK(os.str().find("PASS") != std::string::npos);

  CHECK_THROWS_AS(verify_theorems(0, 0), std::invalid_argument);
}

TEST_CASE("verify_theorems is seeded") {
  const auto a = verify_theorems(5, 20), b = verify_theorems(5, 20);
  REQUIRE(a.checks.size() == b.checks.size());
  for (std::size_t i = 0; i < a.checks.size(); ++i) CHECK(a.checks[i].max_error == b.checks[i].max_error);
}

TEST_CASE("random generators") {
  Rng rng(9);
  for (std::size_t c = 2; c <= 10; ++c) {
    const auto q = random_joint(c, rng, 0.5);
    CHECK(q.matrix().sum() == doctest::Approx(1.0).epsilon(1e-12));
    const auto t = random_channel(c, rng, 0.5);
    for (std::size_t i = 0; i < c; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < c; ++j) s += t(i, j);
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
      // half the mass sits on the diagonal
      CHECK(t(i, i) >= 0.5);
    }
  }
}

TEST_CASE("counterexample") {
  const CounterexampleReport r = counterexample();
  CHECK(r.mi_clean_h == doctest::Approx(2.4157e-2).epsilon(1e-3));
  CHECK(r.mi_noisy_h_prime == doctest::Approx(3.2268e-3).epsilon(1e-3));
  CHECK(r.mi_clean_h == doctest::Approx(oracle::shannon_mi(oracle::to_grid(r.clean_h.matrix()))));
  CHECK(r.dmi_noisy_h == doctest::Approx(0.02));
  CHECK(r.dmi_noisy_h_prime == doctest::Approx(0.016));
  CHECK(r.shannon_order_flips);
  CHECK(r.dmi_order_consistent);
  std::ostringstream os;
  print_counterexample(os, r);
  CHECK(!os.str().empty());
}
