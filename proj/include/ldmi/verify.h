// ldmi/verify.h

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

// Randomized property suite for the information measures and the DMI loss,
// plus the two-classifier example where Shannon MI changes its ranking
// under label noise and DMI does not.

#ifndef LDMI_VERIFY_H_
#define LDMI_VERIFY_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ldmi/info.h"
#include "ldmi/random.h"

namespace ldmi {

/// Random joint with an optional identity component of weight
/// `diagonal_weight` (0 = fully random).
JointDistribution random_joint(std::size_t classes, Rng &rng, double diagonal_weight = 0.0);

/// Random row-stochastic matrix, mixed with the identity the same way.
TransitionMatrix random_channel(std::size_t classes, Rng &rng, double diagonal_weight = 0.0);

struct PropertyCheck {
  std::string name;
  bool passed = true;
  std::size_t instances = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  std::string failing_instance;  // first violation, empty when passed
};

struct VerificationReport {
  std::vector<PropertyCheck> checks;
  bool passed() const;
};

/// Runs every property with `trials` random instances where the property is
/// randomized.  Throws std::invalid_argument if trials is 0.
VerificationReport verify_theorems(std::uint64_t seed, std::size_t trials);

void print_report(std::ostream &os, const VerificationReport &report);

struct CounterexampleReport {
  JointDistribution clean_h, clean_h_prime;  // Q_{h(X),Y}
  TransitionMatrix channel;
  JointDistribution noisy_h, noisy_h_prime;  // pushed through the channel
  double mi_clean_h = 0, mi_clean_h_prime = 0, mi_noisy_h = 0, mi_noisy_h_prime = 0;
  double dmi_clean_h = 0, dmi_clean_h_prime = 0, dmi_noisy_h = 0, dmi_noisy_h_prime = 0;
  bool shannon_order_flips = false;
  bool dmi_order_consistent = false;
};

CounterexampleReport counterexample();

void print_counterexample(std::ostream &os, const CounterexampleReport &report);

}  // namespace ldmi

#endif  // LDMI_VERIFY_H_
