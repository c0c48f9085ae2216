// ldmi/config.h

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

// Plain-text experiment configs: one `key = value` per line, '#' starts a
// comment, nesting through dotted keys.  Unknown and repeated keys are
// rejected.  Recognized keys:
//
//   seed loss epochs learning_rate batch_size pretrain_epochs
//   pretrain_learning_rate validation include_pretrained grid_search
//   channel checkpoint
//   optimizer.kind optimizer.momentum optimizer.weight_decay optimizer.beta1
//   optimizer.beta2 optimizer.epsilon
//   model.hidden model.activation
//   dataset.kind dataset.samples dataset.seed dataset.split dataset.images
//   dataset.labels dataset.positive_classes
//   dataset.class.<k>.prior dataset.class.<k>.mean dataset.class.<k>.variance
//   sweep.cases sweep.r sweep.repetitions sweep.threads

#ifndef LDMI_CONFIG_H_
#define LDMI_CONFIG_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "ldmi/harness.h"

namespace ldmi {

struct SweepSettings {
  std::vector<int> cases = {1, 2, 3};
  std::vector<double> r_values = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::size_t repetitions = 5;
  std::size_t threads = 1;
};

struct ExperimentConfig {
  TrainConfig train;
  SweepSettings sweep;
};

/// Throws ConfigError naming the offending line.
ExperimentConfig parse_config(std::istream &is);
ExperimentConfig load_config(const std::string &path);

/// Writes every TrainConfig field as `key = value`; parse_config reads it
/// back to an identical config.
void write_config(std::ostream &os, const TrainConfig &config, const std::string &prefix = "");

}  // namespace ldmi

#endif  // LDMI_CONFIG_H_
