// ldmi/harness.h

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

// Training with the DMI loss: cross-entropy pretraining followed by DMI
// fine-tuning with best-on-validation checkpointing, the cross-entropy
// baseline, and the noise-sweep runner.

#ifndef LDMI_HARNESS_H_
#define LDMI_HARNESS_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ldmi/data.h"
#include "ldmi/info.h"
#include "ldmi/model.h"

namespace ldmi {

enum class LossKind { kCe, kDmi };
enum class ValidationMode { kFullSet, kRandomBatch };

std::string_view to_string(LossKind k);
std::string_view to_string(ValidationMode m);

struct DatasetSpec {
  enum class Kind { kBlobs, kIdx } kind = Kind::kBlobs;
  BlobSpec blobs = default_imbalanced_blobs(70000, 0);
  std::optional<std::uint64_t> seed;  // defaults to a stream of the run seed
  std::string images_path;
  std::string labels_path;
  std::vector<Label> positive_classes;  // binarize IDX data when non-empty
  std::array<double, 3> fractions = {5.0 / 7.0, 1.0 / 7.0, 1.0 / 7.0};
};

struct TrainConfig {
  LossKind loss = LossKind::kDmi;
  std::size_t epochs = 10;
  double learning_rate = 1e-3;
  std::size_t batch_size = 128;
  OptimizerConfig optimizer;  // learning_rate here is overwritten per phase
  std::size_t pretrain_epochs = 3;
  std::optional<double> pretrain_learning_rate;  // defaults to learning_rate
  ValidationMode validation = ValidationMode::kFullSet;
  bool include_pretrained = true;  // pretrained model may be returned as best
  bool grid_search = false;
  std::uint64_t seed = 1;
  std::string channel = "none";  // builtin spec or file; "none" = clean labels
  DatasetSpec dataset;
  std::vector<std::size_t> hidden = {32};
  Activation activation = Activation::kReLU;
  std::string checkpoint_path = "checkpoint.txt";

  /// Throws ConfigError unless batch_size >= 2 C, epochs >= 1 and the
  /// learning rates are non-negative.
  void validate(std::size_t classes) const;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class TrainingAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunResult {
  LossKind loss = LossKind::kDmi;
  double best_val_loss = 0.0;
  std::optional<double> test_accuracy;  // empty when the run was flagged
  std::vector<double> train_loss;       // per epoch, mean over used batches
  std::vector<double> val_loss;         // per epoch
  double initial_val_loss = 0.0;        // pretrained model's validation loss
  std::size_t best_epoch = 0;           // 0 = the pretrained model
  std::size_t degenerate_batches = 0;
  bool uninformative_channel = false;
  TrainConfig config;
  double wall_seconds = 0.0;
  std::optional<ClassifierParams> best_params;
};

/// Builds the dataset a config describes: generation or IDX load,
/// optional binarization, split, then label noise on train and val.
Dataset prepare_dataset(const TrainConfig &config);

/// The channel a config names, or nullopt for clean labels.
std::optional<TransitionMatrix> config_channel(const TrainConfig &config, std::size_t classes);

ClassifierParams initial_classifier(const TrainConfig &config, const Dataset &data);

/// Cross-entropy training on observed train labels for
/// config.pretrain_epochs epochs.
ClassifierParams pretrain_ce(const TrainConfig &config, const Dataset &data);

/// DMI fine-tuning from `pretrained`, keeping the parameters with the lowest
/// validation DMI loss.  Degenerate batches are skipped and counted; an
/// epoch in which every batch is degenerate aborts the run.
RunResult train_dmi(const TrainConfig &config, const Dataset &data, const ClassifierParams &pretrained);

/// Cross-entropy continuation of `pretrained` for config.epochs epochs, with
/// the same best-on-validation selection under the CE loss.
RunResult train_ce(const TrainConfig &config, const Dataset &data, const ClassifierParams &pretrained);

/// Fraction of argmax predictions (ties to the lowest class) equal to the
/// clean labels of the split.  Throws std::invalid_argument on an empty split.
double evaluate(const ClassifierParams &params, const Dataset &data, Split split);

/// DMI loss of the classifier on all examples of a split (observed labels).
DmiLoss split_dmi_loss(const ClassifierParams &params, const Dataset &data, Split split);
double split_ce_loss(const ClassifierParams &params, const Dataset &data, Split split);

/// One complete run: prepare data, pretrain, train with config.loss.  A DMI
/// run through a non-invertible channel is flagged and not trained.
RunResult run_experiment(const TrainConfig &config);
RunResult run_experiment(const TrainConfig &config, const Dataset &data);

struct GridSearchResult {
  double learning_rate = 0.0;
  std::size_t batch_size = 0;
  RunResult best;
};

/// Outer grid over learning rates {1e-4, 1e-5, 1e-6} x batch sizes
/// {128, 256}, selected by minimum best validation loss.
GridSearchResult grid_search(const TrainConfig &config, const Dataset &data,
                             std::span<const double> learning_rates = {},
                             std::span<const std::size_t> batch_sizes = {});

struct SweepRow {
  int noise_case = 0;
  double r = 0.0;
  std::size_t rep = 0;
  LossKind loss = LossKind::kCe;
  std::optional<double> test_accuracy;
  double best_val_loss = 0.0;
  std::size_t degenerate_batches = 0;
  std::uint64_t seed = 0;
  bool uninformative_channel = false;
};

struct SweepSummary {
  int noise_case = 0;
  double r = 0.0;
  LossKind loss = LossKind::kCe;
  std::size_t runs = 0;          // runs with an accuracy
  double mean_accuracy = 0.0;
  double stddev_accuracy = 0.0;  // sample standard deviation
};

/// For every r and repetition, one paired CE / DMI run on the binary noise
/// case.  Each cell derives its data, noise and initialization from
/// (base.seed, case, r index, rep); the two losses share them.
std::vector<SweepRow> run_sweep(const TrainConfig &base, int noise_case, std::span<const double> r_values,
                                std::size_t repetitions, std::size_t threads = 1);

std::vector<SweepSummary> summarize(std::span<const SweepRow> rows);

/// CSV: case,r,rep,loss,test_acc,best_val_loss,degenerate_batches,seed.
void write_sweep_csv(std::ostream &os, std::span<const SweepRow> rows);

/// Human-readable key: value dump of a run.
void print_run_result(std::ostream &os, const RunResult &result);

}  // namespace ldmi

#endif  // LDMI_HARNESS_H_
