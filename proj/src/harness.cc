// src/harness.cc

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

#include "ldmi/harness.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "ldmi/config.h"
#include "ldmi/random.h"

namespace ldmi {

namespace {

constexpr std::size_t kEvalChunk = 4096;

// Draws ceil(D / N) batches of N indices per epoch.  With N >= 4 C the
// batches are stratified by observed label so every present class shows up
// in each batch; otherwise each epoch is a reshuffled pass.
class BatchSampler {
 public:
  BatchSampler(std::vector<std::size_t> indices, std::span<const Label> labels, std::size_t classes,
               std::size_t batch_size, std::uint64_t seed)
      : all_(std::move(indices)), batch_(std::min(batch_size, all_.size())), rng_(seed) {
    if (all_.empty()) throw std::invalid_argument("BatchSampler: no examples");
    stratified_ = batch_size >= 4 * classes;
    if (!stratified_) return;

    pools_.resize(classes);
    for (std::size_t i : all_) pools_[labels[i]].push_back(i);
    cursor_.assign(classes, 0);
    for (auto &p : pools_) shuffle_in_place(p, rng_);

    // Largest-remainder quotas, at least one per present class.
    const double total = static_cast<double>(all_.size());
    quota_.assign(classes, 0);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t used = 0;
    for (std::size_t c = 0; c < classes; ++c) {
      if (pools_[c].empty()) continue;
      const double exact = static_cast<double>(batch_) * static_cast<double>(pools_[c].size()) / total;
      quota_[c] = std::max<std::size_t>(1, static_cast<std::size_t>(exact));
      used += quota_[c];
      remainders.push_back({exact - std::floor(exact), c});
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto &a, const auto &b) { return a.first > b.first; });
    for (std::size_t k = 0; used < batch_; k = (k + 1) % remainders.size(), ++used)
      ++quota_[remainders[k].second];
    while (used > batch_) {
      auto big = std::max_element(quota_.begin(), quota_.end());
      --*big;
      --used;
    }
  }

  bool stratified() const { return stratified_; }

  std::vector<std::vector<std::size_t>> epoch() {
    const std::size_t n_batches = (all_.size() + batch_ - 1) / batch_;
    std::vector<std::vector<std::size_t>> batches(n_batches);
    if (stratified_) {
      for (auto &b : batches) {
        b.reserve(batch_);
        for (std::size_t c = 0; c < pools_.size(); ++c)
          for (std::size_t k = 0; k < quota_[c]; ++k) b.push_back(draw(c));
      }
      return batches;
    }
    std::vector<std::size_t> order = all_;
    shuffle_in_place(order, rng_);
    for (std::size_t b = 0; b < n_batches; ++b) {
      batches[b].reserve(batch_);
      for (std::size_t k = 0; k < batch_; ++k) batches[b].push_back(order[(b * batch_ + k) % order.size()]);
    }
    return batches;
  }

  /// One batch of N indices without replacement.
  std::vector<std::size_t> sample() {
    std::vector<std::size_t> order = all_;
    shuffle_in_place(order, rng_);
    order.resize(batch_);
    return order;
  }

 private:
  std::size_t draw(std::size_t c) {
    auto &pool = pools_[c];
    if (cursor_[c] == pool.size()) {
      shuffle_in_place(pool, rng_);
      cursor_[c] = 0;
    }
    return pool[cursor_[c]++];
  }

  std::vector<std::size_t> all_;
  std::size_t batch_;
  Rng rng_;
  bool stratified_ = false;
  std::vector<std::vector<std::size_t>> pools_;
  std::vector<std::size_t> cursor_;
  std::vector<std::size_t> quota_;
};

struct Batch {
  Matrix x;
  LabelMatrix labels;
};

Batch make_batch(const Dataset &data, std::span<const std::size_t> idx) {
  return {gather_rows(data.features, idx), LabelMatrix(gather<Label>(data.observed_labels(), idx), data.classes)};
}

// Accumulates the C x C empirical joint over a whole index set in chunks.
Matrix accumulate_joint(const ClassifierParams &params, const Dataset &data,
                        std::span<const std::size_t> idx) {
  const std::size_t c = data.classes;
  Matrix u(c, c);
  const auto labels = data.observed_labels();
  for (std::size_t start = 0; start < idx.size(); start += kEvalChunk) {
    const auto chunk = idx.subspan(start, std::min(kEvalChunk, idx.size() - start));
    const OutputBatch o = predict(params, gather_rows(data.features, chunk));
    for (std::size_t i = 0; i < chunk.size(); ++i)
      for (std::size_t k = 0; k < c; ++k) u(k, labels[chunk[i]]) += o.matrix()(k, i);
  }
  return scale(u, 1.0 / static_cast<double>(idx.size()));
}

DmiLoss dmi_loss_on(const ClassifierParams &params, const Dataset &data, std::span<const std::size_t> idx) {
  return dmi_loss(EmpiricalJoint(accumulate_joint(params, data, idx)));
}

double ce_loss_on(const ClassifierParams &params, const Dataset &data, std::span<const std::size_t> idx) {
  double total = 0.0;
  for (std::size_t start = 0; start < idx.size(); start += kEvalChunk) {
    const auto chunk = idx.subspan(start, std::min(kEvalChunk, idx.size() - start));
    const Batch b = make_batch(data, chunk);
    total += ce_loss(predict(params, b.x), b.labels) * static_cast<double>(chunk.size());
  }
  return total / static_cast<double>(idx.size());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::size_t> require_split(const Dataset &data, Split s, const char *what) {
  auto idx = data.indices(s);
  if (idx.empty())
    throw std::invalid_argument(std::string(what) + ": the " + std::string(to_string(s)) + " split is empty");
  return idx;
}

OptimizerConfig phase_optimizer(const TrainConfig &config, double lr) {
  OptimizerConfig opt = config.optimizer;
  opt.learning_rate = lr;
  return opt;
}

// Shared loop for the CE pretraining and CE baseline phases.
void ce_epoch(ClassifierParams &params, OptimizerState &opt, const Dataset &data, BatchSampler &sampler,
              double *mean_loss) {
  double total = 0.0;
  std::size_t used = 0;
  for (const auto &idx : sampler.epoch()) {
    const Batch b = make_batch(data, idx);
    auto fwd = forward(params, b.x);
    total += ce_loss(fwd.output, b.labels);
    ++used;
    opt.step(params, backward(params, fwd.cache, ce_grad(fwd.output, b.labels)));
  }
  if (mean_loss) *mean_loss = used ? total / static_cast<double>(used) : 0.0;
}

}  // namespace

std::string_view to_string(LossKind k) { return k == LossKind::kDmi ? "dmi" : "ce"; }

std::string_view to_string(ValidationMode m) { return m == ValidationMode::kFullSet ? "full" : "batch"; }

void TrainConfig::validate(std::size_t classes) const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 2 * classes)
    throw ConfigError("batch_size " + std::to_string(batch_size) + " is below 2 * classes = " +
                      std::to_string(2 * classes));
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be non-negative");
  if (pretrain_learning_rate && !(*pretrain_learning_rate >= 0.0))
    throw ConfigError("pretrain_learning_rate must be non-negative");
}

std::optional<TransitionMatrix> config_channel(const TrainConfig &config, std::size_t classes) {
  if (config.channel.empty() || config.channel == "none") return std::nullopt;
  TransitionMatrix t = channel_from_spec(config.channel);
  if (t.classes() != classes)
    throw ConfigError("channel '" + config.channel + "' has " + std::to_string(t.classes()) +
                      " classes but the dataset has " + std::to_string(classes));
  return t;
}

Dataset prepare_dataset(const TrainConfig &config) {
  const std::uint64_t data_seed = config.dataset.seed.value_or(derive_seed(config.seed, "dataset"));
  Dataset data;
  if (config.dataset.kind == DatasetSpec::Kind::kBlobs) {
    BlobSpec spec = config.dataset.blobs;
    spec.seed = data_seed;
    data = gaussian_blobs(spec);
  } else {
    data = load_idx(config.dataset.images_path, config.dataset.labels_path);
    if (!config.dataset.positive_classes.empty()) data = binarize(data, config.dataset.positive_classes);
  }
  data = split(data, config.dataset.fractions, derive_seed(data_seed, "split"));
  if (auto channel = config_channel(config, data.classes))
    data = apply_noise(data, *channel, derive_seed(config.seed, "noise"));
  data.validate();
  return data;
}

ClassifierParams initial_classifier(const TrainConfig &config, const Dataset &data) {
  std::vector<std::size_t> dims{data.dim()};
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(data.classes);
  return ClassifierParams::initialize(dims, config.activation, derive_seed(config.seed, "init"));
}

ClassifierParams pretrain_ce(const TrainConfig &config, const Dataset &data) {
  config.validate(data.classes);
  ClassifierParams params = initial_classifier(config, data);
  if (config.pretrain_epochs == 0) return params;
  BatchSampler sampler(require_split(data, Split::kTrain, "pretrain_ce"), data.observed_labels(), data.classes,
                       config.batch_size, derive_seed(config.seed, "pretrain_batches"));
  OptimizerState opt(phase_optimizer(config, config.pretrain_learning_rate.value_or(config.learning_rate)),
                     params);
  for (std::size_t e = 0; e < config.pretrain_epochs; ++e) ce_epoch(params, opt, data, sampler, nullptr);
  return params;
}

RunResult train_dmi(const TrainConfig &config, const Dataset &data, const ClassifierParams &pretrained) {
  const auto t0 = std::chrono::steady_clock::now();
  config.validate(data.classes);
  const auto val_idx = require_split(data, Split::kVal, "train_dmi");
  BatchSampler sampler(require_split(data, Split::kTrain, "train_dmi"), data.observed_labels(), data.classes,
                       config.batch_size, derive_seed(config.seed, "dmi_batches"));
  BatchSampler val_sampler(val_idx, data.observed_labels(), data.classes, config.batch_size,
                           derive_seed(config.seed, "dmi_validation"));
  auto val_loss = [&](const ClassifierParams &p) {
    if (config.validation == ValidationMode::kFullSet) return dmi_loss_on(p, data, val_idx).value;
    return dmi_loss_on(p, data, val_sampler.sample()).value;
  };

  RunResult result;
  result.loss = LossKind::kDmi;
  result.config = config;
  ClassifierParams params = pretrained;
  OptimizerState opt(phase_optimizer(config, config.learning_rate), params);

  result.initial_val_loss = val_loss(params);
  double best = config.include_pretrained ? result.initial_val_loss : std::numeric_limits<double>::infinity();
  std::optional<ClassifierParams> best_params;
  if (config.include_pretrained) best_params = params;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    double total = 0.0;
    std::size_t used = 0;
    const auto batches = sampler.epoch();
    for (const auto &idx : batches) {
      const Batch b = make_batch(data, idx);
      auto fwd = forward(params, b.x);
      const DmiLoss loss = dmi_loss(empirical_joint(fwd.output, b.labels));
      if (loss.degenerate) {
        ++result.degenerate_batches;
        continue;
      }
      total += loss.value;
      ++used;
      opt.step(params, backward(params, fwd.cache, dmi_loss_grad(fwd.output, b.labels)));
    }
    if (used == 0)
      throw TrainingAborted("train_dmi: all " + std::to_string(batches.size()) + " batches of epoch " +
                            std::to_string(epoch) + " were degenerate (|det U| < " +
                            std::to_string(kDegenerateDet) + ")");
    result.train_loss.push_back(total / static_cast<double>(used));
    const double v = val_loss(params);
    result.val_loss.push_back(v);
    if (v < best) {
      best = v;
      best_params = params;
      result.best_epoch = epoch;
    }
  }

  result.best_val_loss = best;
  result.best_params = std::move(best_params);
  result.test_accuracy = evaluate(*result.best_params, data, Split::kTest);
  result.wall_seconds = seconds_since(t0);
  return result;
}

RunResult train_ce(const TrainConfig &config, const Dataset &data, const ClassifierParams &pretrained) {
  const auto t0 = std::chrono::steady_clock::now();
  config.validate(data.classes);
  const auto val_idx = require_split(data, Split::kVal, "train_ce");
  BatchSampler sampler(require_split(data, Split::kTrain, "train_ce"), data.observed_labels(), data.classes,
                       config.batch_size, derive_seed(config.seed, "ce_batches"));

  RunResult result;
  result.loss = LossKind::kCe;
  result.config = config;
  ClassifierParams params = pretrained;
  OptimizerState opt(phase_optimizer(config, config.learning_rate), params);

  result.initial_val_loss = ce_loss_on(params, data, val_idx);
  double best = config.include_pretrained ? result.initial_val_loss : std::numeric_limits<double>::infinity();
  std::optional<ClassifierParams> best_params;
  if (config.include_pretrained) best_params = params;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    double mean = 0.0;
    ce_epoch(params, opt, data, sampler, &mean);
    result.train_loss.push_back(mean);
    const double v = ce_loss_on(params, data, val_idx);
    result.val_loss.push_back(v);
    if (v < best) {
      best = v;
      best_params = params;
      result.best_epoch = epoch;
    }
  }
  result.best_val_loss = best;
  result.best_params = std::move(best_params);
  result.test_accuracy = evaluate(*result.best_params, data, Split::kTest);
  result.wall_seconds = seconds_since(t0);
  return result;
}

double evaluate(const ClassifierParams &params, const Dataset &data, Split split) {
  const auto idx = require_split(data, split, "evaluate");
  std::size_t correct = 0;
  for (std::size_t start = 0; start < idx.size(); start += kEvalChunk) {
    const auto chunk = std::span<const std::size_t>(idx).subspan(start, std::min(kEvalChunk, idx.size() - start));
    const OutputBatch o = predict(params, gather_rows(data.features, chunk));
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < o.classes(); ++c)
        if (o.matrix()(c, i) > o.matrix()(best, i)) best = c;
      if (static_cast<Label>(best) == data.clean_labels[chunk[i]]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(idx.size());
}

DmiLoss split_dmi_loss(const ClassifierParams &params, const Dataset &data, Split split) {
  return dmi_loss_on(params, data, require_split(data, split, "split_dmi_loss"));
}

double split_ce_loss(const ClassifierParams &params, const Dataset &data, Split split) {
  return ce_loss_on(params, data, require_split(data, split, "split_ce_loss"));
}

RunResult run_experiment(const TrainConfig &config) { return run_experiment(config, prepare_dataset(config)); }

RunResult run_experiment(const TrainConfig &config, const Dataset &data) {
  const auto t0 = std::chrono::steady_clock::now();
  config.validate(data.classes);
  if (config.loss == LossKind::kDmi) {
    const auto channel = config_channel(config, data.classes);
    if (channel && !is_informative(*channel)) {
      RunResult flagged;
      flagged.loss = LossKind::kDmi;
      flagged.config = config;
      flagged.uninformative_channel = true;
      flagged.best_val_loss = std::numeric_limits<double>::quiet_NaN();
      flagged.initial_val_loss = flagged.best_val_loss;
      flagged.wall_seconds = seconds_since(t0);
      return flagged;
    }
  }
  const ClassifierParams pretrained = pretrain_ce(config, data);
  RunResult result = config.loss == LossKind::kDmi ? train_dmi(config, data, pretrained)
                                                   : train_ce(config, data, pretrained);
  result.wall_seconds = seconds_since(t0);
  return result;
}

GridSearchResult grid_search(const TrainConfig &config, const Dataset &data,
                             std::span<const double> learning_rates, std::span<const std::size_t> batch_sizes) {
  static constexpr double kRates[] = {1e-4, 1e-5, 1e-6};
  static constexpr std::size_t kBatches[] = {128, 256};
  if (learning_rates.empty()) learning_rates = kRates;
  if (batch_sizes.empty()) batch_sizes = kBatches;

  std::optional<GridSearchResult> best;
  for (double lr : learning_rates) {
    for (std::size_t n : batch_sizes) {
      TrainConfig c = config;
      c.learning_rate = lr;
      c.batch_size = n;
      c.grid_search = false;
      RunResult r = run_experiment(c, data);
      if (r.uninformative_channel) return {lr, n, std::move(r)};
      if (!best || r.best_val_loss < best->best.best_val_loss) best = GridSearchResult{lr, n, std::move(r)};
    }
  }
  return std::move(*best);
}

std::vector<SweepRow> run_sweep(const TrainConfig &base, int noise_case, std::span<const double> r_values,
                                std::size_t repetitions, std::size_t threads) {
  for (double r : r_values)
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("sweep: r values must lie in [0, 1]");
  struct Cell {
    std::size_t r_index;
    std::size_t rep;
  };
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < r_values.size(); ++i)
    for (std::size_t rep = 0; rep < repetitions; ++rep) cells.push_back({i, rep});

  std::vector<std::array<SweepRow, 2>> out(cells.size());
  auto run_cell = [&](std::size_t k) {
    const Cell &cell = cells[k];
    const double r = r_values[cell.r_index];
    TrainConfig config = base;
    config.seed = derive_seed(base.seed, {static_cast<std::uint64_t>(noise_case), cell.r_index, cell.rep});
    std::ostringstream spec;
    spec << std::setprecision(17) << "case" << noise_case << ':' << r;
    config.channel = spec.str();

    const Dataset data = prepare_dataset(config);
    const ClassifierParams pretrained = pretrain_ce(config, data);
    const TransitionMatrix channel = noise_case_channel(noise_case, r);

    auto row = [&](LossKind loss) {
      SweepRow s;
      s.noise_case = noise_case;
      s.r = r;
      s.rep = cell.rep;
      s.loss = loss;
      s.seed = config.seed;
      return s;
    };
    SweepRow ce = row(LossKind::kCe);
    const RunResult ce_run = train_ce(config, data, pretrained);
    ce.test_accuracy = ce_run.test_accuracy;
    ce.best_val_loss = ce_run.best_val_loss;

    SweepRow dm = row(LossKind::kDmi);
    if (!is_informative(channel)) {
      dm.uninformative_channel = true;
      dm.best_val_loss = std::numeric_limits<double>::quiet_NaN();
    } else {
      const RunResult dmi_run = train_dmi(config, data, pretrained);
      dm.test_accuracy = dmi_run.test_accuracy;
      dm.best_val_loss = dmi_run.best_val_loss;
      dm.degenerate_batches = dmi_run.degenerate_batches;
    }
    out[k] = {ce, dm};
  };

  threads = std::max<std::size_t>(1, std::min(threads, cells.size()));
  if (threads == 1) {
    for (std::size_t k = 0; k < cells.size(); ++k) run_cell(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t k = next++; k < cells.size(); k = next++) run_cell(k);
        } catch (...) {
          errors[t] = std::current_exception();
          next = cells.size();
        }
      });
    }
    for (auto &th : pool) th.join();
    for (auto &e : errors)
      if (e) std::rethrow_exception(e);
  }

  std::vector<SweepRow> rows;
  rows.reserve(2 * out.size());
  for (auto &pair : out) {
    rows.push_back(pair[0]);
    rows.push_back(pair[1]);
  }
  return rows;
}

std::vector<SweepSummary> summarize(std::span<const SweepRow> rows) {
  std::map<std::tuple<int, double, int>, std::vector<double>> groups;
  std::vector<std::tuple<int, double, int>> order;
  for (const auto &row : rows) {
    const auto key = std::make_tuple(row.noise_case, row.r, static_cast<int>(row.loss));
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    if (row.test_accuracy) it->second.push_back(*row.test_accuracy);
  }
  std::vector<SweepSummary> out;
  for (const auto &key : order) {
    const auto &acc = groups[key];
    SweepSummary s;
    s.noise_case = std::get<0>(key);
    s.r = std::get<1>(key);
    s.loss = static_cast<LossKind>(std::get<2>(key));
    s.runs = acc.size();
    if (!acc.empty()) {
      double sum = 0.0;
      for (double a : acc) sum += a;
      s.mean_accuracy = sum / static_cast<double>(acc.size());
      double ss = 0.0;
      for (double a : acc) ss += (a - s.mean_accuracy) * (a - s.mean_accuracy);
      s.stddev_accuracy = acc.size() > 1 ? std::sqrt(ss / static_cast<double>(acc.size() - 1)) : 0.0;
    } else {
      s.mean_accuracy = s.stddev_accuracy = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(s);
  }
  return out;
}

void write_sweep_csv(std::ostream &os, std::span<const SweepRow> rows) {
  os << "case,r,rep,loss,test_acc,best_val_loss,degenerate_batches,seed\n";
  os << std::setprecision(10);
  for (const auto &row : rows) {
    os << row.noise_case << ',' << row.r << ',' << row.rep << ',' << to_string(row.loss) << ',';
    if (row.test_accuracy) os << *row.test_accuracy;
    else os << "nan";
    os << ',';
    if (std::isnan(row.best_val_loss)) os << "nan";
    else os << row.best_val_loss;
    os << ',' << row.degenerate_batches << ',' << row.seed << '\n';
  }
}

void print_run_result(std::ostream &os, const RunResult &result) {
  auto list = [&](const std::vector<double> &v) {
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << '\n';
  };
  os << std::setprecision(8);
  os << "loss = " << to_string(result.loss) << '\n';
  os << "uninformative_channel = " << (result.uninformative_channel ? "true" : "false") << '\n';
  os << "test_accuracy = ";
  if (result.test_accuracy) os << *result.test_accuracy << '\n';
  else os << "nan\n";
  os << "best_val_loss = " << result.best_val_loss << '\n';
  os << "initial_val_loss = " << result.initial_val_loss << '\n';
  os << "best_epoch = " << result.best_epoch << '\n';
  os << "degenerate_batches = " << result.degenerate_batches << '\n';
  os << "train_loss = ";
  list(result.train_loss);
  os << "val_loss = ";
  list(result.val_loss);
  os << "wall_seconds = " << result.wall_seconds << '\n';
  write_config(os, result.config, "config.");
}

}  // namespace ldmi
