// tools/ldmi.cc

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

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ldmi/config.h"
#include "ldmi/harness.h"
#include "ldmi/verify.h"

namespace {

using namespace ldmi;

int cmd_train(const std::string &config_path, const std::string &checkpoint) {
  ExperimentConfig cfg = load_config(config_path);
  if (!checkpoint.empty()) cfg.train.checkpoint_path = checkpoint;
  const Dataset data = prepare_dataset(cfg.train);
  RunResult result;
  if (cfg.train.grid_search) {
    GridSearchResult g = grid_search(cfg.train, data);
    std::cout << "grid_search.learning_rate = " << g.learning_rate << '\n'
              << "grid_search.batch_size = " << g.batch_size << '\n';
    result = std::move(g.best);
  } else {
    result = run_experiment(cfg.train, data);
  }
  print_run_result(std::cout, result);
  if (result.best_params) {
    save_checkpoint(cfg.train.checkpoint_path, *result.best_params);
    std::cout << "checkpoint = " << cfg.train.checkpoint_path << '\n';
  }
  return 0;
}

int cmd_sweep(const std::string &config_path, const std::string &out_path, std::optional<std::size_t> threads) {
  const ExperimentConfig cfg = load_config(config_path);
  std::vector<SweepRow> rows;
  for (int noise_case : cfg.sweep.cases) {
    auto part = run_sweep(cfg.train, noise_case, cfg.sweep.r_values, cfg.sweep.repetitions,
                          threads.value_or(cfg.sweep.threads));
    rows.insert(rows.end(), part.begin(), part.end());
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
  write_sweep_csv(out, rows);

  std::cout << "case  r     loss  runs  mean_acc  std_acc\n";
  for (const auto &s : summarize(rows)) {
    std::cout << std::fixed << std::setprecision(2) << s.noise_case << "     " << s.r << "  " << std::left
              << std::setw(4) << to_string(s.loss) << std::right << "  " << std::setw(4) << s.runs << "  "
              << std::setprecision(4) << s.mean_accuracy << "    " << s.stddev_accuracy << '\n';
  }
  std::cout << std::defaultfloat << rows.size() << " rows written to " << out_path << '\n';
  return 0;
}

// One label per line; a non-numeric first line is a header.  With several
// columns the one named `column` is used.
std::vector<Label> read_label_csv(const std::string &path, const std::string &column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open labels '" + path + "'");
  auto cells = [](const std::string &line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      out.push_back(cell);
    }
    return out;
  };
  auto parse = [](const std::string &s, Label &v) {
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && p == s.data() + s.size() && v >= 0;
  };
  std::vector<Label> labels;
  std::string line;
  std::size_t col = 0, lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto c = cells(line);
    Label v = 0;
    if (lineno == 1 && !parse(c[0], v)) {
      if (c.size() > 1) {
        const auto it = std::find(c.begin(), c.end(), column);
        if (it == c.end()) throw std::runtime_error(path + ": no column named '" + column + "'");
        col = static_cast<std::size_t>(it - c.begin());
      }
      continue;
    }
    if (col >= c.size() || !parse(c[col], v))
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected a non-negative integer label");
    labels.push_back(v);
  }
  return labels;
}

int cmd_corrupt(const std::string &channel_spec, const std::string &labels_path, std::uint64_t seed,
                const std::string &column, const std::string &out_path) {
  const TransitionMatrix t = channel_from_spec(channel_spec);
  const auto labels = read_label_csv(labels_path, column);
  for (Label y : labels)
    if (static_cast<std::size_t>(y) >= t.classes())
      throw std::runtime_error("label " + std::to_string(y) + " is outside the channel's " +
                               std::to_string(t.classes()) + " classes");
  const auto noisy = corrupt_labels(labels, t, seed);
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw std::runtime_error("cannot write '" + out_path + "'");
  }
  std::ostream &os = out_path.empty() ? std::cout : file;
  os << "clean_label,noisy_label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) os << labels[i] << ',' << noisy[i] << '\n';
  return 0;
}

int cmd_verify(std::size_t trials, std::uint64_t seed) {
  const VerificationReport report = verify_theorems(seed, trials);
  print_report(std::cout, report);
  return report.passed() ? 0 : 1;
}

int cmd_counterexample() {
  const CounterexampleReport r = counterexample();
  print_counterexample(std::cout, r);
  return r.shannon_order_flips && r.dmi_order_consistent ? 0 : 1;
}

int cmd_dataset(const std::string &config_path, const std::string &out_path) {
  const ExperimentConfig cfg = load_config(config_path);
  const Dataset data = prepare_dataset(cfg.train);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
  write_csv(out, data);
  std::cout << data.size() << " examples written to " << out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Label-noise-robust training with the determinant-based mutual information loss"};
  app.require_subcommand(1);

  std::string config_path, out_path, checkpoint, channel, labels_path, column = "label";
  std::uint64_t seed = 0;
  std::size_t trials = 1000;
  std::optional<std::size_t> threads;

  auto *train = app.add_subcommand("train", "Run one training experiment");
  train->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  train->add_option("--checkpoint", checkpoint, "Checkpoint path (overrides the config)");

  auto *sweep = app.add_subcommand("sweep", "Noise-rate sweep of paired CE / DMI runs");
  sweep->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out_path, "Results CSV")->required();
  sweep->add_option("--threads", threads, "Worker threads (overrides sweep.threads)");

  auto *corrupt = app.add_subcommand("corrupt", "Pass labels through a noise channel");
  corrupt->add_option("--channel", channel, "Channel file or builtin spec")->required();
  corrupt->add_option("--labels", labels_path, "Label CSV")->required()->check(CLI::ExistingFile);
  corrupt->add_option("--seed", seed, "Seed")->required();
  corrupt->add_option("--column", column, "Label column when the CSV has several");
  corrupt->add_option("--out", out_path, "Output CSV (default stdout)");

  auto *verify = app.add_subcommand("verify", "Randomized property suite");
  verify->add_option("--trials", trials, "Random instances per property")->check(CLI::PositiveNumber);
  verify->add_option("--seed", seed, "Seed");

  auto *cex = app.add_subcommand("counterexample", "Shannon MI vs DMI ranking under noise");

  auto *dataset = app.add_subcommand("dataset", "Export the configured dataset as CSV");
  dataset->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  dataset->add_option("--out", out_path, "Output CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(config_path, checkpoint);
    if (*sweep) return cmd_sweep(config_path, out_path, threads);
    if (*corrupt) return cmd_corrupt(channel, labels_path, seed, column, out_path);
    if (*verify) return cmd_verify(trials, seed);
    if (*cex) return cmd_counterexample();
    if (*dataset) return cmd_dataset(config_path, out_path);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
