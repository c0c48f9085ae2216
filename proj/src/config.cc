// src/config.cc

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

#include "ldmi/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <type_traits>

namespace ldmi {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string &value) {
  std::vector<std::string> out;
  if (trim(value).empty() || trim(value) == "none") return out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

double to_double(const std::string &s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ConfigError("expected a finite number, got '" + s + "'");
  return v;
}

std::uint64_t to_uint(const std::string &s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ConfigError("expected a non-negative integer, got '" + s + "'");
  return v;
}

bool to_bool(const std::string &s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("expected true or false, got '" + s + "'");
}

std::vector<double> to_doubles(const std::string &s) {
  std::vector<double> out;
  for (const auto &item : split_list(s)) out.push_back(to_double(item));
  return out;
}

template <typename T>
std::vector<T> to_uints(const std::string &s) {
  std::vector<T> out;
  for (const auto &item : split_list(s)) out.push_back(static_cast<T>(to_uint(item)));
  return out;
}

LossKind parse_loss(const std::string &s) {
  if (s == "dmi") return LossKind::kDmi;
  if (s == "ce") return LossKind::kCe;
  throw ConfigError("unknown loss '" + s + "' (expected dmi or ce)");
}

ValidationMode parse_validation(const std::string &s) {
  if (s == "full") return ValidationMode::kFullSet;
  if (s == "batch") return ValidationMode::kRandomBatch;
  throw ConfigError("unknown validation mode '" + s + "' (expected full or batch)");
}

// Shortest text that reads back to the same double.
std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <typename T>
void write_list(std::ostream &os, const std::vector<T> &v) {
  if (v.empty()) os << "none";
  for (std::size_t i = 0; i < v.size(); ++i) {
    os << (i ? "," : "");
    if constexpr (std::is_floating_point_v<T>) os << num(v[i]);
    else os << v[i];
  }
}

// dataset.class.<k>.<field>
bool apply_class_key(std::map<std::size_t, std::map<std::string, std::string>> &classes,
                     const std::string &key, const std::string &value) {
  static const std::string prefix = "dataset.class.";
  if (key.rfind(prefix, 0) != 0) return false;
  const std::string rest = key.substr(prefix.size());
  const auto dot = rest.find('.');
  if (dot == std::string::npos) return false;
  const std::string field = rest.substr(dot + 1);
  if (field != "prior" && field != "mean" && field != "variance") return false;
  classes[to_uint(rest.substr(0, dot))][field] = value;
  return true;
}

}  // namespace

ExperimentConfig parse_config(std::istream &is) {
  ExperimentConfig cfg;
  TrainConfig &t = cfg.train;
  const std::map<std::string, std::function<void(const std::string &)>> handlers = {
      {"seed", [&](const std::string &v) { t.seed = to_uint(v); }},
      {"loss", [&](const std::string &v) { t.loss = parse_loss(v); }},
      {"epochs", [&](const std::string &v) { t.epochs = to_uint(v); }},
      {"learning_rate", [&](const std::string &v) { t.learning_rate = to_double(v); }},
      {"batch_size", [&](const std::string &v) { t.batch_size = to_uint(v); }},
      {"pretrain_epochs", [&](const std::string &v) { t.pretrain_epochs = to_uint(v); }},
      {"pretrain_learning_rate",
       [&](const std::string &v) {
         if (v == "none") t.pretrain_learning_rate.reset();
         else t.pretrain_learning_rate = to_double(v);
       }},
      {"validation", [&](const std::string &v) { t.validation = parse_validation(v); }},
      {"include_pretrained", [&](const std::string &v) { t.include_pretrained = to_bool(v); }},
      {"grid_search", [&](const std::string &v) { t.grid_search = to_bool(v); }},
      {"channel", [&](const std::string &v) { t.channel = v; }},
      {"checkpoint", [&](const std::string &v) { t.checkpoint_path = v; }},
      {"optimizer.kind", [&](const std::string &v) { t.optimizer.kind = parse_optimizer(v); }},
      {"optimizer.momentum", [&](const std::string &v) { t.optimizer.momentum = to_double(v); }},
      {"optimizer.weight_decay", [&](const std::string &v) { t.optimizer.weight_decay = to_double(v); }},
      {"optimizer.beta1", [&](const std::string &v) { t.optimizer.beta1 = to_double(v); }},
      {"optimizer.beta2", [&](const std::string &v) { t.optimizer.beta2 = to_double(v); }},
      {"optimizer.epsilon", [&](const std::string &v) { t.optimizer.epsilon = to_double(v); }},
      {"model.hidden", [&](const std::string &v) { t.hidden = to_uints<std::size_t>(v); }},
      {"model.activation", [&](const std::string &v) { t.activation = parse_activation(v); }},
      {"dataset.kind",
       [&](const std::string &v) {
         if (v == "blobs") t.dataset.kind = DatasetSpec::Kind::kBlobs;
         else if (v == "idx") t.dataset.kind = DatasetSpec::Kind::kIdx;
         else throw ConfigError("unknown dataset kind '" + v + "' (expected blobs or idx)");
       }},
      {"dataset.samples", [&](const std::string &v) { t.dataset.blobs.samples = to_uint(v); }},
      {"dataset.seed",
       [&](const std::string &v) {
         if (v == "none") t.dataset.seed.reset();
         else t.dataset.seed = to_uint(v);
       }},
      {"dataset.split",
       [&](const std::string &v) {
         const auto f = to_doubles(v);
         if (f.size() != 3) throw ConfigError("dataset.split needs three fractions");
         t.dataset.fractions = {f[0], f[1], f[2]};
       }},
      {"dataset.images", [&](const std::string &v) { t.dataset.images_path = v; }},
      {"dataset.labels", [&](const std::string &v) { t.dataset.labels_path = v; }},
      {"dataset.positive_classes", [&](const std::string &v) { t.dataset.positive_classes = to_uints<Label>(v); }},
      {"sweep.cases",
       [&](const std::string &v) {
         cfg.sweep.cases.clear();
         for (auto c : to_uints<int>(v)) {
           if (c < 1 || c > 3) throw ConfigError("sweep.cases must be among 1, 2, 3");
           cfg.sweep.cases.push_back(c);
         }
       }},
      {"sweep.r", [&](const std::string &v) { cfg.sweep.r_values = to_doubles(v); }},
      {"sweep.repetitions", [&](const std::string &v) { cfg.sweep.repetitions = to_uint(v); }},
      {"sweep.threads", [&](const std::string &v) { cfg.sweep.threads = to_uint(v); }},
  };

  std::map<std::string, std::size_t> seen;
  std::map<std::size_t, std::map<std::string, std::string>> classes;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "empty key");
    if (auto [it, fresh] = seen.emplace(key, lineno); !fresh)
      throw ConfigError(where + "'" + key + "' already set on line " + std::to_string(it->second));
    try {
      if (auto h = handlers.find(key); h != handlers.end()) h->second(value);
      else if (!apply_class_key(classes, key, value)) throw ConfigError("unknown key '" + key + "'");
    } catch (const ConfigError &e) {
      throw ConfigError(where + e.what());
    } catch (const std::invalid_argument &e) {
      throw ConfigError(where + e.what());
    }
  }

  if (!classes.empty()) {
    std::vector<ClassBlob> blobs;
    for (std::size_t k = 0; k < classes.size(); ++k) {
      auto it = classes.find(k);
      if (it == classes.end()) throw ConfigError("dataset.class indices must be 0.." + std::to_string(classes.size() - 1));
      auto &fields = it->second;
      if (!fields.count("prior") || !fields.count("mean"))
        throw ConfigError("dataset.class." + std::to_string(k) + " needs prior and mean");
      ClassBlob b;
      b.prior = to_double(fields["prior"]);
      b.mean = to_doubles(fields["mean"]);
      b.variance = fields.count("variance") ? to_doubles(fields["variance"]) : std::vector<double>(b.mean.size(), 1.0);
      blobs.push_back(std::move(b));
    }
    t.dataset.blobs.classes = std::move(blobs);
  }
  // IDX images default to a wider hidden layer
  if (t.dataset.kind == DatasetSpec::Kind::kIdx && !seen.count("model.hidden")) t.hidden = {64};
  if (t.dataset.kind == DatasetSpec::Kind::kBlobs) {
    try {
      t.dataset.blobs.validate();
    } catch (const std::invalid_argument &e) {
      throw ConfigError(e.what());
    }
  }
  else if (t.dataset.images_path.empty() || t.dataset.labels_path.empty())
    throw ConfigError("dataset.kind = idx needs dataset.images and dataset.labels");
  return cfg;
}

ExperimentConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  try {
    return parse_config(in);
  } catch (const ConfigError &e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void write_config(std::ostream &os, const TrainConfig &t, const std::string &prefix) {
  auto key = [&](const char *k) -> std::ostream & { return os << prefix << k << " = "; };
  key("seed") << t.seed << '\n';
  key("loss") << to_string(t.loss) << '\n';
  key("epochs") << t.epochs << '\n';
  key("learning_rate") << num(t.learning_rate) << '\n';
  key("batch_size") << t.batch_size << '\n';
  key("pretrain_epochs") << t.pretrain_epochs << '\n';
  key("pretrain_learning_rate");
  if (t.pretrain_learning_rate) os << num(*t.pretrain_learning_rate) << '\n';
  else os << "none\n";
  key("validation") << to_string(t.validation) << '\n';
  key("include_pretrained") << (t.include_pretrained ? "true" : "false") << '\n';
  key("grid_search") << (t.grid_search ? "true" : "false") << '\n';
  key("channel") << t.channel << '\n';
  key("checkpoint") << t.checkpoint_path << '\n';
  key("optimizer.kind") << to_string(t.optimizer.kind) << '\n';
  key("optimizer.momentum") << num(t.optimizer.momentum) << '\n';
  key("optimizer.weight_decay") << num(t.optimizer.weight_decay) << '\n';
  key("optimizer.beta1") << num(t.optimizer.beta1) << '\n';
  key("optimizer.beta2") << num(t.optimizer.beta2) << '\n';
  key("optimizer.epsilon") << num(t.optimizer.epsilon) << '\n';
  key("model.hidden");
  write_list(os, t.hidden);
  os << '\n';
  key("model.activation") << to_string(t.activation) << '\n';
  key("dataset.kind") << (t.dataset.kind == DatasetSpec::Kind::kBlobs ? "blobs" : "idx") << '\n';
  key("dataset.samples") << t.dataset.blobs.samples << '\n';
  key("dataset.seed");
  if (t.dataset.seed) os << *t.dataset.seed << '\n';
  else os << "none\n";
  key("dataset.split") << num(t.dataset.fractions[0]) << ',' << num(t.dataset.fractions[1]) << ','
                       << num(t.dataset.fractions[2]) << '\n';
  if (!t.dataset.images_path.empty()) key("dataset.images") << t.dataset.images_path << '\n';
  if (!t.dataset.labels_path.empty()) key("dataset.labels") << t.dataset.labels_path << '\n';
  key("dataset.positive_classes");
  write_list(os, t.dataset.positive_classes);
  os << '\n';
  for (std::size_t k = 0; k < t.dataset.blobs.classes.size(); ++k) {
    const auto &b = t.dataset.blobs.classes[k];
    const std::string base = "dataset.class." + std::to_string(k) + ".";
    key((base + "prior").c_str()) << num(b.prior) << '\n';
    key((base + "mean").c_str());
    write_list(os, b.mean);
    os << '\n';
    key((base + "variance").c_str());
    write_list(os, b.variance);
    os << '\n';
  }
}

}  // namespace ldmi
