// src/model.cc

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

#include "ldmi/model.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "ldmi/random.h"

namespace ldmi {

namespace {

std::uint64_t next_revision() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

std::vector<DenseLayer> zeros_like(const std::vector<DenseLayer> &layers) {
  std::vector<DenseLayer> out;
  out.reserve(layers.size());
  for (const auto &l : layers)
    out.push_back({Matrix(l.weights.rows(), l.weights.cols()), std::vector<double>(l.bias.size())});
  return out;
}

// Column-wise softmax with the max subtracted for stability.
Matrix softmax_columns(const Matrix &z) {
  Matrix out(z.rows(), z.cols());
  for (std::size_t i = 0; i < z.cols(); ++i) {
    double mx = z(0, i);
    for (std::size_t c = 1; c < z.rows(); ++c) mx = std::max(mx, z(c, i));
    double s = 0.0;
    for (std::size_t c = 0; c < z.rows(); ++c) {
      const double e = std::exp(z(c, i) - mx);
      out(c, i) = e;
      s += e;
    }
    for (std::size_t c = 0; c < z.rows(); ++c) out(c, i) /= s;
  }
  return out;
}

Matrix affine(const DenseLayer &layer, const Matrix &input) {
  Matrix z = matmul(layer.weights, input);
  for (std::size_t r = 0; r < z.rows(); ++r)
    for (double &v : z.row(r)) v += layer.bias[r];
  return z;
}

Matrix activate(Activation act, const Matrix &z) {
  Matrix a = z;
  for (double &v : a.values()) v = act == Activation::kReLU ? std::max(v, 0.0) : std::tanh(v);
  return a;
}

void check_input(const ClassifierParams &params, const Matrix &x_batch) {
  if (x_batch.cols() != params.input_dim())
    throw ShapeError("forward: features have dimension " + std::to_string(x_batch.cols()) +
                     ", network expects " + std::to_string(params.input_dim()));
}

std::string read_token(std::istream &is, const char *what) {
  std::string tok;
  if (!(is >> tok)) throw std::runtime_error(std::string("checkpoint: truncated while reading ") + what);
  return tok;
}

void expect_token(std::istream &is, std::string_view want) {
  const std::string got = read_token(is, std::string(want).c_str());
  if (got != want)
    throw std::runtime_error("checkpoint: expected '" + std::string(want) + "', found '" + got + "'");
}

double read_double(std::istream &is) {
  const std::string tok = read_token(is, "a parameter");
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used != tok.size() || used == 0 || !std::isfinite(v))
    throw std::runtime_error("checkpoint: bad number '" + tok + "'");
  return v;
}

std::size_t read_count(std::istream &is, bool allow_zero = false) {
  const std::string tok = read_token(is, "a dimension");
  std::size_t used = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(tok, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used != tok.size() || used == 0 || (v == 0 && !allow_zero))
    throw std::runtime_error("checkpoint: bad dimension '" + tok + "'");
  return v;
}

}  // namespace

std::string_view to_string(Activation a) { return a == Activation::kReLU ? "relu" : "tanh"; }

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::kReLU;
  if (name == "tanh") return Activation::kTanh;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(OptimizerKind k) { return k == OptimizerKind::kAdam ? "adam" : "sgd"; }

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd") return OptimizerKind::kSgdMomentum;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "'");
}

ClassifierParams::ClassifierParams(std::vector<std::size_t> layer_dims, Activation activation)
    : dims_(std::move(layer_dims)), activation_(activation), revision_(next_revision()) {
  if (dims_.size() < 2) throw std::invalid_argument("ClassifierParams: need input and output dims");
  for (std::size_t d : dims_)
    if (d == 0) throw std::invalid_argument("ClassifierParams: zero-width layer");
  if (dims_.back() < 2) throw std::invalid_argument("ClassifierParams: need at least 2 classes");
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l)
    layers_.push_back({Matrix(dims_[l + 1], dims_[l]), std::vector<double>(dims_[l + 1], 0.0)});
}

ClassifierParams ClassifierParams::initialize(std::vector<std::size_t> layer_dims,
                                              Activation activation, std::uint64_t seed) {
  ClassifierParams p(std::move(layer_dims), activation);
  Rng rng = make_rng(seed, "classifier_init");
  for (auto &layer : p.layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weights.cols()));
    for (double &w : layer.weights.values()) w = bound * (2.0 * uniform01(rng) - 1.0);
  }
  return p;
}

std::vector<DenseLayer> &ClassifierParams::mutable_layers() {
  revision_ = next_revision();
  return layers_;
}

std::size_t ClassifierParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto &l : layers_) n += l.weights.rows() * l.weights.cols() + l.bias.size();
  return n;
}

ForwardResult forward(const ClassifierParams &params, const Matrix &x_batch) {
  check_input(params, x_batch);
  ForwardCache cache;
  cache.revision = params.revision();
  Matrix a = transpose(x_batch);
  const auto &layers = params.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Matrix z = affine(layers[l], a);
    cache.inputs.push_back(std::move(a));
    a = l + 1 < layers.size() ? activate(params.activation(), z) : softmax_columns(z);
    cache.pre.push_back(std::move(z));
  }
  cache.output = a;
  return {OutputBatch(std::move(a)), std::move(cache)};
}

OutputBatch predict(const ClassifierParams &params, const Matrix &x_batch) {
  check_input(params, x_batch);
  Matrix a = transpose(x_batch);
  const auto &layers = params.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Matrix z = affine(layers[l], a);
    a = l + 1 < layers.size() ? activate(params.activation(), z) : softmax_columns(z);
  }
  return OutputBatch(std::move(a));
}

ParamGrads backward(const ClassifierParams &params, const ForwardCache &cache,
                    const Matrix &grad_output) {
  const auto &layers = params.layers();
  if (cache.revision != params.revision() || cache.pre.size() != layers.size())
    throw StaleCacheError("backward: cache was produced by different parameters");
  const Matrix &o = cache.output;
  if (grad_output.rows() != o.rows() || grad_output.cols() != o.cols())
    throw ShapeError("backward: gradient shape does not match the forward output");

  // Softmax: dz_c = o_c (g_c - sum_k o_k g_k), column by column.
  Matrix dz(o.rows(), o.cols());
  for (std::size_t i = 0; i < o.cols(); ++i) {
    double dot = 0.0;
    for (std::size_t c = 0; c < o.rows(); ++c) dot += o(c, i) * grad_output(c, i);
    for (std::size_t c = 0; c < o.rows(); ++c) dz(c, i) = o(c, i) * (grad_output(c, i) - dot);
  }

  ParamGrads grads;
  grads.layers.resize(layers.size());
  for (std::size_t l = layers.size(); l-- > 0;) {
    const Matrix &input = cache.inputs[l];
    DenseLayer &g = grads.layers[l];
    g.weights = matmul(dz, transpose(input));
    g.bias.assign(dz.rows(), 0.0);
    for (std::size_t r = 0; r < dz.rows(); ++r)
      for (double v : dz.row(r)) g.bias[r] += v;
    if (l == 0) break;

    Matrix da = matmul(transpose(layers[l].weights), dz);
    const Matrix &z = cache.pre[l - 1];
    auto dav = da.values();
    auto zv = z.values();
    for (std::size_t k = 0; k < dav.size(); ++k) {
      if (params.activation() == Activation::kReLU) {
        if (zv[k] <= 0.0) dav[k] = 0.0;
      } else {
        const double t = std::tanh(zv[k]);
        dav[k] *= 1.0 - t * t;
      }
    }
    dz = std::move(da);
  }
  return grads;
}

OptimizerState::OptimizerState(OptimizerConfig config, const ClassifierParams &params)
    : config_(config), first_(zeros_like(params.layers())), second_(zeros_like(params.layers())) {
  if (!(config_.learning_rate >= 0.0))
    throw std::invalid_argument("OptimizerState: learning rate must be non-negative");
}

void OptimizerState::step(ClassifierParams &params, const ParamGrads &grads) {
  auto &layers = params.mutable_layers();
  if (grads.layers.size() != layers.size() || first_.size() != layers.size())
    throw ShapeError("step: gradient structure does not match the parameters");
  ++steps_;
  const OptimizerConfig &c = config_;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(steps_));

  auto update = [&](std::span<double> theta, std::span<const double> grad, std::span<double> m,
                    std::span<double> v) {
    if (theta.size() != grad.size()) throw ShapeError("step: gradient shape mismatch");
    for (std::size_t k = 0; k < theta.size(); ++k) {
      const double g = grad[k] + c.weight_decay * theta[k];
      if (c.kind == OptimizerKind::kSgdMomentum) {
        m[k] = c.momentum * m[k] + g;
        theta[k] -= c.learning_rate * m[k];
      } else {
        m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g;
        v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g * g;
        const double m_hat = m[k] / bc1;
        const double v_hat = v[k] / bc2;
        theta[k] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
      }
    }
  };

  for (std::size_t l = 0; l < layers.size(); ++l) {
    update(layers[l].weights.values(), grads.layers[l].weights.values(), first_[l].weights.values(),
           second_[l].weights.values());
    update(layers[l].bias, grads.layers[l].bias, first_[l].bias, second_[l].bias);
  }
}

void save_checkpoint(std::ostream &os, const ClassifierParams &params) {
  os << kCheckpointTag << ' ' << kCheckpointVersion << '\n';
  os << "activation " << to_string(params.activation()) << '\n';
  os << "dims " << params.layer_dims().size();
  for (std::size_t d : params.layer_dims()) os << ' ' << d;
  os << '\n' << std::setprecision(17);
  for (std::size_t l = 0; l < params.layers().size(); ++l) {
    const DenseLayer &layer = params.layers()[l];
    os << "layer " << l << '\n';
    for (std::size_t r = 0; r < layer.weights.rows(); ++r) {
      auto row = layer.weights.row(r);
      for (std::size_t k = 0; k < row.size(); ++k) os << (k ? " " : "") << row[k];
      os << '\n';
    }
    os << "bias";
    for (double b : layer.bias) os << ' ' << b;
    os << '\n';
  }
}

ClassifierParams load_checkpoint(std::istream &is) {
  expect_token(is, kCheckpointTag);
  const std::size_t version = read_count(is);
  if (version != kCheckpointVersion)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  expect_token(is, "activation");
  const Activation act = parse_activation(read_token(is, "activation"));
  expect_token(is, "dims");
  const std::size_t n = read_count(is);
  std::vector<std::size_t> dims(n);
  for (auto &d : dims) d = read_count(is);
  ClassifierParams params(dims, act);
  auto &layers = params.mutable_layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    expect_token(is, "layer");
    if (read_count(is, true) != l) throw std::runtime_error("checkpoint: layers out of order");
    for (double &w : layers[l].weights.values()) w = read_double(is);
    expect_token(is, "bias");
    for (double &b : layers[l].bias) b = read_double(is);
  }
  return params;
}

void save_checkpoint(const std::string &path, const ClassifierParams &params) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
  save_checkpoint(out, params);
}

ClassifierParams load_checkpoint(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  return load_checkpoint(in);
}

}  // namespace ldmi
