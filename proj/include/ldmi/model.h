// ldmi/model.h

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

// Feed-forward softmax classifier with hand-written backpropagation.
//
// Activations are carried column-wise (features x batch), so a forward pass
// over an N x d feature batch produces the C x N OutputBatch the losses
// consume directly.

#ifndef LDMI_MODEL_H_
#define LDMI_MODEL_H_

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ldmi/losses.h"
#include "ldmi/numerics.h"

namespace ldmi {

enum class Activation { kReLU, kTanh };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

struct DenseLayer {
  Matrix weights;             // out x in
  std::vector<double> bias;   // out
};

/// Thrown by backward() when the cache does not belong to the parameters.
class StaleCacheError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ClassifierParams {
 public:
  /// Zero-initialized network.  layer_dims = {input, hidden..., classes}.
  ClassifierParams(std::vector<std::size_t> layer_dims, Activation activation);

  /// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
  static ClassifierParams initialize(std::vector<std::size_t> layer_dims, Activation activation,
                                     std::uint64_t seed);

  const std::vector<std::size_t> &layer_dims() const { return dims_; }
  Activation activation() const { return activation_; }
  std::size_t input_dim() const { return dims_.front(); }
  std::size_t classes() const { return dims_.back(); }

  const std::vector<DenseLayer> &layers() const { return layers_; }
  /// Mutable access invalidates forward caches taken before the call.
  std::vector<DenseLayer> &mutable_layers();

  /// Changes whenever the parameters may have changed; copies share it.
  std::uint64_t revision() const { return revision_; }

  std::size_t parameter_count() const;

  friend bool operator==(const ClassifierParams &a, const ClassifierParams &b) {
    if (a.dims_ != b.dims_ || a.activation_ != b.activation_) return false;
    for (std::size_t i = 0; i < a.layers_.size(); ++i)
      if (a.layers_[i].weights != b.layers_[i].weights || a.layers_[i].bias != b.layers_[i].bias)
        return false;
    return true;
  }

 private:
  std::vector<std::size_t> dims_;
  Activation activation_;
  std::vector<DenseLayer> layers_;
  std::uint64_t revision_;
};

struct ForwardCache {
  std::uint64_t revision = 0;
  std::vector<Matrix> inputs;  // input to layer l, in_l x N
  std::vector<Matrix> pre;     // pre-activation of layer l, out_l x N
  Matrix output;               // softmax probabilities, C x N
};

struct ForwardResult {
  OutputBatch output;
  ForwardCache cache;
};

/// x_batch is N x d with one example per row.
ForwardResult forward(const ClassifierParams &params, const Matrix &x_batch);

/// Forward pass without keeping the cache.
OutputBatch predict(const ClassifierParams &params, const Matrix &x_batch);

/// Gradients mirror the layer structure of the parameters.
struct ParamGrads {
  std::vector<DenseLayer> layers;
};

/// Backpropagates dL/dO (C x N) to every weight and bias.
ParamGrads backward(const ClassifierParams &params, const ForwardCache &cache,
                    const Matrix &grad_output);

enum class OptimizerKind { kSgdMomentum, kAdam };

std::string_view to_string(OptimizerKind k);
OptimizerKind parse_optimizer(std::string_view name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  double weight_decay = 0.0;  // L2 term added to the gradient
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class OptimizerState {
 public:
  OptimizerState(OptimizerConfig config, const ClassifierParams &params);

  const OptimizerConfig &config() const { return config_; }
  std::uint64_t steps() const { return steps_; }

  /// Applies one update in place.
  void step(ClassifierParams &params, const ParamGrads &grads);

 private:
  OptimizerConfig config_;
  std::uint64_t steps_ = 0;
  std::vector<DenseLayer> first_;   // momentum buffer / Adam first moment
  std::vector<DenseLayer> second_;  // Adam second moment
};

inline void step(ClassifierParams &params, const ParamGrads &grads, OptimizerState &state) {
  state.step(params, grads);
}

/// Text checkpoint: format tag, activation, layer dims, then each layer's
/// weights (one row per line) and bias, all printed with 17 significant
/// digits so a save/load round trip is exact.
void save_checkpoint(std::ostream &os, const ClassifierParams &params);
ClassifierParams load_checkpoint(std::istream &is);
void save_checkpoint(const std::string &path, const ClassifierParams &params);
ClassifierParams load_checkpoint(const std::string &path);

inline constexpr std::string_view kCheckpointTag = "ldmi-checkpoint";
inline constexpr int kCheckpointVersion = 1;

}  // namespace ldmi

#endif  // LDMI_MODEL_H_
