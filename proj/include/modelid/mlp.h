// Copyright 2026 The modelid Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Feed-forward network with reverse-mode gradients and an adaptive-moment
// optimizer. Batches are column-major: one sample per column.
//
// Weight file format (JSON text, "modelid-mlp" version 1):
//   {"format": "modelid-mlp", "version": 1,
//    "layer_dims": [in, h1, ..., out],
//    "activations": ["relu" | "identity", ...],   // one per layer
//    "layers": [{"weights_row_major": [...out*in...], "bias": [...out...]}]}
// Doubles are written in shortest round-trip form, so save/load is exact.

#ifndef MODELID_MLP_H_
#define MODELID_MLP_H_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace modelid {

enum class Activation { kRelu, kIdentity };

std::string ActivationName(Activation a);
Activation ParseActivation(const std::string& name);

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
  Activation activation = Activation::kIdentity;
};

// Gradients with the same shapes as the network's parameters, plus the
// gradient with respect to the batch input.
struct MlpGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> bias;
  Eigen::MatrixXd input;

  double SquaredNorm() const;
};

class Mlp {
 public:
  // Activations recorded by a forward pass, consumed by Backward.
  struct Tape {
    std::vector<Eigen::MatrixXd> values;  // values[0] = input
    const Eigen::MatrixXd& output() const { return values.back(); }
  };

  Mlp() = default;
  // Zero-initialized network; layer_dims = {in, h1, ..., out}.
  Mlp(std::vector<int> layer_dims, std::vector<Activation> activations);

  // Uniform fan-in scaled initialization (He for relu layers), zero biases.
  static Mlp Create(const std::vector<int>& layer_dims,
                    const std::vector<Activation>& activations,
                    std::uint64_t seed);

  int input_dim() const;
  int output_dim() const;
  int num_layers() const { return static_cast<int>(layers_.size()); }
  std::vector<int> layer_dims() const;
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }

  Eigen::VectorXd Forward(const Eigen::VectorXd& input) const;
  Eigen::MatrixXd ForwardBatch(const Eigen::MatrixXd& inputs) const;
  Tape ForwardTape(const Eigen::MatrixXd& inputs) const;

  // Gradient of sum(upstream .* output) with respect to every weight, bias,
  // and input entry. upstream has the output's shape.
  MlpGradients Backward(const Tape& tape, const Eigen::MatrixXd& upstream) const;
  MlpGradients Backward(const Eigen::MatrixXd& inputs,
                        const Eigen::MatrixXd& upstream) const;

  bool AllFinite() const;
  // FNV-1a over the raw bytes of every parameter.
  std::uint64_t Checksum() const;

  nlohmann::json ToJson() const;
  static Mlp FromJson(const nlohmann::json& j);
  void Save(const std::string& path) const;
  static Mlp Load(const std::string& path);

 private:
  void CheckInput(const Eigen::MatrixXd& inputs) const;

  std::vector<DenseLayer> layers_;
};

struct TrainConfig {
  double step_size = 1e-3;
  int batch_size = 64;
  int epochs = 100;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;

  void Validate() const;
};

// Adam state for one network.
class AdamOptimizer {
 public:
  AdamOptimizer(const Mlp& net, const TrainConfig& config);
  void Step(Mlp* net, const MlpGradients& grads);

 private:
  TrainConfig config_;
  std::vector<Eigen::MatrixXd> m_w_, v_w_;
  std::vector<Eigen::VectorXd> m_b_, v_b_;
  long step_ = 0;
};

// Deterministic shuffled minibatch indices for one epoch.
std::vector<std::vector<int>> EpochBatches(int n, int batch_size,
                                           std::uint64_t seed, int epoch);

// Columns `idx` of a matrix.
Eigen::MatrixXd GatherColumns(const Eigen::MatrixXd& m,
                              const std::vector<int>& idx);

struct TrainReport {
  double initial_loss = 0.0;
  // Full-dataset loss after each epoch.
  std::vector<double> epoch_loss;
};

// Mean over samples of the summed squared output error.
double MeanSquaredError(const Mlp& net, const Eigen::MatrixXd& inputs,
                        const Eigen::MatrixXd& targets);

// Minibatch Adam on the squared-error loss. Throws std::runtime_error when
// the loss becomes non-finite.
TrainReport Train(Mlp* net, const Eigen::MatrixXd& inputs,
                  const Eigen::MatrixXd& targets, const TrainConfig& config);

}  // namespace modelid

#endif  // MODELID_MLP_H_
