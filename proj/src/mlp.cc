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

#include "modelid/mlp.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <utility>

#include "modelid/random.h"

namespace modelid {

std::string ActivationName(Activation a) {
  return a == Activation::kRelu ? "relu" : "identity";
}

Activation ParseActivation(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "identity") return Activation::kIdentity;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

double MlpGradients::SquaredNorm() const {
  double s = 0.0;
  for (const auto& w : weights) s += w.squaredNorm();
  for (const auto& b : bias) s += b.squaredNorm();
  return s;
}

Mlp::Mlp(std::vector<int> layer_dims, std::vector<Activation> activations) {
  if (layer_dims.size() < 2) {
    throw std::invalid_argument("Mlp: need at least input and output dims");
  }
  if (activations.size() != layer_dims.size() - 1) {
    throw std::invalid_argument("Mlp: one activation per layer required");
  }
  for (int d : layer_dims) {
    if (d < 1) throw std::invalid_argument("Mlp: layer dims must be positive");
  }
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    DenseLayer layer;
    layer.weights = Eigen::MatrixXd::Zero(layer_dims[l + 1], layer_dims[l]);
    layer.bias = Eigen::VectorXd::Zero(layer_dims[l + 1]);
    layer.activation = activations[l];
    layers_.push_back(std::move(layer));
  }
}

Mlp Mlp::Create(const std::vector<int>& layer_dims,
                const std::vector<Activation>& activations,
                std::uint64_t seed) {
  Mlp net(layer_dims, activations);
  std::mt19937_64 rng(seed);
  for (auto& layer : net.layers_) {
    const double fan_in = static_cast<double>(layer.weights.cols());
    const double limit = layer.activation == Activation::kRelu
                             ? std::sqrt(6.0 / fan_in)
                             : std::sqrt(3.0 / fan_in);
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (int r = 0; r < layer.weights.rows(); ++r) {
      for (int c = 0; c < layer.weights.cols(); ++c) {
        layer.weights(r, c) = dist(rng);
      }
    }
  }
  return net;
}

int Mlp::input_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.front().weights.cols());
}

int Mlp::output_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.back().weights.rows());
}

std::vector<int> Mlp::layer_dims() const {
  std::vector<int> dims;
  if (layers_.empty()) return dims;
  dims.push_back(input_dim());
  for (const auto& l : layers_) dims.push_back(static_cast<int>(l.weights.rows()));
  return dims;
}

void Mlp::CheckInput(const Eigen::MatrixXd& inputs) const {
  if (layers_.empty()) throw std::logic_error("Mlp: empty network");
  if (inputs.rows() != input_dim()) {
    throw std::invalid_argument("Mlp: input has dimension " +
                                std::to_string(inputs.rows()) + ", expected " +
                                std::to_string(input_dim()));
  }
}

Mlp::Tape Mlp::ForwardTape(const Eigen::MatrixXd& inputs) const {
  CheckInput(inputs);
  Tape tape;
  tape.values.reserve(layers_.size() + 1);
  tape.values.push_back(inputs);
  for (const auto& layer : layers_) {
    Eigen::MatrixXd z = layer.weights * tape.values.back();
    z.colwise() += layer.bias;
    if (layer.activation == Activation::kRelu) z = z.cwiseMax(0.0);
    tape.values.push_back(std::move(z));
  }
  return tape;
}

Eigen::MatrixXd Mlp::ForwardBatch(const Eigen::MatrixXd& inputs) const {
  CheckInput(inputs);
  Eigen::MatrixXd a = inputs;
  for (const auto& layer : layers_) {
    Eigen::MatrixXd z = layer.weights * a;
    z.colwise() += layer.bias;
    if (layer.activation == Activation::kRelu) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

Eigen::VectorXd Mlp::Forward(const Eigen::VectorXd& input) const {
  return ForwardBatch(input);
}

MlpGradients Mlp::Backward(const Tape& tape,
                           const Eigen::MatrixXd& upstream) const {
  if (tape.values.size() != layers_.size() + 1) {
    throw std::invalid_argument("Mlp::Backward: tape from another network");
  }
  if (upstream.rows() != output_dim() ||
      upstream.cols() != tape.output().cols()) {
    throw std::invalid_argument("Mlp::Backward: upstream shape mismatch");
  }
  MlpGradients g;
  g.weights.resize(layers_.size());
  g.bias.resize(layers_.size());
  Eigen::MatrixXd delta = upstream;
  for (int l = num_layers() - 1; l >= 0; --l) {
    const auto& layer = layers_[l];
    if (layer.activation == Activation::kRelu) {
      // relu'(z) = 1 for z > 0, else 0; output > 0 iff z > 0
      delta = (tape.values[l + 1].array() > 0.0).select(delta, 0.0);
    }
    g.weights[l] = delta * tape.values[l].transpose();
    g.bias[l] = delta.rowwise().sum();
    delta = layer.weights.transpose() * delta;
  }
  g.input = std::move(delta);
  return g;
}

MlpGradients Mlp::Backward(const Eigen::MatrixXd& inputs,
                           const Eigen::MatrixXd& upstream) const {
  return Backward(ForwardTape(inputs), upstream);
}

bool Mlp::AllFinite() const {
  for (const auto& l : layers_) {
    if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

std::uint64_t Mlp::Checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const double* data, Eigen::Index n) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < static_cast<std::size_t>(n) * sizeof(double);
         ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& l : layers_) {
    mix(l.weights.data(), l.weights.size());
    mix(l.bias.data(), l.bias.size());
  }
  return h;
}

nlohmann::json Mlp::ToJson() const {
  nlohmann::json layers = nlohmann::json::array();
  std::vector<std::string> acts;
  for (const auto& l : layers_) {
    std::vector<double> w;
    w.reserve(l.weights.size());
    for (int r = 0; r < l.weights.rows(); ++r) {
      for (int c = 0; c < l.weights.cols(); ++c) w.push_back(l.weights(r, c));
    }
    std::vector<double> b(l.bias.data(), l.bias.data() + l.bias.size());
    layers.push_back({{"weights_row_major", w}, {"bias", b}});
    acts.push_back(ActivationName(l.activation));
  }
  return {{"format", "modelid-mlp"},
          {"version", 1},
          {"layer_dims", layer_dims()},
          {"activations", acts},
          {"layers", layers}};
}

Mlp Mlp::FromJson(const nlohmann::json& j) {
  if (j.at("format") != "modelid-mlp" || j.at("version") != 1) {
    throw std::runtime_error("Mlp: unsupported weight file format");
  }
  const auto dims = j.at("layer_dims").get<std::vector<int>>();
  std::vector<Activation> acts;
  for (const auto& a : j.at("activations")) {
    acts.push_back(ParseActivation(a.get<std::string>()));
  }
  Mlp net(dims, acts);
  const auto& layers = j.at("layers");
  if (layers.size() != net.layers_.size()) {
    throw std::runtime_error("Mlp: layer count mismatch");
  }
  for (std::size_t l = 0; l < net.layers_.size(); ++l) {
    auto& layer = net.layers_[l];
    const auto w = layers[l].at("weights_row_major").get<std::vector<double>>();
    const auto b = layers[l].at("bias").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(w.size()) != layer.weights.size() ||
        static_cast<Eigen::Index>(b.size()) != layer.bias.size()) {
      throw std::runtime_error("Mlp: parameter block size mismatch");
    }
    for (int r = 0; r < layer.weights.rows(); ++r) {
      for (int c = 0; c < layer.weights.cols(); ++c) {
        layer.weights(r, c) = w[r * layer.weights.cols() + c];
      }
    }
    for (int i = 0; i < layer.bias.size(); ++i) layer.bias[i] = b[i];
  }
  return net;
}

void Mlp::Save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << ToJson().dump() << '\n';
}

Mlp Mlp::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return FromJson(nlohmann::json::parse(in));
}

void TrainConfig::Validate() const {
  if (!(step_size >= 0.0)) throw std::invalid_argument("TrainConfig: step < 0");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch < 1");
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs < 1");
  if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("TrainConfig: decay rates must lie in (0,1)");
  }
}

AdamOptimizer::AdamOptimizer(const Mlp& net, const TrainConfig& config)
    : config_(config) {
  config_.Validate();
  for (const auto& l : net.layers()) {
    m_w_.push_back(Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()));
    v_w_.push_back(Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()));
    m_b_.push_back(Eigen::VectorXd::Zero(l.bias.size()));
    v_b_.push_back(Eigen::VectorXd::Zero(l.bias.size()));
  }
}

void AdamOptimizer::Step(Mlp* net, const MlpGradients& grads) {
  ++step_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const double lr = config_.step_size;
  const double eps = config_.epsilon;
  auto& layers = net->mutable_layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    m_w_[l] = b1 * m_w_[l] + (1.0 - b1) * grads.weights[l];
    v_w_[l] = b2 * v_w_[l] + (1.0 - b2) * grads.weights[l].cwiseAbs2();
    layers[l].weights.array() -=
        lr * (m_w_[l].array() / c1) / ((v_w_[l].array() / c2).sqrt() + eps);
    m_b_[l] = b1 * m_b_[l] + (1.0 - b1) * grads.bias[l];
    v_b_[l] = b2 * v_b_[l] + (1.0 - b2) * grads.bias[l].cwiseAbs2();
    layers[l].bias.array() -=
        lr * (m_b_[l].array() / c1) / ((v_b_[l].array() / c2).sqrt() + eps);
  }
}

std::vector<std::vector<int>> EpochBatches(int n, int batch_size,
                                           std::uint64_t seed, int epoch) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(MixSeed(seed, static_cast<std::uint64_t>(epoch)));
  // Fisher-Yates with an explicit draw so the permutation does not depend on
  // the standard library's shuffle implementation.
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[i], order[j]);
  }
  std::vector<std::vector<int>> batches;
  for (int start = 0; start < n; start += batch_size) {
    const int end = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + start, order.begin() + end);
  }
  return batches;
}

Eigen::MatrixXd GatherColumns(const Eigen::MatrixXd& m,
                              const std::vector<int>& idx) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out.col(k) = m.col(idx[k]);
  return out;
}

double MeanSquaredError(const Mlp& net, const Eigen::MatrixXd& inputs,
                        const Eigen::MatrixXd& targets) {
  const Eigen::MatrixXd pred = net.ForwardBatch(inputs);
  return (pred - targets).squaredNorm() / static_cast<double>(inputs.cols());
}

TrainReport Train(Mlp* net, const Eigen::MatrixXd& inputs,
                  const Eigen::MatrixXd& targets, const TrainConfig& config) {
  config.Validate();
  if (inputs.cols() == 0) throw std::invalid_argument("Train: empty dataset");
  if (inputs.cols() != targets.cols() || targets.rows() != net->output_dim()) {
    throw std::invalid_argument("Train: dataset shape mismatch");
  }
  AdamOptimizer adam(*net, config);
  TrainReport report;
  report.initial_loss = MeanSquaredError(*net, inputs, targets);
  const int n = static_cast<int>(inputs.cols());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& batch :
         EpochBatches(n, config.batch_size, config.seed, epoch)) {
      const Eigen::MatrixXd x = GatherColumns(inputs, batch);
      const Eigen::MatrixXd y = GatherColumns(targets, batch);
      const Mlp::Tape tape = net->ForwardTape(x);
      const Eigen::MatrixXd upstream =
          (2.0 / static_cast<double>(batch.size())) * (tape.output() - y);
      adam.Step(net, net->Backward(tape, upstream));
    }
    const double loss = MeanSquaredError(*net, inputs, targets);
    if (!std::isfinite(loss)) {
      throw std::runtime_error("Train: non-finite loss at epoch " +
                               std::to_string(epoch));
    }
    report.epoch_loss.push_back(loss);
  }
  return report;
}

}  // namespace modelid
