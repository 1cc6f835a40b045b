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

// Learned low-dimensional parameter representations.
//
// VaeModel reconstructs normalized parameters through a Gaussian latent code.
// DynamicsNet predicts a reduced next-state observable from
// [parameters | state | control]. DynCoupledAe is an autoencoder over the
// parameters whose reconstruction is scored by the frozen DynamicsNet rather
// than by parameter distance. All three expose their decoder as a LatentMap
// (decoder output clipped to the unit cube, then mapped to native units).
//
// Model files are JSON manifests that embed the "modelid-mlp" weight blocks
// together with dims, normalization constants and the training seed.

#ifndef MODELID_LATENT_H_
#define MODELID_LATENT_H_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "modelid/latent_map.h"
#include "modelid/mlp.h"
#include "modelid/param_space.h"

namespace modelid {

// KL(N(mu, exp(log_var)) || N(0, I)) = 0.5 * sum(mu^2 + exp(lv) - 1 - lv).
double GaussianKl(const Eigen::VectorXd& mu, const Eigen::VectorXd& log_var);

// z = mu + exp(log_var / 2) * eps.
Eigen::VectorXd Reparameterize(const Eigen::VectorXd& mu,
                               const Eigen::VectorXd& log_var,
                               const Eigen::VectorXd& eps);

// Per-row affine standardization (x - mean) / scale.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer Fit(const Eigen::MatrixXd& data);
  static Standardizer Identity(int dim);
  Eigen::MatrixXd Apply(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd Invert(const Eigen::MatrixXd& z) const;
  nlohmann::json ToJson() const;
  static Standardizer FromJson(const nlohmann::json& j);
};

// ---------------------------------------------------------------------------
// Variational autoencoder.

struct VaeConfig {
  int latent_dim = 5;
  int hidden = 400;
  double beta = 1.0;
  TrainConfig train;
};

struct VaeModel {
  Mlp encoder;  // D -> hidden (relu) -> 2d (identity): [mu | log_var]
  Mlp decoder;  // d -> hidden (relu) -> D (identity)
  int latent_dim = 0;
  double beta = 1.0;
  std::uint64_t seed = 0;

  int param_dim() const { return decoder.output_dim(); }
  void Encode(const Eigen::VectorXd& unit_theta, Eigen::VectorXd* mu,
              Eigen::VectorXd* log_var) const;
  // Raw decoder output (not clipped).
  Eigen::VectorXd DecodeUnit(const Eigen::VectorXd& alpha) const;

  nlohmann::json ToJson() const;
  static VaeModel FromJson(const nlohmann::json& j);
};

struct VaeTrainReport {
  double initial_loss = 0.0;
  std::vector<double> epoch_loss;
  // Smallest per-minibatch mean KL seen during training.
  double min_batch_kl = 0.0;
  long batches = 0;
};

// Samples are unit-cube parameter vectors. Loss per sample is the squared
// reconstruction error plus beta * KL. Throws on non-finite loss.
VaeModel TrainVae(const std::vector<Eigen::VectorXd>& unit_samples,
                  const VaeConfig& config, VaeTrainReport* report = nullptr);

// Mean VAE loss over a dataset with noise drawn from a fixed seed.
double VaeLoss(const VaeModel& vae, const Eigen::MatrixXd& unit_samples,
               std::uint64_t noise_seed);

class VaeDecoderMap : public LatentMap {
 public:
  // Latent box [-3, 3]^d.
  VaeDecoderMap(VaeModel model, ParameterSpace target, int grid_res = 100);

  int latent_dim() const override { return model_.latent_dim; }
  const ParameterSpace& latent_space() const override { return box_; }
  const ParameterSpace& target_space() const override { return target_; }
  ParamVector Decode(const Vector& alpha) const override;
  const VaeModel& model() const { return model_; }

 private:
  VaeModel model_;
  ParameterSpace target_;
  ParameterSpace box_;
};

// ---------------------------------------------------------------------------
// Dynamics network.

struct DynamicsDataset {
  Eigen::MatrixXd theta;    // unit-cube parameters, D x N
  Eigen::MatrixXd state;    // S x N (S may be 0)
  Eigen::MatrixXd control;  // C x N
  Eigen::MatrixXd next;     // O x N, reduced next-state observable

  int size() const { return static_cast<int>(theta.cols()); }
  void Validate() const;
  DynamicsDataset Slice(int begin, int end) const;
};

struct DynamicsNet {
  Mlp net;
  int param_dim = 0;
  int state_dim = 0;
  int control_dim = 0;
  Standardizer input_norm;   // over [theta | state | control]
  Standardizer output_norm;
  std::uint64_t seed = 0;

  int input_dim() const { return param_dim + state_dim + control_dim; }
  int output_dim() const { return net.output_dim(); }

  Eigen::MatrixXd StackInputs(const Eigen::MatrixXd& theta,
                              const Eigen::MatrixXd& state,
                              const Eigen::MatrixXd& control) const;
  // Predictions in standardized output units.
  Eigen::MatrixXd PredictStandardized(const Eigen::MatrixXd& theta,
                                      const Eigen::MatrixXd& state,
                                      const Eigen::MatrixXd& control) const;
  // Predictions in native output units.
  Eigen::MatrixXd Predict(const Eigen::MatrixXd& theta,
                          const Eigen::MatrixXd& state,
                          const Eigen::MatrixXd& control) const;
  // Gradient of sum(upstream .* standardized output) with respect to the
  // unit-cube parameter inputs (D x N). Weights are not touched.
  Eigen::MatrixXd ParamGradient(const Eigen::MatrixXd& theta,
                                const Eigen::MatrixXd& state,
                                const Eigen::MatrixXd& control,
                                const Eigen::MatrixXd& upstream) const;

  nlohmann::json ToJson() const;
  static DynamicsNet FromJson(const nlohmann::json& j);
};

struct DynamicsReport {
  TrainReport train;
  double test_mse = 0.0;  // native units
  double median_relative_error = 0.0;
};

// Hidden layers use relu, the output layer is linear. Inputs and targets
// are standardized with constants fitted on the training set.
DynamicsNet TrainDynamics(const DynamicsDataset& train,
                          const std::vector<int>& hidden,
                          const TrainConfig& config,
                          const DynamicsDataset* test = nullptr,
                          DynamicsReport* report = nullptr);

// Median of |pred - y| / max(|y|, floor) over a dataset (first output).
double MedianRelativeError(const DynamicsNet& dyn, const DynamicsDataset& data,
                           double floor = 1e-3);

// ---------------------------------------------------------------------------
// Autoencoder trained through a frozen dynamics network.

// Latent search box of the dynamics-coupled autoencoder.
enum class AeBox {
  kEmpirical,  // training code range, padded by box_padding * width
  kSymmetric,  // [-box_half_width, box_half_width]^d, widened to the codes
};

// "empirical" | "symmetric"; throws std::invalid_argument otherwise.
AeBox AeBoxFromString(const std::string& name);

struct AeConfig {
  int latent_dim = 1;
  std::vector<int> encoder_hidden = {32};
  std::vector<int> decoder_hidden = {32};
  TrainConfig train;
  AeBox box = AeBox::kEmpirical;
  double box_padding = 0.0;
  double box_half_width = 3.0;
};

struct DynCoupledAe {
  Mlp encoder;  // D -> hidden (relu) -> d (identity)
  Mlp decoder;  // d -> hidden (relu) -> D (identity)
  DynamicsNet dynamics;
  Eigen::VectorXd latent_lower;
  Eigen::VectorXd latent_upper;
  std::uint64_t seed = 0;

  int latent_dim() const { return encoder.output_dim(); }
  Eigen::VectorXd Encode(const Eigen::VectorXd& unit_theta) const;
  Eigen::VectorXd DecodeUnit(const Eigen::VectorXd& alpha) const;

  nlohmann::json ToJson() const;
  static DynCoupledAe FromJson(const nlohmann::json& j);
};

struct AeTrainReport {
  double initial_loss = 0.0;
  std::vector<double> epoch_loss;
  std::uint64_t dynamics_checksum_before = 0;
  std::uint64_t dynamics_checksum_after = 0;
};

// Loss per sample: ||next - dynamics(decoder(encoder(theta)), x, u)||^2 in
// standardized output units. Only encoder and decoder weights change. The
// latent box is chosen by config.box from the training codes.
DynCoupledAe TrainDynCoupledAe(const DynamicsDataset& data,
                               const DynamicsNet& dynamics,
                               const AeConfig& config,
                               AeTrainReport* report = nullptr);

double DynCoupledAeLoss(const DynCoupledAe& ae, const DynamicsDataset& data);

class AeDecoderMap : public LatentMap {
 public:
  AeDecoderMap(DynCoupledAe model, ParameterSpace target, int grid_res = 100);

  int latent_dim() const override { return model_.latent_dim(); }
  const ParameterSpace& latent_space() const override { return box_; }
  const ParameterSpace& target_space() const override { return target_; }
  ParamVector Decode(const Vector& alpha) const override;
  const DynCoupledAe& model() const { return model_; }

 private:
  DynCoupledAe model_;
  ParameterSpace target_;
  ParameterSpace box_;
};

// JSON file helpers shared by the model types.
void SaveJson(const std::string& path, const nlohmann::json& j);
nlohmann::json LoadJson(const std::string& path);

}  // namespace modelid

#endif  // MODELID_LATENT_H_
