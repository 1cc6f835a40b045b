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

#include "modelid/latent.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "modelid/random.h"

namespace modelid {
namespace {

// Seed streams of the training routines.
constexpr std::uint64_t kEncoderInitStream = 10;
constexpr std::uint64_t kDecoderInitStream = 11;
constexpr std::uint64_t kVaeNoiseStream = 12;
constexpr std::uint64_t kVaeEvalNoiseStream = 13;
constexpr std::uint64_t kDynamicsInitStream = 20;
constexpr std::uint64_t kAeBatchStream = 30;

constexpr double kMinScale = 1e-12;

nlohmann::json VectorJson(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd JsonVector(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
}

void CheckFormat(const nlohmann::json& j, const std::string& format) {
  if (!j.is_object() || j.value("format", std::string()) != format ||
      j.value("version", 0) != 1) {
    throw std::invalid_argument("expected a \"" + format + "\" version 1 model");
  }
}

std::vector<Activation> HiddenRelu(std::size_t hidden_layers) {
  std::vector<Activation> acts(hidden_layers, Activation::kRelu);
  acts.push_back(Activation::kIdentity);
  return acts;
}

std::vector<int> LayerDims(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> dims = {in};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

Eigen::MatrixXd StandardNormal(int rows, int cols, std::mt19937_64* rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  // Column-major fill keeps the draw order independent of Eigen internals.
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) m(r, c) = normal(*rng);
  }
  return m;
}

Eigen::MatrixXd StackColumns(const std::vector<Eigen::VectorXd>& samples) {
  if (samples.empty()) throw std::invalid_argument("empty sample set");
  Eigen::MatrixXd m(samples.front().size(), static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].size() != m.rows()) {
      throw std::invalid_argument("samples have inconsistent dimension");
    }
    m.col(static_cast<Eigen::Index>(i)) = samples[i];
  }
  return m;
}

// Per-column KL(N(mu, exp(lv)) || N(0, I)); each term is written so that it
// is non-negative in floating point (expm1(x) >= x).
Eigen::RowVectorXd ColumnKl(const Eigen::MatrixXd& mu,
                            const Eigen::MatrixXd& log_var) {
  const Eigen::ArrayXXd lv = log_var.array();
  const Eigen::ArrayXXd terms =
      mu.array().square() + (lv.unaryExpr([](double x) { return std::expm1(x); }) - lv);
  return 0.5 * terms.colwise().sum().matrix();
}

struct VaeBatch {
  double loss = 0.0;   // mean per-sample loss
  double kl = 0.0;     // mean per-sample KL
  Eigen::MatrixXd grad_encoder_output;  // filled when requested
  MlpGradients decoder_grads;
  Mlp::Tape encoder_tape;
};

// Forward pass (and optionally gradients) of the VAE loss on one batch.
VaeBatch VaeForwardBackward(const VaeModel& vae, const Eigen::MatrixXd& x,
                            const Eigen::MatrixXd& eps, bool gradients) {
  const int d = vae.latent_dim;
  const double n = static_cast<double>(x.cols());
  VaeBatch out;
  out.encoder_tape = vae.encoder.ForwardTape(x);
  const Eigen::MatrixXd& enc = out.encoder_tape.output();
  const Eigen::MatrixXd mu = enc.topRows(d);
  const Eigen::MatrixXd lv = enc.bottomRows(d);
  const Eigen::MatrixXd sigma = (0.5 * lv.array()).exp().matrix();
  const Eigen::MatrixXd z = mu + sigma.cwiseProduct(eps);
  const Mlp::Tape dec_tape = vae.decoder.ForwardTape(z);
  const Eigen::MatrixXd diff = dec_tape.output() - x;
  const Eigen::RowVectorXd kl = ColumnKl(mu, lv);
  out.kl = kl.sum() / n;
  out.loss = diff.squaredNorm() / n + vae.beta * out.kl;
  if (!gradients) return out;

  out.decoder_grads = vae.decoder.Backward(dec_tape, (2.0 / n) * diff);
  const Eigen::MatrixXd& g_z = out.decoder_grads.input;
  out.grad_encoder_output.resize(2 * d, x.cols());
  out.grad_encoder_output.topRows(d) = g_z + (vae.beta / n) * mu;
  out.grad_encoder_output.bottomRows(d) =
      (g_z.array() * eps.array() * 0.5 * sigma.array() +
       (vae.beta * 0.5 / n) * (lv.array().exp() - 1.0))
          .matrix();
  return out;
}

// Squared prediction error of the frozen dynamics net fed the AE
// reconstruction, in standardized output units, with optional gradients.
struct AeBatch {
  double loss = 0.0;
  MlpGradients encoder_grads;
  MlpGradients decoder_grads;
};

AeBatch AeForwardBackward(const DynCoupledAe& ae, const Eigen::MatrixXd& theta,
                          const Eigen::MatrixXd& state,
                          const Eigen::MatrixXd& control,
                          const Eigen::MatrixXd& target_std, bool gradients) {
  const double n = static_cast<double>(theta.cols());
  const Mlp::Tape enc_tape = ae.encoder.ForwardTape(theta);
  const Mlp::Tape dec_tape = ae.decoder.ForwardTape(enc_tape.output());
  const DynamicsNet& dyn = ae.dynamics;
  const Eigen::MatrixXd inputs = dyn.input_norm.Apply(
      dyn.StackInputs(dec_tape.output(), state, control));
  const Mlp::Tape dyn_tape = dyn.net.ForwardTape(inputs);
  const Eigen::MatrixXd diff = dyn_tape.output() - target_std;
  AeBatch out;
  out.loss = diff.squaredNorm() / n;
  if (!gradients) return out;

  // Only the input gradient of the frozen network is used.
  const MlpGradients dyn_grads = dyn.net.Backward(dyn_tape, (2.0 / n) * diff);
  const Eigen::MatrixXd g_theta =
      dyn_grads.input.topRows(dyn.param_dim).array().colwise() /
      dyn.input_norm.scale.head(dyn.param_dim).array();
  out.decoder_grads = ae.decoder.Backward(dec_tape, g_theta);
  out.encoder_grads = ae.encoder.Backward(enc_tape, out.decoder_grads.input);
  return out;
}

void CheckFiniteLoss(double loss, const std::string& what, int epoch) {
  if (!std::isfinite(loss)) {
    throw std::runtime_error(what + ": non-finite loss at epoch " +
                             std::to_string(epoch));
  }
}

ParameterSpace LatentBox(const Eigen::VectorXd& lower,
                         const Eigen::VectorXd& upper, int grid_res) {
  std::vector<std::string> names;
  for (int i = 0; i < lower.size(); ++i) names.push_back("alpha" + std::to_string(i));
  return ParameterSpace(std::move(names), lower, upper, grid_res);
}

}  // namespace

double GaussianKl(const Eigen::VectorXd& mu, const Eigen::VectorXd& log_var) {
  if (mu.size() != log_var.size()) {
    throw std::invalid_argument("GaussianKl: size mismatch");
  }
  return ColumnKl(mu, log_var)(0);
}

Eigen::VectorXd Reparameterize(const Eigen::VectorXd& mu,
                               const Eigen::VectorXd& log_var,
                               const Eigen::VectorXd& eps) {
  if (mu.size() != log_var.size() || mu.size() != eps.size()) {
    throw std::invalid_argument("Reparameterize: size mismatch");
  }
  return mu + ((0.5 * log_var.array()).exp() * eps.array()).matrix();
}

// ---------------------------------------------------------------------------
// Standardizer.

Standardizer Standardizer::Fit(const Eigen::MatrixXd& data) {
  if (data.cols() == 0) throw std::invalid_argument("Standardizer: no data");
  Standardizer s;
  s.mean = data.rowwise().mean();
  const Eigen::MatrixXd centered = data.colwise() - s.mean;
  s.scale = (centered.rowwise().squaredNorm() / static_cast<double>(data.cols()))
                .cwiseSqrt();
  for (int i = 0; i < s.scale.size(); ++i) {
    if (!(s.scale[i] > kMinScale)) s.scale[i] = 1.0;
  }
  return s;
}

Standardizer Standardizer::Identity(int dim) {
  return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)};
}

Eigen::MatrixXd Standardizer::Apply(const Eigen::MatrixXd& x) const {
  if (x.rows() != mean.size()) {
    throw std::invalid_argument("Standardizer: dimension mismatch");
  }
  return (x.colwise() - mean).array().colwise() / scale.array();
}

Eigen::MatrixXd Standardizer::Invert(const Eigen::MatrixXd& z) const {
  if (z.rows() != mean.size()) {
    throw std::invalid_argument("Standardizer: dimension mismatch");
  }
  return (z.array().colwise() * scale.array()).matrix().colwise() + mean;
}

nlohmann::json Standardizer::ToJson() const {
  return {{"mean", VectorJson(mean)}, {"scale", VectorJson(scale)}};
}

Standardizer Standardizer::FromJson(const nlohmann::json& j) {
  Standardizer s{JsonVector(j.at("mean")), JsonVector(j.at("scale"))};
  if (s.mean.size() != s.scale.size() || !(s.scale.array() > 0.0).all()) {
    throw std::invalid_argument("Standardizer: malformed constants");
  }
  return s;
}

// ---------------------------------------------------------------------------
// VAE.

void VaeModel::Encode(const Eigen::VectorXd& unit_theta, Eigen::VectorXd* mu,
                      Eigen::VectorXd* log_var) const {
  const Eigen::VectorXd out = encoder.Forward(unit_theta);
  if (mu) *mu = out.head(latent_dim);
  if (log_var) *log_var = out.tail(latent_dim);
}

Eigen::VectorXd VaeModel::DecodeUnit(const Eigen::VectorXd& alpha) const {
  return decoder.Forward(alpha);
}

nlohmann::json VaeModel::ToJson() const {
  return {{"format", "modelid-vae"}, {"version", 1},
          {"latent_dim", latent_dim}, {"param_dim", param_dim()},
          {"beta", beta},             {"seed", seed},
          {"encoder", encoder.ToJson()}, {"decoder", decoder.ToJson()}};
}

VaeModel VaeModel::FromJson(const nlohmann::json& j) {
  CheckFormat(j, "modelid-vae");
  VaeModel vae;
  vae.latent_dim = j.at("latent_dim").get<int>();
  vae.beta = j.at("beta").get<double>();
  vae.seed = j.at("seed").get<std::uint64_t>();
  vae.encoder = Mlp::FromJson(j.at("encoder"));
  vae.decoder = Mlp::FromJson(j.at("decoder"));
  if (vae.encoder.output_dim() != 2 * vae.latent_dim ||
      vae.decoder.input_dim() != vae.latent_dim ||
      vae.encoder.input_dim() != vae.decoder.output_dim()) {
    throw std::invalid_argument("VaeModel: inconsistent network shapes");
  }
  return vae;
}

VaeModel TrainVae(const std::vector<Eigen::VectorXd>& unit_samples,
                  const VaeConfig& config, VaeTrainReport* report) {
  config.train.Validate();
  const Eigen::MatrixXd data = StackColumns(unit_samples);
  const int dim = static_cast<int>(data.rows());
  if (config.latent_dim < 1 || config.latent_dim >= dim) {
    throw std::invalid_argument("TrainVae: need 1 <= latent_dim < param dim");
  }
  if (config.hidden < 1 || !(config.beta >= 0.0)) {
    throw std::invalid_argument("TrainVae: bad hidden size or beta");
  }
  if ((data.array() < 0.0).any() || (data.array() > 1.0).any()) {
    throw std::invalid_argument("TrainVae: samples must lie in the unit cube");
  }

  const std::uint64_t seed = config.train.seed;
  const int d = config.latent_dim;
  VaeModel vae;
  vae.latent_dim = d;
  vae.beta = config.beta;
  vae.seed = seed;
  vae.encoder = Mlp::Create({dim, config.hidden, 2 * d}, HiddenRelu(1),
                            MixSeed(seed, kEncoderInitStream));
  vae.decoder = Mlp::Create({d, config.hidden, dim}, HiddenRelu(1),
                            MixSeed(seed, kDecoderInitStream));

  VaeTrainReport local;
  VaeTrainReport& rep = report ? *report : local;
  rep = VaeTrainReport();
  rep.min_batch_kl = std::numeric_limits<double>::infinity();
  const std::uint64_t eval_seed = MixSeed(seed, kVaeEvalNoiseStream);
  rep.initial_loss = VaeLoss(vae, data, eval_seed);

  AdamOptimizer enc_opt(vae.encoder, config.train);
  AdamOptimizer dec_opt(vae.decoder, config.train);
  std::mt19937_64 noise(MixSeed(seed, kVaeNoiseStream));
  const int n = static_cast<int>(data.cols());
  for (int epoch = 0; epoch < config.train.epochs; ++epoch) {
    for (const auto& batch :
         EpochBatches(n, config.train.batch_size, seed, epoch)) {
      const Eigen::MatrixXd x = GatherColumns(data, batch);
      const Eigen::MatrixXd eps =
          StandardNormal(d, static_cast<int>(batch.size()), &noise);
      VaeBatch b = VaeForwardBackward(vae, x, eps, /*gradients=*/true);
      CheckFiniteLoss(b.loss, "TrainVae", epoch);
      if (b.kl < 0.0) {
        throw std::logic_error("TrainVae: negative KL on a minibatch");
      }
      rep.min_batch_kl = std::min(rep.min_batch_kl, b.kl);
      ++rep.batches;
      const MlpGradients enc_grads =
          vae.encoder.Backward(b.encoder_tape, b.grad_encoder_output);
      dec_opt.Step(&vae.decoder, b.decoder_grads);
      enc_opt.Step(&vae.encoder, enc_grads);
    }
    const double loss = VaeLoss(vae, data, eval_seed);
    CheckFiniteLoss(loss, "TrainVae", epoch);
    rep.epoch_loss.push_back(loss);
  }
  return vae;
}

double VaeLoss(const VaeModel& vae, const Eigen::MatrixXd& unit_samples,
               std::uint64_t noise_seed) {
  std::mt19937_64 noise(noise_seed);
  const Eigen::MatrixXd eps =
      StandardNormal(vae.latent_dim, static_cast<int>(unit_samples.cols()), &noise);
  return VaeForwardBackward(vae, unit_samples, eps, /*gradients=*/false).loss;
}

VaeDecoderMap::VaeDecoderMap(VaeModel model, ParameterSpace target, int grid_res)
    : model_(std::move(model)),
      target_(std::move(target)),
      box_(LatentBox(Eigen::VectorXd::Constant(model_.latent_dim, -3.0),
                     Eigen::VectorXd::Constant(model_.latent_dim, 3.0),
                     grid_res)) {
  if (model_.param_dim() != target_.dim()) {
    throw std::invalid_argument("VaeDecoderMap: decoder/target dimension mismatch");
  }
}

ParamVector VaeDecoderMap::Decode(const Vector& alpha) const {
  CheckLatentInBox(box_, alpha);
  return ClipAndDenormalize(target_, model_.DecodeUnit(alpha));
}

// ---------------------------------------------------------------------------
// Dynamics network.

void DynamicsDataset::Validate() const {
  const auto n = theta.cols();
  if (n == 0) throw std::invalid_argument("DynamicsDataset: empty");
  if (state.cols() != n || control.cols() != n || next.cols() != n) {
    throw std::invalid_argument("DynamicsDataset: column counts differ");
  }
  if (theta.rows() == 0 || next.rows() == 0) {
    throw std::invalid_argument("DynamicsDataset: missing parameters or targets");
  }
  if (!theta.allFinite() || !state.allFinite() || !control.allFinite() ||
      !next.allFinite()) {
    throw std::invalid_argument("DynamicsDataset: non-finite entries");
  }
}

DynamicsDataset DynamicsDataset::Slice(int begin, int end) const {
  if (begin < 0 || end > size() || begin > end) {
    throw std::out_of_range("DynamicsDataset::Slice: bad range");
  }
  const int len = end - begin;
  return {theta.middleCols(begin, len), state.middleCols(begin, len),
          control.middleCols(begin, len), next.middleCols(begin, len)};
}

Eigen::MatrixXd DynamicsNet::StackInputs(const Eigen::MatrixXd& theta,
                                         const Eigen::MatrixXd& state,
                                         const Eigen::MatrixXd& control) const {
  const auto n = theta.cols();
  if (theta.rows() != param_dim || state.rows() != state_dim ||
      control.rows() != control_dim || state.cols() != n || control.cols() != n) {
    throw std::invalid_argument("DynamicsNet: input layout mismatch");
  }
  Eigen::MatrixXd x(input_dim(), n);
  x << theta, state, control;
  return x;
}

Eigen::MatrixXd DynamicsNet::PredictStandardized(
    const Eigen::MatrixXd& theta, const Eigen::MatrixXd& state,
    const Eigen::MatrixXd& control) const {
  return net.ForwardBatch(input_norm.Apply(StackInputs(theta, state, control)));
}

Eigen::MatrixXd DynamicsNet::Predict(const Eigen::MatrixXd& theta,
                                     const Eigen::MatrixXd& state,
                                     const Eigen::MatrixXd& control) const {
  return output_norm.Invert(PredictStandardized(theta, state, control));
}

Eigen::MatrixXd DynamicsNet::ParamGradient(const Eigen::MatrixXd& theta,
                                           const Eigen::MatrixXd& state,
                                           const Eigen::MatrixXd& control,
                                           const Eigen::MatrixXd& upstream) const {
  const MlpGradients g = net.Backward(
      input_norm.Apply(StackInputs(theta, state, control)), upstream);
  return g.input.topRows(param_dim).array().colwise() /
         input_norm.scale.head(param_dim).array();
}

nlohmann::json DynamicsNet::ToJson() const {
  return {{"format", "modelid-dynamics"}, {"version", 1},
          {"param_dim", param_dim},       {"state_dim", state_dim},
          {"control_dim", control_dim},   {"seed", seed},
          {"input_norm", input_norm.ToJson()},
          {"output_norm", output_norm.ToJson()},
          {"net", net.ToJson()}};
}

DynamicsNet DynamicsNet::FromJson(const nlohmann::json& j) {
  CheckFormat(j, "modelid-dynamics");
  DynamicsNet dyn;
  dyn.param_dim = j.at("param_dim").get<int>();
  dyn.state_dim = j.at("state_dim").get<int>();
  dyn.control_dim = j.at("control_dim").get<int>();
  dyn.seed = j.at("seed").get<std::uint64_t>();
  dyn.input_norm = Standardizer::FromJson(j.at("input_norm"));
  dyn.output_norm = Standardizer::FromJson(j.at("output_norm"));
  dyn.net = Mlp::FromJson(j.at("net"));
  if (dyn.net.input_dim() != dyn.input_dim() ||
      dyn.input_norm.mean.size() != dyn.input_dim() ||
      dyn.output_norm.mean.size() != dyn.net.output_dim()) {
    throw std::invalid_argument("DynamicsNet: inconsistent shapes");
  }
  return dyn;
}

DynamicsNet TrainDynamics(const DynamicsDataset& train,
                          const std::vector<int>& hidden,
                          const TrainConfig& config,
                          const DynamicsDataset* test,
                          DynamicsReport* report) {
  train.Validate();
  config.Validate();
  DynamicsNet dyn;
  dyn.param_dim = static_cast<int>(train.theta.rows());
  dyn.state_dim = static_cast<int>(train.state.rows());
  dyn.control_dim = static_cast<int>(train.control.rows());
  dyn.seed = config.seed;
  const int out_dim = static_cast<int>(train.next.rows());
  dyn.net = Mlp::Create(LayerDims(dyn.input_dim(), hidden, out_dim),
                        HiddenRelu(hidden.size()),
                        MixSeed(config.seed, kDynamicsInitStream));

  const Eigen::MatrixXd inputs =
      dyn.StackInputs(train.theta, train.state, train.control);
  dyn.input_norm = Standardizer::Fit(inputs);
  dyn.output_norm = Standardizer::Fit(train.next);
  const TrainReport tr = Train(&dyn.net, dyn.input_norm.Apply(inputs),
                               dyn.output_norm.Apply(train.next), config);
  if (report) {
    report->train = tr;
    if (test) {
      test->Validate();
      const Eigen::MatrixXd pred =
          dyn.Predict(test->theta, test->state, test->control);
      report->test_mse =
          (pred - test->next).colwise().squaredNorm().mean();
      report->median_relative_error = MedianRelativeError(dyn, *test);
    }
  }
  return dyn;
}

double MedianRelativeError(const DynamicsNet& dyn, const DynamicsDataset& data,
                           double floor) {
  data.Validate();
  const Eigen::MatrixXd pred = dyn.Predict(data.theta, data.state, data.control);
  std::vector<double> rel(static_cast<std::size_t>(data.size()));
  for (int i = 0; i < data.size(); ++i) {
    const double y = data.next(0, i);
    rel[i] = std::abs(pred(0, i) - y) / std::max(std::abs(y), floor);
  }
  auto mid = rel.begin() + static_cast<std::ptrdiff_t>(rel.size() / 2);
  std::nth_element(rel.begin(), mid, rel.end());
  if (rel.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(rel.begin(), mid);
  return 0.5 * (lower + upper);
}

// ---------------------------------------------------------------------------
// Dynamics-coupled autoencoder.

Eigen::VectorXd DynCoupledAe::Encode(const Eigen::VectorXd& unit_theta) const {
  return encoder.Forward(unit_theta);
}

Eigen::VectorXd DynCoupledAe::DecodeUnit(const Eigen::VectorXd& alpha) const {
  return decoder.Forward(alpha);
}

nlohmann::json DynCoupledAe::ToJson() const {
  return {{"format", "modelid-ae-dyn"}, {"version", 1},
          {"latent_dim", latent_dim()}, {"seed", seed},
          {"latent_lower", VectorJson(latent_lower)},
          {"latent_upper", VectorJson(latent_upper)},
          {"encoder", encoder.ToJson()}, {"decoder", decoder.ToJson()},
          {"dynamics", dynamics.ToJson()}};
}

DynCoupledAe DynCoupledAe::FromJson(const nlohmann::json& j) {
  CheckFormat(j, "modelid-ae-dyn");
  DynCoupledAe ae;
  ae.seed = j.at("seed").get<std::uint64_t>();
  ae.latent_lower = JsonVector(j.at("latent_lower"));
  ae.latent_upper = JsonVector(j.at("latent_upper"));
  ae.encoder = Mlp::FromJson(j.at("encoder"));
  ae.decoder = Mlp::FromJson(j.at("decoder"));
  ae.dynamics = DynamicsNet::FromJson(j.at("dynamics"));
  const int d = ae.encoder.output_dim();
  if (ae.decoder.input_dim() != d || ae.latent_lower.size() != d ||
      ae.latent_upper.size() != d ||
      ae.encoder.input_dim() != ae.dynamics.param_dim ||
      ae.decoder.output_dim() != ae.dynamics.param_dim) {
    throw std::invalid_argument("DynCoupledAe: inconsistent shapes");
  }
  return ae;
}

DynCoupledAe TrainDynCoupledAe(const DynamicsDataset& data,
                               const DynamicsNet& dynamics,
                               const AeConfig& config, AeTrainReport* report) {
  data.Validate();
  config.train.Validate();
  const int dim = dynamics.param_dim;
  if (data.theta.rows() != dim || data.state.rows() != dynamics.state_dim ||
      data.control.rows() != dynamics.control_dim ||
      data.next.rows() != dynamics.output_dim()) {
    throw std::invalid_argument("TrainDynCoupledAe: dataset/dynamics mismatch");
  }
  if (config.latent_dim < 1 || config.latent_dim >= dim) {
    throw std::invalid_argument(
        "TrainDynCoupledAe: need 1 <= latent_dim < param dim");
  }
  if (!(config.box_half_width > 0.0) || !(config.box_padding >= 0.0)) {
    throw std::invalid_argument(
        "TrainDynCoupledAe: box_half_width must be > 0 and box_padding >= 0");
  }

  const std::uint64_t seed = config.train.seed;
  DynCoupledAe ae;
  ae.seed = seed;
  ae.dynamics = dynamics;
  ae.encoder = Mlp::Create(LayerDims(dim, config.encoder_hidden, config.latent_dim),
                           HiddenRelu(config.encoder_hidden.size()),
                           MixSeed(seed, kEncoderInitStream));
  ae.decoder = Mlp::Create(LayerDims(config.latent_dim, config.decoder_hidden, dim),
                           HiddenRelu(config.decoder_hidden.size()),
                           MixSeed(seed, kDecoderInitStream));

  AeTrainReport local;
  AeTrainReport& rep = report ? *report : local;
  rep = AeTrainReport();
  rep.dynamics_checksum_before = ae.dynamics.net.Checksum();
  const Eigen::MatrixXd target = dynamics.output_norm.Apply(data.next);
  rep.initial_loss = AeForwardBackward(ae, data.theta, data.state, data.control,
                                       target, /*gradients=*/false)
                         .loss;

  AdamOptimizer enc_opt(ae.encoder, config.train);
  AdamOptimizer dec_opt(ae.decoder, config.train);
  const int n = data.size();
  const std::uint64_t batch_seed = MixSeed(seed, kAeBatchStream);
  for (int epoch = 0; epoch < config.train.epochs; ++epoch) {
    for (const auto& batch :
         EpochBatches(n, config.train.batch_size, batch_seed, epoch)) {
      const AeBatch b = AeForwardBackward(
          ae, GatherColumns(data.theta, batch), GatherColumns(data.state, batch),
          GatherColumns(data.control, batch), GatherColumns(target, batch),
          /*gradients=*/true);
      CheckFiniteLoss(b.loss, "TrainDynCoupledAe", epoch);
      enc_opt.Step(&ae.encoder, b.encoder_grads);
      dec_opt.Step(&ae.decoder, b.decoder_grads);
    }
    const double loss = AeForwardBackward(ae, data.theta, data.state,
                                          data.control, target, false)
                            .loss;
    CheckFiniteLoss(loss, "TrainDynCoupledAe", epoch);
    rep.epoch_loss.push_back(loss);
  }
  rep.dynamics_checksum_after = ae.dynamics.net.Checksum();

  const Eigen::MatrixXd codes = ae.encoder.ForwardBatch(data.theta);
  if (config.box == AeBox::kEmpirical) {
    // Empirical code range over the training parameters, padded.
    const Eigen::VectorXd lo = codes.rowwise().minCoeff();
    const Eigen::VectorXd hi = codes.rowwise().maxCoeff();
    Eigen::VectorXd pad = config.box_padding * (hi - lo);
    for (int i = 0; i < pad.size(); ++i) {
      if (!(hi[i] - lo[i] > kMinScale)) pad[i] = 1.0;
    }
    ae.latent_lower = lo - pad;
    ae.latent_upper = hi + pad;
  } else {
    // [-h, h]^d, widened to the largest |code| (rounded up) if needed.
    const double half = std::max(config.box_half_width,
                                 std::ceil(codes.cwiseAbs().maxCoeff()));
    ae.latent_lower = Eigen::VectorXd::Constant(config.latent_dim, -half);
    ae.latent_upper = Eigen::VectorXd::Constant(config.latent_dim, half);
  }
  return ae;
}

AeBox AeBoxFromString(const std::string& name) {
  if (name == "empirical") return AeBox::kEmpirical;
  if (name == "symmetric") return AeBox::kSymmetric;
  throw std::invalid_argument("unknown AE latent box '" + name +
                              "' (expected empirical or symmetric)");
}

double DynCoupledAeLoss(const DynCoupledAe& ae, const DynamicsDataset& data) {
  data.Validate();
  return AeForwardBackward(ae, data.theta, data.state, data.control,
                           ae.dynamics.output_norm.Apply(data.next), false)
      .loss;
}

AeDecoderMap::AeDecoderMap(DynCoupledAe model, ParameterSpace target,
                           int grid_res)
    : model_(std::move(model)),
      target_(std::move(target)),
      box_(LatentBox(model_.latent_lower, model_.latent_upper, grid_res)) {
  if (model_.decoder.output_dim() != target_.dim()) {
    throw std::invalid_argument("AeDecoderMap: decoder/target dimension mismatch");
  }
}

ParamVector AeDecoderMap::Decode(const Vector& alpha) const {
  CheckLatentInBox(box_, alpha);
  return ClipAndDenormalize(target_, model_.DecodeUnit(alpha));
}

void SaveJson(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump() << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

nlohmann::json LoadJson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed JSON in " + path + ": " + e.what());
  }
}

}  // namespace modelid
