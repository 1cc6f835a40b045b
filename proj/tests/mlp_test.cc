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

#include <filesystem>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "gradient_check.h"

namespace modelid {
namespace {

using A = Activation;

TEST(MlpTest, ZeroNetworkGivesZeroOutput) {
  const Mlp net({3, 5, 2}, {A::kRelu, A::kIdentity});
  EXPECT_TRUE(net.Forward(Eigen::Vector3d(1, -2, 3)).isZero());
}

TEST(MlpTest, IdentityReluClampsNegatives) {
  Mlp net({2, 2}, {A::kRelu});
  net.mutable_layers()[0].weights = Eigen::Matrix2d::Identity();
  const Eigen::VectorXd out = net.Forward(Eigen::Vector2d(-1, 2));
  EXPECT_EQ(out, Eigen::Vector2d(0, 2));
}

TEST(MlpTest, ForwardMatchesHandRolledChain) {
  const Mlp net = Mlp::Create({4, 7, 5, 3}, {A::kRelu, A::kRelu, A::kIdentity}, 9);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(4, -1.0, 2.0);
  Eigen::VectorXd a = x;
  for (const auto& layer : net.layers()) {
    Eigen::VectorXd z(layer.weights.rows());
    for (int r = 0; r < layer.weights.rows(); ++r) {
      double s = layer.bias[r];
      for (int c = 0; c < layer.weights.cols(); ++c) {
        s += layer.weights(r, c) * a[c];
      }
      z[r] = layer.activation == A::kRelu && s < 0.0 ? 0.0 : s;
    }
    a = z;
  }
  EXPECT_TRUE(net.Forward(x).isApprox(a, 1e-14));
}

TEST(MlpTest, RejectsDimensionMismatch) {
  const Mlp net = Mlp::Create({3, 4, 1}, {A::kRelu, A::kIdentity}, 1);
  EXPECT_THROW(net.Forward(Eigen::Vector2d(1, 2)), std::invalid_argument);
  EXPECT_THROW(net.Backward(Eigen::MatrixXd::Zero(3, 2),
                            Eigen::MatrixXd::Zero(1, 3)),
               std::invalid_argument);
  EXPECT_THROW(Mlp({3, 4}, {A::kRelu, A::kIdentity}), std::invalid_argument);
}

TEST(MlpTest, ThreeLayerGradientsMatchFiniteDifferences) {
  const testing::Architecture arch{
      "three layer", {4, 6, 5, 2}, {A::kRelu, A::kRelu, A::kIdentity}};
  EXPECT_LT(testing::ArchitectureGradientError(arch, 3), 1e-4);
}

TEST(MlpTest, ToolkitArchitecturesPassGradientCheck) {
  for (const auto& arch : testing::ToolkitArchitectures()) {
    EXPECT_LT(testing::ArchitectureGradientError(arch, 21), 1e-4) << arch.name;
  }
}

TEST(MlpTest, ZeroUpstreamGivesZeroGradients) {
  const Mlp net = Mlp::Create({3, 4, 2}, {A::kRelu, A::kIdentity}, 2);
  const auto g = net.Backward(Eigen::MatrixXd::Ones(3, 4),
                              Eigen::MatrixXd::Zero(2, 4));
  EXPECT_DOUBLE_EQ(g.SquaredNorm(), 0.0);
  EXPECT_TRUE(g.input.isZero());
}

TEST(MlpTest, DeadReluUnitPassesNoGradient) {
  Mlp net({1, 2, 1}, {A::kRelu, A::kIdentity});
  auto& layers = net.mutable_layers();
  layers[0].weights << 1.0, -1.0;  // unit 1 is dead for positive input
  layers[1].weights << 1.0, 1.0;
  const auto g = net.Backward(Eigen::MatrixXd::Constant(1, 1, 2.0),
                              Eigen::MatrixXd::Ones(1, 1));
  EXPECT_NE(g.weights[0](0, 0), 0.0);
  EXPECT_EQ(g.weights[0](1, 0), 0.0);
  EXPECT_EQ(g.bias[0][1], 0.0);
  EXPECT_EQ(g.weights[1](0, 1), 0.0);
}

TEST(TrainTest, FitsLinearTarget) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd x(1, 1000), y(1, 1000);
  for (int i = 0; i < 1000; ++i) {
    x(0, i) = u(rng);
    y(0, i) = 2.0 * x(0, i);
  }
  Mlp net = Mlp::Create({1, 16, 1}, {A::kRelu, A::kIdentity}, 5);
  TrainConfig config;
  config.epochs = 200;
  config.step_size = 1e-2;
  const auto report = Train(&net, x, y, config);
  ASSERT_EQ(report.epoch_loss.size(), 200u);
  EXPECT_LT(report.epoch_loss.back(), 1e-3);
}

TEST(TrainTest, ZeroLearningRateKeepsLossConstant) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(2, 50);
  Eigen::MatrixXd y = x.colwise().sum();
  Mlp net = Mlp::Create({2, 8, 1}, {A::kRelu, A::kIdentity}, 6);
  const auto before = net.Checksum();
  TrainConfig config;
  config.step_size = 0.0;
  config.epochs = 5;
  const auto report = Train(&net, x, y, config);
  for (double l : report.epoch_loss) EXPECT_EQ(l, report.initial_loss);
  EXPECT_EQ(net.Checksum(), before);
}

TEST(TrainTest, SameSeedSameWeights) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 64);
  Eigen::MatrixXd y = x.cwiseAbs().colwise().sum();
  TrainConfig config;
  config.epochs = 10;
  config.seed = 12;
  Mlp a = Mlp::Create({3, 8, 1}, {A::kRelu, A::kIdentity}, 1);
  Mlp b = Mlp::Create({3, 8, 1}, {A::kRelu, A::kIdentity}, 1);
  Train(&a, x, y, config);
  Train(&b, x, y, config);
  EXPECT_EQ(a.Checksum(), b.Checksum());
}

TEST(TrainTest, NonFiniteLossAborts) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(1, 4);
  Eigen::MatrixXd y = Eigen::MatrixXd::Constant(1, 4, 1e308);
  Mlp net = Mlp::Create({1, 4, 1}, {A::kRelu, A::kIdentity}, 1);
  TrainConfig config;
  config.epochs = 2;
  config.step_size = 1e300;
  EXPECT_THROW(Train(&net, x, y, config), std::runtime_error);
}

TEST(MlpTest, SaveLoadRoundTripIsExact) {
  const Mlp net = Mlp::Create({3, 5, 2}, {A::kRelu, A::kIdentity}, 8);
  const auto path =
      (std::filesystem::temp_directory_path() / "modelid_mlp_test.json").string();
  net.Save(path);
  const Mlp back = Mlp::Load(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.Checksum(), net.Checksum());
  EXPECT_EQ(back.layer_dims(), net.layer_dims());
}

TEST(EpochBatchesTest, PartitionsIndices) {
  const auto batches = EpochBatches(10, 4, 3, 0);
  ASSERT_EQ(batches.size(), 3u);
  std::vector<int> seen;
  for (const auto& b : batches) seen.insert(seen.end(), b.begin(), b.end());
  std::sort(seen.begin(), seen.end());
  for (int i = 0; i < 10; ++i) EXPECT_EQ(seen[i], i);
  EXPECT_NE(EpochBatches(10, 10, 3, 0), EpochBatches(10, 10, 3, 1));
}

}  // namespace
}  // namespace modelid
