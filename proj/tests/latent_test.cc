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
#include <random>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "modelid/bo.h"
#include "modelid/dataset.h"
#include "modelid/push.h"

namespace modelid {
namespace {

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

TEST(GaussianKlTest, PriorEqualsPosterior) {
  EXPECT_EQ(GaussianKl(Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(4)), 0.0);
}

TEST(GaussianKlTest, ShiftedMeanClosedForm) {
  const Eigen::Vector3d mu(0.5, -1.5, 2.0);
  EXPECT_NEAR(GaussianKl(mu, Eigen::VectorXd::Zero(3)),
              0.5 * (0.25 + 2.25 + 4.0), 1e-10);
  EXPECT_NEAR(GaussianKl(Eigen::VectorXd::Constant(1, 0.3),
                         Eigen::VectorXd::Zero(1)),
              0.045, 1e-10);
}

TEST(GaussianKlTest, NonNegative) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    Eigen::VectorXd mu(3), lv(3);
    for (int k = 0; k < 3; ++k) {
      mu[k] = normal(rng);
      lv[k] = normal(rng);
    }
    ASSERT_GE(GaussianKl(mu, lv), 0.0);
  }
}

TEST(ReparameterizeTest, ZeroNoiseReturnsMean) {
  const Eigen::Vector2d mu(0.3, -0.7), lv(1.2, -3.0);
  EXPECT_EQ(Reparameterize(mu, lv, Eigen::Vector2d::Zero()), mu);
  const Eigen::Vector2d z = Reparameterize(mu, lv, Eigen::Vector2d(1.0, 1.0));
  EXPECT_NEAR(z[0], 0.3 + std::exp(0.6), 1e-15);
}

class VaeTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    samples_ = new std::vector<Eigen::VectorXd>();
    for (int i = 0; i < 600; ++i) {
      // Correlated 6-D data living near a 2-D manifold.
      const double a = u(rng), b = u(rng);
      Eigen::VectorXd x(6);
      x << a, b, 0.5 * (a + b), a * a, 1.0 - b, 0.5 + 0.4 * (a - b);
      samples_->push_back(x);
    }
    VaeConfig config;
    config.latent_dim = 2;
    config.hidden = 64;
    config.train.epochs = 60;
    config.train.step_size = 3e-3;
    config.train.seed = 4;
    report_ = new VaeTrainReport();
    vae_ = new VaeModel(TrainVae(*samples_, config, report_));
  }
  static void TearDownTestSuite() {
    delete samples_;
    delete report_;
    delete vae_;
  }
  static std::vector<Eigen::VectorXd>* samples_;
  static VaeTrainReport* report_;
  static VaeModel* vae_;
};
std::vector<Eigen::VectorXd>* VaeTest::samples_ = nullptr;
VaeTrainReport* VaeTest::report_ = nullptr;
VaeModel* VaeTest::vae_ = nullptr;

TEST_F(VaeTest, BatchKlNeverNegative) {
  EXPECT_GT(report_->batches, 0);
  EXPECT_GE(report_->min_batch_kl, 0.0);
}

TEST_F(VaeTest, LossDecreases) {
  EXPECT_LT(report_->epoch_loss.back(), report_->initial_loss);
}

TEST_F(VaeTest, DecodesLandInBox) {
  const ParameterSpace target(UnitCube(6).names(), Eigen::VectorXd::Constant(6, -2.0),
                              Eigen::VectorXd::Constant(6, 3.0));
  const VaeDecoderMap map(*vae_, target);
  for (const auto& a : map.latent_space().SampleUniform(3, 10000)) {
    ASSERT_TRUE(target.Contains(map.Decode(a)));
  }
  EXPECT_THROW(map.Decode(Eigen::VectorXd::Constant(2, 3.5)),
               std::invalid_argument);
}

TEST_F(VaeTest, ReconstructionBelowNinetiethPercentileOfPairwiseDistances) {
  std::vector<double> pairwise;
  for (int i = 0; i < 200; ++i) {
    for (int j = i + 1; j < 200; ++j) {
      pairwise.push_back(((*samples_)[i] - (*samples_)[j]).norm());
    }
  }
  std::sort(pairwise.begin(), pairwise.end());
  const double p90 = pairwise[static_cast<std::size_t>(0.9 * pairwise.size())];
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd mu, lv;
    vae_->Encode((*samples_)[i], &mu, &lv);
    const double err = (vae_->DecodeUnit(mu) - (*samples_)[i]).norm();
    EXPECT_LT(err, p90) << "sample " << i;
  }
}

TEST_F(VaeTest, EncoderMeanBeatsRandomLatent) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<double> diff;
  for (int i = 0; i < 100; ++i) {
    const auto& x = (*samples_)[i];
    Eigen::VectorXd mu, lv;
    vae_->Encode(x, &mu, &lv);
    const Eigen::Vector2d random(u(rng), u(rng));
    diff.push_back((vae_->DecodeUnit(random) - x).norm() -
                   (vae_->DecodeUnit(mu) - x).norm());
  }
  EXPECT_GT(Median(diff), 0.0);
}

TEST_F(VaeTest, JsonRoundTrip) {
  const VaeModel back = VaeModel::FromJson(vae_->ToJson());
  const Eigen::Vector2d a(0.4, -1.1);
  EXPECT_EQ(back.DecodeUnit(a), vae_->DecodeUnit(a));
}

TEST(VaeContractTest, RejectsBadInput) {
  std::vector<Eigen::VectorXd> samples(10, Eigen::VectorXd::Constant(3, 0.5));
  VaeConfig config;
  config.latent_dim = 3;
  EXPECT_THROW(TrainVae(samples, config), std::invalid_argument);
  config.latent_dim = 1;
  samples[0][0] = 1.5;  // outside the unit cube
  EXPECT_THROW(TrainVae(samples, config), std::invalid_argument);
}

// Pushing dynamics network, shared by the dynamics and autoencoder tests.
class PushLatentTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const auto raw = MakePushDataset(20000, 2000, 1);
    space_ = new ParameterSpace(DefaultPushSpace());
    train_ = new DynamicsDataset(PushDynamicsDataset(raw.train, *space_));
    test_ = new DynamicsDataset(PushDynamicsDataset(raw.test, *space_));
    TrainConfig config;
    config.epochs = 150;
    config.seed = 1;
    report_ = new DynamicsReport();
    dyn_ = new DynamicsNet(TrainDynamics(*train_, {64, 128, 64}, config, test_,
                                         report_));
    AeConfig ae_config;
    ae_config.latent_dim = 1;
    ae_config.train.epochs = 20;
    ae_config.train.seed = 3;
    ae_report_ = new AeTrainReport();
    ae_ = new DynCoupledAe(TrainDynCoupledAe(*train_, *dyn_, ae_config, ae_report_));
  }
  static void TearDownTestSuite() {
    delete space_;
    delete train_;
    delete test_;
    delete report_;
    delete dyn_;
    delete ae_report_;
    delete ae_;
  }

  static double PredictS(double m, double mu, double impulse) {
    Eigen::MatrixXd theta = space_->Normalize(Eigen::Vector2d(m, mu));
    return dyn_->Predict(theta, Eigen::MatrixXd(0, 1),
                         Eigen::MatrixXd::Constant(1, 1, impulse))(0, 0);
  }

  static ParameterSpace* space_;
  static DynamicsDataset* train_;
  static DynamicsDataset* test_;
  static DynamicsReport* report_;
  static DynamicsNet* dyn_;
  static AeTrainReport* ae_report_;
  static DynCoupledAe* ae_;
};
ParameterSpace* PushLatentTest::space_ = nullptr;
DynamicsDataset* PushLatentTest::train_ = nullptr;
DynamicsDataset* PushLatentTest::test_ = nullptr;
DynamicsReport* PushLatentTest::report_ = nullptr;
DynamicsNet* PushLatentTest::dyn_ = nullptr;
AeTrainReport* PushLatentTest::ae_report_ = nullptr;
DynCoupledAe* PushLatentTest::ae_ = nullptr;

TEST_F(PushLatentTest, HeldOutMedianRelativeErrorBelowFivePercent) {
  EXPECT_LT(report_->median_relative_error, 0.05);
  EXPECT_GT(report_->test_mse, 0.0);
}

TEST_F(PushLatentTest, PredictsTheMotivatingExample) {
  EXPECT_NEAR(PredictS(1.0, 0.32, 1.0), 1.5625, 0.05 * 1.5625);
}

TEST_F(PushLatentTest, ZeroImpulsePredictsNoMotion) {
  EXPECT_NEAR(PredictS(1.0, 0.32, 0.0), 0.0, 0.05);
}

TEST_F(PushLatentTest, EqualMassSquaredFrictionGivesSimilarPredictions) {
  const double a = PredictS(1.0, 0.32, 1.0);
  const double b = PredictS(0.8, 0.5, 1.0);
  EXPECT_NEAR(a, b, 0.05 * std::max(std::abs(a), std::abs(b)));
}

TEST_F(PushLatentTest, ParamGradientMatchesFiniteDifferences) {
  const DynamicsDataset batch = test_->Slice(0, 20);
  const Eigen::MatrixXd upstream = Eigen::MatrixXd::Ones(1, batch.size());
  const Eigen::MatrixXd g =
      dyn_->ParamGradient(batch.theta, batch.state, batch.control, upstream);
  const double h = 1e-6;
  double worst = 0.0;
  for (int k = 0; k < batch.size(); ++k) {
    for (int i = 0; i < 2; ++i) {
      Eigen::MatrixXd up = batch.theta.col(k), down = up;
      up(i, 0) += h;
      down(i, 0) -= h;
      const Eigen::MatrixXd u = batch.control.col(k);
      const Eigen::MatrixXd s(0, 1);
      const double fd = (dyn_->PredictStandardized(up, s, u)(0, 0) -
                         dyn_->PredictStandardized(down, s, u)(0, 0)) /
                        (2 * h);
      worst = std::max(worst, std::abs(fd - g(i, k)) /
                                  std::max({std::abs(fd), std::abs(g(i, k)), 1e-3}));
    }
  }
  EXPECT_LT(worst, 1e-4);
}

TEST_F(PushLatentTest, AutoencoderLeavesDynamicsFrozen) {
  EXPECT_EQ(ae_report_->dynamics_checksum_before,
            ae_report_->dynamics_checksum_after);
  EXPECT_EQ(ae_->dynamics.net.Checksum(), dyn_->net.Checksum());
  EXPECT_LT(ae_report_->epoch_loss.back(), ae_report_->initial_loss);
}

TEST_F(PushLatentTest, AutoencoderDecodesAreContainedAndDeterministic) {
  const AeDecoderMap map(*ae_, *space_);
  for (const auto& a : map.latent_space().SampleUniform(5, 10000)) {
    const ParamVector theta = map.Decode(a);
    ASSERT_TRUE(space_->Contains(theta));
    ASSERT_EQ(theta, map.Decode(a));
  }
}

TEST_F(PushLatentTest, LatentAxisOrdersPredictedDisplacement) {
  const AeDecoderMap map(*ae_, *space_);
  const double lo = map.latent_space().lower()[0];
  const double hi = map.latent_space().upper()[0];
  std::vector<double> s;
  for (int k = 0; k <= 200; ++k) {
    const ParamVector theta = map.Decode(Eigen::VectorXd::Constant(1, lo + (hi - lo) * k / 200.0));
    s.push_back(PredictS(theta[0], theta[1], 1.0));
  }
  bool increasing = true, decreasing = true;
  for (std::size_t k = 1; k < s.size(); ++k) {
    increasing = increasing && s[k] >= s[k - 1];
    decreasing = decreasing && s[k] <= s[k - 1];
  }
  if (increasing || decreasing) return;
  // Fallback contract: injective at 5% resolution. Bucket S into 20 bins of
  // its range; every bin must be hit by one contiguous run of latent cells.
  const double lo_s = *std::min_element(s.begin(), s.end());
  const double range = *std::max_element(s.begin(), s.end()) - lo_s;
  ASSERT_GT(range, 0.0);
  std::vector<int> bucket;
  for (double v : s) {
    bucket.push_back(std::min(19, static_cast<int>(20.0 * (v - lo_s) / range)));
  }
  std::vector<int> runs(20, 0);
  for (std::size_t k = 0; k < bucket.size(); ++k) {
    if (k == 0 || bucket[k] != bucket[k - 1]) ++runs[bucket[k]];
  }
  for (int b = 0; b < 20; ++b) EXPECT_LE(runs[b], 1) << "bucket " << b;
}

TEST_F(PushLatentTest, EncodedTruthDecodesToLowTrajectoryError) {
  const PushSimulator sim(*space_);
  const ParamVector truth = Eigen::Vector2d(1.0, 0.32);
  const auto observed = PushTrajectories(sim, truth, 5, 200);
  const AeDecoderMap map(*ae_, *space_);
  const ParamVector theta = map.Decode(ae_->Encode(space_->Normalize(truth)));
  // The truth itself scores 0 through the true simulator; the reference
  // scale is the trajectory error of the learned dynamics at the truth.
  double model_error = 0.0;
  for (const auto& t : observed) {
    model_error += std::abs(PredictS(truth[0], truth[1], t.controls[0][0]) -
                            (t.states[1][0] - t.states[0][0]));
  }
  EXPECT_EQ(TrajectoryError(sim, observed, truth), 0.0);
  EXPECT_LE(TrajectoryError(sim, observed, theta), 2.0 * model_error);
}

TEST_F(PushLatentTest, ModelsRoundTripThroughJson) {
  const DynamicsNet dyn = DynamicsNet::FromJson(dyn_->ToJson());
  EXPECT_EQ(dyn.net.Checksum(), dyn_->net.Checksum());
  const DynCoupledAe ae = DynCoupledAe::FromJson(ae_->ToJson());
  EXPECT_EQ(ae.latent_lower, ae_->latent_lower);
  EXPECT_EQ(ae.DecodeUnit(Eigen::VectorXd::Constant(1, 0.1)),
            ae_->DecodeUnit(Eigen::VectorXd::Constant(1, 0.1)));
}

TEST(AeBoxTest, ParsesNames) {
  EXPECT_EQ(AeBoxFromString("empirical"), AeBox::kEmpirical);
  EXPECT_EQ(AeBoxFromString("symmetric"), AeBox::kSymmetric);
  EXPECT_THROW(AeBoxFromString("cube"), std::invalid_argument);
}

TEST(StandardizerTest, RoundTripsAndHandlesConstantRows) {
  Eigen::MatrixXd x(2, 4);
  x << 1, 2, 3, 4, 5, 5, 5, 5;
  const Standardizer s = Standardizer::Fit(x);
  EXPECT_EQ(s.scale[1], 1.0);
  EXPECT_TRUE(s.Invert(s.Apply(x)).isApprox(x, 1e-14));
  EXPECT_NEAR(s.Apply(x).row(0).mean(), 0.0, 1e-14);
}

}  // namespace
}  // namespace modelid
