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

#include "modelid/dataset.h"

#include <filesystem>
#include <stdexcept>

#include <gtest/gtest.h>

#include "modelid/push.h"
#include "modelid/structure.h"

namespace modelid {
namespace {

constexpr double kStepSeconds = 0.02;

ControlScript Script() {
  return [](int horizon, std::uint64_t seed) {
    return ScriptedControls(horizon, kStepSeconds, seed);
  };
}

TEST(TrajectoryDatasetTest, TwelveHundredRecordsSurviveAFileRoundTrip) {
  const StructureSimulator sim(DefaultStructureSpace());
  const auto data = MakeTrajectoryDataset(sim, Script(), 3, 1200, 5, kStepSeconds);
  ASSERT_EQ(data.records.size(), 1200u);
  const auto path =
      (std::filesystem::temp_directory_path() / "modelid_dataset_test.jsonl")
          .string();
  data.Save(path);
  const auto back = TrajectoryDataset::Load(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.records.size(), 1200u);
  EXPECT_EQ(back.Checksum(), data.Checksum());
  EXPECT_EQ(back.param_names, sim.param_space().names());
  for (const auto& r : back.records) {
    EXPECT_TRUE(sim.param_space().Contains(r.theta));
    EXPECT_EQ(r.trajectory.horizon(), 3);
  }
}

TEST(TrajectoryDatasetTest, ZeroHorizonGivesSingleState) {
  const StructureSimulator sim(DefaultStructureSpace());
  const auto trajs = GenerateTrajectories(sim, {DefaultStructureTruth()},
                                          Script(), 0, 1);
  ASSERT_EQ(trajs.size(), 1u);
  EXPECT_EQ(trajs[0].states.size(), 1u);
  EXPECT_TRUE(trajs[0].controls.empty());
}

TEST(TrajectoryDatasetTest, SameSeedSameChecksum) {
  const StructureSimulator sim(DefaultStructureSpace());
  const auto a = MakeTrajectoryDataset(sim, Script(), 4, 20, 9, kStepSeconds);
  const auto b = MakeTrajectoryDataset(sim, Script(), 4, 20, 9, kStepSeconds);
  const auto c = MakeTrajectoryDataset(sim, Script(), 4, 20, 10, kStepSeconds);
  EXPECT_EQ(a.Checksum(), b.Checksum());
  EXPECT_NE(a.Checksum(), c.Checksum());
}

TEST(TrajectoryDatasetTest, ParseRejectsCorruptFiles) {
  const StructureSimulator sim(DefaultStructureSpace());
  const auto data = MakeTrajectoryDataset(sim, Script(), 2, 3, 1, kStepSeconds);
  std::string text = data.Serialize();
  // Drop the final record: the header count no longer matches.
  const auto last = text.rfind('\n', text.size() - 2);
  EXPECT_THROW(TrajectoryDataset::Parse(text.substr(0, last + 1)),
               std::invalid_argument);
  EXPECT_THROW(TrajectoryDataset::Parse("{\"format\":\"other\"}\n"),
               std::invalid_argument);
  EXPECT_THROW(TrajectoryDataset::Parse(""), std::invalid_argument);
}

TEST(TransitionsDatasetTest, SamplesRequestedCountWithObservableTargets) {
  const StructureSimulator sim(DefaultStructureSpace());
  const auto data = MakeTrajectoryDataset(sim, Script(), 10, 6, 2, kStepSeconds);
  const auto height = [](const Vector& s) {
    return StructureSimulator::CenterOfMassHeight(s);
  };
  const auto out =
      TransitionsDataset(data, sim.param_space(), height, 4, 3);
  ASSERT_EQ(out.size(), 24);
  EXPECT_EQ(out.theta.rows(), 12);
  EXPECT_EQ(out.state.rows(), StructureSimulator::kStateDim);
  EXPECT_EQ(out.control.rows(), StructureSimulator::kControlDim);
  // Every sample matches some transition of its source trajectory.
  for (int k = 0; k < out.size(); ++k) {
    const auto& rec = data.records[k / 4];
    EXPECT_TRUE(out.theta.col(k).isApprox(sim.param_space().Normalize(rec.theta)));
    bool found = false;
    for (int t = 0; t < rec.trajectory.horizon(); ++t) {
      if (rec.trajectory.states[t] == Vector(out.state.col(k))) {
        found = true;
        EXPECT_EQ(out.next(0, k), height(rec.trajectory.states[t + 1]));
        EXPECT_EQ(Vector(out.control.col(k)), rec.trajectory.controls[t]);
      }
    }
    EXPECT_TRUE(found) << "sample " << k;
  }
  const auto all = TransitionsDataset(data, sim.param_space(), height, 0, 3);
  EXPECT_EQ(all.size(), 60);
}

TEST(PushDynamicsDatasetTest, LayoutAndNormalization) {
  const auto raw = MakePushDataset(30, 5, 4);
  const auto out = PushDynamicsDataset(raw.train, DefaultPushSpace());
  ASSERT_EQ(out.size(), 30);
  EXPECT_EQ(out.state.rows(), 0);
  for (int i = 0; i < out.size(); ++i) {
    EXPECT_DOUBLE_EQ(out.control(0, i), raw.train[i].impulse());
    EXPECT_DOUBLE_EQ(out.next(0, i), raw.train[i].displacement);
    EXPECT_GE(out.theta.col(i).minCoeff(), 0.0);
    EXPECT_LE(out.theta.col(i).maxCoeff(), 1.0);
  }
}

}  // namespace
}  // namespace modelid
