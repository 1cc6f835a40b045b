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

#include "modelid/bench.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "modelid/csv.h"
#include "modelid/push.h"
#include "modelid/random.h"
#include "modelid/rembo.h"
#include "modelid/structure.h"

namespace modelid {
namespace {

namespace fs = std::filesystem;

// Seed streams derived from ExperimentConfig::data_seed.
constexpr std::uint64_t kTrainingDataStream = 100;
constexpr std::uint64_t kTransitionStream = 101;
constexpr std::uint64_t kObservedStream = 200;
constexpr std::uint64_t kTestStream = 201;
// Derived from the per-run seed.
constexpr std::uint64_t kEmbeddingStream = 300;

const char* const kPush = "push";
const char* const kStructure = "structure";

std::string Hex(std::uint64_t h) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

std::string UtcTimestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

void Log(std::ostream* log, const std::string& message) {
  if (log != nullptr) *log << message << std::endl;
}

nlohmann::json TrainConfigJson(const TrainConfig& c) {
  return {{"step_size", c.step_size}, {"batch_size", c.batch_size},
          {"epochs", c.epochs},       {"beta1", c.beta1},
          {"beta2", c.beta2},         {"epsilon", c.epsilon},
          {"seed", c.seed}};
}

TrainConfig TrainConfigFromJson(const nlohmann::json& j, TrainConfig c) {
  c.step_size = j.value("step_size", c.step_size);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.epochs = j.value("epochs", c.epochs);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.seed = j.value("seed", c.seed);
  c.Validate();
  return c;
}

double StepSeconds(const BlackBoxSimulator& sim) {
  if (const auto* s = dynamic_cast<const StructureSimulator*>(&sim)) {
    return s->options().dt * s->options().substeps;
  }
  return 1.0;
}

ControlScript StructureScript(double step_seconds) {
  return [step_seconds](int horizon, std::uint64_t seed) {
    return ScriptedControls(horizon, step_seconds, seed);
  };
}

// Content-addressed cache keys.
nlohmann::json DataKey(const ExperimentConfig& c) {
  const TrainingSettings& t = c.training;
  nlohmann::json key = {{"simulator", c.simulator}, {"data_seed", c.data_seed}};
  if (c.simulator == kPush) {
    key["push_train"] = t.push_train;
    key["push_test"] = t.push_test;
  } else {
    key["trajectories"] = t.trajectories;
    key["trajectory_horizon"] = t.trajectory_horizon;
    key["transitions_per_trajectory"] = t.transitions_per_trajectory;
    key["test_fraction"] = t.test_fraction;
  }
  return key;
}

nlohmann::json DynamicsKey(const ExperimentConfig& c) {
  return {{"data", DataKey(c)},
          {"hidden", c.training.dynamics_hidden},
          {"train", TrainConfigJson(c.training.dynamics_train)}};
}

std::string CachePath(const ExperimentConfig& c, const std::string& kind,
                      const nlohmann::json& key, const std::string& ext) {
  return (fs::path(c.ResolvedCacheDir()) /
          (c.simulator + "-" + kind + "-" + Hex(Fnv1a64(key.dump())) + ext))
      .string();
}

void EnsureParent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

std::vector<Vector> UnitColumns(const Eigen::MatrixXd& m) {
  std::vector<Vector> out;
  out.reserve(m.cols());
  for (int i = 0; i < m.cols(); ++i) out.push_back(m.col(i));
  return out;
}

int LatentGridRes(const ExperimentConfig& c, int dim) {
  const double per_axis =
      std::round(std::pow(static_cast<double>(c.latent_grid_points), 1.0 / dim));
  return std::max(2, static_cast<int>(per_axis));
}

int MethodIndex(const std::string& method) {
  const auto& ids = MethodIds();
  const auto it = std::find(ids.begin(), ids.end(), method);
  return it == ids.end() ? static_cast<int>(ids.size())
                         : static_cast<int>(it - ids.begin());
}

// Groups rows by method in canonical order, then by seed.
std::map<std::pair<int, std::string>,
         std::map<std::uint64_t, std::vector<const ResultRow*>>>
GroupRuns(const std::vector<ResultRow>& rows) {
  std::map<std::pair<int, std::string>,
           std::map<std::uint64_t, std::vector<const ResultRow*>>>
      groups;
  for (const auto& r : rows) {
    groups[{MethodIndex(r.method), r.method}][r.seed].push_back(&r);
  }
  for (auto& [method, runs] : groups) {
    for (auto& [seed, run] : runs) {
      std::sort(run.begin(), run.end(),
                [](const ResultRow* a, const ResultRow* b) {
                  return a->iteration < b->iteration;
                });
    }
  }
  return groups;
}

std::ofstream OpenCsv(const std::string& path, const nlohmann::json& config) {
  EnsureParent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# generated " << UtcTimestamp() << '\n';
  out << "# config " << config.dump() << '\n';
  return out;
}

}  // namespace

const std::vector<std::string>& MethodIds() {
  static const std::vector<std::string> ids = {"random", "bo-full", "bo-rembo",
                                               "bo-vae", "bo-ae-dyn"};
  return ids;
}

bool IsLatentMethod(const std::string& method) {
  return method == "bo-rembo" || method == "bo-vae" || method == "bo-ae-dyn";
}

// ---------------------------------------------------------------------------
// Configuration.

nlohmann::json TrainingSettings::ToJson() const {
  return {{"push_train", push_train},
          {"push_test", push_test},
          {"trajectories", trajectories},
          {"trajectory_horizon", trajectory_horizon},
          {"transitions_per_trajectory", transitions_per_trajectory},
          {"test_fraction", test_fraction},
          {"dynamics_hidden", dynamics_hidden},
          {"dynamics_train", TrainConfigJson(dynamics_train)},
          {"vae_hidden", vae_hidden},
          {"vae_train", TrainConfigJson(vae_train)},
          {"ae_encoder_hidden", ae_encoder_hidden},
          {"ae_decoder_hidden", ae_decoder_hidden},
          {"ae_train", TrainConfigJson(ae_train)},
          {"ae_box", ae_box},
          {"ae_box_padding", ae_box_padding},
          {"ae_box_half_width", ae_box_half_width}};
}

TrainingSettings TrainingSettings::FromJson(const nlohmann::json& j,
                                            const TrainingSettings& defaults) {
  TrainingSettings t = defaults;
  t.push_train = j.value("push_train", t.push_train);
  t.push_test = j.value("push_test", t.push_test);
  t.trajectories = j.value("trajectories", t.trajectories);
  t.trajectory_horizon = j.value("trajectory_horizon", t.trajectory_horizon);
  t.transitions_per_trajectory =
      j.value("transitions_per_trajectory", t.transitions_per_trajectory);
  t.test_fraction = j.value("test_fraction", t.test_fraction);
  t.dynamics_hidden = j.value("dynamics_hidden", t.dynamics_hidden);
  if (j.contains("dynamics_train")) {
    t.dynamics_train = TrainConfigFromJson(j["dynamics_train"], t.dynamics_train);
  }
  t.vae_hidden = j.value("vae_hidden", t.vae_hidden);
  if (j.contains("vae_train")) {
    t.vae_train = TrainConfigFromJson(j["vae_train"], t.vae_train);
  }
  t.ae_encoder_hidden = j.value("ae_encoder_hidden", t.ae_encoder_hidden);
  t.ae_decoder_hidden = j.value("ae_decoder_hidden", t.ae_decoder_hidden);
  if (j.contains("ae_train")) {
    t.ae_train = TrainConfigFromJson(j["ae_train"], t.ae_train);
  }
  t.ae_box = j.value("ae_box", t.ae_box);
  t.ae_box_padding = j.value("ae_box_padding", t.ae_box_padding);
  t.ae_box_half_width = j.value("ae_box_half_width", t.ae_box_half_width);
  return t;
}

ExperimentConfig ExperimentConfig::Defaults(const std::string& simulator) {
  ExperimentConfig c;
  c.simulator = simulator;
  c.methods = MethodIds();
  for (std::uint64_t s = 0; s < 10; ++s) c.seeds.push_back(s);
  TrainingSettings& t = c.training;
  if (simulator == kPush) {
    c.latent_dim = 1;
    c.budget = 50;
    c.horizon = 1;
    t.dynamics_hidden = {64, 128, 64};
    t.dynamics_train.epochs = 150;
    t.dynamics_train.seed = 1;
    t.vae_train.epochs = 20;
    t.vae_train.seed = 2;
    t.ae_encoder_hidden = {32};
    t.ae_decoder_hidden = {32};
    t.ae_train.epochs = 20;
    t.ae_train.seed = 3;
  } else if (simulator == kStructure) {
    c.latent_dim = 5;
    c.budget = 100;
    c.horizon = 100;
    t.dynamics_hidden = {128, 64, 32};
    t.dynamics_train.epochs = 40;
    t.dynamics_train.seed = 1;
    t.vae_train.epochs = 100;
    t.vae_train.seed = 2;
    t.ae_encoder_hidden = {10};
    t.ae_decoder_hidden = {10};
    t.ae_train.epochs = 20;
    t.ae_train.seed = 3;
  } else {
    throw std::invalid_argument("unknown simulator '" + simulator +
                                "' (expected push or structure)");
  }
  return c;
}

nlohmann::json ExperimentConfig::ToJson() const {
  return {{"simulator", simulator},
          {"methods", methods},
          {"latent_dim", latent_dim},
          {"budget", budget},
          {"seeds", seeds},
          {"observed_trajectories", observed_trajectories},
          {"test_trajectories", test_trajectories},
          {"horizon", horizon},
          {"data_seed", data_seed},
          {"grid_res", grid_res},
          {"latent_grid_points", latent_grid_points},
          {"out_dir", out_dir},
          {"cache_dir", cache_dir},
          {"dynamics_model", dynamics_model},
          {"vae_model", vae_model},
          {"ae_model", ae_model},
          {"training", training.ToJson()}};
}

ExperimentConfig ExperimentConfig::FromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be an object");
  ExperimentConfig c = Defaults(j.value("simulator", std::string(kPush)));
  try {
    c.methods = j.value("methods", c.methods);
    c.latent_dim = j.value("latent_dim", c.latent_dim);
    c.budget = j.value("budget", c.budget);
    c.seeds = j.value("seeds", c.seeds);
    c.observed_trajectories =
        j.value("observed_trajectories", c.observed_trajectories);
    c.test_trajectories = j.value("test_trajectories", c.test_trajectories);
    c.horizon = j.value("horizon", c.horizon);
    c.data_seed = j.value("data_seed", c.data_seed);
    c.grid_res = j.value("grid_res", c.grid_res);
    c.latent_grid_points = j.value("latent_grid_points", c.latent_grid_points);
    c.out_dir = j.value("out_dir", c.out_dir);
    c.cache_dir = j.value("cache_dir", c.cache_dir);
    c.dynamics_model = j.value("dynamics_model", c.dynamics_model);
    c.vae_model = j.value("vae_model", c.vae_model);
    c.ae_model = j.value("ae_model", c.ae_model);
    if (j.contains("training")) {
      c.training = TrainingSettings::FromJson(j["training"], c.training);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad config value: ") + e.what());
  }
  c.Validate();
  return c;
}

ExperimentConfig ExperimentConfig::LoadFile(const std::string& path) {
  return FromJson(LoadJson(path));
}

void ExperimentConfig::Validate() const {
  if (simulator != kPush && simulator != kStructure) {
    throw std::invalid_argument("unknown simulator '" + simulator + "'");
  }
  if (methods.empty()) throw std::invalid_argument("no methods configured");
  for (const auto& m : methods) {
    if (MethodIndex(m) == static_cast<int>(MethodIds().size())) {
      throw std::invalid_argument("unknown method '" + m + "'");
    }
  }
  const int dim = simulator == kPush ? 2 : 12;
  if (latent_dim < 1 || latent_dim >= dim) {
    throw std::invalid_argument("latent_dim must be in [1, " +
                                std::to_string(dim - 1) + "]");
  }
  if (budget < 1) throw std::invalid_argument("budget must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("no seeds configured");
  if (observed_trajectories < 1 || test_trajectories < 1 || horizon < 1) {
    throw std::invalid_argument(
        "trajectory counts and horizon must be positive");
  }
  if (grid_res < 2 || latent_grid_points < 2) {
    throw std::invalid_argument("grid resolutions must be >= 2");
  }
  if (out_dir.empty()) throw std::invalid_argument("out_dir must be set");
  AeBoxFromString(training.ae_box);
}

std::string ExperimentConfig::ResolvedCacheDir() const {
  return cache_dir.empty() ? (fs::path(out_dir) / "cache").string() : cache_dir;
}

// ---------------------------------------------------------------------------
// Benchmark.

std::unique_ptr<BlackBoxSimulator> MakeSimulator(const std::string& id,
                                                 int grid_res) {
  if (id == kPush) return std::make_unique<PushSimulator>(DefaultPushSpace(grid_res));
  if (id == kStructure) {
    return std::make_unique<StructureSimulator>(DefaultStructureSpace(grid_res));
  }
  throw std::invalid_argument("unknown simulator '" + id + "'");
}

ParamVector DefaultTruth(const std::string& simulator) {
  if (simulator == kPush) {
    const PushParams p;
    return (Vector(2) << p.m, p.mu).finished();
  }
  if (simulator == kStructure) return DefaultStructureTruth();
  throw std::invalid_argument("unknown simulator '" + simulator + "'");
}

std::vector<Trajectory> BenchmarkTrajectories(const BlackBoxSimulator& sim,
                                              const ParamVector& theta,
                                              int count, int horizon,
                                              std::uint64_t seed) {
  if (const auto* push = dynamic_cast<const PushSimulator*>(&sim)) {
    return PushTrajectories(*push, theta, count, seed);
  }
  return GenerateTrajectories(sim, std::vector<ParamVector>(count, theta),
                              StructureScript(StepSeconds(sim)), horizon, seed);
}

Benchmark::Benchmark(const ExperimentConfig& config)
    : sim_(MakeSimulator(config.simulator, config.grid_res)),
      truth_(DefaultTruth(config.simulator)) {
  observed_ = BenchmarkTrajectories(*sim_, truth_, config.observed_trajectories,
                                    config.horizon,
                                    MixSeed(config.data_seed, kObservedStream));
  test_ = BenchmarkTrajectories(*sim_, truth_, config.test_trajectories,
                                config.horizon,
                                MixSeed(config.data_seed, kTestStream));
  for (const auto& t : observed_) {
    if (t.diverged) {
      throw std::runtime_error("ground-truth trajectory diverged");
    }
  }
}

double Benchmark::ObservedError(const ParamVector& theta) const {
  return TrajectoryError(*sim_, observed_, theta);
}

double Benchmark::TestError(const ParamVector& theta) const {
  return TrajectoryError(*sim_, test_, theta);
}

Vector Benchmark::RelativeErrorPct(const ParamVector& theta) const {
  return 100.0 * ((theta - truth_).array().abs() / truth_.array()).matrix();
}

// ---------------------------------------------------------------------------
// Training data and models.

namespace {

struct RawData {
  PushDatasets push;
  TrajectoryDataset trajectories;
};

RawData GenerateRaw(const ExperimentConfig& config) {
  RawData raw;
  const std::uint64_t seed = MixSeed(config.data_seed, kTrainingDataStream);
  const TrainingSettings& t = config.training;
  if (config.simulator == kPush) {
    PushSampling sampling;
    const ParameterSpace space = DefaultPushSpace();
    sampling.m_lo = space.lower()[0];
    sampling.m_hi = space.upper()[0];
    sampling.mu_lo = space.lower()[1];
    sampling.mu_hi = space.upper()[1];
    raw.push = MakePushDataset(t.push_train, t.push_test, seed, sampling);
  } else {
    const auto sim = MakeSimulator(config.simulator, config.grid_res);
    const double step = StepSeconds(*sim);
    raw.trajectories = MakeTrajectoryDataset(*sim, StructureScript(step),
                                             t.trajectory_horizon,
                                             t.trajectories, seed, step);
  }
  return raw;
}

TrainingData FromRaw(const ExperimentConfig& config, const RawData& raw) {
  TrainingData data;
  if (config.simulator == kPush) {
    const ParameterSpace space = DefaultPushSpace();
    data.train = PushDynamicsDataset(raw.push.train, space);
    data.test = PushDynamicsDataset(raw.push.test, space);
    data.vae_samples = UnitColumns(data.train.theta);
    return data;
  }
  const ParameterSpace space = DefaultStructureSpace();
  const DynamicsDataset all = TransitionsDataset(
      raw.trajectories, space,
      [](const Vector& s) { return StructureSimulator::CenterOfMassHeight(s); },
      config.training.transitions_per_trajectory,
      MixSeed(config.data_seed, kTransitionStream));
  // Transitions are ordered by trajectory, so the tail is a held-out set of
  // whole trajectories.
  const int n_test = static_cast<int>(
      std::floor(config.training.test_fraction * all.size()));
  data.train = all.Slice(0, all.size() - n_test);
  data.test = n_test > 0 ? all.Slice(all.size() - n_test, all.size())
                         : all.Slice(0, all.size());
  for (const auto& r : raw.trajectories.records) {
    data.vae_samples.push_back(space.Normalize(r.theta));
  }
  return data;
}

std::vector<std::string> RawPaths(const ExperimentConfig& config,
                                  const std::string& dir) {
  const std::string hash = Hex(Fnv1a64(DataKey(config).dump()));
  const fs::path base(dir);
  if (config.simulator == kPush) {
    return {(base / ("push-train-" + hash + ".csv")).string(),
            (base / ("push-test-" + hash + ".csv")).string()};
  }
  return {(base / ("structure-trajectories-" + hash + ".jsonl")).string()};
}

void SaveRaw(const ExperimentConfig& config, const RawData& raw,
             const std::vector<std::string>& paths) {
  for (const auto& p : paths) EnsureParent(p);
  if (config.simulator == kPush) {
    WritePushCsv(paths[0], raw.push.train);
    WritePushCsv(paths[1], raw.push.test);
  } else {
    raw.trajectories.Save(paths[0]);
  }
}

RawData LoadRaw(const ExperimentConfig& config,
                const std::vector<std::string>& paths) {
  RawData raw;
  if (config.simulator == kPush) {
    raw.push.train = ReadPushCsv(paths[0]);
    raw.push.test = ReadPushCsv(paths[1]);
  } else {
    raw.trajectories = TrajectoryDataset::Load(paths[0]);
  }
  return raw;
}

bool AllExist(const std::vector<std::string>& paths) {
  return std::all_of(paths.begin(), paths.end(),
                     [](const std::string& p) { return fs::exists(p); });
}

}  // namespace

std::vector<std::string> GenerateData(const ExperimentConfig& config,
                                      const std::string& dir,
                                      std::ostream* log) {
  config.Validate();
  const auto paths = RawPaths(config, dir);
  Log(log, "generating " + config.simulator + " training data");
  SaveRaw(config, GenerateRaw(config), paths);
  for (const auto& p : paths) Log(log, "wrote " + p);
  return paths;
}

TrainingData PrepareTrainingData(const ExperimentConfig& config,
                                 std::ostream* log) {
  const auto paths = RawPaths(config, config.ResolvedCacheDir());
  if (AllExist(paths)) {
    Log(log, "loading cached training data " + paths.front());
    return FromRaw(config, LoadRaw(config, paths));
  }
  Log(log, "generating " + config.simulator + " training data");
  const RawData raw = GenerateRaw(config);
  SaveRaw(config, raw, paths);
  return FromRaw(config, raw);
}

DynamicsNet PrepareDynamics(const ExperimentConfig& config, std::ostream* log) {
  if (!config.dynamics_model.empty()) {
    return DynamicsNet::FromJson(LoadJson(config.dynamics_model));
  }
  const std::string path = CachePath(config, "dynamics", DynamicsKey(config), ".json");
  if (fs::exists(path)) {
    Log(log, "loading cached dynamics network " + path);
    return DynamicsNet::FromJson(LoadJson(path));
  }
  const TrainingData data = PrepareTrainingData(config, log);
  Log(log, "training dynamics network on " + std::to_string(data.train.size()) +
               " samples");
  DynamicsReport report;
  const DynamicsNet dyn =
      TrainDynamics(data.train, config.training.dynamics_hidden,
                    config.training.dynamics_train, &data.test, &report);
  std::ostringstream msg;
  msg << "dynamics network: train loss " << report.train.epoch_loss.back()
      << ", held-out mse " << report.test_mse << ", median relative error "
      << report.median_relative_error;
  Log(log, msg.str());
  EnsureParent(path);
  SaveJson(path, dyn.ToJson());
  return dyn;
}

VaeModel PrepareVae(const ExperimentConfig& config, std::ostream* log) {
  if (!config.vae_model.empty()) {
    return VaeModel::FromJson(LoadJson(config.vae_model));
  }
  const nlohmann::json key = {{"data", DataKey(config)},
                              {"latent_dim", config.latent_dim},
                              {"hidden", config.training.vae_hidden},
                              {"train", TrainConfigJson(config.training.vae_train)}};
  const std::string path = CachePath(config, "vae", key, ".json");
  if (fs::exists(path)) {
    Log(log, "loading cached VAE " + path);
    return VaeModel::FromJson(LoadJson(path));
  }
  const TrainingData data = PrepareTrainingData(config, log);
  VaeConfig vc;
  vc.latent_dim = config.latent_dim;
  vc.hidden = config.training.vae_hidden;
  vc.train = config.training.vae_train;
  Log(log, "training VAE on " + std::to_string(data.vae_samples.size()) +
               " parameter samples");
  VaeTrainReport report;
  const VaeModel vae = TrainVae(data.vae_samples, vc, &report);
  std::ostringstream msg;
  msg << "VAE: loss " << report.initial_loss << " -> "
      << report.epoch_loss.back() << ", min batch KL " << report.min_batch_kl;
  Log(log, msg.str());
  EnsureParent(path);
  SaveJson(path, vae.ToJson());
  return vae;
}

DynCoupledAe PrepareAe(const ExperimentConfig& config, std::ostream* log) {
  if (!config.ae_model.empty()) {
    return DynCoupledAe::FromJson(LoadJson(config.ae_model));
  }
  const TrainingSettings& t = config.training;
  const nlohmann::json key = {{"dynamics", DynamicsKey(config)},
                              {"dynamics_file", config.dynamics_model},
                              {"latent_dim", config.latent_dim},
                              {"encoder", t.ae_encoder_hidden},
                              {"decoder", t.ae_decoder_hidden},
                              {"box", t.ae_box},
                              {"padding", t.ae_box_padding},
                              {"half_width", t.ae_box_half_width},
                              {"train", TrainConfigJson(t.ae_train)}};
  const std::string path = CachePath(config, "ae-dyn", key, ".json");
  if (fs::exists(path)) {
    Log(log, "loading cached dynamics-coupled AE " + path);
    return DynCoupledAe::FromJson(LoadJson(path));
  }
  const DynamicsNet dyn = PrepareDynamics(config, log);
  const TrainingData data = PrepareTrainingData(config, log);
  AeConfig ac;
  ac.latent_dim = config.latent_dim;
  ac.encoder_hidden = t.ae_encoder_hidden;
  ac.decoder_hidden = t.ae_decoder_hidden;
  ac.train = t.ae_train;
  ac.box = AeBoxFromString(t.ae_box);
  ac.box_padding = t.ae_box_padding;
  ac.box_half_width = t.ae_box_half_width;
  Log(log, "training dynamics-coupled AE");
  AeTrainReport report;
  const DynCoupledAe ae = TrainDynCoupledAe(data.train, dyn, ac, &report);
  std::ostringstream msg;
  msg << "AE: loss " << report.initial_loss << " -> "
      << report.epoch_loss.back() << ", dynamics weights "
      << (report.dynamics_checksum_before == report.dynamics_checksum_after
              ? "unchanged"
              : "CHANGED");
  Log(log, msg.str());
  EnsureParent(path);
  SaveJson(path, ae.ToJson());
  return ae;
}

LatentModels PrepareLatentModels(const ExperimentConfig& config,
                                 std::ostream* log) {
  LatentModels models;
  const auto uses = [&](const std::string& m) {
    return std::find(config.methods.begin(), config.methods.end(), m) !=
           config.methods.end();
  };
  if (uses("bo-vae")) models.vae = PrepareVae(config, log);
  if (uses("bo-ae-dyn")) models.ae = PrepareAe(config, log);
  return models;
}

// ---------------------------------------------------------------------------
// Runs.

std::vector<ResultRow> RunMethod(const ExperimentConfig& config,
                                 const Benchmark& bench,
                                 const std::string& method, std::uint64_t seed,
                                 const LatentModels& models) {
  const ErrorFunction error = [&bench](const ParamVector& theta) {
    return bench.ObservedError(theta);
  };
  const BudgetSpec budget{config.budget, std::nullopt};
  const ParameterSpace& space = bench.space();
  BoOptions options;
  options.grid_res = config.grid_res;
  const int d = config.latent_dim;

  IdentificationResult result;
  if (method == "random") {
    result = RandomSearch(error, space, budget, seed);
  } else if (method == "bo-full") {
    result = Identify(error, space, nullptr, budget, seed, options);
  } else if (method == "bo-rembo") {
    const RandomEmbedding map =
        MakeEmbedding(space, d, MixSeed(seed, kEmbeddingStream));
    options.grid_res = LatentGridRes(config, d);
    result = Identify(error, space, &map, budget, seed, options);
  } else if (method == "bo-vae") {
    if (!models.vae) throw std::invalid_argument("bo-vae requires a VAE model");
    const VaeDecoderMap map(*models.vae, space);
    options.grid_res = LatentGridRes(config, map.latent_dim());
    result = Identify(error, space, &map, budget, seed, options);
  } else if (method == "bo-ae-dyn") {
    if (!models.ae) {
      throw std::invalid_argument("bo-ae-dyn requires a dynamics-coupled AE");
    }
    const AeDecoderMap map(*models.ae, space);
    options.grid_res = LatentGridRes(config, map.latent_dim());
    result = Identify(error, space, &map, budget, seed, options);
  } else {
    throw std::invalid_argument("unknown method '" + method + "'");
  }

  std::vector<ResultRow> rows;
  double best = std::numeric_limits<double>::infinity();
  const ParamVector* best_theta = nullptr;
  double best_test = std::numeric_limits<double>::infinity();
  Vector best_relerr = Vector::Constant(space.dim(),
                                        std::numeric_limits<double>::infinity());
  for (const auto& e : result.history) {
    if (best_theta == nullptr || e.error < best) {
      best = std::min(best, e.error);
      best_theta = &e.theta;
      best_test = bench.TestError(e.theta);
      best_relerr = bench.RelativeErrorPct(e.theta);
    }
    ResultRow row;
    row.method = method;
    row.seed = seed;
    row.iteration = e.iteration + 1;
    row.error = e.error;
    row.best_error_so_far = best;
    row.best_test_error = best_test;
    row.relerr_pct = best_relerr;
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Aggregation.

double Quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("Quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("Quantile: q out of range");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  if (lo == hi) return values[lo];
  const double w = pos - static_cast<double>(lo);
  if (std::isinf(values[lo]) || std::isinf(values[hi])) {
    return w < 0.5 ? values[lo] : values[hi];
  }
  return values[lo] + w * (values[hi] - values[lo]);
}

std::vector<FinalRow> FinalErrors(const std::vector<ResultRow>& rows) {
  std::vector<FinalRow> out;
  for (const auto& [method, runs] : GroupRuns(rows)) {
    for (const auto& [seed, run] : runs) {
      const ResultRow& last = *run.back();
      out.push_back({method.second, seed, last.best_error_so_far,
                     last.best_test_error});
    }
  }
  return out;
}

std::vector<SummaryRow> Summarize(const std::vector<ResultRow>& rows) {
  std::map<std::pair<int, std::string>, std::vector<const FinalRow*>> by_method;
  const auto finals = FinalErrors(rows);
  for (const auto& f : finals) by_method[{MethodIndex(f.method), f.method}].push_back(&f);
  std::vector<SummaryRow> out;
  for (const auto& [method, list] : by_method) {
    std::vector<double> train, test;
    for (const auto* f : list) {
      train.push_back(f->final_error);
      test.push_back(f->final_test_error);
    }
    out.push_back({method.second, static_cast<int>(list.size()),
                   Quantile(train, 0.5), Quantile(test, 0.5),
                   Quantile(test, 0.25), Quantile(test, 0.75)});
  }
  return out;
}

std::vector<ParamErrorRow> ParamErrorTable(
    const std::vector<ResultRow>& rows,
    const std::vector<std::string>& param_names) {
  std::vector<ParamErrorRow> out;
  for (const auto& [method, runs] : GroupRuns(rows)) {
    for (std::size_t p = 0; p < param_names.size(); ++p) {
      double sum = 0.0;
      for (const auto& [seed, run] : runs) {
        sum += run.back()->relerr_pct[static_cast<Eigen::Index>(p)];
      }
      const double n = static_cast<double>(runs.size());
      const double mean = sum / n;
      double var = 0.0;
      for (const auto& [seed, run] : runs) {
        const double v = run.back()->relerr_pct[static_cast<Eigen::Index>(p)] - mean;
        var += v * v;
      }
      out.push_back({method.second, param_names[p], mean, std::sqrt(var / n)});
    }
  }
  return out;
}

std::vector<CurveRow> EmitCurves(const std::vector<ResultRow>& rows) {
  std::vector<CurveRow> out;
  for (const auto& [method, runs] : GroupRuns(rows)) {
    std::map<int, std::vector<double>> by_iteration;
    for (const auto& [seed, run] : runs) {
      for (const ResultRow* r : run) {
        by_iteration[r->iteration].push_back(r->best_error_so_far);
      }
    }
    for (const auto& [iteration, values] : by_iteration) {
      out.push_back({method.second, iteration, Quantile(values, 0.5),
                     Quantile(values, 0.25), Quantile(values, 0.75)});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Files.

void WriteResultCsv(const std::string& path, const nlohmann::json& config,
                    const std::vector<std::string>& param_names,
                    const std::vector<ResultRow>& rows) {
  std::ofstream out = OpenCsv(path, config);
  out << "method,seed,iteration,error,best_error_so_far,best_test_error";
  for (const auto& n : param_names) out << ",relerr_" << n;
  out << '\n';
  for (const auto& r : rows) {
    out << r.method << ',' << r.seed << ',' << r.iteration << ','
        << FormatDouble(r.error) << ',' << FormatDouble(r.best_error_so_far)
        << ',' << FormatDouble(r.best_test_error);
    for (int i = 0; i < r.relerr_pct.size(); ++i) {
      out << ',' << FormatDouble(r.relerr_pct[i]);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::vector<ResultRow> ReadResultCsv(const std::string& path,
                                     std::vector<std::string>* param_names) {
  const CsvTable t = ReadCsv(path);
  const int c_method = t.Column("method"), c_seed = t.Column("seed"),
            c_iter = t.Column("iteration"), c_err = t.Column("error"),
            c_best = t.Column("best_error_so_far"),
            c_test = t.Column("best_test_error");
  std::vector<int> rel_cols;
  std::vector<std::string> names;
  const std::string prefix = "relerr_";
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i].rfind(prefix, 0) == 0) {
      rel_cols.push_back(static_cast<int>(i));
      names.push_back(t.header[i].substr(prefix.size()));
    }
  }
  if (param_names != nullptr) *param_names = names;
  std::vector<ResultRow> rows;
  for (const auto& cells : t.rows) {
    ResultRow r;
    r.method = cells.at(c_method);
    r.seed = std::stoull(cells.at(c_seed));
    r.iteration = std::stoi(cells.at(c_iter));
    r.error = ParseDouble(cells.at(c_err));
    r.best_error_so_far = ParseDouble(cells.at(c_best));
    r.best_test_error = ParseDouble(cells.at(c_test));
    r.relerr_pct.resize(static_cast<Eigen::Index>(rel_cols.size()));
    for (std::size_t k = 0; k < rel_cols.size(); ++k) {
      r.relerr_pct[static_cast<Eigen::Index>(k)] = ParseDouble(cells.at(rel_cols[k]));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void WriteReport(const std::string& dir, const nlohmann::json& config,
                 const std::vector<std::string>& param_names,
                 const std::vector<ResultRow>& rows) {
  const fs::path base(dir);
  {
    std::ofstream out = OpenCsv((base / "final_errors.csv").string(), config);
    out << "method,seed,final_error,final_test_error\n";
    for (const auto& f : FinalErrors(rows)) {
      out << f.method << ',' << f.seed << ',' << FormatDouble(f.final_error)
          << ',' << FormatDouble(f.final_test_error) << '\n';
    }
  }
  {
    std::ofstream out = OpenCsv((base / "summary.csv").string(), config);
    out << "method,runs,median_final_error,median_final_test_error,"
           "q25_final_test_error,q75_final_test_error\n";
    for (const auto& s : Summarize(rows)) {
      out << s.method << ',' << s.runs << ',' << FormatDouble(s.median_final_error)
          << ',' << FormatDouble(s.median_final_test_error) << ','
          << FormatDouble(s.q25_final_test_error) << ','
          << FormatDouble(s.q75_final_test_error) << '\n';
    }
  }
  {
    std::ofstream out = OpenCsv((base / "param_errors.csv").string(), config);
    out << "method,parameter,mean_relerr_pct,std_relerr_pct\n";
    for (const auto& p : ParamErrorTable(rows, param_names)) {
      out << p.method << ',' << p.parameter << ',' << FormatDouble(p.mean_pct)
          << ',' << FormatDouble(p.std_pct) << '\n';
    }
  }
  {
    std::ofstream out = OpenCsv((base / "curves.csv").string(), config);
    out << "method,iteration,median_best_error,q25_best_error,q75_best_error\n";
    for (const auto& c : EmitCurves(rows)) {
      out << c.method << ',' << c.iteration << ',' << FormatDouble(c.median)
          << ',' << FormatDouble(c.q25) << ',' << FormatDouble(c.q75) << '\n';
    }
  }
}

std::vector<SummaryRow> ReportFromDirectory(const std::string& dir) {
  std::vector<ResultRow> rows;
  std::vector<std::string> names;
  bool found = false;
  for (const auto& method : MethodIds()) {
    const fs::path path = fs::path(dir) / (method + ".csv");
    if (!fs::exists(path)) continue;
    found = true;
    std::vector<std::string> file_names;
    auto part = ReadResultCsv(path.string(), &file_names);
    if (!names.empty() && file_names != names) {
      throw std::runtime_error("result files disagree on parameter names");
    }
    names = file_names;
    rows.insert(rows.end(), part.begin(), part.end());
  }
  if (!found) throw std::runtime_error("no result files in " + dir);
  nlohmann::json config = nlohmann::json::object();
  const fs::path config_path = fs::path(dir) / "config.json";
  if (fs::exists(config_path)) config = LoadJson(config_path.string());
  WriteReport(dir, config, names, rows);
  return Summarize(rows);
}

ExperimentOutcome RunExperiment(const ExperimentConfig& config,
                                std::ostream* log) {
  config.Validate();
  for (const auto& [path, what] :
       {std::pair{config.dynamics_model, "dynamics model"},
        std::pair{config.vae_model, "VAE model"},
        std::pair{config.ae_model, "AE model"}}) {
    if (!path.empty() && !fs::exists(path)) {
      throw std::runtime_error(std::string("missing ") + what + " file: " + path);
    }
  }
  fs::create_directories(config.out_dir);
  const nlohmann::json config_json = config.ToJson();
  SaveJson((fs::path(config.out_dir) / "config.json").string(), config_json);

  const Benchmark bench(config);
  const LatentModels models = PrepareLatentModels(config, log);
  ExperimentOutcome outcome;
  outcome.param_names = bench.space().names();
  for (const auto& method : config.methods) {
    std::vector<ResultRow> method_rows;
    for (const auto seed : config.seeds) {
      auto rows = RunMethod(config, bench, method, seed, models);
      std::ostringstream msg;
      msg << method << " seed " << seed << ": best error "
          << rows.back().best_error_so_far << ", test error "
          << rows.back().best_test_error;
      Log(log, msg.str());
      method_rows.insert(method_rows.end(), rows.begin(), rows.end());
    }
    WriteResultCsv((fs::path(config.out_dir) / (method + ".csv")).string(),
                   config_json, outcome.param_names, method_rows);
    outcome.rows.insert(outcome.rows.end(), method_rows.begin(),
                        method_rows.end());
  }
  WriteReport(config.out_dir, config_json, outcome.param_names, outcome.rows);
  outcome.summary = Summarize(outcome.rows);
  return outcome;
}

}  // namespace modelid
