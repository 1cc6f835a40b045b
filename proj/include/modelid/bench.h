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

// Experiment orchestration: compares random search, full-dimensional BO,
// REMBO, BO through a VAE decoder and BO through a dynamics-coupled
// autoencoder on a benchmark simulator.
//
// Ground-truth parameters live only in this layer. They generate the
// observed and held-out trajectories and score the identified parameters;
// the optimizers only ever see an error function over observed data.
//
// Output files (all CSV, documented headers):
//   <method>.csv        one row per (seed, iteration):
//                       method,seed,iteration,error,best_error_so_far,
//                       best_test_error,relerr_<param>...
//   final_errors.csv    method,seed,final_error,final_test_error
//   summary.csv         method,runs,median_final_error,
//                       median_final_test_error,q25_final_test_error,
//                       q75_final_test_error
//   param_errors.csv    method,parameter,mean_relerr_pct,std_relerr_pct
//                       (population std over seeds)
//   curves.csv          method,iteration,median_best_error,q25_best_error,
//                       q75_best_error
//   config.json         the resolved experiment configuration
// Every CSV starts with "# generated <UTC time>" followed by
// "# config <json>"; everything after the first line is reproducible.

#ifndef MODELID_BENCH_H_
#define MODELID_BENCH_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "modelid/bo.h"
#include "modelid/dataset.h"
#include "modelid/latent.h"
#include "modelid/simulator.h"

namespace modelid {

// Method ids in canonical order.
const std::vector<std::string>& MethodIds();
bool IsLatentMethod(const std::string& method);

struct TrainingSettings {
  // Pushing samples (m, mu, F, t).
  int push_train = 20000;
  int push_test = 2000;
  // Structure trajectories for the latent models.
  int trajectories = 1200;
  int trajectory_horizon = 100;
  // Transitions kept per trajectory for the dynamics/AE datasets.
  int transitions_per_trajectory = 20;
  // Fraction of structure transitions held out for the dynamics report.
  double test_fraction = 0.1;

  std::vector<int> dynamics_hidden;
  TrainConfig dynamics_train;
  int vae_hidden = 400;
  TrainConfig vae_train;
  std::vector<int> ae_encoder_hidden;
  std::vector<int> ae_decoder_hidden;
  TrainConfig ae_train;
  // "empirical" (padded code range) or "symmetric" ([-h, h]^d).
  std::string ae_box = "empirical";
  double ae_box_padding = 0.0;
  double ae_box_half_width = 3.0;

  nlohmann::json ToJson() const;
  // Missing keys keep the values of `defaults`.
  static TrainingSettings FromJson(const nlohmann::json& j,
                                   const TrainingSettings& defaults);
};

struct ExperimentConfig {
  std::string simulator = "push";  // push | structure
  std::vector<std::string> methods;
  int latent_dim = 1;
  int budget = 50;
  std::vector<std::uint64_t> seeds;
  int observed_trajectories = 5;
  int test_trajectories = 5;
  // Control steps per observed/test trajectory (structure only).
  int horizon = 100;
  // Seed of the observed/test trajectories and of the training data.
  std::uint64_t data_seed = 1;
  // Grid points per dimension of the full parameter space.
  int grid_res = 100;
  // Target candidate-grid size for latent boxes: a d-dimensional latent
  // box gets round(latent_grid_points^(1/d)) points per axis.
  int latent_grid_points = 10000;
  std::string out_dir = "results";
  // Defaults to <out_dir>/cache.
  std::string cache_dir;
  // Optional explicit model files; trained and cached when empty.
  std::string dynamics_model;
  std::string vae_model;
  std::string ae_model;
  TrainingSettings training;

  // Per-simulator defaults: latent dim, architectures, epochs.
  static ExperimentConfig Defaults(const std::string& simulator);
  nlohmann::json ToJson() const;
  // Keys absent from j take Defaults(j["simulator"]) values.
  static ExperimentConfig FromJson(const nlohmann::json& j);
  static ExperimentConfig LoadFile(const std::string& path);
  void Validate() const;
  std::string ResolvedCacheDir() const;
};

// Simulator, ground truth and trajectories of one benchmark.
class Benchmark {
 public:
  explicit Benchmark(const ExperimentConfig& config);

  const BlackBoxSimulator& sim() const { return *sim_; }
  const ParameterSpace& space() const { return sim_->param_space(); }
  const std::vector<Trajectory>& observed() const { return observed_; }
  const std::vector<Trajectory>& test() const { return test_; }

  // Error over the observed trajectories (the optimizer's objective).
  double ObservedError(const ParamVector& theta) const;
  // Error over held-out trajectories (reporting only).
  double TestError(const ParamVector& theta) const;
  // |theta_i - truth_i| / truth_i * 100 (reporting only).
  Vector RelativeErrorPct(const ParamVector& theta) const;

 private:
  std::unique_ptr<BlackBoxSimulator> sim_;
  ParamVector truth_;
  std::vector<Trajectory> observed_;
  std::vector<Trajectory> test_;
};

std::unique_ptr<BlackBoxSimulator> MakeSimulator(const std::string& id,
                                                 int grid_res = 100);
ParamVector DefaultTruth(const std::string& simulator);

// Observed-style trajectories of the benchmark generated under `theta`.
std::vector<Trajectory> BenchmarkTrajectories(const BlackBoxSimulator& sim,
                                              const ParamVector& theta,
                                              int count, int horizon,
                                              std::uint64_t seed);

// Training data for the learned maps.
struct TrainingData {
  DynamicsDataset train;
  DynamicsDataset test;
  // Unit-cube parameter samples for the VAE.
  std::vector<Vector> vae_samples;
};

// Generates (or loads from the cache) the training data of a benchmark.
// Structure trajectories are cached as a JSONL dataset, pushing samples as
// train/test CSVs; file names are content addressed.
TrainingData PrepareTrainingData(const ExperimentConfig& config,
                                 std::ostream* log = nullptr);

// Writes the raw training data files into `dir` and returns their paths.
std::vector<std::string> GenerateData(const ExperimentConfig& config,
                                      const std::string& dir,
                                      std::ostream* log = nullptr);

// Trained models, loaded from explicit paths or the cache, trained and
// cached otherwise.
DynamicsNet PrepareDynamics(const ExperimentConfig& config,
                            std::ostream* log = nullptr);
VaeModel PrepareVae(const ExperimentConfig& config,
                    std::ostream* log = nullptr);
DynCoupledAe PrepareAe(const ExperimentConfig& config,
                       std::ostream* log = nullptr);

// Learned maps needed by the configured methods.
struct LatentModels {
  std::optional<VaeModel> vae;
  std::optional<DynCoupledAe> ae;
};
LatentModels PrepareLatentModels(const ExperimentConfig& config,
                                 std::ostream* log = nullptr);

struct ResultRow {
  std::string method;
  std::uint64_t seed = 0;
  int iteration = 0;
  double error = 0.0;
  double best_error_so_far = 0.0;
  double best_test_error = 0.0;
  Vector relerr_pct;
};

// One identification run; rows are 1-based iterations. Latent methods
// require the corresponding model in `models`.
std::vector<ResultRow> RunMethod(const ExperimentConfig& config,
                                 const Benchmark& bench,
                                 const std::string& method, std::uint64_t seed,
                                 const LatentModels& models);

struct ParamErrorRow {
  std::string method;
  std::string parameter;
  double mean_pct = 0.0;
  double std_pct = 0.0;  // population
};

struct CurveRow {
  std::string method;
  int iteration = 0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

struct FinalRow {
  std::string method;
  std::uint64_t seed = 0;
  double final_error = 0.0;
  double final_test_error = 0.0;
};

struct SummaryRow {
  std::string method;
  int runs = 0;
  double median_final_error = 0.0;
  double median_final_test_error = 0.0;
  double q25_final_test_error = 0.0;
  double q75_final_test_error = 0.0;
};

// Linear-interpolation quantile (q in [0, 1]) of a non-empty sample.
double Quantile(std::vector<double> values, double q);

// Last row of every (method, seed) run.
std::vector<FinalRow> FinalErrors(const std::vector<ResultRow>& rows);
std::vector<SummaryRow> Summarize(const std::vector<ResultRow>& rows);
std::vector<ParamErrorRow> ParamErrorTable(
    const std::vector<ResultRow>& rows,
    const std::vector<std::string>& param_names);
std::vector<CurveRow> EmitCurves(const std::vector<ResultRow>& rows);

void WriteResultCsv(const std::string& path, const nlohmann::json& config,
                    const std::vector<std::string>& param_names,
                    const std::vector<ResultRow>& rows);
// Returns the rows and fills param_names from the relerr_ columns.
std::vector<ResultRow> ReadResultCsv(const std::string& path,
                                     std::vector<std::string>* param_names);

// Writes final_errors, summary, param_errors and curves CSVs into dir.
void WriteReport(const std::string& dir, const nlohmann::json& config,
                 const std::vector<std::string>& param_names,
                 const std::vector<ResultRow>& rows);
// Rebuilds the report from the <method>.csv files found in dir.
std::vector<SummaryRow> ReportFromDirectory(const std::string& dir);

struct ExperimentOutcome {
  std::vector<ResultRow> rows;
  std::vector<SummaryRow> summary;
  std::vector<std::string> param_names;
};

// Runs every configured method for every seed and writes all result files.
// Missing explicit model files fail before any computation.
ExperimentOutcome RunExperiment(const ExperimentConfig& config,
                                std::ostream* log = nullptr);

}  // namespace modelid

#endif  // MODELID_BENCH_H_
