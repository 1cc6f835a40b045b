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

// Command-line front end:
//   modelid gen-data  --sim push|structure [--out DIR] [--config FILE]
//   modelid train     vae|dynamics|ae-dyn --sim ... [--latent-dim D] [--out DIR]
//   modelid identify  --sim ... --method M [--budget N] [--seeds 0..9] [--out DIR]
//   modelid bench     --sim ... [--method a,b] [--budget N] [--seeds ...] [--out DIR]
//   modelid report    --out DIR

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "modelid/bench.h"

namespace {

namespace fs = std::filesystem;

struct CommonFlags {
  std::string sim;
  std::string method;
  std::optional<int> latent_dim;
  std::optional<int> budget;
  std::string seeds;
  std::string config;
  std::string out;
};

void AddCommon(CLI::App* app, CommonFlags* f, bool with_method) {
  app->add_option("--sim", f->sim, "Simulator id (push | structure)");
  if (with_method) {
    app->add_option("--method", f->method,
                    "Method id(s), comma separated (random, bo-full, "
                    "bo-rembo, bo-vae, bo-ae-dyn)");
  }
  app->add_option("--latent-dim", f->latent_dim, "Latent dimension");
  app->add_option("--budget", f->budget, "Evaluations per run");
  app->add_option("--seeds", f->seeds, "Seeds: 'a..b' range or comma list");
  app->add_option("--config", f->config, "Experiment config JSON file");
  app->add_option("--out", f->out, "Output directory");
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::uint64_t> ParseSeeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& part : SplitList(text)) {
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      seeds.push_back(std::stoull(part));
      continue;
    }
    const std::uint64_t lo = std::stoull(part.substr(0, dots));
    const std::uint64_t hi = std::stoull(part.substr(dots + 2));
    if (hi < lo) throw std::invalid_argument("bad seed range " + part);
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw std::invalid_argument("no seeds in '" + text + "'");
  return seeds;
}

modelid::ExperimentConfig ResolveConfig(const CommonFlags& f) {
  nlohmann::json j = nlohmann::json::object();
  if (!f.config.empty()) j = modelid::LoadJson(f.config);
  if (!f.sim.empty()) {
    if (j.contains("simulator") && j["simulator"] != f.sim) {
      throw std::invalid_argument("--sim disagrees with the config file");
    }
    j["simulator"] = f.sim;
  }
  if (!j.contains("simulator")) {
    throw std::invalid_argument("--sim or a config file is required");
  }
  if (!f.method.empty()) j["methods"] = SplitList(f.method);
  if (f.latent_dim) j["latent_dim"] = *f.latent_dim;
  if (f.budget) j["budget"] = *f.budget;
  if (!f.seeds.empty()) j["seeds"] = ParseSeeds(f.seeds);
  if (!f.out.empty()) j["out_dir"] = f.out;
  return modelid::ExperimentConfig::FromJson(j);
}

void PrintSummary(const std::vector<modelid::SummaryRow>& summary) {
  std::cout << "method            runs  median_error  median_test_error\n";
  for (const auto& s : summary) {
    std::cout << std::left << std::setw(18) << s.method << std::setw(6)
              << s.runs << std::setw(14) << s.median_final_error
              << s.median_final_test_error << '\n';
  }
}

int GenData(const CommonFlags& f) {
  const auto config = ResolveConfig(f);
  const std::string dir = f.out.empty() ? "data" : f.out;
  modelid::GenerateData(config, dir, &std::cerr);
  return 0;
}

int TrainModel(const std::string& kind, const CommonFlags& f) {
  const auto config = ResolveConfig(f);
  fs::create_directories(config.out_dir);
  const fs::path out(config.out_dir);
  std::string path;
  if (kind == "dynamics") {
    const auto dyn = modelid::PrepareDynamics(config, &std::cerr);
    path = (out / "dynamics.json").string();
    modelid::SaveJson(path, dyn.ToJson());
  } else if (kind == "vae") {
    const auto vae = modelid::PrepareVae(config, &std::cerr);
    path = (out / "vae.json").string();
    modelid::SaveJson(path, vae.ToJson());
  } else if (kind == "ae-dyn") {
    const auto ae = modelid::PrepareAe(config, &std::cerr);
    path = (out / "ae-dyn.json").string();
    modelid::SaveJson(path, ae.ToJson());
  } else {
    throw std::invalid_argument("unknown model kind '" + kind +
                                "' (expected vae, dynamics or ae-dyn)");
  }
  std::cerr << "wrote " << path << '\n';
  return 0;
}

int Identify(const CommonFlags& f) {
  auto config = ResolveConfig(f);
  if (f.method.empty() && f.config.empty()) {
    throw std::invalid_argument("identify requires --method");
  }
  if (f.seeds.empty() && f.config.empty()) config.seeds = {0};
  const auto outcome = modelid::RunExperiment(config, &std::cerr);
  PrintSummary(outcome.summary);
  return 0;
}

int Bench(const CommonFlags& f) {
  const auto config = ResolveConfig(f);
  const auto outcome = modelid::RunExperiment(config, &std::cerr);
  PrintSummary(outcome.summary);
  return 0;
}

int Report(const CommonFlags& f) {
  if (f.out.empty()) throw std::invalid_argument("report requires --out DIR");
  PrintSummary(modelid::ReportFromDirectory(f.out));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Black-box model identification toolkit"};
  app.require_subcommand(1);

  CommonFlags gen_flags, train_flags, identify_flags, bench_flags, report_flags;
  std::string train_kind;

  auto* gen = app.add_subcommand("gen-data", "Generate training datasets");
  AddCommon(gen, &gen_flags, false);
  auto* train = app.add_subcommand("train", "Train a learned latent map");
  train->add_option("kind", train_kind, "vae | dynamics | ae-dyn")->required();
  AddCommon(train, &train_flags, false);
  auto* identify = app.add_subcommand("identify", "Run one identification method");
  AddCommon(identify, &identify_flags, true);
  auto* bench = app.add_subcommand("bench", "Run the full method comparison");
  AddCommon(bench, &bench_flags, true);
  auto* report = app.add_subcommand("report", "Rebuild tables and curves");
  report->add_option("--out", report_flags.out, "Result directory")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) return GenData(gen_flags);
    if (*train) return TrainModel(train_kind, train_flags);
    if (*identify) return Identify(identify_flags);
    if (*bench) return Bench(bench_flags);
    if (*report) return Report(report_flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
