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

#include "modelid/rembo.h"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>
#include <utility>

namespace modelid {
namespace {

ParameterSpace LatentBox(int d, int grid_res) {
  std::vector<std::string> names;
  for (int i = 0; i < d; ++i) names.push_back("omega" + std::to_string(i));
  const double half = std::sqrt(static_cast<double>(d));
  return ParameterSpace(std::move(names), Vector::Constant(d, -half),
                        Vector::Constant(d, half), grid_res);
}

}  // namespace

RandomEmbedding::RandomEmbedding(Eigen::MatrixXd matrix,
                                 ParameterSpace target_space, int grid_res)
    : matrix_(std::move(matrix)),
      target_(std::move(target_space)),
      latent_box_(LatentBox(static_cast<int>(matrix_.cols()), grid_res)) {
  if (matrix_.rows() != target_.dim()) {
    throw std::invalid_argument(
        "RandomEmbedding: matrix rows must equal the parameter dimension");
  }
  if (matrix_.cols() < 1 || matrix_.cols() >= matrix_.rows()) {
    throw std::invalid_argument("RandomEmbedding: need 1 <= d < D");
  }
}

Vector RandomEmbedding::PreClip(const Vector& omega) const {
  return (Vector::Constant(matrix_.rows(), 0.5) + matrix_ * omega).eval();
}

ParamVector RandomEmbedding::Decode(const Vector& omega) const {
  CheckLatentInBox(latent_box_, omega);
  return ClipAndDenormalize(target_, PreClip(omega));
}

nlohmann::json RandomEmbedding::ToJson() const {
  std::vector<double> flat;
  for (int r = 0; r < matrix_.rows(); ++r) {
    for (int c = 0; c < matrix_.cols(); ++c) flat.push_back(matrix_(r, c));
  }
  return {{"format", "modelid-rembo"},
          {"version", 1},
          {"rows", matrix_.rows()},
          {"cols", matrix_.cols()},
          {"matrix_row_major", flat},
          {"target_space", target_.ToJson()},
          {"grid_res", latent_box_.grid_res()}};
}

RandomEmbedding RandomEmbedding::FromJson(const nlohmann::json& j) {
  if (j.at("format") != "modelid-rembo" || j.at("version") != 1) {
    throw std::runtime_error("RandomEmbedding: unsupported file format");
  }
  const int rows = j.at("rows").get<int>();
  const int cols = j.at("cols").get<int>();
  const auto flat = j.at("matrix_row_major").get<std::vector<double>>();
  if (static_cast<int>(flat.size()) != rows * cols) {
    throw std::runtime_error("RandomEmbedding: matrix size mismatch");
  }
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = flat[r * cols + c];
  }
  return RandomEmbedding(std::move(m),
                         ParameterSpace::FromJson(j.at("target_space")),
                         j.value("grid_res", 100));
}

void RandomEmbedding::Save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << ToJson().dump() << '\n';
}

RandomEmbedding RandomEmbedding::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return FromJson(nlohmann::json::parse(in));
}

RandomEmbedding MakeEmbedding(const ParameterSpace& space, int latent_dim,
                              std::uint64_t seed) {
  if (latent_dim < 1 || latent_dim >= space.dim()) {
    throw std::invalid_argument("MakeEmbedding: need 1 <= d < D");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(space.dim(), latent_dim);
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) m(r, c) = normal(rng);
  }
  return RandomEmbedding(std::move(m), space, space.grid_res());
}

}  // namespace modelid
