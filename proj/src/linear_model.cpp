/*
 * Copyright 2026 The acecefr Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "acecefr/linear_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "acecefr/error.hpp"
#include "acecefr/kernels.hpp"
#include "json.hpp"

namespace acecefr::linear_model {
namespace {

// Relative pivot below which a column is treated as collinear with the ones
// before it.
constexpr double kPivotTolerance = 1e-12;
constexpr int kRefinementRounds = 4;

// Cholesky factor of a symmetric m x m matrix, lower triangle, row-major.
// Returns false when a pivot falls below `relative_tol` times its diagonal.
bool Cholesky(const std::vector<double>& a, std::size_t m, std::vector<double>& l,
              double relative_tol) {
  l.assign(m * m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double d = a[j * m + j];
    for (std::size_t k = 0; k < j; ++k) d -= l[j * m + k] * l[j * m + k];
    if (!(d > relative_tol * a[j * m + j]) || d <= 0) return false;
    const double root = std::sqrt(d);
    l[j * m + j] = root;
    for (std::size_t i = j + 1; i < m; ++i) {
      double s = a[i * m + j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i * m + k] * l[j * m + k];
      l[i * m + j] = s / root;
    }
  }
  return true;
}

std::vector<double> CholeskySolve(const std::vector<double>& l, std::size_t m,
                                  const std::vector<double>& b) {
  std::vector<double> z(m);
  for (std::size_t i = 0; i < m; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i * m + k] * z[k];
    z[i] = s / l[i * m + i];
  }
  std::vector<double> x(m);
  for (std::size_t i = m; i-- > 0;) {
    double s = z[i];
    for (std::size_t k = i + 1; k < m; ++k) s -= l[k * m + i] * x[k];
    x[i] = s / l[i * m + i];
  }
  return x;
}

double ReadNumber(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw Error(ErrorCode::kMalformedModel, std::string("model lacks numeric '") + key + "'");
  }
  return j[key].get<double>();
}

}  // namespace

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

OlsSolution SolveOls(const Matrix& x, std::span<const double> y) {
  const std::size_t n = x.rows();
  const std::size_t m = x.cols();
  if (y.size() != n) {
    throw Error(ErrorCode::kLengthMismatch, "design has " + std::to_string(n) +
                                                " rows but " + std::to_string(y.size()) +
                                                " targets");
  }
  if (n < m + 1) {
    throw Error(ErrorCode::kInsufficientData,
                "need at least " + std::to_string(m + 1) + " samples, got " +
                    std::to_string(n));
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "non-finite target");
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  const double mean_y = kernels::Sum(y) * inv_n;
  std::vector<double> yc(y.begin(), y.end());
  for (double& v : yc) v -= mean_y;

  std::vector<std::vector<double>> cols(m);
  std::vector<double> means(m);
  for (std::size_t j = 0; j < m; ++j) {
    cols[j] = x.column(j);
    for (double v : cols[j]) {
      if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "non-finite feature");
    }
    means[j] = kernels::Sum(cols[j]) * inv_n;
    for (double& v : cols[j]) v -= means[j];
  }

  std::vector<double> gram(m * m);
  std::vector<double> rhs(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      gram[i * m + j] = gram[j * m + i] = kernels::Dot(cols[i], cols[j]);
    }
    rhs[i] = kernels::Dot(cols[i], yc);
  }

  OlsSolution sol;
  std::vector<double> l;
  std::vector<double> w;
  if (m == 0) {
    // Intercept-only fit.
  } else if (Cholesky(gram, m, l, kPivotTolerance)) {
    w = CholeskySolve(l, m, rhs);
  } else {
    sol.ridge_fallback = true;
    std::vector<double> penalized = gram;
    for (std::size_t j = 0; j < m; ++j) penalized[j * m + j] += kRidge;
    if (!Cholesky(penalized, m, l, 0.0)) {
      throw Error(ErrorCode::kNonFinite, "ridge-penalized normal equations are not positive definite");
    }
    w = CholeskySolve(l, m, rhs);
    for (int round = 0; round < kRefinementRounds; ++round) {
      std::vector<double> residual = rhs;
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) residual[i] -= gram[i * m + j] * w[j];
      }
      const auto step = CholeskySolve(l, m, residual);
      for (std::size_t j = 0; j < m; ++j) w[j] += step[j];
    }
  }
  w.resize(m, 0.0);

  double intercept = mean_y;
  for (std::size_t j = 0; j < m; ++j) intercept -= w[j] * means[j];
  for (double v : w) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "solver produced non-finite weights");
  }
  sol.intercept = intercept;
  sol.weights = std::move(w);
  return sol;
}

double ClampScore(double raw) {
  return std::clamp(raw, corpus::kMinLabel, corpus::kMaxLabel);
}

Matrix FeatureMatrix(std::span<const std::string> texts) {
  Matrix m(texts.size(), 3);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto inputs = features::Extract(texts[i]).ModelInputs();
    for (std::size_t j = 0; j < 3; ++j) m(i, j) = inputs[j];
  }
  return m;
}

LinearModel Fit(const Matrix& features, std::span<const double> labels, std::uint64_t seed) {
  if (features.cols() != 3) {
    throw Error(ErrorCode::kInvalidArgument, "linear model expects 3 feature columns");
  }
  if (features.rows() < 4) {
    throw Error(ErrorCode::kInsufficientData,
                "linear model needs at least 4 samples, got " +
                    std::to_string(features.rows()));
  }
  for (double v : labels) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "non-finite label");
    if (v < corpus::kMinLabel || v > corpus::kMaxLabel) {
      throw Error(ErrorCode::kLabelOutOfRange, "training label outside [1, 6]");
    }
  }
  const OlsSolution sol = SolveOls(features, labels);
  LinearModel model;
  model.intercept = sol.intercept;
  std::copy(sol.weights.begin(), sol.weights.end(), model.weights.begin());
  model.training_meta = {features.rows(), seed, sol.ridge_fallback};
  return model;
}

LinearModel FitCorpus(const corpus::Corpus& train, std::uint64_t seed) {
  const auto texts = train.Texts();
  const auto labels = train.Labels();
  return Fit(FeatureMatrix(texts), labels, seed);
}

double PredictFeatures(const LinearModel& model, const features::SurfaceFeatures& f) {
  return ClampScore(model.RawScore(f.ModelInputs()));
}

double Predict(const LinearModel& model, std::string_view text) {
  return PredictFeatures(model, features::Extract(text));
}

std::vector<double> PredictAll(const LinearModel& model, std::span<const std::string> texts) {
  std::vector<double> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(Predict(model, t));
  return out;
}

std::string Serialize(const LinearModel& model) {
  nlohmann::ordered_json j;
  j["kind"] = "linear";
  j["schema_version"] = model.feature_schema_version;
  j["intercept"] = model.intercept;
  j["weights"] = model.weights;
  j["training_meta"] = {{"samples", model.training_meta.samples},
                        {"seed", model.training_meta.seed},
                        {"ridge_fallback", model.training_meta.ridge_fallback}};
  return j.dump() + "\n";
}

LinearModel Parse(std::string_view contents) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(contents);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kMalformedModel, std::string("model is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kMalformedModel, "model is not an object");
  if (j.contains("kind") && j["kind"] != "linear") {
    throw Error(ErrorCode::kMalformedModel, "model kind is not 'linear'");
  }
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer()) {
    throw Error(ErrorCode::kMalformedModel, "model lacks an integer schema_version");
  }
  LinearModel model;
  model.feature_schema_version = j["schema_version"].get<int>();
  if (model.feature_schema_version != features::kSchemaVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "model schema_version " + std::to_string(model.feature_schema_version) +
                    " does not match feature schema " +
                    std::to_string(features::kSchemaVersion));
  }
  model.intercept = ReadNumber(j, "intercept");
  if (!j.contains("weights") || !j["weights"].is_array() || j["weights"].size() != 3) {
    throw Error(ErrorCode::kMalformedModel, "model must carry exactly 3 weights");
  }
  for (std::size_t i = 0; i < 3; ++i) {
    if (!j["weights"][i].is_number()) {
      throw Error(ErrorCode::kMalformedModel, "model weight is not a number");
    }
    model.weights[i] = j["weights"][i].get<double>();
  }
  if (j.contains("training_meta")) {
    const auto& meta = j["training_meta"];
    if (!meta.is_object()) throw Error(ErrorCode::kMalformedModel, "training_meta is not an object");
    model.training_meta.samples = meta.value("samples", std::size_t{0});
    model.training_meta.seed = meta.value("seed", std::uint64_t{0});
    model.training_meta.ridge_fallback = meta.value("ridge_fallback", false);
  }
  return model;
}

void SaveModel(const LinearModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write model " + path.string());
  out << Serialize(model);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

LinearModel LoadModel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open model " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return Parse(buffer.str());
}

}  // namespace acecefr::linear_model
