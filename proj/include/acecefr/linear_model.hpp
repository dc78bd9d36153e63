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

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "acecefr/corpus.hpp"
#include "acecefr/features.hpp"

namespace acecefr::linear_model {

// Dense row-major matrix; rows are samples.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }
  std::vector<double> column(std::size_t c) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Ridge term added to the slope diagonal when the normal equations are
// singular or numerically so. The intercept is never penalized.
inline constexpr double kRidge = 1e-8;

struct OlsSolution {
  double intercept = 0;
  std::vector<double> weights;
  bool ridge_fallback = false;
};

// Least squares with intercept via the normal equations on centered columns.
// A singular system is refit with kRidge on the diagonal, followed by a few
// rounds of iterative refinement against the unpenalized system, which drives
// the solution toward the minimum-norm least-squares fit.
//
// Requires rows > cols; throws kInsufficientData or kNonFinite.
OlsSolution SolveOls(const Matrix& x, std::span<const double> y);

struct TrainingMeta {
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  bool ridge_fallback = false;

  bool operator==(const TrainingMeta&) const = default;
};

struct LinearModel {
  double intercept = 0;
  // Ordered (avg_word_len_chars, ln_sent_len_chars, ln_sent_len_words).
  std::array<double, 3> weights{};
  int feature_schema_version = features::kSchemaVersion;
  TrainingMeta training_meta;

  double RawScore(const std::array<double, 3>& inputs) const {
    return intercept + weights[0] * inputs[0] + weights[1] * inputs[1] +
           weights[2] * inputs[2];
  }

  bool operator==(const LinearModel&) const = default;
};

double ClampScore(double raw);

// n x 3 matrix of model inputs. Throws kEmptyText on an untokenizable text.
Matrix FeatureMatrix(std::span<const std::string> texts);

// Needs at least 4 rows with labels in [1, 6].
LinearModel Fit(const Matrix& features, std::span<const double> labels,
                std::uint64_t seed = 0);
LinearModel FitCorpus(const corpus::Corpus& train, std::uint64_t seed = 0);

double PredictFeatures(const LinearModel& model, const features::SurfaceFeatures& f);
double Predict(const LinearModel& model, std::string_view text);
std::vector<double> PredictAll(const LinearModel& model, std::span<const std::string> texts);

std::string Serialize(const LinearModel& model);
LinearModel Parse(std::string_view contents);
void SaveModel(const LinearModel& model, const std::filesystem::path& path);
LinearModel LoadModel(const std::filesystem::path& path);

}  // namespace acecefr::linear_model
