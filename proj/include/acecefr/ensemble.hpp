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

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "acecefr/corpus.hpp"
#include "acecefr/linear_model.hpp"

namespace acecefr::ensemble {

struct StackedModel {
  std::vector<std::string> base_ids;
  std::vector<double> weights;
  double intercept = 0;
  // Tuning-set MSE of each base on its own, parallel to base_ids.
  std::vector<double> base_tuning_mse;
  std::size_t tuning_samples = 0;
  bool ridge_fallback = false;

  // intercept + weights . scores, unclamped.
  double RawScore(std::span<const double> base_scores) const;

  bool operator==(const StackedModel&) const = default;
};

struct TuneEval {
  corpus::Corpus tune;
  corpus::Corpus eval;
};

// Seeded, disjoint, exhaustive split. Requires 0 < n_tune < |test|.
TuneEval TuneEvalSplit(const corpus::Corpus& test, std::size_t n_tune, std::uint64_t seed);

// OLS with intercept over the base prediction columns. Requires n > m + 1.
StackedModel FitStack(const linear_model::Matrix& base_predictions,
                      std::span<const double> labels, std::vector<std::string> base_ids);

// Clamped to [1, 6]. Throws kLengthMismatch on arity mismatch.
double PredictStack(const StackedModel& model, std::span<const double> base_scores);

// Base-prediction files: newline-delimited {"id": ..., "score": ...}.
using BasePredictions = std::map<std::string, double>;
BasePredictions LoadBasePredictions(const std::filesystem::path& path);
void SaveBasePredictions(const BasePredictions& predictions, const std::filesystem::path& path);

// Rows follow the passage order of `corpus`; columns follow `bases`. Throws
// kMalformedRecord naming the first passage a base lacks.
linear_model::Matrix AlignPredictions(const corpus::Corpus& corpus,
                                      std::span<const BasePredictions> bases,
                                      std::span<const std::string> base_ids);

std::string Serialize(const StackedModel& model);
StackedModel Parse(std::string_view contents);
void SaveModel(const StackedModel& model, const std::filesystem::path& path);
StackedModel LoadModel(const std::filesystem::path& path);

}  // namespace acecefr::ensemble
