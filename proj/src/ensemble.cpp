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

#include "acecefr/ensemble.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "acecefr/error.hpp"
#include "acecefr/features.hpp"
#include "acecefr/kernels.hpp"
#include "acecefr/rng.hpp"
#include "json.hpp"

namespace acecefr::ensemble {

double StackedModel::RawScore(std::span<const double> base_scores) const {
  if (base_scores.size() != weights.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "stack expects " + std::to_string(weights.size()) + " base scores, got " +
                    std::to_string(base_scores.size()));
  }
  double s = intercept;
  for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * base_scores[i];
  return s;
}

TuneEval TuneEvalSplit(const corpus::Corpus& test, std::size_t n_tune, std::uint64_t seed) {
  if (n_tune == 0 || n_tune >= test.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "n_tune must lie in [1, " + std::to_string(test.size()) + "), got " +
                    std::to_string(n_tune));
  }
  std::vector<std::size_t> order(test.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(DeriveSeed(seed, StableHash("tune_eval_split")));
  rng.Shuffle(std::span(order));
  std::vector<corpus::Passage> tune;
  std::vector<corpus::Passage> eval;
  for (std::size_t k = 0; k < order.size(); ++k) {
    (k < n_tune ? tune : eval).push_back(test[order[k]]);
  }
  return {corpus::Corpus(std::move(tune), test.provenance()),
          corpus::Corpus(std::move(eval), test.provenance())};
}

StackedModel FitStack(const linear_model::Matrix& base_predictions,
                      std::span<const double> labels, std::vector<std::string> base_ids) {
  const std::size_t n = base_predictions.rows();
  const std::size_t m = base_predictions.cols();
  if (base_ids.size() != m) {
    throw Error(ErrorCode::kLengthMismatch, "base id count does not match prediction columns");
  }
  if (m == 0) throw Error(ErrorCode::kInvalidArgument, "stack needs at least one base");
  if (n <= m + 1) {
    throw Error(ErrorCode::kInsufficientData,
                "stacking " + std::to_string(m) + " bases needs more than " +
                    std::to_string(m + 1) + " tuning samples, got " + std::to_string(n));
  }
  const auto sol = linear_model::SolveOls(base_predictions, labels);
  StackedModel model;
  model.base_ids = std::move(base_ids);
  model.weights = sol.weights;
  model.intercept = sol.intercept;
  model.ridge_fallback = sol.ridge_fallback;
  model.tuning_samples = n;
  for (std::size_t j = 0; j < m; ++j) {
    const auto column = base_predictions.column(j);
    model.base_tuning_mse.push_back(kernels::SumSquaredDiff(column, labels) /
                                    static_cast<double>(labels.size()));
  }
  return model;
}

double PredictStack(const StackedModel& model, std::span<const double> base_scores) {
  return linear_model::ClampScore(model.RawScore(base_scores));
}

BasePredictions LoadBasePredictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open predictions " + path.string());
  BasePredictions out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    std::string id;
    double score = 0;
    try {
      const auto j = nlohmann::json::parse(line);
      id = j.at("id").get<std::string>();
      score = j.at("score").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord, where + ": bad prediction record: " + e.what());
    }
    if (!std::isfinite(score) || score < corpus::kMinLabel || score > corpus::kMaxLabel) {
      throw Error(ErrorCode::kLabelOutOfRange, where + ": score outside [1, 6]");
    }
    if (!out.emplace(id, score).second) {
      throw Error(ErrorCode::kDuplicateId, where + ": duplicate id '" + id + "'");
    }
  }
  return out;
}

void SaveBasePredictions(const BasePredictions& predictions, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  for (const auto& [id, score] : predictions) {
    nlohmann::ordered_json j;
    j["id"] = id;
    j["score"] = score;
    out << j.dump() << '\n';
  }
}

linear_model::Matrix AlignPredictions(const corpus::Corpus& corpus,
                                      std::span<const BasePredictions> bases,
                                      std::span<const std::string> base_ids) {
  linear_model::Matrix m(corpus.size(), bases.size());
  for (std::size_t j = 0; j < bases.size(); ++j) {
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const auto it = bases[j].find(corpus[i].id);
      if (it == bases[j].end()) {
        const std::string name = j < base_ids.size() ? base_ids[j] : std::to_string(j);
        throw Error(ErrorCode::kMalformedRecord,
                    "base '" + name + "' has no prediction for passage '" + corpus[i].id + "'");
      }
      m(i, j) = it->second;
    }
  }
  return m;
}

std::string Serialize(const StackedModel& model) {
  nlohmann::ordered_json j;
  j["kind"] = "stack";
  j["schema_version"] = features::kSchemaVersion;
  j["intercept"] = model.intercept;
  j["weights"] = model.weights;
  j["base_ids"] = model.base_ids;
  j["training_meta"] = {{"samples", model.tuning_samples},
                        {"ridge_fallback", model.ridge_fallback},
                        {"base_tuning_mse", model.base_tuning_mse}};
  return j.dump() + "\n";
}

StackedModel Parse(std::string_view contents) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(contents);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kMalformedModel, std::string("model is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("kind") != "stack") throw Error(ErrorCode::kMalformedModel, "model kind is not 'stack'");
    if (j.at("schema_version").get<int>() != features::kSchemaVersion) {
      throw Error(ErrorCode::kVersionMismatch, "stack model schema_version mismatch");
    }
    StackedModel model;
    model.intercept = j.at("intercept").get<double>();
    model.weights = j.at("weights").get<std::vector<double>>();
    model.base_ids = j.at("base_ids").get<std::vector<std::string>>();
    if (model.weights.size() != model.base_ids.size() || model.weights.empty()) {
      throw Error(ErrorCode::kMalformedModel, "stack weight count must equal base count");
    }
    if (j.contains("training_meta")) {
      const auto& meta = j["training_meta"];
      model.tuning_samples = meta.value("samples", std::size_t{0});
      model.ridge_fallback = meta.value("ridge_fallback", false);
      model.base_tuning_mse = meta.value("base_tuning_mse", std::vector<double>{});
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedModel, std::string("bad stack model: ") + e.what());
  }
}

void SaveModel(const StackedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write model " + path.string());
  out << Serialize(model);
}

StackedModel LoadModel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open model " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return Parse(buffer.str());
}

}  // namespace acecefr::ensemble
