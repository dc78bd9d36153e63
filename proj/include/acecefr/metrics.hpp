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

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace acecefr::metrics {

// Mean squared error on the 1-6 scale, so the result lies in [0, 25].
double Mse(std::span<const double> predictions, std::span<const double> labels);

// Sample Pearson correlation. Throws kUndefinedCorrelation when either input
// is constant.
double Pearson(std::span<const double> xs, std::span<const double> ys);

// QWK class of a score: index of the nearest admissible rating point.
std::size_t QwkClass(double value);

// Quadratic weighted kappa over the nine rating points with weights
// (i - j)^2 / 8^2.
double Qwk(std::span<const double> a, std::span<const double> b);

struct Interval {
  double lo = 0;
  double hi = 0;

  bool operator==(const Interval&) const = default;
};

struct BootstrapOptions {
  std::size_t resamples = 10000;
  std::uint64_t seed = 0;
  double level = 0.90;
  // Worker threads. Each resample draws from its own stream derived from
  // (seed, resample index), so the interval does not depend on this value.
  std::size_t parallelism = 1;
};

// Paired percentile bootstrap of the MSE.
Interval BootstrapCi(std::span<const double> predictions, std::span<const double> labels,
                     const BootstrapOptions& options = {});

// Per-resample MSE values, in resample order. Exposed for tests.
std::vector<double> BootstrapDistribution(std::span<const double> predictions,
                                          std::span<const double> labels,
                                          const BootstrapOptions& options);

// Linear-interpolated quantile of sorted data.
double Quantile(std::span<const double> sorted, double q);
double Median(std::span<const double> values);

struct RandomUniformBaseline {
  std::uint64_t seed = 0;
};
struct ConstantBaseline {
  double value = 0;
};
using Baseline = std::variant<RandomUniformBaseline, ConstantBaseline>;

double BaselineMse(std::span<const double> labels, const Baseline& kind);

struct EvalReport {
  double mse = 0;
  Interval ci90;
  std::size_t n = 0;
  std::optional<double> qwk;
  std::optional<std::map<std::string, double>> pearson_by_feature;
  double random_mse = 0;
  double constant_median_mse = 0;

  std::string ToJson() const;
  static EvalReport FromJson(std::string_view text);

  bool operator==(const EvalReport&) const = default;
};

struct EvalOptions {
  std::uint64_t seed = 0;
  std::size_t resamples = 10000;
  std::size_t parallelism = 1;
};

// MSE with a 90% bootstrap interval widened to contain the point estimate,
// QWK of binned predictions against binned labels, and the two naive
// baselines. The constant baseline predicts the median of `train_labels`.
EvalReport Evaluate(std::span<const double> predictions, std::span<const double> labels,
                    std::span<const double> train_labels, const EvalOptions& options = {});

}  // namespace acecefr::metrics
