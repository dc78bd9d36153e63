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

#include "acecefr/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <thread>

#include "acecefr/corpus.hpp"
#include "acecefr/error.hpp"
#include "acecefr/kernels.hpp"
#include "acecefr/rng.hpp"
#include "json.hpp"

namespace acecefr::metrics {
namespace {

void RequirePaired(std::span<const double> a, std::span<const double> b,
                   std::size_t min_size) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kLengthMismatch, "inputs have lengths " + std::to_string(a.size()) +
                                                " and " + std::to_string(b.size()));
  }
  if (a.size() < min_size) {
    throw Error(ErrorCode::kEmptyInput, "need at least " + std::to_string(min_size) +
                                            " values, got " + std::to_string(a.size()));
  }
}

void RequireScale(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v) || v < corpus::kMinLabel || v > corpus::kMaxLabel) {
      throw Error(ErrorCode::kOutOfRange, "value outside the [1, 6] scale");
    }
  }
}

bool IsConstant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

}  // namespace

double Mse(std::span<const double> predictions, std::span<const double> labels) {
  RequirePaired(predictions, labels, 1);
  RequireScale(predictions);
  RequireScale(labels);
  return kernels::SumSquaredDiff(predictions, labels) /
         static_cast<double>(predictions.size());
}

double Pearson(std::span<const double> xs, std::span<const double> ys) {
  RequirePaired(xs, ys, 2);
  for (double v : xs) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "non-finite value");
  }
  for (double v : ys) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "non-finite value");
  }
  if (IsConstant(xs) || IsConstant(ys)) {
    throw Error(ErrorCode::kUndefinedCorrelation, "correlation with a constant vector");
  }
  const double n = static_cast<double>(xs.size());
  const double mx = kernels::Sum(xs) / n;
  const double my = kernels::Sum(ys) / n;
  const auto m = kernels::CenteredMoments(xs, ys, mx, my);
  const double r = m.sxy / std::sqrt(m.sxx * m.syy);
  return std::clamp(r, -1.0, 1.0);
}

std::size_t QwkClass(double value) { return corpus::LevelFromScore(value).index(); }

double Qwk(std::span<const double> a, std::span<const double> b) {
  RequirePaired(a, b, 2);
  constexpr std::size_t k = corpus::CefrRating::kCount;
  std::array<std::array<double, k>, k> observed{};
  std::array<double, k> row{};
  std::array<double, k> col{};
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::size_t ca = QwkClass(a[i]);
    const std::size_t cb = QwkClass(b[i]);
    observed[ca][cb] += 1;
    row[ca] += 1;
    col[cb] += 1;
  }
  const double n = static_cast<double>(a.size());
  const double denom_scale = static_cast<double>((k - 1) * (k - 1));
  double weighted_observed = 0;
  double weighted_expected = 0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double d = static_cast<double>(i) - static_cast<double>(j);
      const double w = d * d / denom_scale;
      weighted_observed += w * observed[i][j];
      weighted_expected += w * row[i] * col[j] / n;
    }
  }
  if (weighted_expected == 0) {
    throw Error(ErrorCode::kUndefinedKappa, "expected disagreement is zero");
  }
  return 1.0 - weighted_observed / weighted_expected;
}

std::vector<double> BootstrapDistribution(std::span<const double> predictions,
                                          std::span<const double> labels,
                                          const BootstrapOptions& options) {
  RequirePaired(predictions, labels, 1);
  if (options.resamples < 1000) {
    throw Error(ErrorCode::kInvalidArgument, "bootstrap needs at least 1000 resamples");
  }
  if (predictions.size() > 0x7fffffffu) {
    throw Error(ErrorCode::kInvalidArgument, "bootstrap input too large");
  }
  const std::size_t n = predictions.size();
  std::vector<double> squared(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = predictions[i] - labels[i];
    squared[i] = d * d;
  }

  std::vector<double> out(options.resamples);
  auto run = [&](std::size_t begin, std::size_t end) {
    std::vector<std::uint32_t> idx(n);
    for (std::size_t b = begin; b < end; ++b) {
      Rng rng(DeriveSeed(options.seed, b));
      for (auto& i : idx) i = static_cast<std::uint32_t>(rng.Below(n));
      out[b] = kernels::GatherSum(squared, idx) / static_cast<double>(n);
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(options.parallelism, 1, options.resamples);
  if (workers == 1) {
    run(0, options.resamples);
  } else {
    std::vector<std::jthread> threads;
    const std::size_t chunk = (options.resamples + workers - 1) / workers;
    for (std::size_t begin = 0; begin < options.resamples; begin += chunk) {
      threads.emplace_back(run, begin, std::min(begin + chunk, options.resamples));
    }
  }
  return out;
}

double Quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::kEmptyInput, "quantile of empty data");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double Median(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return Quantile(sorted, 0.5);
}

Interval BootstrapCi(std::span<const double> predictions, std::span<const double> labels,
                     const BootstrapOptions& options) {
  if (!(options.level > 0 && options.level < 1)) {
    throw Error(ErrorCode::kInvalidArgument, "coverage level must lie in (0, 1)");
  }
  auto dist = BootstrapDistribution(predictions, labels, options);
  std::sort(dist.begin(), dist.end());
  const double tail = (1.0 - options.level) / 2.0;
  return {Quantile(dist, tail), Quantile(dist, 1.0 - tail)};
}

double BaselineMse(std::span<const double> labels, const Baseline& kind) {
  if (labels.empty()) throw Error(ErrorCode::kEmptyInput, "baseline over no labels");
  std::vector<double> predictions(labels.size());
  if (const auto* random = std::get_if<RandomUniformBaseline>(&kind)) {
    Rng rng(DeriveSeed(random->seed, StableHash("baseline_random")));
    for (double& p : predictions) p = rng.Uniform(corpus::kMinLabel, corpus::kMaxLabel);
  } else {
    std::fill(predictions.begin(), predictions.end(), std::get<ConstantBaseline>(kind).value);
  }
  return Mse(predictions, labels);
}

std::string EvalReport::ToJson() const {
  nlohmann::ordered_json j;
  j["mse"] = mse;
  j["ci90"] = {ci90.lo, ci90.hi};
  j["n"] = n;
  if (qwk) j["qwk"] = *qwk;
  if (pearson_by_feature) {
    nlohmann::ordered_json p = nlohmann::ordered_json::object();
    for (const auto& [name, r] : *pearson_by_feature) p[name] = r;
    j["pearson_by_feature"] = p;
  }
  j["baselines"] = {{"random_mse", random_mse}, {"constant_median_mse", constant_median_mse}};
  return j.dump();
}

EvalReport EvalReport::FromJson(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    EvalReport r;
    r.mse = j.at("mse").get<double>();
    r.ci90 = {j.at("ci90").at(0).get<double>(), j.at("ci90").at(1).get<double>()};
    r.n = j.at("n").get<std::size_t>();
    if (j.contains("qwk")) r.qwk = j["qwk"].get<double>();
    if (j.contains("pearson_by_feature")) {
      r.pearson_by_feature = j["pearson_by_feature"].get<std::map<std::string, double>>();
    }
    r.random_mse = j.at("baselines").at("random_mse").get<double>();
    r.constant_median_mse = j.at("baselines").at("constant_median_mse").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, std::string("bad eval report: ") + e.what());
  }
}

EvalReport Evaluate(std::span<const double> predictions, std::span<const double> labels,
                    std::span<const double> train_labels, const EvalOptions& options) {
  EvalReport report;
  report.n = predictions.size();
  report.mse = Mse(predictions, labels);
  report.ci90 = BootstrapCi(predictions, labels,
                            {options.resamples, options.seed, 0.90, options.parallelism});
  // A percentile interval can exclude the point estimate on small, skewed
  // samples; the report always brackets it.
  report.ci90.lo = std::min(report.ci90.lo, report.mse);
  report.ci90.hi = std::max(report.ci90.hi, report.mse);
  try {
    report.qwk = Qwk(predictions, labels);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUndefinedKappa && e.code() != ErrorCode::kEmptyInput) throw;
  }
  report.random_mse = BaselineMse(labels, RandomUniformBaseline{options.seed});
  report.constant_median_mse =
      BaselineMse(labels, ConstantBaseline{Median(train_labels.empty() ? labels : train_labels)});
  return report;
}

}  // namespace acecefr::metrics
