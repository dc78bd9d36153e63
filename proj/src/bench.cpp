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

#include "acecefr/bench.hpp"

#include <algorithm>
#include <chrono>
#include <vector>

#include "acecefr/error.hpp"
#include "acecefr/metrics.hpp"
#include "json.hpp"

namespace acecefr::bench {

std::string LatencyReport::ToJson() const {
  nlohmann::ordered_json j;
  j["n"] = n;
  j["mean_us"] = mean_us;
  j["p50_us"] = p50_us;
  j["p95_us"] = p95_us;
  return j.dump();
}

LatencyReport Summarize(std::span<const double> latencies_us) {
  if (latencies_us.empty()) throw Error(ErrorCode::kEmptyInput, "no latencies to summarize");
  std::vector<double> sorted(latencies_us.begin(), latencies_us.end());
  std::sort(sorted.begin(), sorted.end());
  LatencyReport r;
  r.n = sorted.size();
  double total = 0;
  for (double v : sorted) total += v;
  r.mean_us = total / static_cast<double>(sorted.size());
  r.p50_us = metrics::Quantile(sorted, 0.50);
  r.p95_us = metrics::Quantile(sorted, 0.95);
  return r;
}

LatencyReport BenchLinear(const linear_model::LinearModel& model,
                          std::span<const std::string> texts, std::size_t n,
                          std::size_t warmup) {
  if (texts.empty() || n == 0) {
    throw Error(ErrorCode::kEmptyInput, "bench needs at least one text and one lookup");
  }
  using Clock = std::chrono::steady_clock;
  // Keeps the optimizer from discarding the predictions.
  volatile double sink = 0;
  for (std::size_t i = 0; i < warmup; ++i) {
    sink = sink + linear_model::Predict(model, texts[i % texts.size()]);
  }
  std::vector<double> latencies;
  latencies.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& text = texts[i % texts.size()];
    const auto start = Clock::now();
    const double score = linear_model::Predict(model, text);
    const auto stop = Clock::now();
    sink = sink + score;
    latencies.push_back(std::chrono::duration<double, std::micro>(stop - start).count());
  }
  return Summarize(latencies);
}

}  // namespace acecefr::bench
