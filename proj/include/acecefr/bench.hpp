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
#include <span>
#include <string>

#include "acecefr/linear_model.hpp"

namespace acecefr::bench {

struct LatencyReport {
  std::size_t n = 0;
  double mean_us = 0;
  double p50_us = 0;
  double p95_us = 0;

  std::string ToJson() const;
};

// Summary of per-call latencies in microseconds.
LatencyReport Summarize(std::span<const double> latencies_us);

// Times `n` sequential single-text predictions after `warmup` unmeasured
// ones, cycling through `texts`.
LatencyReport BenchLinear(const linear_model::LinearModel& model,
                          std::span<const std::string> texts, std::size_t n,
                          std::size_t warmup = 10);

}  // namespace acecefr::bench
