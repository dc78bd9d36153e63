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

#include "acecefr/kernels.hpp"

namespace acecefr::kernels::scalar {
namespace {

double SumSqDiff(const double* a, const double* b, std::size_t n) {
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double DotImpl(const double* a, const double* b, std::size_t n) {
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double SumImpl(const double* a, std::size_t n) {
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

double GatherSumImpl(const double* values, const std::uint32_t* idx, std::size_t n) {
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += values[idx[i]];
  return acc;
}

Moments CenteredMomentsImpl(const double* x, const double* y, std::size_t n,
                            double mean_x, double mean_y) {
  Moments m;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    m.sxx += dx * dx;
    m.syy += dy * dy;
    m.sxy += dx * dy;
  }
  return m;
}

}  // namespace

const KernelTable& Kernels() {
  static const KernelTable table{SumSqDiff, DotImpl, SumImpl, GatherSumImpl,
                                 CenteredMomentsImpl};
  return table;
}

}  // namespace acecefr::kernels::scalar
