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

#include <atomic>
#include <cstdlib>
#include <string>

#include "acecefr/error.hpp"
#include "acecefr/kernels.hpp"

namespace acecefr::kernels {
namespace {

Backend DetectBackend() {
  if (const char* forced = std::getenv("ACECEFR_KERNELS")) {
    const std::string name(forced);
    if (name == "scalar") return Backend::kScalar;
    if (name == "avx2" && BackendSupported(Backend::kAvx2)) return Backend::kAvx2;
  }
  return BackendSupported(Backend::kAvx2) ? Backend::kAvx2 : Backend::kScalar;
}

std::atomic<Backend>& ActiveSlot() {
  static std::atomic<Backend> active{DetectBackend()};
  return active;
}

void CheckLengths(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(ErrorCode::kLengthMismatch, "kernel inputs have lengths " +
                                                std::to_string(a) + " and " +
                                                std::to_string(b));
  }
}

}  // namespace

std::string_view BackendName(Backend b) {
  switch (b) {
    case Backend::kScalar: return "scalar";
    case Backend::kAvx2: return "avx2";
  }
  return "unknown";
}

bool BackendSupported(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return true;
    case Backend::kAvx2:
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

Backend ActiveBackend() { return ActiveSlot().load(std::memory_order_relaxed); }

void SetBackend(Backend b) {
  if (!BackendSupported(b)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("kernel backend not supported on this CPU: ") +
                    std::string(BackendName(b)));
  }
  ActiveSlot().store(b, std::memory_order_relaxed);
}

const KernelTable& Table(Backend b) {
#if defined(__x86_64__) || defined(_M_X64)
  if (b == Backend::kAvx2) return avx2::Kernels();
#endif
  (void)b;
  return scalar::Kernels();
}

double SumSquaredDiff(std::span<const double> a, std::span<const double> b) {
  CheckLengths(a.size(), b.size());
  return Table(ActiveBackend()).sum_sq_diff(a.data(), b.data(), a.size());
}

double Dot(std::span<const double> a, std::span<const double> b) {
  CheckLengths(a.size(), b.size());
  return Table(ActiveBackend()).dot(a.data(), b.data(), a.size());
}

double Sum(std::span<const double> a) {
  return Table(ActiveBackend()).sum(a.data(), a.size());
}

double GatherSum(std::span<const double> values, std::span<const std::uint32_t> idx) {
  return Table(ActiveBackend()).gather_sum(values.data(), idx.data(), idx.size());
}

Moments CenteredMoments(std::span<const double> x, std::span<const double> y,
                        double mean_x, double mean_y) {
  CheckLengths(x.size(), y.size());
  return Table(ActiveBackend()).centered_moments(x.data(), y.data(), x.size(), mean_x,
                                                 mean_y);
}

}  // namespace acecefr::kernels
