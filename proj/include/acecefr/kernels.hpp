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

// Data-parallel inner loops used by the metrics and bootstrap code. Each
// kernel has a scalar reference implementation and, on x86-64, an AVX2+FMA
// variant. The variant is chosen once at startup from CPUID and can be forced
// with ACECEFR_KERNELS=scalar|avx2 or SetBackend().
//
// Variants reorder floating-point additions, so they agree with the scalar
// reference to a relative tolerance, not bit-for-bit. Within one backend the
// results are deterministic.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace acecefr::kernels {

enum class Backend { kScalar, kAvx2 };

std::string_view BackendName(Backend b);
bool BackendSupported(Backend b);
Backend ActiveBackend();
// Throws Error(kInvalidArgument) when the CPU lacks the instruction set.
void SetBackend(Backend b);

struct Moments {
  double sxx = 0;
  double syy = 0;
  double sxy = 0;
};

// Raw kernel signatures; the span wrappers below check lengths.
struct KernelTable {
  double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
  double (*gather_sum)(const double* values, const std::uint32_t* idx, std::size_t n);
  Moments (*centered_moments)(const double* x, const double* y, std::size_t n,
                              double mean_x, double mean_y);
};

const KernelTable& Table(Backend b);

// sum_i (a_i - b_i)^2
double SumSquaredDiff(std::span<const double> a, std::span<const double> b);
double Dot(std::span<const double> a, std::span<const double> b);
double Sum(std::span<const double> a);
// sum_i values[idx_i]; every index must be < values.size().
double GatherSum(std::span<const double> values, std::span<const std::uint32_t> idx);
Moments CenteredMoments(std::span<const double> x, std::span<const double> y,
                        double mean_x, double mean_y);

namespace scalar {
const KernelTable& Kernels();
}

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
const KernelTable& Kernels();
}
#endif

}  // namespace acecefr::kernels
