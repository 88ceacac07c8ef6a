// Copyright 2026 The Deliberate Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <cstdlib>
#include <cstring>

#include "deliberate/kernels.h"

namespace deliberate::kernels {

#if defined(DELIBERATE_HAVE_AVX2)
const KernelTable& Avx2KernelTable();
#endif

const KernelTable* Avx2Kernels() {
#if defined(DELIBERATE_HAVE_AVX2)
  static const bool supported =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &Avx2KernelTable() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& Active() {
  static const KernelTable* table = [] {
    const char* force = std::getenv("DELIBERATE_FORCE_SCALAR");
    if (force != nullptr && std::strcmp(force, "1") == 0) {
      return &ScalarKernels();
    }
    const KernelTable* avx2 = Avx2Kernels();
    return avx2 != nullptr ? avx2 : &ScalarKernels();
  }();
  return *table;
}

double NormalizeInPlace(std::span<double> v) {
  const double norm = std::sqrt(SquaredNorm(v));
  if (norm > 0.0) {
    const double inv = 1.0 / norm;
    for (double& x : v) x *= inv;
  }
  return norm;
}

}  // namespace deliberate::kernels
