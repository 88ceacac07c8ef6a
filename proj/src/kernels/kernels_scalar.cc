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

#include "deliberate/kernels.h"

namespace deliberate::kernels {
namespace {

double DotScalar(const double* a, const double* b, size_t n) {
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

double SquaredL2Scalar(const double* a, const double* b, size_t n) {
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

void AxpyScalar(double alpha, const double* x, double* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void GemvScalar(const double* rows, size_t n_rows, size_t dim, const double* x,
                double* out) {
  for (size_t r = 0; r < n_rows; ++r) out[r] = DotScalar(rows + r * dim, x, dim);
}

}  // namespace

const KernelTable& ScalarKernels() {
  static const KernelTable table{"scalar", &DotScalar, &SquaredL2Scalar,
                                 &AxpyScalar, &GemvScalar};
  return table;
}

}  // namespace deliberate::kernels
