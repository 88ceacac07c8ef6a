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

#ifndef DELIBERATE_KERNELS_H_
#define DELIBERATE_KERNELS_H_

#include <cstddef>
#include <span>
#include <string_view>

namespace deliberate::kernels {

// Dense double-precision inner loops used by retrieval, dedup, sparse coding
// and ambiguity clustering. Each entry has a scalar reference implementation
// and, where the CPU allows, a vectorized one picked once at startup.
struct KernelTable {
  std::string_view isa;
  double (*dot)(const double* a, const double* b, size_t n);
  double (*squared_l2)(const double* a, const double* b, size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, size_t n);
  // out[i] = <rows[i*dim .. (i+1)*dim), x> for i < n_rows.
  void (*gemv)(const double* rows, size_t n_rows, size_t dim, const double* x,
               double* out);
};

const KernelTable& ScalarKernels();

// nullptr when the AVX2 variant was not compiled in or the CPU lacks
// AVX2+FMA.
const KernelTable* Avx2Kernels();

// The table used by the engine. Honors DELIBERATE_FORCE_SCALAR=1.
const KernelTable& Active();

inline double Dot(std::span<const double> a, std::span<const double> b) {
  return Active().dot(a.data(), b.data(), a.size());
}

inline double SquaredNorm(std::span<const double> a) {
  return Active().dot(a.data(), a.data(), a.size());
}

inline double SquaredL2(std::span<const double> a, std::span<const double> b) {
  return Active().squared_l2(a.data(), b.data(), a.size());
}

inline void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  Active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void Gemv(std::span<const double> rows, size_t dim,
                 std::span<const double> x, std::span<double> out) {
  Active().gemv(rows.data(), out.size(), dim, x.data(), out.data());
}

// Scales v to unit L2 norm in place; returns the original norm. A zero
// vector is left untouched.
double NormalizeInPlace(std::span<double> v);

}  // namespace deliberate::kernels

#endif  // DELIBERATE_KERNELS_H_
