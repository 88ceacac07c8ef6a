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

#ifndef DELIBERATE_DICTIONARY_H_
#define DELIBERATE_DICTIONARY_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace deliberate {

struct SparseCode {
  // Dense K-vector; entries outside `support` are exactly zero.
  std::vector<double> alpha;
  // Atom indices in selection order; size <= s.
  std::vector<size_t> support;
};

struct DictionaryOptions {
  size_t atoms = 32;
  size_t sparsity = 5;
  size_t iterations = 20;
  uint64_t seed = 0;
};

struct DictionaryResult {
  // p x K, unit-norm columns.
  Eigen::MatrixXd atoms;
  std::vector<SparseCode> codes;
  // Mean squared reconstruction error sum ||x - W a||^2 / (n p): the initial
  // value followed by one entry per iteration.
  std::vector<double> mse_trace;
};

// Orthogonal matching pursuit: greedily picks the atom most correlated with
// the residual (ties to the lower index) and re-solves least squares on the
// support, for at most s steps or until the residual is uncorrelated.
SparseCode Omp(const Eigen::MatrixXd& atoms, std::span<const double> x, size_t s);

// Alternating sparse coding (OMP) and method-of-optimal-directions updates,
// initialized from K distinct data vectors chosen by the seed. Atoms no code
// uses are reseeded from the worst-reconstructed vectors. The error trace is
// non-increasing.
DictionaryResult LearnDictionary(const std::vector<std::vector<double>>& data,
                                 const DictionaryOptions& options);

double ReconstructionMse(const Eigen::MatrixXd& atoms, const std::vector<std::vector<double>>& data,
                         const std::vector<SparseCode>& codes);

}  // namespace deliberate

#endif  // DELIBERATE_DICTIONARY_H_
