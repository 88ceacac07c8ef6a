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

#include "deliberate/dictionary.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "deliberate/error.h"
#include "deliberate/kernels.h"
#include "deliberate/rng.h"

namespace deliberate {
namespace {

constexpr double kCorrelationFloor = 1e-12;
constexpr double kDeadNorm = 1e-12;

Eigen::Map<const Eigen::VectorXd> AsVector(std::span<const double> x) {
  return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

double SquaredResidual(const Eigen::MatrixXd& atoms, std::span<const double> x,
                       const SparseCode& code) {
  Eigen::VectorXd r = AsVector(x);
  for (size_t k : code.support) r -= code.alpha[k] * atoms.col(static_cast<Eigen::Index>(k));
  return r.squaredNorm();
}

std::vector<SparseCode> CodeAll(const Eigen::MatrixXd& atoms,
                                const std::vector<std::vector<double>>& data, size_t s) {
  std::vector<SparseCode> codes;
  codes.reserve(data.size());
  for (const auto& x : data) codes.push_back(Omp(atoms, x, s));
  return codes;
}

}  // namespace

SparseCode Omp(const Eigen::MatrixXd& atoms, std::span<const double> x, size_t s) {
  const auto p = atoms.rows();
  const auto k_count = static_cast<size_t>(atoms.cols());
  if (static_cast<size_t>(p) != x.size()) {
    throw Error(ErrorCode::kInvalidArgument, "OMP dimension mismatch");
  }
  SparseCode code;
  code.alpha.assign(k_count, 0.0);
  const Eigen::VectorXd target = AsVector(x);
  Eigen::VectorXd residual = target;
  std::vector<double> corr(k_count);
  std::vector<bool> used(k_count, false);
  Eigen::VectorXd coef;
  for (size_t step = 0; step < std::min(s, k_count); ++step) {
    // Columns are contiguous in Eigen's column-major storage, so W^T r is a
    // row-major gemv over the columns.
    kernels::Gemv(std::span<const double>(atoms.data(), atoms.size()), static_cast<size_t>(p),
                  std::span<const double>(residual.data(), static_cast<size_t>(p)), corr);
    size_t best = k_count;
    double best_abs = kCorrelationFloor;
    for (size_t k = 0; k < k_count; ++k) {
      if (!used[k] && std::abs(corr[k]) > best_abs) {
        best_abs = std::abs(corr[k]);
        best = k;
      }
    }
    if (best == k_count) break;
    used[best] = true;
    code.support.push_back(best);
    Eigen::MatrixXd sub(p, static_cast<Eigen::Index>(code.support.size()));
    for (size_t i = 0; i < code.support.size(); ++i) {
      sub.col(static_cast<Eigen::Index>(i)) = atoms.col(static_cast<Eigen::Index>(code.support[i]));
    }
    coef = sub.colPivHouseholderQr().solve(target);
    residual = target - sub * coef;
  }
  for (size_t i = 0; i < code.support.size(); ++i) {
    code.alpha[code.support[i]] = coef(static_cast<Eigen::Index>(i));
  }
  return code;
}

double ReconstructionMse(const Eigen::MatrixXd& atoms, const std::vector<std::vector<double>>& data,
                         const std::vector<SparseCode>& codes) {
  if (data.empty()) return 0.0;
  double total = 0.0;
  for (size_t i = 0; i < data.size(); ++i) total += SquaredResidual(atoms, data[i], codes[i]);
  return total / (static_cast<double>(data.size()) * static_cast<double>(atoms.rows()));
}

DictionaryResult LearnDictionary(const std::vector<std::vector<double>>& data,
                                 const DictionaryOptions& options) {
  const size_t n = data.size();
  const size_t k_count = options.atoms;
  if (k_count == 0) throw Error(ErrorCode::kInvalidArgument, "dictionary needs at least one atom");
  if (n < k_count) {
    throw Error(ErrorCode::kInvalidArgument, "dictionary learning needs at least K=" +
                                                 std::to_string(k_count) + " vectors, got " +
                                                 std::to_string(n));
  }
  if (options.sparsity > k_count) {
    throw Error(ErrorCode::kInvalidArgument, "sparsity s exceeds atom count K");
  }
  const size_t p = data.front().size();
  for (const auto& x : data) {
    if (x.size() != p) throw Error(ErrorCode::kInvalidArgument, "inconsistent vector dimensions");
  }
  const auto P = static_cast<Eigen::Index>(p);
  const auto K = static_cast<Eigen::Index>(k_count);

  Eigen::MatrixXd X(P, static_cast<Eigen::Index>(n));
  for (size_t i = 0; i < n; ++i) X.col(static_cast<Eigen::Index>(i)) = AsVector(data[i]);

  Rng rng(DeriveSeed(options.seed, "dictionary-init"));
  DictionaryResult result;
  result.atoms.resize(P, K);
  const auto picks = rng.SampleWithoutReplacement(n, k_count);
  for (size_t k = 0; k < k_count; ++k) {
    Eigen::VectorXd col = X.col(static_cast<Eigen::Index>(picks[k]));
    double norm = col.norm();
    while (norm <= kDeadNorm) {
      for (Eigen::Index r = 0; r < P; ++r) col(r) = rng.Normal();
      norm = col.norm();
    }
    result.atoms.col(static_cast<Eigen::Index>(k)) = col / norm;
  }

  result.codes = CodeAll(result.atoms, data, options.sparsity);
  double mse = ReconstructionMse(result.atoms, data, result.codes);
  result.mse_trace.push_back(mse);

  for (size_t iter = 0; iter < options.iterations; ++iter) {
    // Dictionary step over the atoms some code uses.
    std::vector<size_t> used;
    std::vector<bool> is_used(k_count, false);
    for (const SparseCode& c : result.codes) {
      for (size_t k : c.support) is_used[k] = true;
    }
    for (size_t k = 0; k < k_count; ++k) {
      if (is_used[k]) used.push_back(k);
    }
    Eigen::MatrixXd W = result.atoms;
    std::vector<SparseCode> codes = result.codes;
    if (!used.empty()) {
      const auto U = static_cast<Eigen::Index>(used.size());
      Eigen::MatrixXd A(U, static_cast<Eigen::Index>(n));
      A.setZero();
      for (size_t i = 0; i < n; ++i) {
        for (Eigen::Index u = 0; u < U; ++u) {
          A(u, static_cast<Eigen::Index>(i)) = codes[i].alpha[used[static_cast<size_t>(u)]];
        }
      }
      // min ||X - W_U A||_F  <=>  A^T W_U^T = X^T in the least-squares sense.
      const Eigen::MatrixXd WuT = A.transpose().colPivHouseholderQr().solve(X.transpose());
      for (Eigen::Index u = 0; u < U; ++u) {
        const size_t k = used[static_cast<size_t>(u)];
        Eigen::VectorXd col = WuT.row(u).transpose();
        const double norm = col.norm();
        if (norm <= kDeadNorm) {
          is_used[k] = false;
          for (SparseCode& c : codes) {
            if (c.alpha[k] != 0.0) {
              c.alpha[k] = 0.0;
              c.support.erase(std::find(c.support.begin(), c.support.end(), k));
            }
          }
          continue;
        }
        W.col(static_cast<Eigen::Index>(k)) = col / norm;
        for (SparseCode& c : codes) c.alpha[k] *= norm;
      }
      // Least squares cannot increase the error; guard against round-off.
      if (ReconstructionMse(W, data, codes) > mse) {
        W = result.atoms;
        codes = result.codes;
        std::fill(is_used.begin(), is_used.end(), false);
        for (const SparseCode& c : codes) {
          for (size_t k : c.support) is_used[k] = true;
        }
      }
    }

    // Reseed dead atoms from the residuals of the worst-reconstructed vectors. Dead atoms
    // carry no code weight, so this leaves the error unchanged.
    std::vector<size_t> dead;
    for (size_t k = 0; k < k_count; ++k) {
      if (!is_used[k]) dead.push_back(k);
    }
    if (!dead.empty()) {
      std::vector<double> err(n);
      for (size_t i = 0; i < n; ++i) err[i] = SquaredResidual(W, data[i], codes[i]);
      std::vector<size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](size_t a, size_t b) { return err[a] > err[b]; });
      size_t next = 0;
      for (size_t k : dead) {
        Eigen::VectorXd col;
        double norm = 0.0;
        while (next < n && norm <= kDeadNorm) {
          // The residual is what the current atoms miss for this vector.
          const size_t i = order[next++];
          col = X.col(static_cast<Eigen::Index>(i));
          for (size_t c : codes[i].support) {
            col -= codes[i].alpha[c] * W.col(static_cast<Eigen::Index>(c));
          }
          norm = col.norm();
        }
        if (norm <= kDeadNorm) {
          col.resize(P);
          for (Eigen::Index r = 0; r < P; ++r) col(r) = rng.Normal();
          norm = col.norm();
        }
        W.col(static_cast<Eigen::Index>(k)) = col / norm;
      }
    }

    // Sparse step, keeping a vector's previous code when OMP does worse.
    std::vector<SparseCode> fresh = CodeAll(W, data, options.sparsity);
    for (size_t i = 0; i < n; ++i) {
      if (SquaredResidual(W, data[i], fresh[i]) <= SquaredResidual(W, data[i], codes[i])) {
        codes[i] = std::move(fresh[i]);
      }
    }
    result.atoms = std::move(W);
    result.codes = std::move(codes);
    mse = ReconstructionMse(result.atoms, data, result.codes);
    result.mse_trace.push_back(mse);
  }
  return result;
}

}  // namespace deliberate
