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

#include "deliberate/dbscan.h"

#include <algorithm>
#include <deque>

#include "deliberate/error.h"
#include "deliberate/kernels.h"

namespace deliberate {
namespace {

const std::vector<size_t>* Largest(const std::vector<std::vector<size_t>>& clusters) {
  const std::vector<size_t>* best = nullptr;
  for (const auto& c : clusters) {
    if (best == nullptr || c.size() > best->size() ||
        (c.size() == best->size() && c.front() < best->front())) {
      best = &c;
    }
  }
  return best;
}

}  // namespace

std::vector<double> CosineDistanceMatrix(const std::vector<std::vector<double>>& points) {
  const size_t n = points.size();
  std::vector<double> d(n * n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    if (points[i].size() != points.front().size()) {
      throw Error(ErrorCode::kInvalidArgument, "points have inconsistent dimensions");
    }
    for (size_t j = i + 1; j < n; ++j) {
      const double v = 1.0 - kernels::Dot(points[i], points[j]);
      d[i * n + j] = v;
      d[j * n + i] = v;
    }
  }
  return d;
}

std::vector<std::vector<size_t>> Dbscan(const std::vector<double>& distances, size_t n,
                                        double eps, size_t min_pts) {
  std::vector<std::vector<size_t>> neighbors(n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (distances[i * n + j] <= eps || i == j) neighbors[i].push_back(j);
    }
  }
  constexpr int kUnassigned = -1;
  std::vector<int> label(n, kUnassigned);
  std::vector<std::vector<size_t>> clusters;
  for (size_t seed = 0; seed < n; ++seed) {
    if (label[seed] != kUnassigned || neighbors[seed].size() < min_pts) continue;
    const int id = static_cast<int>(clusters.size());
    clusters.emplace_back();
    std::deque<size_t> frontier = {seed};
    label[seed] = id;
    while (!frontier.empty()) {
      const size_t p = frontier.front();
      frontier.pop_front();
      clusters.back().push_back(p);
      if (neighbors[p].size() < min_pts) continue;  // border point
      for (size_t q : neighbors[p]) {
        if (label[q] == kUnassigned) {
          label[q] = id;
          frontier.push_back(q);
        }
      }
    }
    std::sort(clusters.back().begin(), clusters.back().end());
  }
  return clusters;
}

AdaptiveDbscanResult AdaptiveDbscan(const std::vector<std::vector<double>>& points,
                                    const AdaptiveDbscanOptions& options) {
  AdaptiveDbscanResult result;
  if (points.empty() || options.step_count <= 0) return result;
  const size_t n = points.size();
  const std::vector<double> d = CosineDistanceMatrix(points);
  std::vector<std::vector<size_t>> clusters;
  for (int i = 0; i < options.step_count; ++i) {
    result.epsilon = (options.first_step + i) / options.steps_per_unit;
    clusters = Dbscan(d, n, result.epsilon, options.min_pts);
    std::vector<std::vector<size_t>> big;
    for (const auto& c : clusters) {
      if (c.size() >= options.target_size) big.push_back(c);
    }
    if (!big.empty()) {
      result.members = *Largest(big);
      result.reached_target = true;
      return result;
    }
  }
  if (const auto* best = Largest(clusters)) result.members = *best;
  return result;
}

}  // namespace deliberate
