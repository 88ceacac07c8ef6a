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

#ifndef DELIBERATE_DBSCAN_H_
#define DELIBERATE_DBSCAN_H_

#include <cstddef>
#include <vector>

namespace deliberate {

// Pairwise cosine distances 1 - <a, b> of unit vectors, row-major n x n.
std::vector<double> CosineDistanceMatrix(const std::vector<std::vector<double>>& points);

// DBSCAN over a precomputed distance matrix. A point's neighborhood includes
// itself and every point at distance <= eps; core points have at least
// min_pts neighbors. Clusters are grown from seeds in index order and
// returned with sorted member indices; noise is omitted.
std::vector<std::vector<size_t>> Dbscan(const std::vector<double>& distances, size_t n,
                                        double eps, size_t min_pts);

struct AdaptiveDbscanOptions {
  // eps runs over (first_step + i) / steps_per_unit for i in [0, step_count).
  int first_step = 20;
  int step_count = 61;
  double steps_per_unit = 100.0;
  size_t min_pts = 2;
  size_t target_size = 5;
};

struct AdaptiveDbscanResult {
  // Sorted indices into the input; empty when no cluster formed at all.
  std::vector<size_t> members;
  double epsilon = 0.0;
  // False when the sweep ended without reaching target_size.
  bool reached_target = false;
};

// Sweeps eps upward and stops at the first eps where some cluster reaches
// target_size, returning the largest such cluster. Without one, returns the
// largest cluster at the final eps. Ties go to the cluster with the smallest
// member index.
AdaptiveDbscanResult AdaptiveDbscan(const std::vector<std::vector<double>>& points,
                                    const AdaptiveDbscanOptions& options = {});

}  // namespace deliberate

#endif  // DELIBERATE_DBSCAN_H_
