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

#ifndef DELIBERATE_BANDIT_H_
#define DELIBERATE_BANDIT_H_

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace deliberate {

struct ClusterStats {
  size_t explored = 0;
  size_t mistakes = 0;
  size_t feedback_count = 0;
  std::vector<int> ratings;

  bool operator==(const ClusterStats&) const = default;
};

struct Cluster {
  size_t atom_id = 0;
  std::vector<std::string> member_ids;
  ClusterStats stats;

  bool operator==(const Cluster&) const = default;
};

struct ClusterScore {
  double mistake_rate = 0.0;
  double feedback_rate = 0.0;
  double exploration_value = 0.0;
  double diversity_rate = 0.0;
  double total = 0.0;
};

inline constexpr double kMistakeWeight = 0.5;
inline constexpr double kFeedbackWeight = 0.3;
inline constexpr double kExplorationWeight = 0.15;
inline constexpr double kDiversityWeight = 0.05;

// kInvalidArgument when the stats break explored <= |members| or
// mistakes, feedback <= explored.
ClusterScore ScoreCluster(const Cluster& cluster);

// Population standard deviation; 0 for fewer than two values.
double RatingStdDev(const std::vector<int>& ratings);

enum class SelectionStrategy { kWeighted, kUcb };
std::string_view ToString(SelectionStrategy s);
SelectionStrategy ParseSelectionStrategy(std::string_view text);

struct ArmStats {
  size_t pulls = 0;
  double reward_sum = 0.0;

  bool operator==(const ArmStats&) const = default;
};

struct BanditHistory {
  std::map<size_t, ArmStats> arms;
  size_t selections = 0;

  void Record(size_t atom_id, double reward);
  bool operator==(const BanditHistory&) const = default;
};

inline constexpr double kDefaultUcbBeta = 2.0;

// UCB index mu + beta * sqrt(log t / n) with t = selections + 1, the 1-based
// number of the selection being made.
double UcbIndex(const ArmStats& arm, size_t t, double beta);

// Clusters in preference order. WEIGHTED: total score descending, ties by
// atom id. UCB: untried arms by ascending atom id, then UCB index descending,
// ties by atom id.
std::vector<size_t> RankClusters(const std::vector<Cluster>& clusters,
                                 SelectionStrategy strategy, const BanditHistory& history,
                                 double beta = kDefaultUcbBeta);

// The first ranked atom id; kInvalidArgument for an empty list.
size_t SelectCluster(const std::vector<Cluster>& clusters, SelectionStrategy strategy,
                     const BanditHistory& history, double beta = kDefaultUcbBeta);

void to_json(nlohmann::json& j, const ClusterStats& s);
void from_json(const nlohmann::json& j, ClusterStats& s);
void to_json(nlohmann::json& j, const Cluster& c);
void from_json(const nlohmann::json& j, Cluster& c);
void to_json(nlohmann::json& j, const ClusterScore& s);
void to_json(nlohmann::json& j, const BanditHistory& h);
void from_json(const nlohmann::json& j, BanditHistory& h);

}  // namespace deliberate

#endif  // DELIBERATE_BANDIT_H_
