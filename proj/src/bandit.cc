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

#include "deliberate/bandit.h"

#include <algorithm>
#include <cmath>

#include "deliberate/error.h"

namespace deliberate {

double RatingStdDev(const std::vector<int>& ratings) {
  if (ratings.size() < 2) return 0.0;
  double mean = 0.0;
  for (int r : ratings) mean += r;
  mean /= static_cast<double>(ratings.size());
  double var = 0.0;
  for (int r : ratings) var += (r - mean) * (r - mean);
  return std::sqrt(var / static_cast<double>(ratings.size()));
}

ClusterScore ScoreCluster(const Cluster& cluster) {
  const ClusterStats& s = cluster.stats;
  if (s.explored > cluster.member_ids.size() || s.mistakes > s.explored ||
      s.feedback_count > s.explored) {
    throw Error(ErrorCode::kInvalidArgument,
                "cluster " + std::to_string(cluster.atom_id) + " has inconsistent stats");
  }
  ClusterScore score;
  if (s.explored > 0) {
    score.mistake_rate = static_cast<double>(s.mistakes) / static_cast<double>(s.explored);
    score.feedback_rate = static_cast<double>(s.feedback_count) / static_cast<double>(s.explored);
  }
  if (!cluster.member_ids.empty()) {
    score.exploration_value =
        1.0 - static_cast<double>(s.explored) / static_cast<double>(cluster.member_ids.size());
  }
  score.diversity_rate = std::min(1.0, RatingStdDev(s.ratings) / 2.0);
  score.total = kMistakeWeight * score.mistake_rate + kFeedbackWeight * score.feedback_rate +
                kExplorationWeight * score.exploration_value +
                kDiversityWeight * score.diversity_rate;
  return score;
}

std::string_view ToString(SelectionStrategy s) {
  return s == SelectionStrategy::kUcb ? "UCB" : "WEIGHTED";
}

SelectionStrategy ParseSelectionStrategy(std::string_view text) {
  if (text == "UCB" || text == "ucb") return SelectionStrategy::kUcb;
  if (text == "WEIGHTED" || text == "weighted") return SelectionStrategy::kWeighted;
  throw Error(ErrorCode::kConfig, "selection strategy must be WEIGHTED or UCB");
}

void BanditHistory::Record(size_t atom_id, double reward) {
  ArmStats& arm = arms[atom_id];
  ++arm.pulls;
  arm.reward_sum += reward;
  ++selections;
}

double UcbIndex(const ArmStats& arm, size_t t, double beta) {
  const double n = static_cast<double>(arm.pulls);
  return arm.reward_sum / n + beta * std::sqrt(std::log(static_cast<double>(t)) / n);
}

std::vector<size_t> RankClusters(const std::vector<Cluster>& clusters,
                                 SelectionStrategy strategy, const BanditHistory& history,
                                 double beta) {
  struct Entry {
    size_t atom_id;
    bool untried;
    double value;
  };
  std::vector<Entry> entries;
  entries.reserve(clusters.size());
  const size_t t = history.selections + 1;
  for (const Cluster& c : clusters) {
    Entry e{c.atom_id, false, 0.0};
    if (strategy == SelectionStrategy::kWeighted) {
      e.value = ScoreCluster(c).total;
    } else {
      const auto it = history.arms.find(c.atom_id);
      if (it == history.arms.end() || it->second.pulls == 0) {
        e.untried = true;
      } else {
        e.value = UcbIndex(it->second, t, beta);
      }
    }
    entries.push_back(e);
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.untried != b.untried) return a.untried;
    if (!a.untried && a.value != b.value) return a.value > b.value;
    return a.atom_id < b.atom_id;
  });
  std::vector<size_t> out;
  out.reserve(entries.size());
  for (const Entry& e : entries) out.push_back(e.atom_id);
  return out;
}

size_t SelectCluster(const std::vector<Cluster>& clusters, SelectionStrategy strategy,
                     const BanditHistory& history, double beta) {
  if (clusters.empty()) throw Error(ErrorCode::kInvalidArgument, "no clusters to select from");
  return RankClusters(clusters, strategy, history, beta).front();
}

void to_json(nlohmann::json& j, const ClusterStats& s) {
  j = nlohmann::json{{"explored", s.explored},
                     {"mistakes", s.mistakes},
                     {"feedback_count", s.feedback_count},
                     {"ratings", s.ratings}};
}

void from_json(const nlohmann::json& j, ClusterStats& s) {
  s.explored = j.at("explored").get<size_t>();
  s.mistakes = j.at("mistakes").get<size_t>();
  s.feedback_count = j.at("feedback_count").get<size_t>();
  s.ratings = j.at("ratings").get<std::vector<int>>();
}

void to_json(nlohmann::json& j, const Cluster& c) {
  j = nlohmann::json{{"atom_id", c.atom_id}, {"member_ids", c.member_ids}, {"stats", c.stats}};
}

void from_json(const nlohmann::json& j, Cluster& c) {
  c.atom_id = j.at("atom_id").get<size_t>();
  c.member_ids = j.at("member_ids").get<std::vector<std::string>>();
  c.stats = j.at("stats").get<ClusterStats>();
}

void to_json(nlohmann::json& j, const ClusterScore& s) {
  j = nlohmann::json{{"mistake_rate", s.mistake_rate},
                     {"feedback_rate", s.feedback_rate},
                     {"exploration_value", s.exploration_value},
                     {"diversity_rate", s.diversity_rate},
                     {"total", s.total}};
}

void to_json(nlohmann::json& j, const BanditHistory& h) {
  nlohmann::json arms = nlohmann::json::array();
  for (const auto& [id, arm] : h.arms) {
    arms.push_back({{"atom_id", id}, {"pulls", arm.pulls}, {"reward_sum", arm.reward_sum}});
  }
  j = nlohmann::json{{"selections", h.selections}, {"arms", arms}};
}

void from_json(const nlohmann::json& j, BanditHistory& h) {
  h.selections = j.at("selections").get<size_t>();
  h.arms.clear();
  for (const auto& a : j.at("arms")) {
    h.arms[a.at("atom_id").get<size_t>()] =
        ArmStats{a.at("pulls").get<size_t>(), a.at("reward_sum").get<double>()};
  }
}

}  // namespace deliberate
