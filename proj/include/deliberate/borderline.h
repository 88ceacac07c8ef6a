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

#ifndef DELIBERATE_BORDERLINE_H_
#define DELIBERATE_BORDERLINE_H_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "deliberate/bandit.h"
#include "deliberate/concept.h"
#include "deliberate/dbscan.h"
#include "deliberate/dictionary.h"
#include "deliberate/gateway.h"
#include "deliberate/image_index.h"
#include "json.hpp"

namespace deliberate {

enum class ImageType { kInScope, kAmbiguous, kOutOfScope };
std::string_view ToString(ImageType t);
ImageType ParseImageType(std::string_view text);

struct BorderlineQuery {
  std::string text;
  ImageType image_type = ImageType::kAmbiguous;

  bool operator==(const BorderlineQuery&) const = default;
};

// n new queries distinct (case-insensitively) from `prior` and each other.
// Duplicates are re-asked with fresh samples; kDuplicateExhausted after
// `retries` extra attempts.
std::vector<BorderlineQuery> GenerateQueries(const Gateway& gateway, const ConceptDefinition& def,
                                             const std::vector<BorderlineQuery>& prior, size_t n,
                                             ImageType type, int retries = 3);

inline constexpr size_t kMinPerQueryK = 50;
inline constexpr size_t kMaxPerQueryK = 100;
inline constexpr size_t kMinBatchSize = 5;

struct PoolResult {
  std::vector<std::string> ids;
  std::vector<std::string> warnings;
};

// Union of per-query top-k results in first-seen order, then near-duplicate
// removal. kPoolTooSmall below five images.
PoolResult BuildPool(const Gateway& gateway, const ImageIndex& index,
                     const std::vector<BorderlineQuery>& queries, size_t per_query_k,
                     double dedup_threshold = kDefaultDedupThreshold);

inline constexpr double kDefaultMembershipTau = 0.5;

// Image i joins cluster k iff |alpha_k| >= tau * max_j |alpha_j|; all-zero
// codes join nothing and empty clusters are dropped. Clusters come back in
// atom order with members in input order.
std::vector<Cluster> AssignClusters(const std::vector<SparseCode>& codes,
                                    const std::vector<std::string>& ids,
                                    double tau = kDefaultMembershipTau);

struct DeliberationBatch {
  int round = 0;
  size_t atom_id = 0;
  std::vector<std::string> image_ids;
  std::map<std::string, std::string> summaries;
  // Every sampled image, with its (possibly empty) summary.
  std::vector<std::string> sampled_ids;
  double epsilon = 0.0;
  // False when the batch came from the final-eps fallback.
  bool reached_target = false;

  bool operator==(const DeliberationBatch&) const = default;
};

struct MiningOptions {
  size_t sample_size = 25;
  AdaptiveDbscanOptions dbscan;
  size_t concurrency = 1;
};

// Samples unexplored members of the cluster, asks for ambiguity summaries,
// embeds the non-empty ones and keeps the tightest coherent group.
// kClusterExhausted with fewer than five unexplored members;
// kAllSummariesEmpty when every sampled image is judged clear-cut.
DeliberationBatch MineAmbiguities(const Gateway& gateway, const ImageIndex& index,
                                  const ConceptDefinition& def, const Cluster& cluster,
                                  const std::set<std::string>& labeled, uint64_t seed, int round,
                                  const MiningOptions& options = {});

struct MinerConfig {
  size_t queries_per_refresh = 4;
  size_t per_query_k = kMinPerQueryK;
  double dedup_threshold = kDefaultDedupThreshold;
  DictionaryOptions dictionary;
  double tau = kDefaultMembershipTau;
  SelectionStrategy strategy = SelectionStrategy::kWeighted;
  double ucb_beta = kDefaultUcbBeta;
  MiningOptions mining;
  // Regenerate the pool when fewer unexplored images remain.
  size_t refresh_threshold = 50;
};

// Candidate pool with its clustering and selection state. Regenerated when
// the unexplored part runs low.
struct MiningPool {
  int generation = 0;
  std::vector<BorderlineQuery> queries;
  std::vector<std::string> ids;
  std::vector<std::string> warnings;
  std::vector<double> mse_trace;
  std::vector<Cluster> clusters;
  BanditHistory history;
  // Atom id -> definition version under which the cluster yielded no
  // ambiguity; such clusters are skipped until the definition changes.
  std::map<size_t, int> unambiguous_at;

  bool operator==(const MiningPool&) const = default;
};

// Fresh pool: AMBIGUOUS queries distinct from `prior_queries`, retrieval,
// dictionary learning with K = min(K, pool size) and cluster assignment.
MiningPool BuildMiningPool(const Gateway& gateway, const ImageIndex& index,
                           const ConceptDefinition& def,
                           const std::vector<BorderlineQuery>& prior_queries,
                           const MinerConfig& config, uint64_t seed, int generation);

size_t UnexploredCount(const std::vector<std::string>& ids, const std::set<std::string>& labeled);

void to_json(nlohmann::json& j, const BorderlineQuery& q);
void from_json(const nlohmann::json& j, BorderlineQuery& q);
void to_json(nlohmann::json& j, const DeliberationBatch& b);
void from_json(const nlohmann::json& j, DeliberationBatch& b);
void to_json(nlohmann::json& j, const MiningPool& p);
void from_json(const nlohmann::json& j, MiningPool& p);
void to_json(nlohmann::json& j, const MinerConfig& c);
void from_json(const nlohmann::json& j, MinerConfig& c);

}  // namespace deliberate

#endif  // DELIBERATE_BORDERLINE_H_
