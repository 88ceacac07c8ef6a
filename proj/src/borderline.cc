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

#include "deliberate/borderline.h"

#include <algorithm>
#include <exception>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "deliberate/error.h"
#include "deliberate/parallel.h"
#include "deliberate/rng.h"
#include "deliberate/text_embedding.h"

namespace deliberate {
namespace {

// Queries differing only in case, spacing or punctuation are duplicates.
std::string Key(std::string_view text) { return NormalizeText(text); }

}  // namespace

std::string_view ToString(ImageType t) {
  switch (t) {
    case ImageType::kInScope: return "in-scope";
    case ImageType::kAmbiguous: return "ambiguous";
    case ImageType::kOutOfScope: return "out-of-scope";
  }
  return "ambiguous";
}

ImageType ParseImageType(std::string_view text) {
  for (auto t : {ImageType::kInScope, ImageType::kAmbiguous, ImageType::kOutOfScope}) {
    if (ToString(t) == text) return t;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown image type '" + std::string(text) + "'");
}

std::vector<BorderlineQuery> GenerateQueries(const Gateway& gateway, const ConceptDefinition& def,
                                             const std::vector<BorderlineQuery>& prior, size_t n,
                                             ImageType type, int retries) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "query count must be at least 1");
  std::unordered_set<std::string> seen;
  std::string previous;
  for (const BorderlineQuery& q : prior) {
    seen.insert(Key(q.text));
    previous += "- " + q.text + "\n";
  }
  const std::string rendered = RenderDefinition(def);
  std::vector<BorderlineQuery> out;
  for (int attempt = 0; attempt <= retries && out.size() < n; ++attempt) {
    PromptRequest request =
        MakeRequest(TemplateId::kGenerateQueries,
                    {{"definition", rendered},
                     {"previous_descriptions", previous},
                     {"num_descriptions", std::to_string(n - out.size())},
                     {"image_type", std::string(ToString(type))}});
    request.decoding.sample_index = static_cast<uint64_t>(attempt);
    const ModelResponse response = gateway.Complete(request);
    for (const FieldRecord& rec : response.parsed.lists.at("description")) {
      const std::string& text = rec.at("description");
      const std::string key = Key(text);
      if (key.empty() || !seen.insert(key).second) continue;
      out.push_back({text, type});
      previous += "- " + text + "\n";
      if (out.size() == n) break;
    }
  }
  if (out.size() < n) {
    throw Error(ErrorCode::kDuplicateExhausted,
                "only " + std::to_string(out.size()) + " of " + std::to_string(n) +
                    " new queries after " + std::to_string(retries) + " retries");
  }
  return out;
}

PoolResult BuildPool(const Gateway& gateway, const ImageIndex& index,
                     const std::vector<BorderlineQuery>& queries, size_t per_query_k,
                     double dedup_threshold) {
  if (index.size() == 0) throw Error(ErrorCode::kManifest, "image index is empty");
  PoolResult result;
  if (per_query_k < kMinPerQueryK || per_query_k > kMaxPerQueryK) {
    result.warnings.push_back("per-query k=" + std::to_string(per_query_k) +
                              " lies outside the recommended range [50, 100]");
    spdlog::warn("{}", result.warnings.back());
  }
  std::vector<std::string> ids;
  std::unordered_set<std::string> seen;
  for (const BorderlineQuery& q : queries) {
    for (const QueryResult& r : SearchText(gateway, index, q.text, per_query_k)) {
      if (seen.insert(r.image_id).second) ids.push_back(r.image_id);
    }
  }
  result.ids = index.Dedup(ids, dedup_threshold);
  if (result.ids.size() < kMinBatchSize) {
    throw Error(ErrorCode::kPoolTooSmall,
                "candidate pool has " + std::to_string(result.ids.size()) +
                    " images after deduplication; generate more queries or raise per-query k");
  }
  return result;
}

std::vector<Cluster> AssignClusters(const std::vector<SparseCode>& codes,
                                    const std::vector<std::string>& ids, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "tau must lie in (0, 1]");
  if (codes.size() != ids.size()) {
    throw Error(ErrorCode::kInvalidArgument, "codes and ids differ in length");
  }
  size_t k_count = 0;
  for (const SparseCode& c : codes) k_count = std::max(k_count, c.alpha.size());
  std::vector<Cluster> clusters(k_count);
  for (size_t k = 0; k < k_count; ++k) clusters[k].atom_id = k;
  for (size_t i = 0; i < codes.size(); ++i) {
    double peak = 0.0;
    for (double a : codes[i].alpha) peak = std::max(peak, std::abs(a));
    if (peak == 0.0) continue;
    for (size_t k = 0; k < codes[i].alpha.size(); ++k) {
      if (std::abs(codes[i].alpha[k]) >= tau * peak) clusters[k].member_ids.push_back(ids[i]);
    }
  }
  std::erase_if(clusters, [](const Cluster& c) { return c.member_ids.empty(); });
  return clusters;
}

size_t UnexploredCount(const std::vector<std::string>& ids, const std::set<std::string>& labeled) {
  return static_cast<size_t>(
      std::count_if(ids.begin(), ids.end(), [&](const std::string& id) { return !labeled.contains(id); }));
}

DeliberationBatch MineAmbiguities(const Gateway& gateway, const ImageIndex& index,
                                  const ConceptDefinition& def, const Cluster& cluster,
                                  const std::set<std::string>& labeled, uint64_t seed, int round,
                                  const MiningOptions& options) {
  std::vector<std::string> unexplored;
  for (const std::string& id : cluster.member_ids) {
    if (!labeled.contains(id)) unexplored.push_back(id);
  }
  std::sort(unexplored.begin(), unexplored.end());
  unexplored.erase(std::unique(unexplored.begin(), unexplored.end()), unexplored.end());
  if (unexplored.size() < kMinBatchSize) {
    throw Error(ErrorCode::kClusterExhausted,
                "cluster " + std::to_string(cluster.atom_id) + " has only " +
                    std::to_string(unexplored.size()) + " unexplored images");
  }
  Rng rng(seed);
  const auto picks =
      rng.SampleWithoutReplacement(unexplored.size(), std::min(options.sample_size, unexplored.size()));
  std::vector<std::string> sampled;
  for (size_t p : picks) sampled.push_back(unexplored[p]);
  std::sort(sampled.begin(), sampled.end());

  const std::string rendered = RenderDefinition(def);
  std::vector<std::string> summaries(sampled.size());
  std::vector<std::exception_ptr> failures(sampled.size());
  ParallelFor(sampled.size(), options.concurrency, [&](size_t i) {
    const ImageRecord& image = index.Get(sampled[i]);
    try {
      const ModelResponse r = gateway.Complete(MakeRequest(
          TemplateId::kAmbiguity, {{"definition", rendered}, {"caption", image.caption}},
          {image.uri}));
      summaries[i] = r.parsed.values.at("summary");
    } catch (...) {
      failures[i] = std::current_exception();
    }
  });
  for (const std::exception_ptr& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  DeliberationBatch batch;
  batch.round = round;
  batch.atom_id = cluster.atom_id;
  batch.sampled_ids = sampled;
  std::vector<std::string> ids;
  std::vector<std::string> texts;
  for (size_t i = 0; i < sampled.size(); ++i) {
    if (summaries[i].empty()) continue;
    ids.push_back(sampled[i]);
    texts.push_back(summaries[i]);
  }
  if (ids.empty()) {
    throw Error(ErrorCode::kAllSummariesEmpty,
                "no sampled image of cluster " + std::to_string(cluster.atom_id) +
                    " raised an ambiguity");
  }
  const AdaptiveDbscanResult found = AdaptiveDbscan(gateway.EmbedText(texts), options.dbscan);
  batch.epsilon = found.epsilon;
  batch.reached_target = found.reached_target;
  std::vector<size_t> members = found.members;
  // Without any dense pair, fall back to the first ambiguous image alone.
  if (members.empty()) members.push_back(0);
  for (size_t m : members) {
    batch.image_ids.push_back(ids[m]);
    batch.summaries[ids[m]] = texts[m];
  }
  return batch;
}

MiningPool BuildMiningPool(const Gateway& gateway, const ImageIndex& index,
                           const ConceptDefinition& def,
                           const std::vector<BorderlineQuery>& prior_queries,
                           const MinerConfig& config, uint64_t seed, int generation) {
  MiningPool pool;
  pool.generation = generation;
  pool.queries = GenerateQueries(gateway, def, prior_queries, config.queries_per_refresh,
                                 ImageType::kAmbiguous);
  PoolResult built = BuildPool(gateway, index, pool.queries, config.per_query_k,
                               config.dedup_threshold);
  pool.ids = std::move(built.ids);
  pool.warnings = std::move(built.warnings);
  std::vector<std::vector<double>> vectors;
  vectors.reserve(pool.ids.size());
  for (const std::string& id : pool.ids) {
    const auto e = index.Embedding(id);
    vectors.emplace_back(e.begin(), e.end());
  }
  DictionaryOptions dict = config.dictionary;
  dict.atoms = std::min(dict.atoms, vectors.size());
  dict.sparsity = std::min(dict.sparsity, dict.atoms);
  dict.seed = seed;
  const DictionaryResult learned = LearnDictionary(vectors, dict);
  pool.mse_trace = learned.mse_trace;
  pool.clusters = AssignClusters(learned.codes, pool.ids, config.tau);
  return pool;
}

void to_json(nlohmann::json& j, const BorderlineQuery& q) {
  j = nlohmann::json{{"text", q.text}, {"image_type", ToString(q.image_type)}};
}

void from_json(const nlohmann::json& j, BorderlineQuery& q) {
  q.text = j.at("text").get<std::string>();
  q.image_type = ParseImageType(j.at("image_type").get<std::string>());
}

void to_json(nlohmann::json& j, const DeliberationBatch& b) {
  j = nlohmann::json{{"round", b.round},
                     {"atom_id", b.atom_id},
                     {"image_ids", b.image_ids},
                     {"summaries", b.summaries},
                     {"sampled_ids", b.sampled_ids},
                     {"epsilon", b.epsilon},
                     {"reached_target", b.reached_target}};
}

void from_json(const nlohmann::json& j, DeliberationBatch& b) {
  b.round = j.at("round").get<int>();
  b.atom_id = j.at("atom_id").get<size_t>();
  b.image_ids = j.at("image_ids").get<std::vector<std::string>>();
  b.summaries = j.at("summaries").get<std::map<std::string, std::string>>();
  b.sampled_ids = j.value("sampled_ids", std::vector<std::string>{});
  b.epsilon = j.value("epsilon", 0.0);
  b.reached_target = j.value("reached_target", false);
}

void to_json(nlohmann::json& j, const MiningPool& p) {
  nlohmann::json unambiguous = nlohmann::json::array();
  for (const auto& [atom, version] : p.unambiguous_at) {
    unambiguous.push_back({{"atom_id", atom}, {"version", version}});
  }
  nlohmann::json scores = nlohmann::json::array();
  for (const Cluster& c : p.clusters) {
    scores.push_back({{"atom_id", c.atom_id}, {"score", ScoreCluster(c)}});
  }
  j = nlohmann::json{{"generation", p.generation}, {"queries", p.queries},
                     {"ids", p.ids},               {"warnings", p.warnings},
                     {"mse_trace", p.mse_trace},   {"clusters", p.clusters},
                     {"scores", scores},           {"history", p.history},
                     {"unambiguous_at", unambiguous}};
}

void from_json(const nlohmann::json& j, MiningPool& p) {
  p.generation = j.at("generation").get<int>();
  p.queries = j.at("queries").get<std::vector<BorderlineQuery>>();
  p.ids = j.at("ids").get<std::vector<std::string>>();
  p.warnings = j.value("warnings", std::vector<std::string>{});
  p.mse_trace = j.at("mse_trace").get<std::vector<double>>();
  p.clusters = j.at("clusters").get<std::vector<Cluster>>();
  p.history = j.at("history").get<BanditHistory>();
  p.unambiguous_at.clear();
  for (const auto& u : j.value("unambiguous_at", nlohmann::json::array())) {
    p.unambiguous_at[u.at("atom_id").get<size_t>()] = u.at("version").get<int>();
  }
}

void to_json(nlohmann::json& j, const MinerConfig& c) {
  j = nlohmann::json{{"queries_per_refresh", c.queries_per_refresh},
                     {"per_query_k", c.per_query_k},
                     {"dedup_threshold", c.dedup_threshold},
                     {"atoms", c.dictionary.atoms},
                     {"sparsity", c.dictionary.sparsity},
                     {"iterations", c.dictionary.iterations},
                     {"tau", c.tau},
                     {"strategy", ToString(c.strategy)},
                     {"ucb_beta", c.ucb_beta},
                     {"sample_size", c.mining.sample_size},
                     {"refresh_threshold", c.refresh_threshold}};
}

void from_json(const nlohmann::json& j, MinerConfig& c) {
  c = MinerConfig{};
  c.queries_per_refresh = j.value("queries_per_refresh", c.queries_per_refresh);
  c.per_query_k = j.value("per_query_k", c.per_query_k);
  c.dedup_threshold = j.value("dedup_threshold", c.dedup_threshold);
  c.dictionary.atoms = j.value("atoms", c.dictionary.atoms);
  c.dictionary.sparsity = j.value("sparsity", c.dictionary.sparsity);
  c.dictionary.iterations = j.value("iterations", c.dictionary.iterations);
  c.tau = j.value("tau", c.tau);
  c.strategy = ParseSelectionStrategy(j.value("strategy", std::string("WEIGHTED")));
  c.ucb_beta = j.value("ucb_beta", c.ucb_beta);
  c.mining.sample_size = j.value("sample_size", c.mining.sample_size);
  c.refresh_threshold = j.value("refresh_threshold", c.refresh_threshold);
}

}  // namespace deliberate
