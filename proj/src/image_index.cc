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

#include "deliberate/image_index.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "deliberate/error.h"
#include "deliberate/kernels.h"

namespace deliberate {

ImageIndex::ImageIndex(std::vector<ImageRecord> records)
    : records_(std::move(records)) {
  for (size_t i = 0; i < records_.size(); ++i) {
    ImageRecord& r = records_[i];
    if (r.id.empty()) {
      throw Error(ErrorCode::kManifest, "record " + std::to_string(i) + " has no id");
    }
    if (r.embedding.empty()) {
      throw Error(ErrorCode::kManifest, "record '" + r.id + "' has no embedding");
    }
    if (i == 0) dim_ = r.embedding.size();
    if (r.embedding.size() != dim_) {
      throw Error(ErrorCode::kManifest,
                  "record '" + r.id + "' has dimension " +
                      std::to_string(r.embedding.size()) + ", expected " +
                      std::to_string(dim_));
    }
    if (kernels::NormalizeInPlace(r.embedding) == 0.0) {
      throw Error(ErrorCode::kManifest, "record '" + r.id + "' has a zero embedding");
    }
    if (!by_id_.emplace(r.id, i).second) {
      throw Error(ErrorCode::kManifest, "duplicate image id '" + r.id + "'");
    }
    if (!r.uri.empty()) by_uri_.emplace(r.uri, i);
  }
  matrix_.reserve(records_.size() * dim_);
  for (const ImageRecord& r : records_) {
    matrix_.insert(matrix_.end(), r.embedding.begin(), r.embedding.end());
  }
}

size_t ImageIndex::RowOf(std::string_view id) const {
  const auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) {
    throw Error(ErrorCode::kNotFound, "unknown image id '" + std::string(id) + "'");
  }
  return it->second;
}

const ImageRecord& ImageIndex::Get(std::string_view id) const {
  return records_[RowOf(id)];
}

const ImageRecord* ImageIndex::Find(std::string_view id) const {
  const auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &records_[it->second];
}

const ImageRecord* ImageIndex::FindByUri(std::string_view uri) const {
  const auto it = by_uri_.find(std::string(uri));
  return it == by_uri_.end() ? nullptr : &records_[it->second];
}

std::span<const double> ImageIndex::Embedding(std::string_view id) const {
  return {matrix_.data() + RowOf(id) * dim_, dim_};
}

std::vector<QueryResult> ImageIndex::Search(std::span<const double> query,
                                            size_t k) const {
  if (query.size() != dim_) {
    throw Error(ErrorCode::kInvalidArgument,
                "query dimension " + std::to_string(query.size()) +
                    " does not match index dimension " + std::to_string(dim_));
  }
  if (k == 0 || records_.empty()) return {};
  std::vector<double> q(query.begin(), query.end());
  if (kernels::NormalizeInPlace(q) == 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "query vector is zero");
  }
  std::vector<double> scores(records_.size());
  kernels::Gemv(matrix_, dim_, q, scores);
  std::vector<size_t> order(records_.size());
  std::iota(order.begin(), order.end(), size_t{0});
  const auto better = [&](size_t a, size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return records_[a].id < records_[b].id;
  };
  k = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<ptrdiff_t>(k),
                    order.end(), better);
  std::vector<QueryResult> out;
  out.reserve(k);
  for (size_t i = 0; i < k; ++i) {
    out.push_back({records_[order[i]].id, std::clamp(scores[order[i]], -1.0, 1.0)});
  }
  return out;
}

std::vector<std::string> ImageIndex::Dedup(const std::vector<std::string>& ids,
                                           double threshold) const {
  std::vector<std::string> unique;
  {
    std::vector<std::string> seen;
    for (const std::string& id : ids) {
      RowOf(id);
      if (std::find(seen.begin(), seen.end(), id) == seen.end()) {
        seen.push_back(id);
        unique.push_back(id);
      }
    }
  }
  std::vector<std::string> visit = unique;
  std::sort(visit.begin(), visit.end());
  std::vector<size_t> kept_rows;
  std::vector<std::string> kept_ids;
  for (const std::string& id : visit) {
    const auto row = Embedding(id);
    bool duplicate = false;
    for (size_t kept : kept_rows) {
      const double sim = kernels::Dot(row, {matrix_.data() + kept * dim_, dim_});
      if (sim >= threshold) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) {
      kept_rows.push_back(RowOf(id));
      kept_ids.push_back(id);
    }
  }
  std::sort(kept_ids.begin(), kept_ids.end());
  std::vector<std::string> out;
  for (const std::string& id : unique) {
    if (std::binary_search(kept_ids.begin(), kept_ids.end(), id)) out.push_back(id);
  }
  return out;
}

std::vector<ImageRecord> ParseManifest(std::istream& in) {
  std::vector<ImageRecord> records;
  std::string line;
  size_t line_no = 0;
  size_t dim = 0;
  std::unordered_set<std::string> ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "manifest line " + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kManifest, where + ": malformed JSON: " + e.what());
    }
    try {
      ImageRecord r;
      r.id = j.at("id").get<std::string>();
      r.uri = j.value("uri", std::string());
      r.caption = j.value("caption", std::string());
      r.embedding = j.at("embedding").get<std::vector<double>>();
      if (j.contains("attributes")) r.attributes = j.at("attributes");
      if (records.empty()) dim = r.embedding.size();
      if (r.embedding.size() != dim) {
        throw Error(ErrorCode::kManifest,
                    where + ": embedding dimension " +
                        std::to_string(r.embedding.size()) + " differs from " +
                        std::to_string(dim));
      }
      if (!ids.insert(r.id).second) {
        throw Error(ErrorCode::kManifest, where + ": duplicate id '" + r.id + "'");
      }
      records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kManifest, where + ": " + e.what());
    }
  }
  return records;
}

ImageIndex LoadManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kManifest, "cannot open manifest '" + path.string() + "'");
  }
  return ImageIndex(ParseManifest(in));
}

void to_json(nlohmann::json& j, const ImageRecord& r) {
  j = nlohmann::json{{"id", r.id},
                     {"uri", r.uri},
                     {"caption", r.caption},
                     {"embedding", r.embedding}};
  if (!r.attributes.empty()) j["attributes"] = r.attributes;
}

void WriteManifest(const std::filesystem::path& path,
                   const std::vector<ImageRecord>& records) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  for (const ImageRecord& r : records) out << nlohmann::json(r).dump() << "\n";
}

}  // namespace deliberate
