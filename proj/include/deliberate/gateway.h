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

#ifndef DELIBERATE_GATEWAY_H_
#define DELIBERATE_GATEWAY_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "deliberate/image_index.h"
#include "deliberate/prompts.h"
#include "deliberate/rng.h"
#include "deliberate/xml_fields.h"
#include "json.hpp"

namespace deliberate {

struct DecodingParams {
  double temperature = 0.0;
  int max_output_tokens = 2048;
  // Distinguishes independent samples of the same prompt (sent as the seed).
  uint64_t sample_index = 0;
};

struct PromptRequest {
  TemplateId template_id = TemplateId::kClassify;
  std::map<std::string, std::string> variables;
  // Image URIs or inline payloads; at most one for classification.
  std::vector<std::string> image_refs;
  DecodingParams decoding;
};

// Request with the template's default temperature.
PromptRequest MakeRequest(TemplateId id, std::map<std::string, std::string> vars,
                          std::vector<std::string> image_refs = {});

struct ModelResponse {
  std::string raw_text;
  ParsedFields parsed;
  int attempt_count = 1;
};

enum class BackendKind { kHttpJson, kMock };

struct BackendConfig {
  BackendKind kind = BackendKind::kMock;
  std::string endpoint;
  // Name of the environment variable holding the API key. The key itself is
  // never stored.
  std::string auth_env;
  std::string model_name;
  int timeout_ms = 30000;
  int max_retries = 3;
  uint64_t rng_seed = 0;
  size_t embedding_dim = 256;
  // Mock only: JSON file of scripted rules.
  std::string mock_script;

  // kConfig when an HTTP backend lacks endpoint or auth.
  void Check() const;
};

BackendConfig LoadBackendConfig(const std::filesystem::path& path);
void to_json(nlohmann::json& j, const BackendConfig& c);
void from_json(const nlohmann::json& j, BackendConfig& c);

// A completion/embedding provider. Complete() throws Error(kTransport) for
// retryable failures and Error(kBackendRefusal) for permanent ones.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string Complete(const PromptRequest& request,
                               const std::string& prompt) = 0;
  virtual std::vector<std::vector<double>> EmbedText(
      const std::vector<std::string>& texts) = 0;
  virtual bool SupportsImageEmbedding() const { return false; }
  virtual std::vector<double> EmbedImage(const ImageRecord& image);
  virtual size_t embedding_dim() const = 0;
};

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  double factor = 2.0;
  // Replaced in tests to avoid real sleeps.
  std::function<void(std::chrono::milliseconds)> sleep;
};

// The single chokepoint for model traffic: renders catalog prompts, retries
// transport failures with jittered exponential backoff, and validates the
// response against the template's tag schema.
class Gateway {
 public:
  Gateway(std::unique_ptr<Backend> backend, RetryPolicy policy, uint64_t seed);

  ModelResponse Complete(const PromptRequest& request) const;

  // Unit-norm vectors; empty input gives empty output.
  std::vector<std::vector<double>> EmbedText(const std::vector<std::string>& texts) const;

  // Stored manifest embeddings are returned normalized; otherwise the backend
  // must support image embedding.
  std::vector<double> EmbedImage(const ImageRecord& image) const;

  size_t embedding_dim() const { return backend_->embedding_dim(); }

 private:
  std::chrono::milliseconds Backoff(int attempt) const;

  std::unique_ptr<Backend> backend_;
  RetryPolicy policy_;
  mutable std::mutex rng_mu_;
  mutable Rng jitter_rng_;
};

// Text search over an index: embeds the query through the gateway, then
// exact cosine top-k. An empty query is kInvalidArgument.
std::vector<QueryResult> SearchText(const Gateway& gateway, const ImageIndex& index,
                                    const std::string& query, size_t k);

// Builds the configured backend. `simulator` answers prompts no mock rule
// matches; it may be null.
std::unique_ptr<Backend> MakeBackend(const BackendConfig& config,
                                     std::shared_ptr<const class Simulator> simulator);

std::unique_ptr<Gateway> MakeGateway(const BackendConfig& config,
                                     std::shared_ptr<const class Simulator> simulator);

}  // namespace deliberate

#endif  // DELIBERATE_GATEWAY_H_
