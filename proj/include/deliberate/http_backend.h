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

#ifndef DELIBERATE_HTTP_BACKEND_H_
#define DELIBERATE_HTTP_BACKEND_H_

#include <string>
#include <vector>

#include "deliberate/gateway.h"

namespace deliberate {

// Generic JSON-over-HTTP model backend.
//
//   POST {base}/v1/complete   {"model", "template_id", "prompt", "temperature",
//                              "max_output_tokens", "seed", "images"}
//                          -> {"text": "..."}
//   POST {base}/v1/embed      {"model", "texts": [...]}
//                          -> {"embeddings": [[...], ...]}
//   POST {base}/v1/embed_image {"model", "uri"} -> {"embedding": [...]}
//
// The API key is read from the configured environment variable at
// construction and sent as a bearer token. 429 and 5xx responses and
// connection failures are retryable (kTransport); other non-200 statuses are
// refusals.
class HttpJsonBackend : public Backend {
 public:
  explicit HttpJsonBackend(const BackendConfig& config);

  std::string Complete(const PromptRequest& request, const std::string& prompt) override;
  std::vector<std::vector<double>> EmbedText(const std::vector<std::string>& texts) override;
  bool SupportsImageEmbedding() const override { return true; }
  std::vector<double> EmbedImage(const ImageRecord& image) override;
  size_t embedding_dim() const override { return config_.embedding_dim; }

 private:
  nlohmann::json Post(const std::string& route, const nlohmann::json& body);

  BackendConfig config_;
  std::string host_;  // scheme://host:port
  std::string base_path_;
  std::string api_key_;
};

}  // namespace deliberate

#endif  // DELIBERATE_HTTP_BACKEND_H_
