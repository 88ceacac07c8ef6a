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

#include "deliberate/http_backend.h"

#include <cstdlib>

#include "deliberate/error.h"
#include "httplib.h"

namespace deliberate {

HttpJsonBackend::HttpJsonBackend(const BackendConfig& config) : config_(config) {
  config_.Check();
  const std::string& url = config_.endpoint;
  const size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kConfig, "endpoint '" + url + "' has no scheme");
  }
  if (url.substr(0, scheme_end) != "http") {
    throw Error(ErrorCode::kConfig,
                "endpoint '" + url + "': only http:// is supported in this build");
  }
  const size_t path_start = url.find('/', scheme_end + 3);
  host_ = url.substr(0, path_start);
  base_path_ = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
  const char* key = std::getenv(config_.auth_env.c_str());
  if (key == nullptr) {
    throw Error(ErrorCode::kConfig,
                "environment variable '" + config_.auth_env + "' is not set");
  }
  api_key_ = key;
}

nlohmann::json HttpJsonBackend::Post(const std::string& route, const nlohmann::json& body) {
  httplib::Client client(host_);
  const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  const httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};
  const std::string path = base_path_ + route;
  auto result = client.Post(path, headers, body.dump(), "application/json");
  if (!result) {
    throw Error(ErrorCode::kTransport,
                "POST " + host_ + path + " failed: " + httplib::to_string(result.error()));
  }
  const int status = result->status;
  if (status == 429 || status >= 500) {
    throw Error(ErrorCode::kTransport,
                "POST " + path + " returned " + std::to_string(status));
  }
  if (status != 200) {
    throw Error(ErrorCode::kBackendRefusal,
                "POST " + path + " returned " + std::to_string(status) + ": " + result->body);
  }
  try {
    return nlohmann::json::parse(result->body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, "backend reply is not JSON: " + std::string(e.what()))
        .set_raw_text(result->body);
  }
}

std::string HttpJsonBackend::Complete(const PromptRequest& request,
                                      const std::string& prompt) {
  const nlohmann::json body{{"model", config_.model_name},
                            {"template_id", TemplateName(request.template_id)},
                            {"prompt", prompt},
                            {"temperature", request.decoding.temperature},
                            {"max_output_tokens", request.decoding.max_output_tokens},
                            {"seed", request.decoding.sample_index},
                            {"images", request.image_refs}};
  const nlohmann::json reply = Post("/v1/complete", body);
  if (!reply.contains("text") || !reply["text"].is_string()) {
    throw Error(ErrorCode::kParse, "backend reply lacks a \"text\" string")
        .set_raw_text(reply.dump());
  }
  return reply["text"].get<std::string>();
}

std::vector<std::vector<double>> HttpJsonBackend::EmbedText(
    const std::vector<std::string>& texts) {
  const nlohmann::json reply =
      Post("/v1/embed", {{"model", config_.model_name}, {"texts", texts}});
  try {
    return reply.at("embeddings").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, "bad embed reply: " + std::string(e.what()))
        .set_raw_text(reply.dump());
  }
}

std::vector<double> HttpJsonBackend::EmbedImage(const ImageRecord& image) {
  const nlohmann::json reply =
      Post("/v1/embed_image", {{"model", config_.model_name}, {"uri", image.uri}});
  try {
    return reply.at("embedding").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, "bad embed_image reply: " + std::string(e.what()))
        .set_raw_text(reply.dump());
  }
}

}  // namespace deliberate
