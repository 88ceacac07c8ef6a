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

#include "deliberate/gateway.h"

#include <cmath>
#include <fstream>
#include <thread>

#include "deliberate/error.h"
#include "deliberate/http_backend.h"
#include "deliberate/kernels.h"
#include "deliberate/mock_backend.h"

namespace deliberate {

PromptRequest MakeRequest(TemplateId id, std::map<std::string, std::string> vars,
                          std::vector<std::string> image_refs) {
  PromptRequest req;
  req.template_id = id;
  req.variables = std::move(vars);
  req.image_refs = std::move(image_refs);
  req.decoding.temperature = GetTemplate(id).default_temperature;
  return req;
}

void BackendConfig::Check() const {
  if (kind == BackendKind::kHttpJson) {
    if (endpoint.empty()) {
      throw Error(ErrorCode::kConfig, "HTTP_JSON backend requires an endpoint");
    }
    if (auth_env.empty()) {
      throw Error(ErrorCode::kConfig,
                  "HTTP_JSON backend requires the name of an auth environment variable");
    }
  }
  if (max_retries < 0) throw Error(ErrorCode::kConfig, "max_retries must be >= 0");
  if (embedding_dim == 0) throw Error(ErrorCode::kConfig, "embedding_dim must be > 0");
}

void to_json(nlohmann::json& j, const BackendConfig& c) {
  j = nlohmann::json{{"kind", c.kind == BackendKind::kMock ? "MOCK" : "HTTP_JSON"},
                     {"endpoint", c.endpoint},
                     {"auth_env", c.auth_env},
                     {"model_name", c.model_name},
                     {"timeout_ms", c.timeout_ms},
                     {"max_retries", c.max_retries},
                     {"rng_seed", c.rng_seed},
                     {"embedding_dim", c.embedding_dim},
                     {"mock_script", c.mock_script}};
}

void from_json(const nlohmann::json& j, BackendConfig& c) {
  const std::string kind = j.value("kind", std::string("MOCK"));
  if (kind == "MOCK" || kind == "mock") {
    c.kind = BackendKind::kMock;
  } else if (kind == "HTTP_JSON" || kind == "http") {
    c.kind = BackendKind::kHttpJson;
  } else {
    throw Error(ErrorCode::kConfig, "unknown backend kind '" + kind + "'");
  }
  c.endpoint = j.value("endpoint", std::string());
  c.auth_env = j.value("auth_env", std::string());
  c.model_name = j.value("model_name", std::string());
  c.timeout_ms = j.value("timeout_ms", 30000);
  c.max_retries = j.value("max_retries", 3);
  c.rng_seed = j.value("rng_seed", uint64_t{0});
  c.embedding_dim = j.value("embedding_dim", size_t{256});
  c.mock_script = j.value("mock_script", std::string());
}

BackendConfig LoadBackendConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot open backend config '" + path.string() + "'");
  try {
    BackendConfig c = nlohmann::json::parse(in).get<BackendConfig>();
    c.Check();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, "backend config '" + path.string() + "': " + e.what());
  }
}

std::vector<double> Backend::EmbedImage(const ImageRecord& image) {
  throw Error(ErrorCode::kInvalidArgument,
              "image '" + image.id + "' has no stored embedding and the backend cannot embed images");
}

Gateway::Gateway(std::unique_ptr<Backend> backend, RetryPolicy policy, uint64_t seed)
    : backend_(std::move(backend)),
      policy_(std::move(policy)),
      jitter_rng_(DeriveSeed(seed, "gateway-backoff")) {
  if (!policy_.sleep) {
    policy_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
}

std::chrono::milliseconds Gateway::Backoff(int attempt) const {
  double jitter;
  {
    std::lock_guard<std::mutex> lock(rng_mu_);
    jitter = jitter_rng_.UniformReal();
  }
  const double base = static_cast<double>(policy_.initial_backoff.count()) *
                      std::pow(policy_.factor, attempt - 1);
  return std::chrono::milliseconds(static_cast<int64_t>(base * (1.0 + 0.25 * jitter)));
}

ModelResponse Gateway::Complete(const PromptRequest& request) const {
  const std::string prompt = RenderPrompt(request.template_id, request.variables);
  const TagSchema& schema = GetTemplate(request.template_id).schema;
  int attempt = 0;
  while (true) {
    ++attempt;
    std::string raw;
    try {
      raw = backend_->Complete(request, prompt);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kTransport && attempt <= policy_.max_retries) {
        policy_.sleep(Backoff(attempt));
        continue;
      }
      throw;
    }
    ModelResponse response;
    response.parsed = ParseXmlFields(raw, schema);
    response.raw_text = std::move(raw);
    response.attempt_count = attempt;
    return response;
  }
}

std::vector<QueryResult> SearchText(const Gateway& gateway, const ImageIndex& index,
                                    const std::string& query, size_t k) {
  if (query.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "search query is empty");
  }
  if (k == 0) return {};
  return index.Search(gateway.EmbedText({query}).front(), k);
}

std::vector<std::vector<double>> Gateway::EmbedText(
    const std::vector<std::string>& texts) const {
  if (texts.empty()) return {};
  auto vectors = backend_->EmbedText(texts);
  if (vectors.size() != texts.size()) {
    throw Error(ErrorCode::kTransport, "backend returned " + std::to_string(vectors.size()) +
                                           " embeddings for " + std::to_string(texts.size()) +
                                           " texts");
  }
  for (auto& v : vectors) {
    if (kernels::NormalizeInPlace(v) == 0.0) {
      throw Error(ErrorCode::kParse, "backend returned a zero embedding");
    }
  }
  return vectors;
}

std::vector<double> Gateway::EmbedImage(const ImageRecord& image) const {
  std::vector<double> v = image.embedding;
  if (v.empty()) {
    if (!backend_->SupportsImageEmbedding()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "image '" + image.id +
                      "' has no stored embedding and the backend cannot embed images");
    }
    v = backend_->EmbedImage(image);
  }
  if (kernels::NormalizeInPlace(v) == 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "image '" + image.id + "' has a zero embedding");
  }
  return v;
}

std::unique_ptr<Backend> MakeBackend(const BackendConfig& config,
                                     std::shared_ptr<const Simulator> simulator) {
  config.Check();
  if (config.kind == BackendKind::kHttpJson) return std::make_unique<HttpJsonBackend>(config);
  MockScript script;
  if (!config.mock_script.empty()) script = LoadMockScript(config.mock_script);
  return std::make_unique<MockBackend>(std::move(script), std::move(simulator),
                                       config.embedding_dim);
}

std::unique_ptr<Gateway> MakeGateway(const BackendConfig& config,
                                     std::shared_ptr<const Simulator> simulator) {
  RetryPolicy policy;
  policy.max_retries = config.max_retries;
  return std::make_unique<Gateway>(MakeBackend(config, std::move(simulator)),
                                   std::move(policy), config.rng_seed);
}

}  // namespace deliberate
