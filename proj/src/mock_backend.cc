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

#include "deliberate/mock_backend.h"

#include <fstream>

#include "deliberate/simulator.h"
#include "deliberate/text_embedding.h"

namespace deliberate {
namespace {

ErrorCode ParseErrorCodeName(const std::string& name) {
  for (ErrorCode code : {ErrorCode::kTransport, ErrorCode::kBackendRefusal,
                         ErrorCode::kParse}) {
    if (ErrorCodeName(code) == name) return code;
  }
  throw Error(ErrorCode::kConfig, "mock rule error must be TRANSPORT, BACKEND_REFUSAL or PARSE");
}

}  // namespace

bool VariablePredicate::Matches(const PromptRequest& request) const {
  const auto it = request.variables.find(variable);
  if (it == request.variables.end()) return false;
  const std::string& value = it->second;
  if (equals && value != *equals) return false;
  if (contains && value.find(*contains) == std::string::npos) return false;
  if (not_contains && value.find(*not_contains) != std::string::npos) return false;
  return true;
}

bool MockRule::Matches(const PromptRequest& request) const {
  if (template_id && *template_id != request.template_id) return false;
  if (image_contains) {
    bool any = false;
    for (const std::string& ref : request.image_refs) {
      if (ref.find(*image_contains) != std::string::npos) any = true;
    }
    if (!any) return false;
  }
  for (const VariablePredicate& p : when) {
    if (!p.Matches(request)) return false;
  }
  return true;
}

MockScript ParseMockScript(const nlohmann::json& j) {
  MockScript script;
  try {
    const std::string fallback = j.value("fallback", std::string("simulate"));
    if (fallback == "simulate") {
      script.fallback = MockFallback::kSimulate;
    } else if (fallback == "error") {
      script.fallback = MockFallback::kError;
    } else {
      throw Error(ErrorCode::kConfig, "mock fallback must be 'simulate' or 'error'");
    }
    for (const nlohmann::json& r : j.value("rules", nlohmann::json::array())) {
      MockRule rule;
      if (r.contains("template") && r["template"] != "*") {
        rule.template_id = ParseTemplateId(r["template"].get<std::string>());
      }
      for (const nlohmann::json& w : r.value("when", nlohmann::json::array())) {
        VariablePredicate p;
        p.variable = w.at("var").get<std::string>();
        if (w.contains("equals")) p.equals = w["equals"].get<std::string>();
        if (w.contains("contains")) p.contains = w["contains"].get<std::string>();
        if (w.contains("not_contains")) p.not_contains = w["not_contains"].get<std::string>();
        rule.when.push_back(std::move(p));
      }
      if (r.contains("image_contains")) {
        rule.image_contains = r["image_contains"].get<std::string>();
      }
      if (r.contains("response")) rule.responses.push_back(r["response"].get<std::string>());
      if (r.contains("responses")) {
        for (const auto& s : r["responses"]) rule.responses.push_back(s.get<std::string>());
      }
      if (r.contains("error")) rule.error = ParseErrorCodeName(r["error"].get<std::string>());
      if (rule.responses.empty() && !rule.error) {
        throw Error(ErrorCode::kConfig, "mock rule needs a response, responses or error");
      }
      script.rules.push_back(std::move(rule));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("mock script: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    throw Error(ErrorCode::kConfig, std::string("mock script: ") + e.what());
  }
  return script;
}

MockScript LoadMockScript(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot open mock script '" + path.string() + "'");
  try {
    return ParseMockScript(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, "mock script '" + path.string() + "': " + e.what());
  }
}

MockBackend::MockBackend(MockScript script, std::shared_ptr<const Simulator> simulator,
                         size_t embedding_dim)
    : script_(std::move(script)), simulator_(std::move(simulator)), dim_(embedding_dim) {}

std::string MockBackend::Complete(const PromptRequest& request, const std::string&) {
  for (const MockRule& rule : script_.rules) {
    if (!rule.Matches(request)) continue;
    if (rule.error) {
      throw Error(*rule.error, "scripted " + std::string(ErrorCodeName(*rule.error)) +
                                   " for template " +
                                   std::string(TemplateName(request.template_id)));
    }
    return rule.responses[request.decoding.sample_index % rule.responses.size()];
  }
  if (script_.fallback == MockFallback::kSimulate && simulator_ != nullptr) {
    return simulator_->Respond(request);
  }
  throw Error(ErrorCode::kBackendRefusal,
              "no mock rule matches template " + std::string(TemplateName(request.template_id)));
}

std::vector<std::vector<double>> MockBackend::EmbedText(const std::vector<std::string>& texts) {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const std::string& t : texts) out.push_back(TrigramEmbedding(t, dim_));
  return out;
}

}  // namespace deliberate
