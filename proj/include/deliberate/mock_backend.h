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

#ifndef DELIBERATE_MOCK_BACKEND_H_
#define DELIBERATE_MOCK_BACKEND_H_

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "deliberate/error.h"
#include "deliberate/gateway.h"
#include "json.hpp"

namespace deliberate {

class Simulator;

struct VariablePredicate {
  std::string variable;
  std::optional<std::string> equals;
  std::optional<std::string> contains;
  std::optional<std::string> not_contains;

  bool Matches(const PromptRequest& request) const;
};

// One scripted reply. Matches on template and variable predicates; answers
// with `response`, or `responses[sample_index % n]`, or raises `error`.
struct MockRule {
  std::optional<TemplateId> template_id;  // unset: any template
  std::vector<VariablePredicate> when;
  std::optional<std::string> image_contains;
  std::vector<std::string> responses;
  std::optional<ErrorCode> error;

  bool Matches(const PromptRequest& request) const;
};

enum class MockFallback {
  // Defer to the simulator when one is attached, else refuse.
  kSimulate,
  // Refuse every unmatched request.
  kError,
};

struct MockScript {
  std::vector<MockRule> rules;
  MockFallback fallback = MockFallback::kSimulate;
};

MockScript ParseMockScript(const nlohmann::json& j);
MockScript LoadMockScript(const std::filesystem::path& path);

// Deterministic offline backend: first matching rule wins, then the fallback.
// Text embeddings use character-trigram hashing. Pure, so concurrent calls
// are safe.
class MockBackend : public Backend {
 public:
  MockBackend(MockScript script, std::shared_ptr<const Simulator> simulator,
              size_t embedding_dim = 256);

  std::string Complete(const PromptRequest& request, const std::string& prompt) override;
  std::vector<std::vector<double>> EmbedText(const std::vector<std::string>& texts) override;
  size_t embedding_dim() const override { return dim_; }

 private:
  MockScript script_;
  std::shared_ptr<const Simulator> simulator_;
  size_t dim_;
};

}  // namespace deliberate

#endif  // DELIBERATE_MOCK_BACKEND_H_
