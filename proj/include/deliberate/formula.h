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

#ifndef DELIBERATE_FORMULA_H_
#define DELIBERATE_FORMULA_H_

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace deliberate {

// Boolean expression over attribute predicates, e.g.
// "vegetable AND NOT (fried OR creamy)". Operators are AND, OR, NOT
// (case-insensitive) with the usual precedence NOT > AND > OR.
class Formula {
 public:
  static Formula Parse(std::string_view text);

  // An attribute is true when it is boolean true, a non-zero number, or the
  // string "1"/"true". A missing attribute is a kInvalidArgument error naming
  // it.
  bool Evaluate(const nlohmann::json& attributes) const;

  // Predicate names in first-appearance order.
  const std::vector<std::string>& predicates() const { return predicates_; }

  struct Literal {
    std::string predicate;
    bool negated = false;
  };
  // The top-level conjunction flattened into literals, or nullopt-equivalent
  // empty when the formula is not a conjunction of literals.
  std::vector<Literal> ConjunctiveLiterals() const;

  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
  std::vector<std::string> predicates_;
};

bool AttributeTruth(const nlohmann::json& attributes, const std::string& name);

}  // namespace deliberate

#endif  // DELIBERATE_FORMULA_H_
