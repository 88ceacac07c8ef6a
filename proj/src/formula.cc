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

#include "deliberate/formula.h"

#include <algorithm>
#include <cctype>

#include "deliberate/error.h"

namespace deliberate {

struct Formula::Node {
  enum class Op { kVar, kNot, kAnd, kOr } op = Op::kVar;
  std::string name;
  std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Formula::Node>;
using Op = Formula::Node::Op;

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) { Tokenize(); }

  NodePtr ParseAll() {
    NodePtr node = ParseOr();
    if (pos_ != tokens_.size()) Fail("unexpected '" + tokens_[pos_] + "'");
    return node;
  }

 private:
  void Tokenize() {
    size_t i = 0;
    while (i < text_.size()) {
      const char c = text_[i];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
      } else if (c == '(' || c == ')') {
        tokens_.emplace_back(1, c);
        ++i;
      } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
        size_t j = i;
        while (j < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[j])) ||
                                    text_[j] == '_' || text_[j] == '-')) {
          ++j;
        }
        tokens_.emplace_back(text_.substr(i, j - i));
        i = j;
      } else {
        Fail(std::string("unexpected character '") + c + "'");
      }
    }
  }

  static std::string Upper(const std::string& s) {
    std::string out = s;
    for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
  }

  bool Accept(std::string_view keyword) {
    if (pos_ < tokens_.size() && Upper(tokens_[pos_]) == keyword) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr ParseOr() {
    NodePtr left = ParseAnd();
    while (Accept("OR")) left = Binary(Op::kOr, left, ParseAnd());
    return left;
  }

  NodePtr ParseAnd() {
    NodePtr left = ParseUnary();
    while (Accept("AND")) left = Binary(Op::kAnd, left, ParseUnary());
    return left;
  }

  NodePtr ParseUnary() {
    if (Accept("NOT")) {
      auto node = std::make_shared<Formula::Node>();
      node->op = Op::kNot;
      node->args.push_back(ParseUnary());
      return node;
    }
    if (Accept("(")) {
      NodePtr inner = ParseOr();
      if (!Accept(")")) Fail("missing ')'");
      return inner;
    }
    if (pos_ >= tokens_.size()) Fail("unexpected end of formula");
    const std::string& token = tokens_[pos_];
    const std::string upper = Upper(token);
    if (upper == "AND" || upper == "OR" || token == ")") Fail("unexpected '" + token + "'");
    ++pos_;
    auto node = std::make_shared<Formula::Node>();
    node->op = Op::kVar;
    node->name = token;
    return node;
  }

  static NodePtr Binary(Op op, NodePtr a, NodePtr b) {
    auto node = std::make_shared<Formula::Node>();
    node->op = op;
    node->args = {std::move(a), std::move(b)};
    return node;
  }

  [[noreturn]] void Fail(const std::string& why) const {
    throw Error(ErrorCode::kConfig,
                "formula '" + std::string(text_) + "': " + why);
  }

  std::string_view text_;
  std::vector<std::string> tokens_;
  size_t pos_ = 0;
};

void CollectPredicates(const Formula::Node& node, std::vector<std::string>& out) {
  if (node.op == Op::kVar) {
    if (std::find(out.begin(), out.end(), node.name) == out.end()) out.push_back(node.name);
    return;
  }
  for (const auto& arg : node.args) CollectPredicates(*arg, out);
}

bool Eval(const Formula::Node& node, const nlohmann::json& attributes) {
  switch (node.op) {
    case Op::kVar: return AttributeTruth(attributes, node.name);
    case Op::kNot: return !Eval(*node.args[0], attributes);
    case Op::kAnd: {
      const bool a = Eval(*node.args[0], attributes);
      const bool b = Eval(*node.args[1], attributes);
      return a && b;
    }
    case Op::kOr: {
      const bool a = Eval(*node.args[0], attributes);
      const bool b = Eval(*node.args[1], attributes);
      return a || b;
    }
  }
  return false;
}

bool FlattenConjunction(const Formula::Node& node, std::vector<Formula::Literal>& out) {
  switch (node.op) {
    case Op::kVar:
      out.push_back({node.name, false});
      return true;
    case Op::kNot:
      if (node.args[0]->op != Op::kVar) return false;
      out.push_back({node.args[0]->name, true});
      return true;
    case Op::kAnd:
      return FlattenConjunction(*node.args[0], out) && FlattenConjunction(*node.args[1], out);
    case Op::kOr:
      return false;
  }
  return false;
}

}  // namespace

bool AttributeTruth(const nlohmann::json& attributes, const std::string& name) {
  if (!attributes.is_object() || !attributes.contains(name)) {
    throw Error(ErrorCode::kInvalidArgument, "image lacks attribute '" + name + "'");
  }
  const nlohmann::json& v = attributes.at(name);
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number()) return v.get<double>() != 0.0;
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    return s == "1" || s == "true" || s == "TRUE" || s == "True";
  }
  return false;
}

Formula Formula::Parse(std::string_view text) {
  Formula f;
  f.text_ = std::string(text);
  f.root_ = Parser(f.text_).ParseAll();
  CollectPredicates(*f.root_, f.predicates_);
  return f;
}

bool Formula::Evaluate(const nlohmann::json& attributes) const {
  return Eval(*root_, attributes);
}

std::vector<Formula::Literal> Formula::ConjunctiveLiterals() const {
  std::vector<Literal> out;
  if (!FlattenConjunction(*root_, out)) return {};
  return out;
}

}  // namespace deliberate
