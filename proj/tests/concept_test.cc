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

#include <random>
#include <set>

#include <gtest/gtest.h>

#include "deliberate/concept.h"
#include "deliberate/error.h"
#include "deliberate/formula.h"
#include "deliberate/simulator.h"
#include "test_util.h"
#include "tree_oracle.h"

namespace deliberate {
namespace {

using testing::HealthyFoodDefinition;
using testing::Node;
using testing::RandomTree;
using testing::ToFormula;

TEST(Render, WorkedDefinitionHasBothBlocksInIdOrder) {
  const std::string text = RenderDefinition(HealthyFoodDefinition());
  const size_t pos_header = text.find("This includes any of the following visual elements:");
  const size_t neg_header = text.find("However, the following visual elements are excluded:");
  ASSERT_NE(pos_header, std::string::npos);
  ASSERT_NE(neg_header, std::string::npos);
  EXPECT_LT(pos_header, neg_header);
  const size_t dish = text.find("- Healthy Dish: Images show a prepared meal");
  const size_t bev = text.find("- Healthy Beverages: Images show healthy beverages");
  const size_t processed = text.find("- Processed Food:");
  const size_t raw = text.find("- Raw Ingredients:");
  const size_t focus = text.find("- Not Focus on Food:");
  ASSERT_NE(dish, std::string::npos);
  EXPECT_LT(pos_header, dish);
  EXPECT_LT(dish, bev);
  EXPECT_LT(bev, neg_header);
  EXPECT_LT(neg_header, processed);
  EXPECT_LT(processed, raw);
  EXPECT_LT(raw, focus);
}

TEST(Render, EmptyGroupsOmitHeaders) {
  ConceptDefinition def = MakeDefinition("dogs", "Pictures of dogs.");
  def.root.children.push_back(Node("n0001", "dog", "A dog is visible.", NodeKind::kNecessary));
  const std::string text = RenderDefinition(def);
  EXPECT_EQ(text.find("This includes"), std::string::npos);
  EXPECT_EQ(text.find("However"), std::string::npos);
  EXPECT_NE(text.find("dog: A dog is visible."), std::string::npos);
}

TEST(Render, Deterministic) {
  const ConceptDefinition def = HealthyFoodDefinition();
  EXPECT_EQ(RenderDefinition(def), RenderDefinition(def));
  ConceptDefinition shuffled = def;
  std::reverse(shuffled.root.children[0].children.begin(), shuffled.root.children[0].children.end());
  EXPECT_EQ(RenderDefinition(def), RenderDefinition(shuffled));
}

TEST(Render, IgnoresNonAcceptedNodes) {
  ConceptDefinition def = HealthyFoodDefinition();
  def.root.children[0].children.push_back(Node("n0007", "Desserts", "Cakes.", NodeKind::kNegative,
                                               {}, NodeStatus::kProposed));
  def.root.children[0].children.push_back(Node("n0008", "Soup", "Bowls of soup.",
                                               NodeKind::kPositive, {}, NodeStatus::kRejected));
  const std::string before = RenderDefinition(def);
  EXPECT_EQ(before, RenderDefinition(HealthyFoodDefinition()));
  def.root.children[0].children[6].description = "Anything sweet.";
  EXPECT_EQ(before, RenderDefinition(def));
}

TEST(Render, MixedChildrenIsStructuralError) {
  ConceptDefinition def = HealthyFoodDefinition();
  def.root.children[0].children.push_back(Node("n0009", "x", "y", NodeKind::kNecessary));
  try {
    RenderDefinition(def);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidation);
    EXPECT_NE(std::string(e.what()).find("n0001"), std::string::npos);
  }
}

TEST(Render, ParsesBackToTheSameTree) {
  const ConceptDefinition def = HealthyFoodDefinition();
  const ConceptDefinition parsed = ParseRenderedDefinition(RenderDefinition(def));
  EXPECT_EQ(parsed.concept_name, def.concept_name);
  ASSERT_EQ(parsed.root.children.size(), 1u);
  const ConceptNode& unit = parsed.root.children[0];
  EXPECT_EQ(unit.name, "Healthy food");
  ASSERT_EQ(unit.children.size(), 5u);
  for (size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(unit.children[i].name, def.root.children[0].children[i].name);
    EXPECT_EQ(unit.children[i].description, def.root.children[0].children[i].description);
    EXPECT_EQ(unit.children[i].kind, def.root.children[0].children[i].kind);
  }
  EXPECT_EQ(RenderDefinition(parsed), RenderDefinition(def));
}

TEST(Semantics, ConjunctionOfNecessaryLeaves) {
  ConceptNode root = Node("root", "c", "", NodeKind::kNecessary,
                          {Node("a", "a", "", NodeKind::kNecessary),
                           Node("b", "b", "", NodeKind::kNecessary)});
  EXPECT_TRUE(EvaluateSemantics(root, {{"a", true}, {"b", true}}));
  EXPECT_FALSE(EvaluateSemantics(root, {{"a", true}, {"b", false}}));
}

TEST(Semantics, NegativeVetoesPositive) {
  ConceptNode unit = Node("u", "u", "", NodeKind::kNecessary,
                          {Node("p", "p", "", NodeKind::kPositive),
                           Node("n", "n", "", NodeKind::kNegative)});
  EXPECT_FALSE(EvaluateSemantics(unit, {{"p", true}, {"n", true}}));
  EXPECT_TRUE(EvaluateSemantics(unit, {{"p", true}, {"n", false}}));
}

TEST(Semantics, EmptyDisjunctionIsFalse) {
  ConceptNode unit = Node("u", "u", "", NodeKind::kNecessary,
                          {Node("p1", "p1", "", NodeKind::kPositive),
                           Node("p2", "p2", "", NodeKind::kPositive)});
  EXPECT_FALSE(EvaluateSemantics(unit, {{"p1", false}, {"p2", false}}));
}

TEST(Semantics, MissingJudgmentNamesLeaf) {
  ConceptNode unit = Node("u", "u", "", NodeKind::kNecessary,
                          {Node("p1", "salad", "", NodeKind::kPositive)});
  try {
    EvaluateSemantics(unit, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("p1"), std::string::npos);
  }
}

TEST(Semantics, AgreesWithTruthTableOracle) {
  std::mt19937_64 gen(11);
  int trees = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const ConceptNode root = RandomTree(gen);
    const Formula oracle = Formula::Parse(ToFormula(root));
    const std::vector<std::string> vars = RequiredJudgments(root);
    const std::set<std::string> expected(oracle.predicates().begin(), oracle.predicates().end());
    ASSERT_EQ(std::set<std::string>(vars.begin(), vars.end()), expected) << oracle.text();
    if (vars.size() > 8) continue;
    ++trees;
    for (uint32_t mask = 0; mask < (1u << vars.size()); ++mask) {
      std::map<std::string, bool> judgments;
      nlohmann::json attrs = nlohmann::json::object();
      for (size_t i = 0; i < vars.size(); ++i) {
        judgments[vars[i]] = (mask >> i) & 1u;
        attrs[vars[i]] = static_cast<int>((mask >> i) & 1u);
      }
      ASSERT_EQ(EvaluateSemantics(root, judgments), oracle.Evaluate(attrs)) << oracle.text();
    }
  }
  EXPECT_GT(trees, 300);
}

TEST(ApplyEdits, EditDescriptionBumpsVersionAndKeepsInput) {
  const ConceptDefinition def = HealthyFoodDefinition();
  DefinitionEdit e;
  e.op = EditOp::kEditDescription;
  e.target_id = "n0004";
  e.old_description = def.root.children[0].children[2].description;
  e.new_description = "Images show fast food.";
  const ConceptDefinition next = ApplyEdits(def, {e});
  EXPECT_EQ(next.version, 1);
  EXPECT_EQ(next.parent_version, 0);
  EXPECT_EQ(FindNode(next.root, "n0004")->description, "Images show fast food.");
  EXPECT_EQ(next.edit_log.size(), 1u);
  EXPECT_EQ(def, HealthyFoodDefinition());
}

TEST(ApplyEdits, AddNegativeSignalAppearsInExclusions) {
  ConceptDefinition def = HealthyFoodDefinition();
  def.root.children[0].children.pop_back();
  DefinitionEdit e;
  e.op = EditOp::kAddSignal;
  e.target_id = "n0001";
  e.kind = NodeKind::kNegative;
  e.new_name = "Not Focus on Food";
  e.new_description = "Food is not the main subject.";
  const ConceptDefinition next = ApplyEdits(def, {e});
  const std::string text = RenderDefinition(next);
  EXPECT_GT(text.find("- Not Focus on Food: Food is not the main subject."),
            text.find("However, the following visual elements are excluded:"));
  EXPECT_FALSE(next.edit_log[0].new_node_id.empty());
}

TEST(ApplyEdits, StaleEditRejected) {
  const ConceptDefinition def = HealthyFoodDefinition();
  DefinitionEdit e;
  e.op = EditOp::kEditDescription;
  e.target_id = "n0004";
  e.old_description = "something else";
  e.new_description = "x";
  try {
    ApplyEdits(def, {e});
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kStaleEdit);
  }
}

TEST(ApplyEdits, UnknownNodeRejected) {
  DefinitionEdit e;
  e.op = EditOp::kSetStatus;
  e.target_id = "n9999";
  try {
    ApplyEdits(HealthyFoodDefinition(), {e});
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kUnknownNode);
  }
}

TEST(Validate, WorkedDefinitionIsClean) { EXPECT_TRUE(Validate(HealthyFoodDefinition()).empty()); }

TEST(Validate, TooManyUnits) {
  ConceptDefinition def = MakeDefinition("c", "");
  for (int i = 1; i <= 4; ++i) {
    def.root.children.push_back(Node("n000" + std::to_string(i), "u", "", NodeKind::kNecessary));
  }
  const auto v = Validate(def);
  ASSERT_FALSE(v.empty());
  EXPECT_TRUE(std::any_of(v.begin(), v.end(), [](const Violation& x) { return x.rule == "unit-count"; }));
}

TEST(Validate, MixedChildren) {
  ConceptDefinition def = HealthyFoodDefinition();
  def.root.children[0].children.push_back(Node("n0009", "x", "y", NodeKind::kNecessary));
  const auto v = Validate(def);
  EXPECT_TRUE(std::any_of(v.begin(), v.end(), [](const Violation& x) {
    return x.rule == "mixed-children" && x.node_id == "n0001";
  }));
}

TEST(Validate, DepthLimit) {
  ConceptDefinition def = HealthyFoodDefinition();
  ConceptNode& dish = def.root.children[0].children[0];
  dish.children.push_back(Node("n0010", "a", "", NodeKind::kPositive,
                               {Node("n0011", "b", "", NodeKind::kPositive)}));
  EXPECT_FALSE(Validate(def).empty());
  EXPECT_TRUE(Validate(def, 4).empty());
}

TEST(ConceptJson, RoundTrip) {
  ConceptDefinition def = HealthyFoodDefinition();
  DefinitionEdit e;
  e.op = EditOp::kAddSignal;
  e.target_id = "n0001";
  e.kind = NodeKind::kNegative;
  e.new_name = "creamy";
  e.new_description = "Creamy sauces.";
  def = ApplyEdits(def, {e});
  const nlohmann::json j = def;
  EXPECT_EQ(j.get<ConceptDefinition>(), def);
  EXPECT_EQ(j.at("schema_version").get<int>(), kDefinitionSchemaVersion);
}

TEST(Markdown, MirrorsBlocks) {
  const std::string md = RenderMarkdown(HealthyFoodDefinition());
  EXPECT_NE(md.find("**This includes any of the following visual elements:**"), std::string::npos);
  EXPECT_NE(md.find("*Healthy Dish*"), std::string::npos);
}

}  // namespace
}  // namespace deliberate
