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
#include <regex>

#include <gtest/gtest.h>

#include "deliberate/classifier.h"
#include "deliberate/error.h"
#include "deliberate/refinement.h"
#include "test_util.h"

namespace deliberate {
namespace {

using testing::FnGateway;
using testing::Record;

// Candidate k's definition carries "[k=K]" in its description. For each
// candidate, `positives[k]` lists image ids it rates 5; everything else
// gets 1, and ids in `broken[k]` get an unparseable reply.
struct TableClassifier {
  std::map<size_t, std::set<std::string>> positives;
  std::map<size_t, std::set<std::string>> broken;

  std::unique_ptr<Gateway> Make() {
    return FnGateway([this](const PromptRequest& req, const std::string&) {
      static const std::regex marker(R"(\[k=(\d+)\])");
      std::smatch m;
      const std::string& def = req.variables.at("definition");
      const size_t k = std::regex_search(def, m, marker) ? std::stoul(m[1]) : 0;
      const std::string& id = req.variables.at("caption");
      if (broken[k].contains(id)) return std::string("no rating");
      const char* rating = positives[k].contains(id) ? "5" : "1";
      return std::string("<decision>") + rating + "</decision><summary>s</summary>";
    });
  }
};

CandidateDefinition Candidate(size_t k) {
  CandidateDefinition c;
  c.definition = MakeDefinition("c", "[k=" + std::to_string(k) + "]");
  c.definition.version = k == 0 ? 0 : 1;
  c.index = k;
  for (size_t i = 0; i < k % 3; ++i) c.edits.push_back(DefinitionEdit{});
  return c;
}

ImageIndex IdIndex(const std::vector<std::string>& ids) {
  std::vector<ImageRecord> records;
  for (const auto& id : ids) records.push_back(Record(id, TrigramEmbedding(id), id));
  return ImageIndex(records);
}

std::vector<std::string> Range(const std::string& prefix, size_t n) {
  std::vector<std::string> out;
  for (size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

std::set<std::string> Prefix(const std::vector<std::string>& ids, size_t n) {
  return std::set<std::string>(ids.begin(), ids.begin() + static_cast<long>(n));
}

TEST(SelectCandidate, SurvivorsAndWinner) {
  // Batch: 10 positives. Candidate k rates the first p_k of them positive,
  // so batch F1 = 2p / (10 + p): inc 6, c1 8, c2 9, c3 5, c4 7, c5 6.
  const auto batch = Range("b", 10);
  const auto others = Range("o", 10);
  TableClassifier table;
  const size_t p[] = {6, 8, 9, 5, 7, 6};
  for (size_t k = 0; k < 6; ++k) table.positives[k] = Prefix(batch, p[k]);
  // Outside the batch, c2 also fires on five negatives.
  for (size_t i = 0; i < 5; ++i) table.positives[2].insert(others[i]);
  auto gateway = table.Make();
  Classifier classifier(*gateway);
  std::vector<std::string> all_ids = batch;
  all_ids.insert(all_ids.end(), others.begin(), others.end());
  const ImageIndex index = IdIndex(all_ids);
  std::map<std::string, bool> batch_labels, all_labels;
  for (const auto& id : batch) batch_labels[id] = all_labels[id] = true;
  for (const auto& id : others) all_labels[id] = false;

  std::vector<CandidateDefinition> cands;
  for (size_t k = 0; k < 6; ++k) cands.push_back(Candidate(k));
  const Selection s = SelectCandidate(classifier, index, cands, batch_labels, all_labels);
  EXPECT_EQ(s.survivors, (std::vector<size_t>{2, 1, 4}));
  EXPECT_EQ(s.winner, 1u);
  ASSERT_EQ(s.batch_table.size(), 6u);
  EXPECT_NEAR(s.batch_table[2].f1, 18.0 / 19.0, 1e-12);
  std::set<size_t> finalists;
  for (const F1Entry& e : s.all_table) finalists.insert(e.index);
  EXPECT_EQ(finalists, (std::set<size_t>{0, 1, 2, 4}));
  EXPECT_NEAR(*cands[1].f1_on_all, 16.0 / 18.0, 1e-12);
  EXPECT_NEAR(*cands[2].f1_on_all, 0.75, 1e-12);
  EXPECT_NEAR(*cands[0].f1_on_all, 0.75, 1e-12);
  EXPECT_FALSE(cands[3].f1_on_all.has_value());
}

TEST(SelectCandidate, TiesKeepIncumbent) {
  const auto batch = Range("b", 6);
  TableClassifier table;
  for (size_t k = 0; k < 4; ++k) table.positives[k] = Prefix(batch, 4);
  auto gateway = table.Make();
  Classifier classifier(*gateway);
  const ImageIndex index = IdIndex(batch);
  std::map<std::string, bool> labels;
  for (const auto& id : batch) labels[id] = true;
  std::vector<CandidateDefinition> cands;
  for (size_t k = 0; k < 4; ++k) cands.push_back(Candidate(k));
  const Selection s = SelectCandidate(classifier, index, cands, labels, labels);
  EXPECT_EQ(s.winner, 0u);
  // Equal batch F1 ranks the incumbent first, then fewer edits, then lower
  // index.
  EXPECT_EQ(s.survivors, (std::vector<size_t>{0, 3, 1}));
}

TEST(SelectCandidate, FailingCandidatesAreDisqualified) {
  const auto batch = Range("b", 6);
  TableClassifier table;
  table.positives[0] = Prefix(batch, 2);
  table.positives[1] = Prefix(batch, 6);
  table.broken[1] = Prefix(batch, 4);
  table.positives[2] = Prefix(batch, 5);
  table.broken[2] = Prefix(batch, 1);
  auto gateway = table.Make();
  Classifier classifier(*gateway);
  const ImageIndex index = IdIndex(batch);
  std::map<std::string, bool> labels;
  for (const auto& id : batch) labels[id] = true;
  std::vector<CandidateDefinition> cands = {Candidate(0), Candidate(1), Candidate(2)};
  const Selection s = SelectCandidate(classifier, index, cands, labels, labels);
  EXPECT_TRUE(s.batch_table[1].disqualified);
  EXPECT_FALSE(s.batch_table[2].disqualified);
  EXPECT_EQ(s.batch_table[2].failures, 1u);
  // F1 over the five successes, four of them predicted positive.
  EXPECT_NEAR(s.batch_table[2].f1, 8.0 / 9.0, 1e-12);
  EXPECT_EQ(s.survivors, (std::vector<size_t>{2, 0}));
  EXPECT_EQ(s.winner, 2u);
}

TEST(SelectCandidate, NeverRegressesOnLabeledSet) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 60; ++trial) {
    const auto batch = Range("b", 8);
    const auto prior = Range("p", 12);
    std::vector<std::string> all_ids = batch;
    all_ids.insert(all_ids.end(), prior.begin(), prior.end());
    std::map<std::string, bool> batch_labels, all_labels;
    for (const auto& id : all_ids) {
      all_labels[id] = gen() % 2;
      if (id[0] == 'b') batch_labels[id] = all_labels[id];
    }
    TableClassifier table;
    for (size_t k = 0; k < 6; ++k) {
      for (const auto& id : all_ids) {
        if (gen() % 2) table.positives[k].insert(id);
      }
    }
    auto gateway = table.Make();
    Classifier classifier(*gateway);
    const ImageIndex index = IdIndex(all_ids);
    std::vector<CandidateDefinition> cands;
    for (size_t k = 0; k < 6; ++k) cands.push_back(Candidate(k));
    const Selection s = SelectCandidate(classifier, index, cands, batch_labels, all_labels);
    ASSERT_GE(*cands[s.winner].f1_on_all, *cands[0].f1_on_all);
    ASSERT_TRUE(s.winner == 0 ||
                std::find(s.survivors.begin(), s.survivors.end(), s.winner) != s.survivors.end());
    ASSERT_LE(s.survivors.size(), 3u);
  }
}

TEST(ParseRefinementEdits, AddAndEditBlocks) {
  const ConceptDefinition def = testing::HealthyFoodDefinition();
  ParsedFields fields;
  fields.lists["concept"] = {
      {{"parent-signal", "Healthy food"}, {"type", "Negative"}, {"new-name", "Creamy"},
       {"new-description", "Images dominated by creamy sauces."}},
      {{"name", "processed food"}, {"new-description", "Images show fast food."}}};
  const auto edits = ParseRefinementEdits(def, fields);
  ASSERT_EQ(edits.size(), 2u);
  EXPECT_EQ(edits[0].op, EditOp::kAddSignal);
  EXPECT_EQ(edits[0].target_id, "n0001");
  EXPECT_EQ(edits[0].kind, NodeKind::kNegative);
  EXPECT_EQ(edits[0].provenance, Provenance::kRefined);
  EXPECT_EQ(edits[1].op, EditOp::kEditDescription);
  EXPECT_EQ(edits[1].target_id, "n0004");
  EXPECT_EQ(edits[1].old_description, FindNode(def.root, "n0004")->description);
  const ConceptDefinition next = ApplyEdits(def, edits);
  EXPECT_EQ(next.version, 1);

  ParsedFields unknown;
  unknown.lists["concept"] = {{{"name", "Desserts"}, {"new-description", "x"}}};
  EXPECT_THROW(ParseRefinementEdits(def, unknown), Error);
  ParsedFields bad_type;
  bad_type.lists["concept"] = {{{"parent-signal", "Healthy food"}, {"type", "maybe"},
                                {"new-name", "x"}, {"new-description", "y"}}};
  EXPECT_THROW(ParseRefinementEdits(def, bad_type), Error);
}

const char kRefineAddFried[] =
    "<keypoints>fried food is out</keypoints><concept><parent-signal>Healthy food</parent-signal>"
    "<type>negative</type><new-name>Fried</new-name><new-description>Images of deep-fried "
    "food.</new-description></concept>";

TEST(GenerateCandidates, FailuresAreDroppedWithWarnings) {
  auto gateway = FnGateway([](const PromptRequest& req, const std::string&) -> std::string {
    switch (req.decoding.sample_index) {
      case 0: return kRefineAddFried;
      case 1: throw Error(ErrorCode::kBackendRefusal, "no");
      case 2: return "<keypoints>nothing</keypoints>";
      case 3: return "<concept><name>Unknown</name><new-description>x</new-description></concept>";
      default: return kRefineAddFried;
    }
  });
  const CandidateSet set =
      GenerateCandidates(*gateway, testing::HealthyFoodDefinition(), {{"img1", "fried is bad"}});
  ASSERT_EQ(set.candidates.size(), 3u);
  EXPECT_EQ(set.candidates[0].index, 0u);
  EXPECT_TRUE(set.candidates[0].edits.empty());
  EXPECT_EQ(set.candidates[1].index, 1u);
  EXPECT_EQ(set.candidates[2].index, 5u);
  EXPECT_EQ(set.warnings.size(), 3u);

  auto down = FnGateway([](const PromptRequest&, const std::string&) -> std::string {
    throw Error(ErrorCode::kTransport, "down");
  }, 0);
  const CandidateSet none = GenerateCandidates(*down, testing::HealthyFoodDefinition(), {});
  EXPECT_EQ(none.candidates.size(), 1u);
  EXPECT_EQ(none.warnings.size(), 5u);
}

TEST(GenerateCandidates, SendsClarificationsAndImageCount) {
  std::map<std::string, std::string> seen;
  auto gateway = FnGateway([&](const PromptRequest& req, const std::string&) {
    seen = req.variables;
    return std::string(kRefineAddFried);
  });
  GenerateCandidates(*gateway, testing::HealthyFoodDefinition(),
                     {{"a", "first reason"}, {"b", "second reason"}});
  EXPECT_EQ(seen.at("clarifications"), "first reason\nsecond reason\n");
  EXPECT_EQ(seen.at("images_num"), "2");
}

TEST(RefineRound, EndToEndWithScriptedModel) {
  // Classifier: images with "fried" in the caption are positive unless the
  // definition excludes fried food.
  auto gateway = FnGateway([](const PromptRequest& req, const std::string&) -> std::string {
    switch (req.template_id) {
      case TemplateId::kArticulate:
        return "<clarification>" + req.variables.at("user_feedback") + "</clarification>";
      case TemplateId::kRefine:
        return req.decoding.sample_index == 2 ? kRefineAddFried : "<keypoints>none</keypoints>";
      case TemplateId::kClassify: {
        const bool excludes = req.variables.at("definition").find("Fried:") != std::string::npos;
        const bool fried = req.variables.at("caption").find("fried") != std::string::npos;
        return std::string("<decision>") + (fried && excludes ? "1" : "5") +
               "</decision><summary>s</summary>";
      }
      default:
        throw Error(ErrorCode::kBackendRefusal, "unexpected");
    }
  });
  Classifier classifier(*gateway);
  std::vector<ImageRecord> records;
  for (int i = 0; i < 6; ++i) {
    const std::string caption = i < 3 ? "fried chicken" : "green salad";
    records.push_back(Record("x" + std::to_string(i), TrigramEmbedding(caption + std::to_string(i)),
                             caption));
  }
  const ImageIndex index(records);
  const ConceptDefinition def = testing::HealthyFoodDefinition();
  std::vector<LabeledExample> examples;
  std::map<std::string, LabeledExample> all;
  for (const auto& r : records) {
    LabeledExample ex;
    ex.image_id = r.id;
    ex.user_label = r.caption != "fried chicken";
    ex.feedback_text = ex.user_label ? "" : "Fried food is not healthy.";
    ex.classifier_at_label = classifier.Classify(def, r);
    ex.round = 1;
    examples.push_back(ex);
    all[r.id] = ex;
  }
  const RefinementOutcome out = RefineRound(*gateway, classifier, index, def, 1, examples, all);
  EXPECT_TRUE(out.report.changed);
  EXPECT_EQ(out.definition.version, 1);
  EXPECT_EQ(out.report.winner, 3u);
  EXPECT_NEAR(out.report.incumbent_f1_all, 2.0 * 3 / (2 * 3 + 3), 1e-12);
  EXPECT_NEAR(out.report.winner_f1_all, 1.0, 1e-12);
  ASSERT_EQ(out.report.rationales.size(), 6u);
  EXPECT_EQ(out.report.rationales[0].clarification, "Fried food is not healthy.");
  EXPECT_NE(RenderDefinition(out.definition).find("- Fried: Images of deep-fried food."),
            std::string::npos);
  const nlohmann::json j = out.report;
  EXPECT_EQ(j.get<RefinementReport>().winner, out.report.winner);
}

TEST(RefineRound, AgreementOnlyRoundKeepsDefinition) {
  auto gateway = FnGateway([](const PromptRequest& req, const std::string&) -> std::string {
    if (req.template_id == TemplateId::kClassify) return "<decision>5</decision><summary>s</summary>";
    if (req.template_id == TemplateId::kRefine) return "<keypoints>none</keypoints>";
    return "<clarification>The owner agrees.</clarification>";
  });
  Classifier classifier(*gateway);
  const ImageIndex index = IdIndex(Range("a", 5));
  const ConceptDefinition def = testing::HealthyFoodDefinition();
  std::vector<LabeledExample> examples;
  std::map<std::string, LabeledExample> all;
  for (const auto& r : index.records()) {
    LabeledExample ex{r.id, true, "", classifier.Classify(def, r), 1};
    examples.push_back(ex);
    all[r.id] = ex;
  }
  const RefinementOutcome out = RefineRound(*gateway, classifier, index, def, 1, examples, all);
  EXPECT_FALSE(out.report.changed);
  EXPECT_EQ(out.definition, def);
  EXPECT_EQ(out.report.resulting_version, 0);
}

TEST(Articulate, SendsRaterAndOwnerContext) {
  std::map<std::string, std::string> seen;
  std::vector<std::string> refs;
  auto gateway = FnGateway([&](const PromptRequest& req, const std::string&) {
    seen = req.variables;
    refs = req.image_refs;
    return std::string("<clarification>Mayo-heavy salads are out.</clarification>");
  });
  LabeledExample ex;
  ex.image_id = "img1";
  ex.user_label = false;
  ex.feedback_text = "Too much mayo.";
  ex.classifier_at_label.rating.value = 4;
  ex.classifier_at_label.label = true;
  ex.classifier_at_label.rationale = "A salad.";
  const Rationale r = ArticulateFeedback(*gateway, testing::HealthyFoodDefinition(), ex,
                                         Record("img1", {1.0}, "potato salad"));
  EXPECT_EQ(r.clarification, "Mayo-heavy salads are out.");
  EXPECT_EQ(seen.at("rater_decision"), "4 (in-scope)");
  EXPECT_EQ(seen.at("ground_truth"), "out-of-scope");
  EXPECT_EQ(seen.at("user_feedback"), "Too much mayo.");
  EXPECT_EQ(seen.at("rater_summary"), "A salad.");
  EXPECT_EQ(refs, (std::vector<std::string>{"synthetic://img1"}));
}

}  // namespace
}  // namespace deliberate
