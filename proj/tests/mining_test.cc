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

#include <gtest/gtest.h>

#include "deliberate/bandit.h"
#include "deliberate/borderline.h"
#include "deliberate/dbscan.h"
#include "deliberate/dictionary.h"
#include "deliberate/error.h"
#include "oracles.h"
#include "test_util.h"

namespace deliberate {
namespace {

using testing::ClusteredPoints;
using testing::RandomUnit;

std::vector<std::vector<double>> RandomData(std::mt19937_64& gen, size_t n, size_t dim) {
  std::vector<std::vector<double>> out;
  for (size_t i = 0; i < n; ++i) out.push_back(RandomUnit(gen, dim));
  return out;
}

Eigen::MatrixXd RandomAtoms(std::mt19937_64& gen, size_t p, size_t k) {
  Eigen::MatrixXd w(p, k);
  for (size_t j = 0; j < k; ++j) {
    const auto v = RandomUnit(gen, p);
    for (size_t i = 0; i < p; ++i) w(i, j) = v[i];
  }
  return w;
}

TEST(Omp, ResidualOrthogonalToSupportAtEveryStep) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd w = RandomAtoms(gen, 24, 16);
    const auto x = RandomUnit(gen, 24);
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), 24);
    std::vector<size_t> previous;
    for (size_t s = 1; s <= 8; ++s) {
      const SparseCode code = Omp(w, x, s);
      ASSERT_LE(code.support.size(), s);
      // Greedy selection means each run extends the previous support.
      ASSERT_TRUE(std::equal(previous.begin(), previous.end(), code.support.begin()));
      previous = code.support;
      Eigen::VectorXd recon = Eigen::VectorXd::Zero(24);
      for (size_t k = 0; k < 16; ++k) {
        if (std::find(code.support.begin(), code.support.end(), k) == code.support.end()) {
          ASSERT_EQ(code.alpha[k], 0.0);
        }
        recon += code.alpha[k] * w.col(static_cast<Eigen::Index>(k));
      }
      const Eigen::VectorXd residual = xv - recon;
      for (size_t k : code.support) {
        EXPECT_NEAR(residual.dot(w.col(static_cast<Eigen::Index>(k))), 0.0, 1e-6);
      }
    }
  }
}

TEST(Omp, FullSparsityIsNoWorseThanOneAtom) {
  std::mt19937_64 gen(6);
  const Eigen::MatrixXd w = RandomAtoms(gen, 12, 6);
  const auto data = RandomData(gen, 30, 12);
  std::vector<SparseCode> one, all;
  for (const auto& x : data) {
    one.push_back(Omp(w, x, 1));
    all.push_back(Omp(w, x, 6));
  }
  EXPECT_LE(ReconstructionMse(w, data, all), ReconstructionMse(w, data, one) + 1e-15);
}

TEST(Dictionary, ExactBasisRecoveredWithZeroError) {
  std::mt19937_64 gen(7);
  const size_t p = 16;
  const size_t k = 8;
  Eigen::MatrixXd q = Eigen::MatrixXd::NullaryExpr(p, k, [&] {
    return std::normal_distribution<double>(0, 1)(gen);
  });
  const Eigen::MatrixXd basis = Eigen::HouseholderQR<Eigen::MatrixXd>(q).householderQ() *
                                Eigen::MatrixXd::Identity(p, k);
  std::vector<std::vector<double>> data;
  for (size_t j = 0; j < k; ++j) {
    data.emplace_back(basis.col(static_cast<Eigen::Index>(j)).data(),
                      basis.col(static_cast<Eigen::Index>(j)).data() + p);
  }
  DictionaryOptions options;
  options.atoms = k;
  options.sparsity = 1;
  options.iterations = 5;
  const DictionaryResult r = LearnDictionary(data, options);
  EXPECT_LE(r.mse_trace.back(), 1e-10);
  for (const SparseCode& c : r.codes) {
    ASSERT_EQ(c.support.size(), 1u);
    EXPECT_NEAR(std::abs(c.alpha[c.support[0]]), 1.0, 1e-10);
  }
}

TEST(Dictionary, TraceMonotoneAndColumnsUnit) {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 gen(seed);
    const auto data = ClusteredPoints(gen, 120, 32);
    DictionaryOptions options;
    options.seed = seed;
    const DictionaryResult r = LearnDictionary(data, options);
    ASSERT_EQ(r.mse_trace.size(), options.iterations + 1);
    for (size_t i = 1; i < r.mse_trace.size(); ++i) {
      EXPECT_LE(r.mse_trace[i], r.mse_trace[i - 1] + 1e-9) << "seed " << seed << " iter " << i;
    }
    EXPECT_NEAR(r.mse_trace.back(), ReconstructionMse(r.atoms, data, r.codes), 1e-12);
    for (Eigen::Index j = 0; j < r.atoms.cols(); ++j) {
      EXPECT_NEAR(r.atoms.col(j).norm(), 1.0, 1e-9);
    }
    for (const SparseCode& c : r.codes) EXPECT_LE(c.support.size(), options.sparsity);
    const DictionaryResult again = LearnDictionary(data, options);
    EXPECT_EQ(again.mse_trace, r.mse_trace);
  }
}

TEST(Dictionary, Preconditions) {
  std::mt19937_64 gen(1);
  DictionaryOptions options;
  options.atoms = 10;
  EXPECT_THROW(LearnDictionary(RandomData(gen, 5, 4), options), Error);
  options.atoms = 3;
  options.sparsity = 4;
  EXPECT_THROW(LearnDictionary(RandomData(gen, 5, 4), options), Error);
}

TEST(Dbscan, IdenticalSummariesClusterAtFirstEpsilon) {
  const std::vector<std::vector<double>> points(6, std::vector<double>{0.6, 0.8});
  const AdaptiveDbscanResult r = AdaptiveDbscan(points);
  EXPECT_TRUE(r.reached_target);
  EXPECT_DOUBLE_EQ(r.epsilon, 0.2);
  EXPECT_EQ(r.members, (std::vector<size_t>{0, 1, 2, 3, 4, 5}));
}

TEST(Dbscan, TwoDistantTriplesFallBackToSmallerFirstMember) {
  // cos(angle) = 0.1 gives cosine distance 0.9 between the groups.
  const double angle = std::acos(0.1);
  const std::vector<double> a = {1.0, 0.0};
  const std::vector<double> b = {std::cos(angle), std::sin(angle)};
  const std::vector<std::vector<double>> points = {b, a, b, a, a, b};
  const AdaptiveDbscanResult r = AdaptiveDbscan(points);
  EXPECT_FALSE(r.reached_target);
  EXPECT_DOUBLE_EQ(r.epsilon, 0.8);
  EXPECT_EQ(r.members, (std::vector<size_t>{0, 2, 5}));
}

TEST(Dbscan, NoDensePairGivesEmptyMembers) {
  const std::vector<std::vector<double>> points = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  const AdaptiveDbscanResult r = AdaptiveDbscan(points);
  EXPECT_TRUE(r.members.empty());
  EXPECT_FALSE(r.reached_target);
}

TEST(Dbscan, MatchesSweepOracle) {
  int fallbacks = 0;
  int reached = 0;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 gen(seed + 1000);
    const size_t n = 2 + gen() % 24;
    const size_t dim = 8 + gen() % 249;
    const auto points = ClusteredPoints(gen, n, dim);
    const AdaptiveDbscanResult got = AdaptiveDbscan(points);
    const oracle::SweepResult want = oracle::DbscanSweep(points, 20, 61, 100.0, 2, 5);
    ASSERT_EQ(got.members, want.members) << "seed " << seed;
    ASSERT_EQ(got.reached_target, want.reached_target) << "seed " << seed;
    ASSERT_DOUBLE_EQ(got.epsilon, want.epsilon);
    (got.reached_target ? reached : fallbacks)++;
  }
  EXPECT_GT(fallbacks, 5);
  EXPECT_GT(reached, 5);
}

TEST(Dbscan, RawClustersMatchOracleOnRandomEps) {
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 200; ++trial) {
    const auto points = ClusteredPoints(gen, 2 + gen() % 20, 16);
    const size_t n = points.size();
    const auto flat = CosineDistanceMatrix(points);
    std::vector<std::vector<double>> dist(n, std::vector<double>(n));
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < n; ++j) dist[i][j] = flat[i * n + j];
    }
    const double eps = std::uniform_real_distribution<double>(0.0, 0.9)(gen);
    const size_t min_pts = 1 + gen() % 4;
    ASSERT_EQ(Dbscan(flat, n, eps, min_pts), oracle::Dbscan(dist, eps, min_pts));
  }
}

Cluster MakeCluster(size_t atom, size_t members, ClusterStats stats = {}) {
  Cluster c;
  c.atom_id = atom;
  for (size_t i = 0; i < members; ++i) c.member_ids.push_back("m" + std::to_string(i));
  c.stats = std::move(stats);
  return c;
}

TEST(ClusterScore, WorkedExamples) {
  const ClusterScore s = ScoreCluster(MakeCluster(0, 10, {4, 2, 4, {1, 5, 1, 5}}));
  EXPECT_NEAR(s.mistake_rate, 0.5, 1e-15);
  EXPECT_NEAR(s.feedback_rate, 1.0, 1e-15);
  EXPECT_NEAR(s.exploration_value, 0.6, 1e-15);
  EXPECT_NEAR(s.diversity_rate, 1.0, 1e-15);
  EXPECT_NEAR(s.total, 0.69, 1e-12);
  EXPECT_NEAR(ScoreCluster(MakeCluster(1, 8)).total, 0.15, 1e-12);
  EXPECT_NEAR(ScoreCluster(MakeCluster(2, 3, {3, 0, 0, {4, 4, 4}})).total, 0.0, 1e-15);
  EXPECT_THROW(ScoreCluster(MakeCluster(3, 2, {3, 0, 0, {}})), Error);
}

TEST(ClusterScore, MatchesOracleAndStaysInUnitInterval) {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t members = 1 + gen() % 40;
    ClusterStats st;
    st.explored = gen() % (members + 1);
    st.mistakes = st.explored ? gen() % (st.explored + 1) : 0;
    st.feedback_count = st.explored ? gen() % (st.explored + 1) : 0;
    const size_t nr = gen() % 8;
    for (size_t i = 0; i < nr; ++i) st.ratings.push_back(1 + static_cast<int>(gen() % 5));
    const ClusterScore s = ScoreCluster(MakeCluster(0, members, st));
    const long double want =
        oracle::ClusterScore(st.explored, st.mistakes, st.feedback_count, members, st.ratings);
    ASSERT_NEAR(s.total, static_cast<double>(want), 1e-12);
    ASSERT_GE(s.total, 0.0);
    ASSERT_LE(s.total, 1.0);
  }
}

TEST(Selection, WeightedPicksHighestAndIsOrderInvariant) {
  std::vector<Cluster> clusters = {MakeCluster(3, 8), MakeCluster(1, 10, {4, 2, 4, {1, 5, 1, 5}}),
                                   MakeCluster(0, 5)};
  EXPECT_EQ(SelectCluster(clusters, SelectionStrategy::kWeighted, {}), 1u);
  EXPECT_EQ(RankClusters(clusters, SelectionStrategy::kWeighted, {}),
            (std::vector<size_t>{1, 0, 3}));
  std::mt19937_64 gen(2);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(clusters.begin(), clusters.end(), gen);
    EXPECT_EQ(RankClusters(clusters, SelectionStrategy::kWeighted, {}),
              (std::vector<size_t>{1, 0, 3}));
  }
  EXPECT_THROW(SelectCluster({}, SelectionStrategy::kWeighted, {}), Error);
}

TEST(Selection, UcbExamples) {
  const std::vector<Cluster> clusters = {MakeCluster(0, 5), MakeCluster(1, 5), MakeCluster(2, 5)};
  BanditHistory h;
  h.Record(0, 1.0);
  h.Record(1, 0.0);
  EXPECT_EQ(SelectCluster(clusters, SelectionStrategy::kUcb, h), 2u);
  const std::vector<Cluster> two = {MakeCluster(0, 5), MakeCluster(1, 5)};
  EXPECT_EQ(SelectCluster(two, SelectionStrategy::kUcb, h), 0u);
  EXPECT_NEAR(UcbIndex(h.arms[0], 3, 2.0), 1.0 + 2.0 * std::sqrt(std::log(3.0)), 1e-12);
}

TEST(Selection, UcbMatchesOracle) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 200; ++trial) {
    const size_t arms = 1 + gen() % 8;
    std::vector<Cluster> clusters;
    std::vector<oracle::Arm> oracle_arms;
    BanditHistory h;
    for (size_t a = 0; a < arms; ++a) {
      const size_t id = a * 3 + gen() % 3;
      clusters.push_back(MakeCluster(id, 5));
      const size_t pulls = gen() % 5 == 0 ? 0 : 1 + gen() % 6;
      double sum = 0.0;
      for (size_t p = 0; p < pulls; ++p) {
        const double r = std::uniform_real_distribution<double>(0, 1)(gen);
        h.Record(id, r);
        sum += r;
      }
      oracle_arms.push_back({id, pulls, h.arms.contains(id) ? h.arms[id].reward_sum : 0.0});
    }
    const double beta = std::uniform_real_distribution<double>(0.1, 3.0)(gen);
    // The current selection is number selections + 1.
    const size_t want = oracle::UcbChoice(oracle_arms, h.selections + 1, beta);
    ASSERT_EQ(SelectCluster(clusters, SelectionStrategy::kUcb, h, beta), want) << trial;
  }
}

TEST(Selection, UcbNeverStarves) {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 20; ++trial) {
    const size_t arms = 1 + gen() % 10;
    std::vector<Cluster> clusters;
    for (size_t a = 0; a < arms; ++a) clusters.push_back(MakeCluster(a * 2, 5));
    BanditHistory h;
    std::set<size_t> seen;
    for (size_t t = 0; t < arms; ++t) {
      const size_t pick = SelectCluster(clusters, SelectionStrategy::kUcb, h);
      seen.insert(pick);
      h.Record(pick, std::uniform_real_distribution<double>(0, 1)(gen));
    }
    EXPECT_EQ(seen.size(), arms);
  }
}

TEST(Bandit, JsonRoundTrip) {
  BanditHistory h;
  h.Record(4, 0.25);
  h.Record(4, 0.5);
  h.Record(1, 1.0);
  const nlohmann::json j = h;
  EXPECT_EQ(j.get<BanditHistory>(), h);
  EXPECT_EQ(ParseSelectionStrategy("UCB"), SelectionStrategy::kUcb);
  EXPECT_THROW(ParseSelectionStrategy("greedy"), Error);
}

SparseCode Code(std::vector<double> alpha) {
  SparseCode c;
  c.alpha = std::move(alpha);
  for (size_t i = 0; i < c.alpha.size(); ++i) {
    if (c.alpha[i] != 0.0) c.support.push_back(i);
  }
  return c;
}

TEST(AssignClusters, RelativeMagnitudeRule) {
  const auto clusters = AssignClusters(
      {Code({1, 0, 0}), Code({1, 0.6, 0.1}), Code({0, 0, 0}), Code({0, -0.8, 0.5})},
      {"a", "b", "c", "d"});
  ASSERT_EQ(clusters.size(), 3u);
  EXPECT_EQ(clusters[0].atom_id, 0u);
  EXPECT_EQ(clusters[0].member_ids, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(clusters[1].member_ids, (std::vector<std::string>{"b", "d"}));
  EXPECT_EQ(clusters[2].member_ids, (std::vector<std::string>{"d"}));
  EXPECT_THROW(AssignClusters({}, {}, 0.0), Error);
  EXPECT_THROW(AssignClusters({Code({1})}, {}), Error);
}

std::string DescriptionsXml(const std::vector<std::string>& texts) {
  std::string out;
  for (const auto& t : texts) out += "<description>" + t + "</description>\n";
  return out;
}

TEST(Queries, RetriesDuplicatesThenGivesUp) {
  const ConceptDefinition def = testing::HealthyFoodDefinition();
  auto gateway = testing::FnGateway([](const PromptRequest& req, const std::string&) {
    if (req.decoding.sample_index == 0) {
      return DescriptionsXml({"salads with heavy mayo dressings", "Salads with heavy mayo dressings!"});
    }
    return DescriptionsXml({"fried vegetables", "smoothie bowls with candy"});
  });
  const auto qs = GenerateQueries(*gateway, def, {}, 3, ImageType::kAmbiguous);
  ASSERT_EQ(qs.size(), 3u);
  EXPECT_EQ(qs[0].text, "salads with heavy mayo dressings");
  EXPECT_EQ(qs[1].text, "fried vegetables");
  EXPECT_EQ(qs[2].image_type, ImageType::kAmbiguous);

  auto stuck = testing::FnGateway([](const PromptRequest&, const std::string&) {
    return DescriptionsXml({"fried vegetables"});
  });
  try {
    GenerateQueries(*stuck, def, {{"Fried vegetables", ImageType::kAmbiguous}}, 1,
                    ImageType::kAmbiguous);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDuplicateExhausted);
  }
  EXPECT_THROW(GenerateQueries(*stuck, def, {}, 0, ImageType::kAmbiguous), Error);
}

TEST(Queries, PreviousDescriptionsAreSent) {
  std::string seen;
  auto gateway = testing::FnGateway([&](const PromptRequest& req, const std::string&) {
    seen = req.variables.at("previous_descriptions");
    return DescriptionsXml({"new one"});
  });
  GenerateQueries(*gateway, testing::HealthyFoodDefinition(),
                  {{"old one", ImageType::kInScope}}, 1, ImageType::kOutOfScope);
  EXPECT_NE(seen.find("old one"), std::string::npos);
}

// Two orthogonal families of images; queries land on one family each.
ImageIndex TwoFamilyIndex(size_t per_family) {
  std::vector<ImageRecord> records;
  for (size_t i = 0; i < 2 * per_family; ++i) {
    const std::string caption = i < per_family ? "salad bowl" : "fried chicken";
    ImageRecord r = testing::Record("i" + std::to_string(100 + i),
                                    TrigramEmbedding(caption + " " + std::to_string(i)), caption);
    records.push_back(std::move(r));
  }
  return ImageIndex(records);
}

TEST(Pool, UnionDedupAndSizeCheck) {
  auto gateway = testing::FnGateway([](const PromptRequest&, const std::string&) {
    return std::string();
  });
  const ImageIndex index = TwoFamilyIndex(60);
  const PoolResult one =
      BuildPool(*gateway, index, {{"salad bowl", ImageType::kAmbiguous}}, 50, 1.01);
  EXPECT_EQ(one.ids.size(), 50u);
  EXPECT_TRUE(one.warnings.empty());
  const PoolResult both = BuildPool(
      *gateway, index,
      {{"salad bowl", ImageType::kAmbiguous}, {"salad bowl", ImageType::kAmbiguous}}, 50, 1.01);
  EXPECT_EQ(both.ids, one.ids);
  const PoolResult wide = BuildPool(*gateway, index, {{"salad bowl", ImageType::kAmbiguous}}, 120, 1.01);
  EXPECT_EQ(wide.ids.size(), 120u);
  EXPECT_EQ(wide.warnings.size(), 1u);
  try {
    BuildPool(*gateway, index, {{"salad bowl", ImageType::kAmbiguous}}, 3, 1.01);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPoolTooSmall);
  }
}

TEST(Pool, DisjointQueriesDoubleThePool) {
  auto gateway = testing::FnGateway([](const PromptRequest&, const std::string&) {
    return std::string();
  });
  std::vector<ImageRecord> records;
  for (size_t i = 0; i < 100; ++i) {
    std::vector<double> v(4, 0.0);
    v[i < 50 ? 0 : 1] = 1.0;
    v[2] = 0.001 * static_cast<double>(i % 50);
    records.push_back(testing::Record("p" + std::to_string(1000 + i), v));
  }
  // Give the backend fixed embeddings for the two queries.
  class AxisBackend : public testing::FnBackend {
   public:
    AxisBackend() : FnBackend([](const PromptRequest&, const std::string&) { return ""; }, 4) {}
    std::vector<std::vector<double>> EmbedText(const std::vector<std::string>& texts) override {
      std::vector<std::vector<double>> out;
      for (const auto& t : texts) out.push_back(t == "a" ? std::vector<double>{1, 0, 0, 0}
                                                         : std::vector<double>{0, 1, 0, 0});
      return out;
    }
  };
  Gateway axis(std::make_unique<AxisBackend>(), testing::NoSleep(), 1);
  const PoolResult r = BuildPool(axis, ImageIndex(records),
                                 {{"a", ImageType::kAmbiguous}, {"b", ImageType::kAmbiguous}}, 50, 1.01);
  EXPECT_EQ(r.ids.size(), 100u);
}

TEST(Mining, TwentyEmptySummariesLeaveTheFiveAmbiguous) {
  std::vector<ImageRecord> records;
  for (int i = 0; i < 30; ++i) {
    char id[8];
    std::snprintf(id, sizeof(id), "m%02d", i);
    records.push_back(testing::Record(id, TrigramEmbedding(id), std::string("caption ") + id));
  }
  const ImageIndex index(records);
  Cluster cluster;
  cluster.atom_id = 7;
  for (const auto& r : records) cluster.member_ids.push_back(r.id);
  const std::set<std::string> labeled = {"m00", "m01", "m02", "m03", "m04"};
  const std::set<std::string> ambiguous = {"caption m10", "caption m13", "caption m17",
                                           "caption m22", "caption m29"};
  auto gateway = testing::FnGateway([&](const PromptRequest& req, const std::string&) {
    const std::string& caption = req.variables.at("caption");
    if (!ambiguous.contains(caption)) return std::string("<summary></summary>");
    return "<summary>The salad has a creamy dressing, unclear whether it counts as healthy "
           "(" + caption.substr(8) + ")</summary>";
  });
  const DeliberationBatch batch =
      MineAmbiguities(*gateway, index, testing::HealthyFoodDefinition(), cluster, labeled, 3, 2);
  EXPECT_EQ(batch.sampled_ids.size(), 25u);
  EXPECT_EQ(batch.image_ids, (std::vector<std::string>{"m10", "m13", "m17", "m22", "m29"}));
  EXPECT_TRUE(batch.reached_target);
  EXPECT_LE(batch.epsilon, 0.3);
  EXPECT_EQ(batch.atom_id, 7u);
  EXPECT_EQ(batch.round, 2);
  for (const auto& id : batch.image_ids) EXPECT_FALSE(labeled.contains(id));
}

TEST(Mining, ExhaustedAndUnambiguousClusters) {
  std::vector<ImageRecord> records;
  for (int i = 0; i < 8; ++i) {
    records.push_back(testing::Record("e" + std::to_string(i), TrigramEmbedding("x" + std::to_string(i))));
  }
  const ImageIndex index(records);
  Cluster cluster;
  for (const auto& r : records) cluster.member_ids.push_back(r.id);
  auto empty = testing::FnGateway([](const PromptRequest&, const std::string&) {
    return std::string("<summary></summary>");
  });
  const ConceptDefinition def = testing::HealthyFoodDefinition();
  try {
    MineAmbiguities(*empty, index, def, cluster, {"e0", "e1", "e2", "e3"}, 1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kClusterExhausted);
  }
  try {
    MineAmbiguities(*empty, index, def, cluster, {}, 1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAllSummariesEmpty);
  }
}

TEST(Mining, SeededSamplingIsDeterministic) {
  std::vector<ImageRecord> records;
  for (int i = 0; i < 60; ++i) {
    records.push_back(testing::Record("s" + std::to_string(100 + i), TrigramEmbedding("y" + std::to_string(i))));
  }
  const ImageIndex index(records);
  Cluster cluster;
  for (const auto& r : records) cluster.member_ids.push_back(r.id);
  auto gateway = testing::FnGateway([](const PromptRequest&, const std::string&) {
    return std::string("<summary>unclear whether a side salad counts</summary>");
  });
  const ConceptDefinition def = testing::HealthyFoodDefinition();
  const auto a = MineAmbiguities(*gateway, index, def, cluster, {}, 11, 1);
  const auto b = MineAmbiguities(*gateway, index, def, cluster, {}, 11, 1);
  const auto c = MineAmbiguities(*gateway, index, def, cluster, {}, 12, 1);
  EXPECT_EQ(a, b);
  EXPECT_NE(a.sampled_ids, c.sampled_ids);
  EXPECT_EQ(a.image_ids.size(), 25u);
}

TEST(MiningPool, BuildsClustersOverPool) {
  const auto index = testing::FoodIndex(300, 3);
  auto gateway = testing::FnGateway([](const PromptRequest& req, const std::string&) {
    return DescriptionsXml({"vegetable salad " + std::to_string(req.decoding.sample_index),
                            "fried food", "creamy dessert", "grilled meat"});
  });
  MinerConfig config;
  const MiningPool pool =
      BuildMiningPool(*gateway, *index, testing::HealthyFoodDefinition(), {}, config, 5, 1);
  EXPECT_EQ(pool.queries.size(), 4u);
  EXPECT_GE(pool.ids.size(), 50u);
  EXPECT_FALSE(pool.clusters.empty());
  for (size_t i = 1; i < pool.mse_trace.size(); ++i) {
    EXPECT_LE(pool.mse_trace[i], pool.mse_trace[i - 1] + 1e-9);
  }
  const nlohmann::json j = pool;
  EXPECT_EQ(j.get<MiningPool>(), pool);
}

}  // namespace
}  // namespace deliberate
