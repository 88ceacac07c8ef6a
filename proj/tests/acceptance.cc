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

// Runs every primary acceptance criterion at its stated tolerance and prints
// one PASS/FAIL line per criterion. Exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <spdlog/spdlog.h>

#include "deliberate/bandit.h"
#include "deliberate/concept.h"
#include "deliberate/dbscan.h"
#include "deliberate/dictionary.h"
#include "deliberate/engine.h"
#include "deliberate/evaluation.h"
#include "deliberate/formula.h"
#include "deliberate/image_index.h"
#include "deliberate/scripted_run.h"
#include "oracles.h"
#include "session_fixture.h"
#include "test_util.h"
#include "tree_oracle.h"

namespace deliberate {
namespace {

using testing::ClusteredPoints;
using testing::RandomUnit;
using testing::TempDir;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Records the first failure; later checks keep the first message.
void Check(Outcome& o, bool ok, const std::string& why) {
  if (!ok && o.pass) {
    o.pass = false;
    o.detail = why;
  }
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

std::string ReadAll(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome GreedyNonRegression() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  size_t checked = 0;
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    TempDir dir;
    const RunConfig run = testing::HealthyRun(dir.path(), seed, 500, 0);
    Engine engine(testing::FixedOptions({}));
    const std::string id = engine.CreateSession(run.session).id;
    testing::ScopeSession(engine, id, run);
    const ImageIndex index = LoadManifest(run.session.manifest);
    for (int t = 1; t <= 5; ++t) {
      RoundRecord r;
      try {
        r = engine.NextRound(id);
      } catch (const Error& e) {
        Check(o, e.code() == ErrorCode::kAllSummariesEmpty, "seed " + std::to_string(seed) + ": " + e.what());
        break;
      }
      const SubmitResult res = engine.SubmitLabels(id, t, testing::SimLabels(run, r, index));
      Check(o, res.report.winner_f1_all >= res.report.incumbent_f1_all,
            "seed " + std::to_string(seed) + " round " + std::to_string(t) + " report regressed");
      // Recompute both sides against the merged labeled set.
      const double before = engine.EvaluateOnLabeled(id, res.report.incumbent_version).f1;
      const double after = engine.EvaluateOnLabeled(id, res.definition.version).f1;
      Check(o, after >= before,
            "seed " + std::to_string(seed) + " round " + std::to_string(t) + ": " +
                std::to_string(after) + " < " + std::to_string(before));
      ++checked;
    }
  }
  const double secs = Seconds(start);
  Check(o, secs < 60.0, "took " + std::to_string(secs) + " s");
  Check(o, checked >= 60, "only " + std::to_string(checked) + " rounds ran");
  if (o.pass) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%zu rounds over 20 sessions, %.1f s", checked, secs);
    o.detail = buf;
  }
  return o;
}

Outcome OracleConvergence() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  int converged = 0;
  std::string rounds_needed;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    TempDir dir;
    RunConfig run = testing::HealthyRun(dir.path(), seed, 500, 100);
    run.rounds = 3;
    const RunResult result = RunScripted(run, RunMode::kDeliberate, dir.path() / "out");
    int reached = -1;
    for (const MetricsRow& row : result.metrics) {
      if (row.round >= 1 && row.round <= 3 && row.f1 == 1.0) {
        reached = row.round;
        break;
      }
    }
    rounds_needed += (rounds_needed.empty() ? "" : ",") + std::to_string(reached);
    if (reached > 0) ++converged;
  }
  const double secs = Seconds(start);
  Check(o, converged == 10, std::to_string(converged) + "/10 seeds reached F1 1.0 (rounds: " +
                                rounds_needed + ")");
  Check(o, secs < 30.0, "took " + std::to_string(secs) + " s");
  if (o.pass) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "10/10 seeds, rounds to F1=1.0: %s, %.1f s", rounds_needed.c_str(),
                  secs);
    o.detail = buf;
  }
  return o;
}

Outcome DbscanEquivalence() {
  Outcome o;
  int fallbacks = 0;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 gen(seed + 5000);
    const size_t n = 2 + gen() % 24;
    const size_t dim = 8 + gen() % 249;
    const auto points = ClusteredPoints(gen, n, dim);
    const AdaptiveDbscanResult got = AdaptiveDbscan(points);
    const oracle::SweepResult want = oracle::DbscanSweep(points, 20, 61, 100.0, 2, 5);
    Check(o, got.members == want.members && got.reached_target == want.reached_target &&
                 got.epsilon == want.epsilon,
          "set " + std::to_string(seed) + " differs");
    if (!want.reached_target) ++fallbacks;
  }
  Check(o, fallbacks > 0, "final-eps fallback never exercised");
  if (o.pass) o.detail = "100 sets, " + std::to_string(fallbacks) + " via the final-eps fallback";
  return o;
}

Outcome DictionaryLearning() {
  Outcome o;
  for (uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 gen(seed);
    const size_t dim = 8 + gen() % 57;
    const size_t n = 40 + gen() % 80;
    const auto data = ClusteredPoints(gen, n, dim);
    DictionaryOptions options;
    options.atoms = 4 + gen() % 20;
    options.sparsity = 1 + gen() % std::min<size_t>(options.atoms, 6);
    options.iterations = 20;
    options.seed = seed;
    const DictionaryResult r = LearnDictionary(data, options);
    Check(o, r.mse_trace.size() == 21, "seed " + std::to_string(seed) + ": trace length");
    for (size_t i = 1; i < r.mse_trace.size(); ++i) {
      Check(o, r.mse_trace[i] <= r.mse_trace[i - 1] + 1e-9,
            "seed " + std::to_string(seed) + " iteration " + std::to_string(i) + " increased");
    }
    for (const SparseCode& c : r.codes) {
      Check(o, c.support.size() <= options.sparsity, "seed " + std::to_string(seed) + ": support > s");
    }
    // Stand-alone OMP against the learned atoms.
    for (size_t s = 1; s <= options.sparsity; ++s) {
      const SparseCode c = Omp(r.atoms, data[gen() % n], s);
      Check(o, c.support.size() <= s, "OMP support exceeds " + std::to_string(s));
    }
  }
  std::mt19937_64 gen(7);
  const size_t p = 16;
  const size_t k = 8;
  const Eigen::MatrixXd q =
      Eigen::MatrixXd::NullaryExpr(p, k, [&] { return std::normal_distribution<double>(0, 1)(gen); });
  const Eigen::MatrixXd basis =
      Eigen::HouseholderQR<Eigen::MatrixXd>(q).householderQ() * Eigen::MatrixXd::Identity(p, k);
  std::vector<std::vector<double>> data;
  for (size_t j = 0; j < k; ++j) {
    const auto col = basis.col(static_cast<Eigen::Index>(j));
    data.emplace_back(col.data(), col.data() + p);
  }
  DictionaryOptions options;
  options.atoms = k;
  options.sparsity = 1;
  options.iterations = 20;
  const DictionaryResult exact = LearnDictionary(data, options);
  Check(o, exact.mse_trace.back() <= 1e-10,
        "exact basis error " + std::to_string(exact.mse_trace.back()));
  if (o.pass) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "50 datasets monotone; exact-basis error %.3g",
                  exact.mse_trace.back());
    o.detail = buf;
  }
  return o;
}

Cluster MakeCluster(size_t atom, size_t members, ClusterStats stats = {}) {
  Cluster c;
  c.atom_id = atom;
  for (size_t i = 0; i < members; ++i) c.member_ids.push_back("m" + std::to_string(i));
  c.stats = std::move(stats);
  return c;
}

Outcome ClusterScoring() {
  Outcome o;
  std::mt19937_64 gen(31);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t members = 1 + gen() % 40;
    ClusterStats st;
    st.explored = gen() % (members + 1);
    st.mistakes = st.explored ? gen() % (st.explored + 1) : 0;
    st.feedback_count = st.explored ? gen() % (st.explored + 1) : 0;
    const size_t nr = gen() % 8;
    for (size_t i = 0; i < nr; ++i) st.ratings.push_back(1 + static_cast<int>(gen() % 5));
    const ClusterScore s = ScoreCluster(MakeCluster(0, members, st));
    const double want = static_cast<double>(
        oracle::ClusterScore(st.explored, st.mistakes, st.feedback_count, members, st.ratings));
    worst = std::max(worst, std::abs(s.total - want));
    const double parts = 0.5 * s.mistake_rate + 0.3 * s.feedback_rate + 0.15 * s.exploration_value +
                         0.05 * s.diversity_rate;
    Check(o, std::abs(s.total - parts) <= 1e-12, "total disagrees with its components");
  }
  Check(o, worst <= 1e-12, "max deviation " + std::to_string(worst));
  const double example = ScoreCluster(MakeCluster(0, 10, {4, 2, 4, {1, 5, 1, 5}})).total;
  Check(o, std::abs(example - 0.69) <= 1e-12, "worked example gave " + std::to_string(example));
  if (o.pass) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "1000 cases max |err| %.2g; worked example %.15f", worst, example);
    o.detail = buf;
  }
  return o;
}

Outcome UcbSelection() {
  Outcome o;
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 100; ++trial) {
    const size_t arms = 1 + gen() % 12;
    std::vector<Cluster> clusters;
    for (size_t a = 0; a < arms; ++a) clusters.push_back(MakeCluster(a * 2 + gen() % 2, 5));
    BanditHistory h;
    std::set<size_t> seen;
    for (size_t t = 0; t < arms; ++t) {
      const size_t pick = SelectCluster(clusters, SelectionStrategy::kUcb, h);
      seen.insert(pick);
      h.Record(pick, std::uniform_real_distribution<double>(0, 1)(gen));
    }
    Check(o, seen.size() == arms, "an arm was not tried within |arms| selections");
  }
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
      oracle_arms.push_back({id, pulls, sum});
    }
    const double beta = std::uniform_real_distribution<double>(0.1, 3.0)(gen);
    const size_t want = oracle::UcbChoice(oracle_arms, h.selections + 1, beta);
    Check(o, SelectCluster(clusters, SelectionStrategy::kUcb, h, beta) == want,
          "history " + std::to_string(trial) + " picked a different arm");
  }
  if (o.pass) o.detail = "coverage on 100 arm sets; 200 histories match";
  return o;
}

Outcome Metrics() {
  Outcome o;
  std::mt19937_64 gen(101);
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t n = gen() % 60;
    std::vector<std::pair<bool, bool>> pairs;
    std::map<std::string, bool> preds, labels;
    for (size_t i = 0; i < n; ++i) {
      pairs.emplace_back(gen() % 2, gen() % 2);
      preds["i" + std::to_string(i)] = pairs.back().first;
      labels["i" + std::to_string(i)] = pairs.back().second;
    }
    const MetricsReport got = Prf1(Confusion(preds, labels));
    const oracle::Prf want = oracle::PrfFromPairs(pairs);
    Check(o, got.precision == want.precision && got.recall == want.recall && got.f1 == want.f1,
          "table " + std::to_string(trial) + " differs");
  }
  const double f1 = Prf1({2, 1, 2, 0}).f1;
  Check(o, std::abs(f1 - 4.0 / 7.0) <= 1e-12, "F1(2,1,2) = " + std::to_string(f1));
  if (o.pass) o.detail = "1000 tables exact; F1(2,1,2) = 4/7";
  return o;
}

Outcome DeterminismAndPersistence() {
  Outcome o;
  TempDir dir;
  RunConfig run = testing::HealthyRun(dir.path(), 9, 500, 100);
  run.rounds = 3;
  RunScripted(run, RunMode::kDeliberate, dir.path() / "a", dir.path() / "sa");
  RunScripted(run, RunMode::kDeliberate, dir.path() / "b", dir.path() / "sb");
  const std::string a = ReadAll(dir.path() / "a" / "session.json");
  Check(o, !a.empty() && a == ReadAll(dir.path() / "b" / "session.json"), "session JSON differs");

  const Session loaded = LoadSession(dir.path() / "a" / "session.json");
  SaveSession(dir.path() / "copy.json", loaded);
  Check(o, ReadAll(dir.path() / "copy.json") == a, "save/load round trip changed the session");
  Check(o, nlohmann::json(LoadSession(dir.path() / "copy.json")) == nlohmann::json::parse(a),
        "reloaded session is not structurally equal");

  for (uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 gen(seed);
    const size_t dim = 4 + gen() % 12;
    std::vector<ImageRecord> records;
    const std::vector<double> base = RandomUnit(gen, dim);
    const size_t n = 5 + gen() % 60;
    const double spread = std::uniform_real_distribution<double>(0.02, 0.5)(gen);
    for (size_t i = 0; i < n; ++i) {
      std::vector<double> v = base;
      for (double& x : v) x += std::normal_distribution<double>(0, spread)(gen);
      records.push_back(testing::Record("x" + std::to_string(i), v));
    }
    std::vector<std::string> ids;
    for (const auto& r : records) ids.push_back(r.id);
    std::shuffle(ids.begin(), ids.end(), gen);
    const ImageIndex index(records);
    const double threshold = std::uniform_real_distribution<double>(0.8, 0.99)(gen);
    const auto once = index.Dedup(ids, threshold);
    Check(o, index.Dedup(once, threshold) == once, "dedup not idempotent on pool " + std::to_string(seed));
  }
  if (o.pass) o.detail = "two runs byte-identical; round trip equal; 100 pools idempotent";
  return o;
}

Outcome ConceptSemantics() {
  Outcome o;
  std::mt19937_64 gen(17);
  size_t assignments = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const ConceptNode root = testing::RandomTree(gen);
    const Formula oracle_formula = Formula::Parse(testing::ToFormula(root));
    const std::vector<std::string> vars = RequiredJudgments(root);
    for (uint32_t mask = 0; mask < (1u << vars.size()); ++mask) {
      std::map<std::string, bool> judgments;
      nlohmann::json attrs = nlohmann::json::object();
      for (size_t i = 0; i < vars.size(); ++i) {
        judgments[vars[i]] = (mask >> i) & 1u;
        attrs[vars[i]] = static_cast<int>((mask >> i) & 1u);
      }
      Check(o, EvaluateSemantics(root, judgments) == oracle_formula.Evaluate(attrs),
            "tree " + oracle_formula.text() + " disagrees");
      ++assignments;
    }
  }
  if (o.pass) o.detail = "2000 trees, " + std::to_string(assignments) + " assignments";
  return o;
}

}  // namespace
}  // namespace deliberate

int main() {
  spdlog::set_level(spdlog::level::off);
  using deliberate::Outcome;
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"greedy-non-regression", deliberate::GreedyNonRegression},
      {"oracle-convergence", deliberate::OracleConvergence},
      {"adaptive-dbscan-equivalence", deliberate::DbscanEquivalence},
      {"dictionary-learning", deliberate::DictionaryLearning},
      {"cluster-score", deliberate::ClusterScoring},
      {"ucb-coverage-and-argmax", deliberate::UcbSelection},
      {"metrics-prf1", deliberate::Metrics},
      {"determinism-and-persistence", deliberate::DeterminismAndPersistence},
      {"concept-semantics", deliberate::ConceptSemantics},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
