#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "topolearn/harness.hpp"

using namespace topolearn;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "topolearn_harness_tests" / name;
  std::filesystem::remove_all(dir);
  return dir;
}

std::string first_line(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

ExperimentConfig small_sweep() {
  ExperimentConfig c;
  c.grid.sta_per_ap = {2};
  c.methods = {"atelnet", "linear"};
  c.grid.durations_s = {0.2, 0.4};
  c.trials = 3;
  c.seed = 99;
  c.threads = 1;
  return c;
}

}  // namespace

TEST(Harness, ScoreCountsUndirectedPairs) {
  LinkMatrix truth(4), est(4);
  truth.set(2, 1);
  truth.set(1, 2);
  truth.set(3, 1);
  est.set(1, 2);     // found
  est.set(4, 3);     // extra
  est.set(3, 4);     // same extra pair
  const ScoreReport r = score_topology(est, truth);
  EXPECT_EQ(r.true_links, 2);
  EXPECT_EQ(r.found_links, 1);
  EXPECT_EQ(r.extra_links, 1);
  EXPECT_DOUBLE_EQ(r.detected_fraction, 0.5);
  const ScoreReport empty = score_topology(LinkMatrix(4), LinkMatrix(4));
  EXPECT_DOUBLE_EQ(empty.detected_fraction, 1.0);
  EXPECT_THROW(score_topology(LinkMatrix(3), truth), std::invalid_argument);
}

TEST(Harness, RocAucCountsTiesAsHalf) {
  EXPECT_DOUBLE_EQ(roc_auc({1, 2, 3}, {4, 5}), 1.0);
  EXPECT_DOUBLE_EQ(roc_auc({4, 5}, {1, 2, 3}), 0.0);
  EXPECT_DOUBLE_EQ(roc_auc({1, 2}, {2}), 0.75);
  EXPECT_DOUBLE_EQ(roc_auc({7, 7}, {7, 7}), 0.5);
  EXPECT_THROW(roc_auc({}, {1}), std::invalid_argument);
}

TEST(Harness, SummarizeMeansAndIntervals) {
  std::vector<TrialRecord> t;
  const GridPoint p{1.0, 3, 1e-3, 10.0, 10};
  for (int k = 0; k < 4; ++k) {
    TrialRecord r;
    r.point = p;
    r.method = "atelnet";
    r.trial = k;
    r.score.detected_fraction = k < 2 ? 1.0 : 0.5;
    r.score.extra_links = k;
    t.push_back(r);
  }
  const auto rows = summarize(t);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].trials, 4);
  EXPECT_DOUBLE_EQ(rows[0].detected_mean, 0.75);
  EXPECT_DOUBLE_EQ(rows[0].extra_mean, 1.5);
  // sample sd of {0,1,2,3} is sqrt(5/3)
  EXPECT_NEAR(rows[0].extra_ci95, 1.96 * std::sqrt(5.0 / 3.0) / 2.0, 1e-12);
}

TEST(Harness, TrialSeedsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (int sta : {1, 2, 3})
    for (int k = 0; k < 50; ++k) seen.insert(trial_seed(7, sta, k));
  EXPECT_EQ(seen.size(), 150u);
  EXPECT_EQ(trial_seed(7, 2, 3), trial_seed(7, 2, 3));
  EXPECT_NE(trial_seed(7, 2, 3), trial_seed(8, 2, 3));
}

TEST(Harness, RunMethodDispatch) {
  const NetConfig net = make_scenario("infra2ap");
  const SimReport sim = simulate_network(net, 0.3, 3);
  MethodParams mp;
  for (const char* m : {"atelnet", "linear", "hard", "soft"}) {
    EXPECT_TRUE(known_method(m));
    const TopologyEstimate e = run_method(m, sim.trace, mp);
    EXPECT_EQ(e.method, m);
    EXPECT_EQ(e.m(), 8);
  }
  // a fusion window longer than the trace shrinks to one window
  mp.fusion.window_s = 5.0;
  EXPECT_NO_THROW(run_method("hard", sim.trace, mp));
  EXPECT_FALSE(known_method("granger"));
  EXPECT_THROW(run_method("granger", sim.trace, mp), std::invalid_argument);
}

TEST(Harness, SweepStructureAndFiles) {
  ExperimentConfig c = small_sweep();
  c.output_dir = fresh_dir("sweep");
  const ExperimentResult r = run_experiment(c);
  ASSERT_EQ(r.trials.size(), 2u * 2u * 3u);
  ASSERT_EQ(r.summary.size(), 4u);
  for (const SummaryRow& s : r.summary) {
    EXPECT_EQ(s.trials, 3);
    EXPECT_GE(s.detected_mean, 0.0);
    EXPECT_LE(s.detected_mean, 1.0);
  }
  // ordering: grid point, then trial, then method
  EXPECT_EQ(r.trials[0].method, "atelnet");
  EXPECT_EQ(r.trials[1].method, "linear");
  EXPECT_EQ(r.trials[0].trial, 0);
  EXPECT_EQ(r.trials[2].trial, 1);
  EXPECT_DOUBLE_EQ(r.trials[0].point.duration_s, 0.2);
  EXPECT_DOUBLE_EQ(r.trials.back().point.duration_s, 0.4);
  for (const TrialRecord& t : r.trials) EXPECT_EQ(t.score.true_links, 4);

  for (const char* f : {"trials.csv", "summary.csv", "detected_by_duration_s.csv", "extra_by_duration_s.csv"})
    EXPECT_TRUE(std::filesystem::exists(c.output_dir / f)) << f;
  EXPECT_EQ(r.files.size(), 4u);
  EXPECT_EQ(first_line(c.output_dir / "trials.csv"), "# schema: topolearn.trials.v1");
  EXPECT_EQ(first_line(c.output_dir / "summary.csv"), "# schema: topolearn.summary.v1");
  EXPECT_FALSE(std::filesystem::exists(c.output_dir / "roc.csv"));
}

TEST(Harness, SweepIsDeterministicAcrossThreadCounts) {
  ExperimentConfig a = small_sweep();
  ExperimentConfig b = small_sweep();
  b.threads = 3;
  const ExperimentResult ra = run_experiment(a), rb = run_experiment(b);
  ASSERT_EQ(ra.trials.size(), rb.trials.size());
  for (std::size_t k = 0; k < ra.trials.size(); ++k) {
    EXPECT_EQ(ra.trials[k].seed, rb.trials[k].seed);
    EXPECT_EQ(ra.trials[k].score.found_links, rb.trials[k].score.found_links);
    EXPECT_EQ(ra.trials[k].score.extra_links, rb.trials[k].score.extra_links);
  }
  EXPECT_TRUE(ra.files.empty());
}

TEST(Harness, PrefixSlicesShareOneSimulation) {
  // the short duration is a prefix of the long run, so a one-duration
  // experiment at the short length gives the same scores
  ExperimentConfig both = small_sweep();
  ExperimentConfig short_only = small_sweep();
  short_only.grid.durations_s = {0.2};
  const ExperimentResult a = run_experiment(both), b = run_experiment(short_only);
  std::size_t k = 0;
  for (const TrialRecord& t : a.trials) {
    if (t.point.duration_s != 0.2) continue;
    ASSERT_LT(k, b.trials.size());
    EXPECT_EQ(t.score.found_links, b.trials[k].score.found_links);
    EXPECT_EQ(t.score.extra_links, b.trials[k].score.extra_links);
    ++k;
  }
  EXPECT_EQ(k, b.trials.size());
}

TEST(Harness, RocModeRecordsEveryOrderedPair) {
  ExperimentConfig c;
  c.grid.sta_per_ap = {2};
  c.mode = "roc";
  c.roc_window_s = 0.1;
  c.grid.durations_s = {0.35};
  c.trials = 2;
  c.threads = 1;
  c.output_dir = fresh_dir("roc");
  const ExperimentResult r = run_experiment(c);
  // 3 windows x 30 ordered pairs x 2 trials
  ASSERT_EQ(r.roc.size(), 3u * 30u * 2u);
  EXPECT_TRUE(r.trials.empty());
  int linked = 0;
  for (const RocRecord& x : r.roc) linked += x.linked;
  EXPECT_EQ(linked, 3 * 8 * 2);
  EXPECT_EQ(first_line(c.output_dir / "roc.csv"), "# schema: topolearn.roc.v1");
}

TEST(Harness, ConfigParsing) {
  const ExperimentConfig c = parse_experiment_config(R"({
    "schema": "topolearn.experiment.v1",
    "scenario": "infra2ap",
    "knobs": {"mean_off_s": 0.005, "downlink": true},
    "methods": ["atelnet", "soft"],
    "grid": {"durations_s": [0.5, 1.0], "sta_per_ap": [2, 3], "p_fa": [0.01]},
    "trials": 4,
    "seed": 12,
    "fusion": {"window_s": 0.03, "tau": 4},
    "output_dir": "out"
  })");
  EXPECT_DOUBLE_EQ(c.knobs.mean_off_s, 0.005);
  EXPECT_TRUE(c.knobs.downlink);
  EXPECT_EQ(c.methods.size(), 2u);
  EXPECT_EQ(c.grid.sta_per_ap, (std::vector<int>{2, 3}));
  EXPECT_EQ(c.grid.tau_max, (std::vector<int>{10}));
  EXPECT_EQ(c.trials, 4);
  EXPECT_EQ(c.seed, 12u);
  EXPECT_EQ(c.fusion.tau, 4);
  EXPECT_EQ(c.output_dir, std::filesystem::path("out"));

  EXPECT_THROW(parse_experiment_config(R"({"methods": ["nope"]})"), std::invalid_argument);
  EXPECT_THROW(parse_experiment_config(R"({"schema": "x"})"), std::invalid_argument);
  EXPECT_THROW(parse_experiment_config(R"({"trials": 0})"), std::invalid_argument);
  EXPECT_THROW(parse_experiment_config(R"({"mode": "roc", "roc_window_s": 2.0})"), std::invalid_argument);
  EXPECT_THROW(parse_experiment_config(R"({"scenario": "pair", "grid": {"sta_per_ap": [1, 2]}})"),
               std::invalid_argument);
  EXPECT_THROW(parse_experiment_config(R"({"knobs": {"bogus": 1}})"), std::invalid_argument);
  EXPECT_THROW(parse_experiment_config("[1,"), std::invalid_argument);

  const auto dir = fresh_dir("cfg");
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "exp.json") << R"({"output_dir": "results"})";
  EXPECT_EQ(load_experiment_config(dir / "exp.json").output_dir, dir / "results");
}
