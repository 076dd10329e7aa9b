// Scoring against ground truth and the seeded experiment runner behind the
// `experiment` subcommand.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "topolearn/baselines.hpp"
#include "topolearn/detector.hpp"
#include "topolearn/netsim.hpp"

namespace topolearn {

// Undirected comparison: a pair counts as linked if either direction is.
struct ScoreReport {
  double detected_fraction = 1.0;  // 1 when the truth has no links
  int extra_links = 0;
  int true_links = 0;
  int found_links = 0;
};

ScoreReport score_topology(const LinkMatrix& estimate, const LinkMatrix& truth);
ScoreReport score_topology(const TopologyEstimate& estimate, const LinkMatrix& truth);

struct MethodParams {
  AtelnetParams atelnet;
  int linear_tau = 3;
  FusionParams fusion;
};

// "atelnet", "linear", "hard" or "soft".  Every method reads params.atelnet.p_fa
// as its false-alarm target.  Fusion windows longer than the trace are cut to it.
TopologyEstimate run_method(const std::string& method, const ActivityTrace& trace, const MethodParams& params,
                            unsigned threads = 1);
bool known_method(const std::string& method);

struct ExperimentGrid {
  std::vector<double> durations_s{1.0};
  std::vector<int> sta_per_ap{3};
  std::vector<double> p_fa{1e-3};
  std::vector<double> alpha{10.0};
  std::vector<int> tau_max{10};
};

struct ExperimentConfig {
  std::string scenario = "infra2ap";
  ScenarioKnobs knobs;
  std::vector<std::string> methods{"atelnet"};
  ExperimentGrid grid;
  int trials = 10;
  std::uint64_t seed = 1;
  std::string mode = "sweep";  // sweep | roc
  double roc_window_s = 0.6;
  int linear_tau = 3;
  FusionParams fusion;
  unsigned threads = 0;
  std::filesystem::path output_dir;  // empty: nothing is written

  void validate() const;  // throws std::invalid_argument
};

ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct GridPoint {
  double duration_s = 0.0;
  int sta_per_ap = 0;
  double p_fa = 0.0;
  double alpha = 0.0;
  int tau_max = 0;
};

struct TrialRecord {
  GridPoint point;
  std::string method;
  int trial = 0;
  std::uint64_t seed = 0;
  ScoreReport score;
};

struct SummaryRow {
  GridPoint point;
  std::string method;
  int trials = 0;
  double detected_mean = 0.0;
  double detected_ci95 = 0.0;  // normal-approximation half width
  double extra_mean = 0.0;
  double extra_ci95 = 0.0;
};

struct RocRecord {
  GridPoint point;
  std::string method;
  int trial = 0;
  int window = 0;
  int i = 0;
  int j = 0;
  bool linked = false;  // ground truth for the directed pair
  double statistic = 0.0;
  int tau_hat = 0;
};

struct ExperimentResult {
  std::vector<TrialRecord> trials;
  std::vector<SummaryRow> summary;
  std::vector<RocRecord> roc;
  std::vector<std::filesystem::path> files;
};

// Simulates, runs each method, scores and aggregates; writes CSV files when
// output_dir is set.  Completed trials are flushed before an error propagates.
ExperimentResult run_experiment(const ExperimentConfig& config);

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& trials);

// Seed of one trial, derived from the experiment seed.
std::uint64_t trial_seed(std::uint64_t base, int sta_per_ap, int trial);

// Area under the empirical ROC curve: P(alt > null) + P(tie) / 2.
double roc_auc(std::vector<double> null_stats, std::vector<double> alt_stats);

}  // namespace topolearn
