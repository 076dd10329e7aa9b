// topolearn command-line tool: simulate, infer, analyze, experiment, score.
#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "topolearn/baselines.hpp"
#include "topolearn/detector.hpp"
#include "topolearn/harness.hpp"
#include "topolearn/markov.hpp"
#include "topolearn/netsim.hpp"

using nlohmann::json;
using namespace topolearn;

namespace {

struct McOptions {
  McParams p;
  void add(CLI::App* app) {
    app->add_option("--p-i", p.p_i, "start probability of radio 1 per idle sample");
    app->add_option("--p-j", p.p_j, "start probability of radio 2 per idle sample");
    app->add_option("--p-di", p.p_di, "frame continuation of radio 1");
    app->add_option("--p-dj", p.p_dj, "frame continuation of radio 2");
    app->add_option("--p-ri", p.p_ri, "probability radio 1 answers radio 2");
    app->add_option("--p-rj", p.p_rj, "probability radio 2 answers radio 1");
    app->add_option("--p-dri", p.p_dri, "response continuation of radio 1");
    app->add_option("--p-drj", p.p_drj, "response continuation of radio 2");
  }
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

json params_json(const McParams& p) {
  return {{"p_i", p.p_i},   {"p_j", p.p_j},   {"p_di", p.p_di},   {"p_dj", p.p_dj},
          {"p_ri", p.p_ri}, {"p_rj", p.p_rj}, {"p_dri", p.p_dri}, {"p_drj", p.p_drj}};
}

std::string decisions_csv(const TopologyEstimate& e) {
  const bool baseline = e.method != "atelnet";
  std::ostringstream out;
  out << "# schema: topolearn.decisions.v1\n";
  out << "i,j,tau_hat,statistic,threshold,decision" << (baseline ? ",method" : "") << "\n";
  for (int i = 1; i <= e.m(); ++i)
    for (int j = 1; j <= e.m(); ++j) {
      if (i == j) continue;
      const LinkDecision& d = e.detail(i, j);
      out << i << "," << j << "," << d.tau_hat << "," << format_double(d.statistic) << ","
          << format_double(d.threshold) << "," << (d.decision ? 1 : 0);
      if (baseline) out << "," << e.method;
      out << "\n";
    }
  return out.str();
}

// An estimate is either a decisions CSV written by `infer` or a `.links` file.
LinkMatrix load_estimate(const std::string& path, int m) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::vector<std::string> lines;
  bool decisions = false;
  while (std::getline(in, line)) {
    if (line.rfind("i,j,tau_hat", 0) == 0) decisions = true;
    lines.push_back(line);
  }
  if (!decisions) return load_links(path, m);
  LinkMatrix out(m);
  for (const auto& l : lines) {
    if (l.empty() || l[0] == '#' || l.rfind("i,j", 0) == 0) continue;
    std::istringstream row(l);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() < 6) throw std::runtime_error("malformed decisions row: " + l);
    const int i = std::stoi(cells[0]), j = std::stoi(cells[1]);
    if (i < 1 || j < 1 || i > m || j > m) throw std::runtime_error("decision row out of range: " + l);
    if (cells[5] == "1") out.set(i, j);
  }
  return out;
}

int max_radio_in(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  int m = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || !std::isdigit(static_cast<unsigned char>(line[0]))) continue;
    std::istringstream row(line);
    std::string a, b;
    std::getline(row, a, ',');
    std::getline(row, b, ',');
    m = std::max({m, std::stoi(a), std::stoi(b)});
  }
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topology inference from radio activity traces"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate activity traces");
  sim->require_subcommand(1);
  auto* sim_mc = sim->add_subcommand("mc", "two-radio Markov chain trace");
  McOptions mc_opts;
  mc_opts.add(sim_mc);
  long long mc_n = 1000000;
  std::uint64_t seed = 1;
  double mc_ts = 5e-6;
  std::string out_path;
  sim_mc->add_option("-n,--samples", mc_n, "trace length in samples");
  sim_mc->add_option("--seed", seed, "random seed");
  sim_mc->add_option("--ts", mc_ts, "sample period in seconds");
  sim_mc->add_option("-o,--out", out_path, "trace file (a .links sidecar is written next to it)")->required();

  auto* sim_net = sim->add_subcommand("net", "CSMA network trace");
  std::string scenario, net_config, save_config;
  std::vector<std::string> knob_args;
  double duration = 1.0;
  auto* scen_opt = sim_net->add_option("--scenario", scenario, "infra2ap | adhoc_grid | pair");
  sim_net->add_option("--config", net_config, "network config JSON")->excludes(scen_opt);
  sim_net->add_option("--knob", knob_args, "scenario knob key=value (repeatable)");
  sim_net->add_option("--duration", duration, "seconds to simulate");
  sim_net->add_option("--seed", seed, "random seed");
  sim_net->add_option("-o,--out", out_path, "trace file (a .links sidecar is written next to it)")->required();
  sim_net->add_option("--save-config", save_config, "also write the resolved network config JSON");

  // infer
  auto* infer = app.add_subcommand("infer", "infer links from a trace");
  std::string method = "atelnet", trace_path, report_path;
  AtelnetParams ap;
  int linear_tau = 3;
  unsigned threads = 0;
  infer->add_option("--method", method, "atelnet | linear | hard | soft")
      ->check(CLI::IsMember({"atelnet", "linear", "hard", "soft"}));
  infer->add_option("--trace", trace_path, "trace file")->required();
  infer->add_option("--pfa", ap.p_fa, "false alarm target");
  infer->add_option("--alpha", ap.alpha, "drop factor of the response time search");
  infer->add_option("--tau-max", ap.tau_max, "largest lag considered");
  infer->add_option("--linear-tau", linear_tau, "lag of the linear asymmetric test");
  infer->add_option("--threads", threads, "worker threads (0 = all cores)");
  infer->add_option("-o,--out", out_path, "decisions CSV (default stdout)");
  infer->add_option("--report", report_path, "JSON report");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "analytic results");
  analyze->require_subcommand(1);
  auto* an_mc = analyze->add_subcommand("mc", "steady state and closed-form ATE of the two-radio chain");
  McOptions an_opts;
  an_opts.add(an_mc);
  long long an_n = 1000000;
  double an_pfa = 1e-3;
  an_mc->add_option("-n,--samples", an_n, "trace length for detection probabilities");
  an_mc->add_option("--pfa", an_pfa, "false alarm target");
  an_mc->add_option("-o,--out", out_path, "JSON output (default stdout)");

  // experiment
  auto* exp = app.add_subcommand("experiment", "run a seeded experiment");
  std::string exp_config, exp_out;
  exp->add_option("--config", exp_config, "experiment config JSON")->required();
  exp->add_option("--output-dir", exp_out, "override the output directory");
  exp->add_option("--threads", threads, "worker threads (0 = all cores)");

  // score
  auto* score = app.add_subcommand("score", "score an estimate against ground truth");
  std::string est_path, truth_path;
  int score_m = 0;
  score->add_option("--est", est_path, "decisions CSV from infer, or a .links file")->required();
  score->add_option("--truth", truth_path, ".links file")->required();
  score->add_option("--radios", score_m, "number of radios (default: largest id seen)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim_mc->parsed()) {
      const ActivityTrace t = simulate_chain(mc_opts.p, mc_n, seed, mc_ts);
      save_trace(t, out_path);
      LinkMatrix truth(2);
      if (mc_opts.p.p_rj > 0.0) truth.set(1, 2);
      if (mc_opts.p.p_ri > 0.0) truth.set(2, 1);
      save_links(truth, links_path_for(out_path), "simulate mc seed=" + std::to_string(seed));
    } else if (sim_net->parsed()) {
      NetConfig cfg;
      if (!net_config.empty()) {
        if (!knob_args.empty()) throw std::invalid_argument("--knob only applies to --scenario");
        cfg = load_netconfig(net_config);
      } else {
        if (scenario.empty()) throw std::invalid_argument("simulate net needs --scenario or --config");
        ScenarioKnobs knobs;
        for (const auto& kv : knob_args) {
          const auto eq = kv.find('=');
          if (eq == std::string::npos) throw std::invalid_argument("knob must be key=value: " + kv);
          knobs.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        cfg = make_scenario(scenario, knobs);
      }
      if (!save_config.empty()) save_netconfig(cfg, save_config);
      const SimReport r = simulate_network(cfg, duration, seed);
      save_trace(r.trace, out_path);
      save_links(r.truth, links_path_for(out_path), "simulate net seed=" + std::to_string(seed));
      json counters = {{"schema", "topolearn.simreport.v1"},
                       {"frames_sent", r.frames_sent},
                       {"responses_sent", r.responses_sent},
                       {"deferrals", r.deferrals},
                       {"collisions", r.collisions},
                       {"samples", r.trace.num_samples()},
                       {"radios", r.trace.num_radios()}};
      std::cout << counters.dump(2) << "\n";
    } else if (infer->parsed()) {
      ap.validate();
      const ActivityTrace trace = load_trace(trace_path);
      MethodParams mp;
      mp.atelnet = ap;
      mp.linear_tau = linear_tau;
      const TopologyEstimate e = run_method(method, trace, mp, threads);
      write_text(out_path, decisions_csv(e));
      if (!report_path.empty()) {
        json links = json::array();
        for (const auto& [i, j] : e.links.links()) links.push_back({i, j});
        json rep = {{"schema", "topolearn.infer.v1"},
                    {"method", method},
                    {"trace", trace_path},
                    {"radios", trace.num_radios()},
                    {"samples", trace.num_samples()},
                    {"sample_period_s", trace.sample_period_s()},
                    {"params", {{"p_fa", ap.p_fa}, {"alpha", ap.alpha}, {"tau_max", ap.tau_max}, {"linear_tau", linear_tau}}},
                    {"links", links}};
        write_text(report_path, rep.dump(2) + "\n");
      }
    } else if (an_mc->parsed()) {
      const McParams& p = an_opts.p;
      p.validate();
      McParams null = p;  // same traffic without responses
      null.p_ri = null.p_rj = 0.0;
      const SteadyState closed = steady_state_closed(p);
      const SteadyState numeric = steady_state_numeric(transition_matrix(p));
      json states = json::object();
      double gap = 0.0;
      for (int k = 0; k < kMcStates; ++k) {
        const auto s = static_cast<McState>(k);
        states[std::string(state_name(s))] = closed[s];
        gap = std::max(gap, std::abs(closed[s] - numeric[s]));
      }
      json ate = json::array();
      for (int tau = 1; tau <= 3; ++tau) ate.push_back(ate_closed(p, tau));
      json out = {{"schema", "topolearn.analyze.v1"},
                  {"params", params_json(p)},
                  {"rho", closed.rho},
                  {"steady_state", states},
                  {"closed_vs_numeric_max_abs", gap},
                  {"ate", ate},
                  {"samples", an_n},
                  {"p_fa", an_pfa},
                  {"detection_probability_lag3", detection_probability(ate_closed(p, 3), an_n, 3, an_pfa)},
                  {"false_alarm_bound", false_alarm_bound(ate_closed(null, 1), an_n, an_pfa)}};
      write_text(out_path, out.dump(2) + "\n");
    } else if (exp->parsed()) {
      ExperimentConfig cfg = load_experiment_config(exp_config);
      if (!exp_out.empty()) cfg.output_dir = exp_out;
      if (exp->count("--threads")) cfg.threads = threads;
      if (cfg.output_dir.empty()) cfg.output_dir = "experiment_out";
      const ExperimentResult r = run_experiment(cfg);
      for (const auto& f : r.files) std::cout << f.string() << "\n";
    } else if (score->parsed()) {
      const int m = score_m > 0 ? score_m : std::max(max_radio_in(est_path), max_radio_in(truth_path));
      const LinkMatrix truth = load_links(truth_path, m);
      const LinkMatrix est = load_estimate(est_path, m);
      const ScoreReport s = score_topology(est, truth);
      json out = {{"schema", "topolearn.score.v1"},
                  {"detected_fraction", s.detected_fraction},
                  {"extra_links", s.extra_links},
                  {"true_links", s.true_links},
                  {"found_links", s.found_links}};
      std::cout << out.dump(2) << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
