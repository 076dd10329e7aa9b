#include "topolearn/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "json.hpp"
#include "parallel.hpp"

namespace topolearn {

namespace {

using nlohmann::json;

constexpr const char* kConfigSchema = "topolearn.experiment.v1";

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

template <typename T>
T value_or(const json& obj, const char* key, T fallback) {
  const auto it = obj.find(key);
  return it == obj.end() ? fallback : it->get<T>();
}

std::string knob_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return format_double(v.get<double>());
  throw std::invalid_argument("experiment: knob values must be scalars");
}

}  // namespace

ScoreReport score_topology(const LinkMatrix& estimate, const LinkMatrix& truth) {
  if (estimate.m() != truth.m()) throw std::invalid_argument("score_topology: estimate and truth differ in size");
  const LinkMatrix e = estimate.symmetrized();
  const LinkMatrix t = truth.symmetrized();
  ScoreReport r;
  for (int i = 1; i <= t.m(); ++i)
    for (int j = i + 1; j <= t.m(); ++j) {
      if (t(i, j)) {
        ++r.true_links;
        if (e(i, j)) ++r.found_links;
      } else if (e(i, j)) {
        ++r.extra_links;
      }
    }
  r.detected_fraction = r.true_links == 0 ? 1.0 : static_cast<double>(r.found_links) / r.true_links;
  return r;
}

ScoreReport score_topology(const TopologyEstimate& estimate, const LinkMatrix& truth) {
  return score_topology(estimate.links, truth);
}

bool known_method(const std::string& method) {
  return method == "atelnet" || method == "linear" || method == "hard" || method == "soft";
}

TopologyEstimate run_method(const std::string& method, const ActivityTrace& trace, const MethodParams& params,
                            unsigned threads) {
  if (method == "atelnet") return infer_topology(trace, params.atelnet, threads);
  if (method == "linear") return linear_asym_topology(trace, params.linear_tau, params.atelnet.p_fa, threads);
  if (method == "hard" || method == "soft") {
    FusionParams f = params.fusion;
    f.p_fa = params.atelnet.p_fa;
    const double span = static_cast<double>(trace.num_samples()) * trace.sample_period_s();
    f.window_s = std::min(f.window_s, span);
    return method == "hard" ? hard_fusion(trace, f, threads) : soft_fusion(trace, f, threads);
  }
  throw std::invalid_argument("unknown method: " + method);
}

void ExperimentConfig::validate() const {
  make_scenario(scenario, knobs);
  if (methods.empty()) throw std::invalid_argument("experiment: no methods");
  for (const auto& m : methods)
    if (!known_method(m)) throw std::invalid_argument("experiment: unknown method " + m);
  if (grid.durations_s.empty() || grid.sta_per_ap.empty() || grid.p_fa.empty() || grid.alpha.empty() ||
      grid.tau_max.empty())
    throw std::invalid_argument("experiment: every grid axis needs at least one value");
  for (double d : grid.durations_s)
    if (!(d > 0.0)) throw std::invalid_argument("experiment: durations must be positive");
  for (int s : grid.sta_per_ap)
    if (s < 1) throw std::invalid_argument("experiment: sta_per_ap must be >= 1");
  if (scenario != "infra2ap" && grid.sta_per_ap.size() > 1)
    throw std::invalid_argument("experiment: sta_per_ap sweeps need the infra2ap scenario");
  for (double p : grid.p_fa) AtelnetParams{10, 10.0, p}.validate();
  for (double a : grid.alpha) AtelnetParams{10, a, 1e-3}.validate();
  for (int t : grid.tau_max) AtelnetParams{t, 10.0, 1e-3}.validate();
  if (trials < 1) throw std::invalid_argument("experiment: trials must be >= 1");
  if (mode != "sweep" && mode != "roc") throw std::invalid_argument("experiment: mode must be sweep or roc");
  if (mode == "roc") {
    if (!(roc_window_s > 0.0)) throw std::invalid_argument("experiment: roc_window_s must be positive");
    for (double d : grid.durations_s)
      if (d + 1e-12 < roc_window_s) throw std::invalid_argument("experiment: duration shorter than one roc window");
  }
  if (linear_tau < 1) throw std::invalid_argument("experiment: linear_tau must be >= 1");
  fusion.validate();
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  ExperimentConfig c;
  try {
    const json j = json::parse(text);
    if (value_or<std::string>(j, "schema", kConfigSchema) != kConfigSchema)
      throw std::invalid_argument("experiment: unsupported schema");
    c.scenario = value_or(j, "scenario", c.scenario);
    if (const auto it = j.find("knobs"); it != j.end())
      for (const auto& [k, v] : it->items()) c.knobs.set(k, knob_text(v));
    c.methods = value_or(j, "methods", c.methods);
    if (const auto it = j.find("grid"); it != j.end()) {
      c.grid.durations_s = value_or(*it, "durations_s", c.grid.durations_s);
      c.grid.sta_per_ap = value_or(*it, "sta_per_ap", c.grid.sta_per_ap);
      c.grid.p_fa = value_or(*it, "p_fa", c.grid.p_fa);
      c.grid.alpha = value_or(*it, "alpha", c.grid.alpha);
      c.grid.tau_max = value_or(*it, "tau_max", c.grid.tau_max);
    }
    c.trials = value_or(j, "trials", c.trials);
    c.seed = value_or(j, "seed", c.seed);
    c.mode = value_or(j, "mode", c.mode);
    c.roc_window_s = value_or(j, "roc_window_s", c.roc_window_s);
    c.linear_tau = value_or(j, "linear_tau", c.linear_tau);
    if (const auto it = j.find("fusion"); it != j.end()) {
      c.fusion.window_s = value_or(*it, "window_s", c.fusion.window_s);
      c.fusion.tau = value_or(*it, "tau", c.fusion.tau);
      c.fusion.sample_period_s = value_or(*it, "sample_period_s", c.fusion.sample_period_s);
    }
    c.threads = value_or(j, "threads", c.threads);
    c.output_dir = value_or<std::string>(j, "output_dir", "");
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  ExperimentConfig c = parse_experiment_config(ss.str());
  if (!c.output_dir.empty() && c.output_dir.is_relative()) c.output_dir = path.parent_path() / c.output_dir;
  return c;
}

std::uint64_t trial_seed(std::uint64_t base, int sta_per_ap, int trial) {
  return splitmix(splitmix(base) ^ (static_cast<std::uint64_t>(sta_per_ap) << 32) ^ static_cast<std::uint64_t>(trial));
}

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& trials) {
  std::vector<SummaryRow> rows;
  auto same = [](const GridPoint& a, const GridPoint& b) {
    return a.duration_s == b.duration_s && a.sta_per_ap == b.sta_per_ap && a.p_fa == b.p_fa && a.alpha == b.alpha &&
           a.tau_max == b.tau_max;
  };
  std::vector<std::vector<const TrialRecord*>> groups;
  for (const TrialRecord& t : trials) {
    std::size_t k = 0;
    while (k < rows.size() && !(same(rows[k].point, t.point) && rows[k].method == t.method)) ++k;
    if (k == rows.size()) {
      rows.push_back({t.point, t.method});
      groups.emplace_back();
    }
    groups[k].push_back(&t);
  }
  auto mean_ci = [](const std::vector<double>& v, double& mean, double& ci) {
    const double n = static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += x;
    mean = s / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    ci = v.size() > 1 ? 1.96 * std::sqrt(ss / (n - 1.0) / n) : 0.0;
  };
  for (std::size_t k = 0; k < rows.size(); ++k) {
    std::vector<double> det, extra;
    for (const TrialRecord* t : groups[k]) {
      det.push_back(t->score.detected_fraction);
      extra.push_back(t->score.extra_links);
    }
    rows[k].trials = static_cast<int>(det.size());
    mean_ci(det, rows[k].detected_mean, rows[k].detected_ci95);
    mean_ci(extra, rows[k].extra_mean, rows[k].extra_ci95);
  }
  return rows;
}

double roc_auc(std::vector<double> null_stats, std::vector<double> alt_stats) {
  if (null_stats.empty() || alt_stats.empty()) throw std::invalid_argument("roc_auc: empty sample");
  std::sort(null_stats.begin(), null_stats.end());
  double wins = 0.0;
  for (double a : alt_stats) {
    const auto lo = std::lower_bound(null_stats.begin(), null_stats.end(), a);
    const auto hi = std::upper_bound(lo, null_stats.end(), a);
    wins += static_cast<double>(lo - null_stats.begin()) + 0.5 * static_cast<double>(hi - lo);
  }
  return wins / (static_cast<double>(null_stats.size()) * static_cast<double>(alt_stats.size()));
}

namespace {

std::string point_cells(const std::string& scenario, const GridPoint& p) {
  return scenario + "," + format_double(p.duration_s) + "," + std::to_string(p.sta_per_ap) + "," +
         format_double(p.p_fa) + "," + format_double(p.alpha) + "," + std::to_string(p.tau_max);
}

constexpr const char* kPointHeader = "scenario,duration_s,sta_per_ap,p_fa,alpha,tau_max";

std::ofstream open_csv(const std::filesystem::path& path, const char* schema) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# schema: " << schema << "\n";
  return out;
}


void write_wide(const ExperimentConfig& cfg, const std::vector<SummaryRow>& summary, ExperimentResult& result) {
  const ExperimentGrid& g = cfg.grid;
  auto first = [&g](const GridPoint& p, int skip) {
    return (skip == 0 || p.duration_s == g.durations_s[0]) && (skip == 1 || p.sta_per_ap == g.sta_per_ap[0]) &&
           (skip == 2 || p.p_fa == g.p_fa[0]) && (skip == 3 || p.alpha == g.alpha[0]) &&
           (skip == 4 || p.tau_max == g.tau_max[0]);
  };
  const std::vector<std::pair<const char*, std::size_t>> axes = {{"duration_s", g.durations_s.size()},
                                                                 {"sta_per_ap", g.sta_per_ap.size()},
                                                                 {"p_fa", g.p_fa.size()},
                                                                 {"alpha", g.alpha.size()},
                                                                 {"tau_max", g.tau_max.size()}};
  auto axis_value = [](const GridPoint& p, int a) {
    switch (a) {
      case 0: return format_double(p.duration_s);
      case 1: return std::to_string(p.sta_per_ap);
      case 2: return format_double(p.p_fa);
      case 3: return format_double(p.alpha);
      default: return std::to_string(p.tau_max);
    }
  };
  for (int a = 0; a < static_cast<int>(axes.size()); ++a) {
    if (axes[static_cast<std::size_t>(a)].second < 2) continue;
    for (const char* metric : {"detected", "extra"}) {
      const std::string name = std::string(metric) + "_by_" + axes[static_cast<std::size_t>(a)].first + ".csv";
      const auto path = cfg.output_dir / name;
      std::ofstream out = open_csv(path, "topolearn.wide.v1");
      out << axes[static_cast<std::size_t>(a)].first;
      for (const auto& m : cfg.methods) out << "," << m;
      out << "\n";
      std::vector<std::string> keys;
      for (const SummaryRow& r : summary)
        if (first(r.point, a) && std::find(keys.begin(), keys.end(), axis_value(r.point, a)) == keys.end())
          keys.push_back(axis_value(r.point, a));
      for (const auto& key : keys) {
        out << key;
        for (const auto& m : cfg.methods) {
          out << ",";
          for (const SummaryRow& r : summary)
            if (r.method == m && first(r.point, a) && axis_value(r.point, a) == key)
              out << format_double(std::string(metric) == "detected" ? r.detected_mean : r.extra_mean);
        }
        out << "\n";
      }
      result.files.push_back(path);
    }
  }
}

void write_outputs(const ExperimentConfig& cfg, ExperimentResult& result) {
  if (cfg.output_dir.empty()) return;
  std::filesystem::create_directories(cfg.output_dir);
  if (cfg.mode == "sweep") {
    {
      const auto path = cfg.output_dir / "trials.csv";
      std::ofstream out = open_csv(path, "topolearn.trials.v1");
      out << kPointHeader << ",method,trial,seed,detected_fraction,extra_links,true_links,found_links\n";
      for (const TrialRecord& t : result.trials)
        out << point_cells(cfg.scenario, t.point) << "," << t.method << "," << t.trial << "," << t.seed << ","
            << format_double(t.score.detected_fraction) << "," << t.score.extra_links << "," << t.score.true_links
            << "," << t.score.found_links << "\n";
      result.files.push_back(path);
    }
    {
      const auto path = cfg.output_dir / "summary.csv";
      std::ofstream out = open_csv(path, "topolearn.summary.v1");
      out << kPointHeader << ",method,trials,detected_mean,detected_ci95,extra_mean,extra_ci95\n";
      for (const SummaryRow& r : result.summary)
        out << point_cells(cfg.scenario, r.point) << "," << r.method << "," << r.trials << ","
            << format_double(r.detected_mean) << "," << format_double(r.detected_ci95) << ","
            << format_double(r.extra_mean) << "," << format_double(r.extra_ci95) << "\n";
      result.files.push_back(path);
    }
    write_wide(cfg, result.summary, result);
  } else {
    const auto path = cfg.output_dir / "roc.csv";
    std::ofstream out = open_csv(path, "topolearn.roc.v1");
    out << kPointHeader << ",method,trial,window,i,j,hypothesis,statistic,tau_hat\n";
    for (const RocRecord& r : result.roc)
      out << point_cells(cfg.scenario, r.point) << "," << r.method << "," << r.trial << "," << r.window << "," << r.i
          << "," << r.j << "," << (r.linked ? "alternate" : "null") << "," << format_double(r.statistic) << ","
          << r.tau_hat << "\n";
    result.files.push_back(path);
  }
}

struct Unit {
  int sta_per_ap = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  bool done = false;
  std::vector<TrialRecord> records;
  std::vector<RocRecord> roc;
};

std::vector<GridPoint> points_for(const ExperimentGrid& g, int sta) {
  std::vector<GridPoint> out;
  for (double d : g.durations_s)
    for (double p : g.p_fa)
      for (double a : g.alpha)
        for (int t : g.tau_max) out.push_back({d, sta, p, a, t});
  return out;
}

void run_unit(const ExperimentConfig& cfg, Unit& u) {
  ScenarioKnobs knobs = cfg.knobs;
  knobs.sta_per_ap = u.sta_per_ap;
  const NetConfig net = make_scenario(cfg.scenario, knobs);
  const double longest = *std::max_element(cfg.grid.durations_s.begin(), cfg.grid.durations_s.end());
  const SimReport sim = simulate_network(net, longest, u.seed);
  const double ts = net.ts;
  for (const GridPoint& p : points_for(cfg.grid, u.sta_per_ap)) {
    MethodParams mp;
    mp.atelnet = {p.tau_max, p.alpha, p.p_fa};
    mp.linear_tau = cfg.linear_tau;
    mp.fusion = cfg.fusion;
    const Sample n = std::min(sim.trace.num_samples(), static_cast<Sample>(std::llround(p.duration_s / ts)));
    if (cfg.mode == "sweep") {
      const ActivityTrace trace = slice(sim.trace, 0, n);
      const LinkMatrix truth = truth_for_window(net, 0.0, static_cast<double>(n) * ts);
      for (const auto& m : cfg.methods)
        u.records.push_back({p, m, u.trial, u.seed, score_topology(run_method(m, trace, mp, 1), truth)});
    } else {
      const Sample w = static_cast<Sample>(std::llround(cfg.roc_window_s / ts));
      for (Sample k = 0; (k + 1) * w <= n; ++k) {
        const ActivityTrace trace = slice(sim.trace, k * w, w);
        const LinkMatrix truth =
            truth_for_window(net, static_cast<double>(k * w) * ts, static_cast<double>((k + 1) * w) * ts);
        for (const auto& m : cfg.methods) {
          const TopologyEstimate e = run_method(m, trace, mp, 1);
          for (int i = 1; i <= e.m(); ++i)
            for (int j = 1; j <= e.m(); ++j) {
              if (i == j) continue;
              const LinkDecision& d = e.detail(i, j);
              u.roc.push_back({p, m, u.trial, static_cast<int>(k), i, j, truth(i, j), d.statistic, d.tau_hat});
            }
        }
      }
    }
  }
  u.done = true;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  std::vector<Unit> units;
  for (int sta : config.grid.sta_per_ap)
    for (int t = 0; t < config.trials; ++t) {
      Unit u;
      u.sta_per_ap = sta;
      u.trial = t;
      u.seed = trial_seed(config.seed, sta, t);
      units.push_back(std::move(u));
    }
  std::exception_ptr failure;
  std::mutex mu;
  detail::parallel_for(units.size(), config.threads, [&](std::size_t k) {
    try {
      run_unit(config, units[k]);
    } catch (...) {
      std::lock_guard lock(mu);
      if (!failure) failure = std::current_exception();
    }
  });
  ExperimentResult result;
  // fixed aggregation order: grid point, then trial, then method
  for (const Unit& u : units) {
    if (!u.done) continue;
    result.trials.insert(result.trials.end(), u.records.begin(), u.records.end());
    result.roc.insert(result.roc.end(), u.roc.begin(), u.roc.end());
  }
  auto key = [](const TrialRecord& t) {
    return std::make_tuple(t.point.sta_per_ap, t.point.duration_s, t.point.p_fa, t.point.alpha, t.point.tau_max);
  };
  std::stable_sort(result.trials.begin(), result.trials.end(), [&](const TrialRecord& a, const TrialRecord& b) {
    if (key(a) != key(b)) return key(a) < key(b);
    return a.trial < b.trial;
  });
  result.summary = summarize(result.trials);
  write_outputs(config, result);
  if (failure) std::rethrow_exception(failure);
  return result;
}

}  // namespace topolearn
