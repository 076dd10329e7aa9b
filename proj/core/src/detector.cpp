#include "topolearn/detector.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "parallel.hpp"
#include "topolearn/distributions.hpp"

namespace topolearn {

void AtelnetParams::validate() const {
  if (tau_max < 1 || tau_max > kMaxLag) throw std::invalid_argument("tau_max must lie in 1..250");
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must exceed 1");
  if (!(p_fa > 0.0 && p_fa < 1.0)) throw std::invalid_argument("p_fa must lie in (0,1)");
}

const LinkDecision& TopologyEstimate::detail(int i, int j) const {
  const int m = links.m();
  if (i < 1 || j < 1 || i > m || j > m || i == j) throw std::out_of_range("no decision for this pair");
  return details[static_cast<std::size_t>((i - 1) * m + (j - 1))];
}

TopologyEstimate make_estimate(std::string method, int m, std::vector<LinkDecision> decisions) {
  TopologyEstimate est{std::move(method), LinkMatrix(m), {}};
  est.details.resize(static_cast<std::size_t>(m) * static_cast<std::size_t>(m));
  for (LinkDecision& d : decisions) {
    if (d.i == d.j) continue;
    if (d.decision) est.links.set(d.i, d.j);
    est.details[static_cast<std::size_t>((d.i - 1) * m + (d.j - 1))] = d;
  }
  return est;
}

int dof(int tau) {
  if (tau < 1) throw std::invalid_argument("dof: lag must be >= 1");
  return tau * (tau + 1);
}

double threshold(int tau, double p_fa) {
  if (!(p_fa > 0.0 && p_fa <= 1.0)) throw std::invalid_argument("threshold: p_fa must lie in (0,1]");
  return dist::chi2_inv_upper(p_fa, dof(tau));
}

int estimate_response_time(std::span<const double> profile, double alpha) {
  if (profile.empty()) throw std::invalid_argument("estimate_response_time: empty profile");
  if (!(alpha > 1.0)) throw std::invalid_argument("estimate_response_time: alpha must exceed 1");
  // Ratio of the value one lag down to the current one.
  auto ratio = [&](int tau) {
    const double below = profile[static_cast<std::size_t>(tau - 2)];
    const double here = profile[static_cast<std::size_t>(tau - 1)];
    if (here == 0.0) return below > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    return below / here;
  };
  int tau = static_cast<int>(profile.size());
  while (tau > 1 && ratio(tau) > 1.0 / alpha) --tau;
  return tau;
}

int estimate_response_time(const std::vector<LagValue>& profile, double alpha) {
  std::vector<double> v;
  v.reserve(profile.size());
  for (std::size_t k = 0; k < profile.size(); ++k) {
    if (profile[k].tau != static_cast<int>(k) + 1)
      throw std::invalid_argument("estimate_response_time: profile must cover lags 1..tau_max in order");
    v.push_back(profile[k].value);
  }
  return estimate_response_time(std::span<const double>(v), alpha);
}

namespace {

LinkDecision decide(const JointPmf& pmf, int i, int j, Sample n, const AtelnetParams& params,
                    const std::vector<double>& thresholds) {
  const std::vector<LagValue> prof = ate_profile(pmf);
  const int tau_hat = estimate_response_time(prof, params.alpha);
  LinkDecision d;
  d.i = i;
  d.j = j;
  d.tau_hat = tau_hat;
  d.dof = dof(tau_hat);
  d.statistic = 2.0 * static_cast<double>(n - tau_hat) * prof[static_cast<std::size_t>(tau_hat - 1)].value;
  d.threshold = thresholds[static_cast<std::size_t>(tau_hat - 1)];
  d.decision = d.statistic > d.threshold;
  return d;
}

std::vector<double> threshold_table(const AtelnetParams& params) {
  std::vector<double> t;
  for (int tau = 1; tau <= params.tau_max; ++tau) t.push_back(threshold(tau, params.p_fa));
  return t;
}

}  // namespace

LinkDecision test_link(const ActivityTrace& trace, int i, int j, const AtelnetParams& params) {
  params.validate();
  if (i == j) throw std::invalid_argument("test_link needs two distinct radios");
  const JointPmf pmf = joint_counts(trace, i, j, params.tau_max);
  return decide(pmf, i, j, trace.num_samples(), params, threshold_table(params));
}

TopologyEstimate infer_topology(const ActivityTrace& trace, const AtelnetParams& params, unsigned threads) {
  params.validate();
  const int m = trace.num_radios();
  if (m < 2) throw std::invalid_argument("infer_topology needs at least two radios");
  std::vector<EventSeries> starts, ends;
  for (int r = 1; r <= m; ++r) {
    starts.push_back(derive_events(trace, r, EventKind::start));
    ends.push_back(derive_events(trace, r, EventKind::end));
  }
  const std::vector<double> thresholds = threshold_table(params);
  std::vector<std::pair<int, int>> pairs;
  for (int i = 1; i <= m; ++i)
    for (int j = 1; j <= m; ++j)
      if (i != j) pairs.emplace_back(i, j);
  std::vector<LinkDecision> decisions(pairs.size());
  detail::parallel_for(pairs.size(), threads, [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    const JointPmf pmf = joint_counts(ends[static_cast<std::size_t>(i - 1)], ends[static_cast<std::size_t>(j - 1)],
                                      starts[static_cast<std::size_t>(j - 1)], trace.num_samples(), params.tau_max);
    decisions[k] = decide(pmf, i, j, trace.num_samples(), params, thresholds);
  });
  return make_estimate("atelnet", m, std::move(decisions));
}

double detection_probability(double a_true, long long n, int tau, double p_fa) {
  if (!(a_true >= 0.0) || n <= tau) throw std::invalid_argument("detection_probability: bad argument");
  const double nc = 2.0 * static_cast<double>(n - tau) * a_true;
  return dist::noncentral_chi2_sf(threshold(tau, p_fa), dof(tau), nc);
}

double false_alarm_bound(double a_null_lag1, long long n, double p_fa) {
  if (!(a_null_lag1 >= 0.0) || n < 2) throw std::invalid_argument("false_alarm_bound: bad argument");
  const double a = std::sqrt(2.0 * static_cast<double>(n - 1) * a_null_lag1);
  return dist::marcum_q1(a, std::sqrt(threshold(1, p_fa)));
}

}  // namespace topolearn
