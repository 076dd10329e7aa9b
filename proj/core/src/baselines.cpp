#include "topolearn/baselines.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "parallel.hpp"
#include "regression.hpp"
#include "topolearn/distributions.hpp"

namespace topolearn {

GrangerResult granger_f_statistic(std::span<const double> x, std::span<const double> y, int tau) {
  if (x.size() != y.size()) throw std::invalid_argument("granger_f_statistic: series differ in length");
  if (static_cast<std::int64_t>(y.size()) <= 3 * static_cast<std::int64_t>(tau) + 1)
    throw std::invalid_argument("granger_f_statistic: series shorter than 3*tau + 2");
  return detail::granger_from_gram(detail::dense_gram(x, y, tau), tau);
}

GrangerResult granger_binary(const std::vector<Interval>& x, const std::vector<Interval>& own,
                             const std::vector<Interval>& response, int tau, Sample begin, Sample end) {
  if (end - begin <= 3 * static_cast<Sample>(tau) + 1)
    throw std::invalid_argument("granger_binary: window shorter than 3*tau + 2");
  return detail::granger_from_gram(detail::binary_gram(x, own, response, tau, begin, end), tau);
}

void FusionParams::validate() const {
  if (!(window_s > 0.0)) throw std::invalid_argument("fusion window must be positive");
  if (tau < 1) throw std::invalid_argument("fusion lag must be >= 1");
  if (!(p_fa > 0.0 && p_fa < 1.0)) throw std::invalid_argument("p_fa must lie in (0,1)");
  if (!(sample_period_s > 0.0)) throw std::invalid_argument("fusion sample period must be positive");
}

namespace {

struct Windowing {
  ActivityTrace activity;
  Sample window = 0;
  Sample count = 0;
};

Windowing prepare(const ActivityTrace& trace, const FusionParams& params) {
  params.validate();
  if (trace.num_radios() < 2) throw std::invalid_argument("fusion needs at least two radios");
  Windowing w;
  w.activity = resample(trace, params.sample_period_s);
  w.window = static_cast<Sample>(std::llround(params.window_s / w.activity.sample_period_s()));
  if (w.window <= 3 * static_cast<Sample>(params.tau) + 1)
    throw std::invalid_argument("fusion window must hold more than 3*tau + 1 samples");
  w.count = w.activity.num_samples() / w.window;
  if (w.count < 1) throw std::invalid_argument("trace shorter than one fusion window");
  return w;
}

std::vector<std::pair<int, int>> ordered_pairs(int m) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 1; i <= m; ++i)
    for (int j = 1; j <= m; ++j)
      if (i != j) pairs.emplace_back(i, j);
  return pairs;
}

// ln(rss_null / rss_alt), floored so a perfect fit stays finite.
double magnitude(const LinearFitResult& fit) {
  if (fit.rss_null <= 0.0) return 0.0;
  return std::log(fit.rss_null / std::max(fit.rss_alt, 1e-12 * fit.rss_null));
}

std::vector<GrangerResult> window_tests(const Windowing& w, int i, int j, int tau) {
  const auto& xi = w.activity.radio(i).intervals;
  const auto& xj = w.activity.radio(j).intervals;
  std::vector<GrangerResult> out;
  out.reserve(static_cast<std::size_t>(w.count));
  for (Sample k = 0; k < w.count; ++k) out.push_back(granger_binary(xi, xj, xj, tau, k * w.window, (k + 1) * w.window));
  return out;
}

}  // namespace

std::vector<double> fusion_magnitudes(const ActivityTrace& resampled, int i, int j, const FusionParams& params) {
  const Windowing w = prepare(resampled, params);
  std::vector<double> out;
  for (const GrangerResult& r : window_tests(w, i, j, params.tau)) out.push_back(magnitude(r.fit));
  return out;
}

TopologyEstimate hard_fusion(const ActivityTrace& trace, const FusionParams& params, unsigned threads) {
  const Windowing w = prepare(trace, params);
  const int m = w.activity.num_radios();
  const int dof2 = static_cast<int>(w.window - 3 * params.tau - 1);
  const double thr = dist::f_inv_upper(params.p_fa, params.tau, dof2);
  const auto pairs = ordered_pairs(m);
  std::vector<LinkDecision> decisions(pairs.size());
  detail::parallel_for(pairs.size(), threads, [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    Sample hits = 0;
    for (const GrangerResult& r : window_tests(w, i, j, params.tau))
      if (r.g > thr) ++hits;
    LinkDecision& d = decisions[k];
    d.i = i;
    d.j = j;
    d.tau_hat = params.tau;
    d.dof = params.tau;
    d.statistic = static_cast<double>(hits) / static_cast<double>(w.count);
    d.threshold = 0.5;
    d.decision = 2 * hits > w.count;  // strict majority
  });
  return make_estimate("hard", m, std::move(decisions));
}

TopologyEstimate soft_fusion(const ActivityTrace& trace, const FusionParams& params, unsigned threads) {
  const Windowing w = prepare(trace, params);
  const int m = w.activity.num_radios();
  const auto pairs = ordered_pairs(m);
  std::vector<double> avg(pairs.size(), 0.0);
  detail::parallel_for(pairs.size(), threads, [&](std::size_t k) {
    long double sum = 0.0L;
    for (const GrangerResult& r : window_tests(w, pairs[k].first, pairs[k].second, params.tau))
      sum += magnitude(r.fit);
    avg[k] = static_cast<double>(sum / static_cast<long double>(w.count));
  });
  long double total = 0.0L;
  for (double a : avg) total += a;
  const double mean = static_cast<double>(total / static_cast<long double>(avg.size()));
  // ties within rounding of the mean count as ties, not as exceeding it
  const double slack = 1e-12 * std::max(std::abs(mean), 1e-300);
  std::vector<LinkDecision> decisions(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    LinkDecision& d = decisions[k];
    d.i = pairs[k].first;
    d.j = pairs[k].second;
    d.tau_hat = params.tau;
    d.dof = params.tau;
    d.statistic = avg[k];
    d.threshold = mean;
    d.decision = avg[k] - mean > slack;
  }
  return make_estimate("soft", m, std::move(decisions));
}

namespace {

struct EventIntervals {
  std::vector<Interval> starts;
  std::vector<Interval> ends;
};

EventIntervals event_intervals(const ActivityTrace& trace, int r) {
  return {detail::unit_intervals(derive_events(trace, r, EventKind::start).event_samples),
          detail::unit_intervals(derive_events(trace, r, EventKind::end).event_samples)};
}

LinkDecision linear_decision(const EventIntervals& ei, const EventIntervals& ej, int i, int j, Sample n, int tau,
                             double thr) {
  const GrangerResult r = granger_binary(ei.ends, ej.ends, ej.starts, tau, 0, n);
  LinkDecision d;
  d.i = i;
  d.j = j;
  d.tau_hat = tau;
  d.dof = tau;
  d.statistic = r.g;
  d.threshold = thr;
  d.decision = r.g > thr;
  return d;
}

double linear_threshold(Sample n, int tau, double p_fa) {
  if (!(p_fa > 0.0 && p_fa < 1.0)) throw std::invalid_argument("p_fa must lie in (0,1)");
  if (tau < 1) throw std::invalid_argument("lag must be >= 1");
  if (n <= 3 * static_cast<Sample>(tau) + 1) throw std::invalid_argument("trace shorter than 3*tau + 2");
  return dist::f_inv_upper(p_fa, tau, static_cast<int>(n - 3 * tau - 1));
}

}  // namespace

LinkDecision linear_asym_test(const ActivityTrace& trace, int i, int j, int tau, double p_fa) {
  if (i == j) throw std::invalid_argument("linear_asym_test needs two distinct radios");
  const double thr = linear_threshold(trace.num_samples(), tau, p_fa);
  return linear_decision(event_intervals(trace, i), event_intervals(trace, j), i, j, trace.num_samples(), tau, thr);
}

TopologyEstimate linear_asym_topology(const ActivityTrace& trace, int tau, double p_fa, unsigned threads) {
  const int m = trace.num_radios();
  if (m < 2) throw std::invalid_argument("linear_asym_topology needs at least two radios");
  const double thr = linear_threshold(trace.num_samples(), tau, p_fa);
  std::vector<EventIntervals> ev;
  for (int r = 1; r <= m; ++r) ev.push_back(event_intervals(trace, r));
  const auto pairs = ordered_pairs(m);
  std::vector<LinkDecision> decisions(pairs.size());
  detail::parallel_for(pairs.size(), threads, [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    decisions[k] = linear_decision(ev[static_cast<std::size_t>(i - 1)], ev[static_cast<std::size_t>(j - 1)], i, j,
                                   trace.num_samples(), tau, thr);
  });
  return make_estimate("linear", m, std::move(decisions));
}

}  // namespace topolearn
