// Comparison detectors built on linear Granger-style regressions: the linear
// asymmetric F-test on event series and hard/soft fusion of windowed
// symmetric tests on activity series.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "topolearn/detector.hpp"
#include "topolearn/trace.hpp"

namespace topolearn {

struct LinearFitResult {
  double rss_null = 0.0;
  double rss_alt = 0.0;
  std::int64_t n_effective = 0;  // regression rows
  int tau = 0;
  bool regularized = false;  // a ridge term was needed to solve a singular design
};

struct GrangerResult {
  double g = 0.0;
  int dof1 = 0;
  int dof2 = 0;
  LinearFitResult fit;
};

// Null: y[t] on an intercept and y[t-1..t-tau].  Alternate: additionally
// x[t-1..t-tau].  g = ((rss_null - rss_alt) / rss_alt) * (N - 3 tau - 1) / tau.
GrangerResult granger_f_statistic(std::span<const double> x, std::span<const double> y, int tau);

// Same regression for 0/1 series given as interval sets, over rows
// t in [begin + tau, end).  `x` is the candidate cause, `own` supplies the
// response's own lags and `response` the regressand.
GrangerResult granger_binary(const std::vector<Interval>& x, const std::vector<Interval>& own,
                             const std::vector<Interval>& response, int tau, Sample begin, Sample end);

struct FusionParams {
  double window_s = 0.060;
  int tau = 8;
  double p_fa = 1e-3;
  double sample_period_s = 20e-6;  // activity is OR-resampled to this period first

  void validate() const;
};

TopologyEstimate hard_fusion(const ActivityTrace& trace, const FusionParams& params, unsigned threads = 0);
TopologyEstimate soft_fusion(const ActivityTrace& trace, const FusionParams& params, unsigned threads = 0);

// Per-window magnitudes ln(rss_null / rss_alt) for one ordered pair, exposed
// for inspection.
std::vector<double> fusion_magnitudes(const ActivityTrace& resampled, int i, int j, const FusionParams& params);

LinkDecision linear_asym_test(const ActivityTrace& trace, int i, int j, int tau, double p_fa);
TopologyEstimate linear_asym_topology(const ActivityTrace& trace, int tau, double p_fa, unsigned threads = 0);

}  // namespace topolearn
