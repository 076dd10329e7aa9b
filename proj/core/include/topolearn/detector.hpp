// Pairwise link detection by thresholding the scaled asymmetric transfer
// entropy at the response time estimated from its lag profile.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "topolearn/empirical.hpp"
#include "topolearn/trace.hpp"

namespace topolearn {

struct AtelnetParams {
  int tau_max = 10;
  double alpha = 10.0;
  double p_fa = 1e-3;

  void validate() const;  // throws std::invalid_argument
};

struct LinkDecision {
  int i = 0;
  int j = 0;
  double statistic = 0.0;
  int tau_hat = 0;
  int dof = 0;
  double threshold = 0.0;
  bool decision = false;
};

struct TopologyEstimate {
  std::string method;
  LinkMatrix links;
  std::vector<LinkDecision> details;  // row-major M x M, diagonal entries unused

  int m() const { return links.m(); }
  const LinkDecision& detail(int i, int j) const;
};

// Builds an estimate whose link matrix mirrors the decisions.
TopologyEstimate make_estimate(std::string method, int m, std::vector<LinkDecision> decisions);

int dof(int tau);
double threshold(int tau, double p_fa);

// Algorithm 1: profile[k] is the ATE at lag k + 1.
int estimate_response_time(std::span<const double> profile, double alpha);
int estimate_response_time(const std::vector<LagValue>& profile, double alpha);

LinkDecision test_link(const ActivityTrace& trace, int i, int j, const AtelnetParams& params);

// Every ordered pair; `threads` = 0 uses the hardware concurrency.
TopologyEstimate infer_topology(const ActivityTrace& trace, const AtelnetParams& params, unsigned threads = 0);

double detection_probability(double a_true, long long n, int tau, double p_fa);
double false_alarm_bound(double a_null_lag1, long long n, double p_fa);

}  // namespace topolearn
