#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "topolearn/baselines.hpp"

namespace topolearn::detail {

using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

// Normal-equation blocks for the nested lag regressions.  Column 0 is the
// intercept, columns 1..tau the response's own lags, tau+1..2tau the lags of
// the candidate cause.
struct Gram {
  MatL xtx;
  VecL xty;
  long double yty = 0.0L;
  std::int64_t rows = 0;
};

Gram dense_gram(std::span<const double> x, std::span<const double> y, int tau);
Gram binary_gram(const std::vector<Interval>& x, const std::vector<Interval>& own,
                 const std::vector<Interval>& response, int tau, Sample begin, Sample end);

// #{t in [begin, end) : u[t - lag_u] = 1 and v[t - lag_v] = 1}
Sample lagged_overlap(const std::vector<Interval>& u, int lag_u, const std::vector<Interval>& v, int lag_v,
                      Sample begin, Sample end);

LinearFitResult fit_nested(const Gram& gram, int tau);
GrangerResult granger_from_gram(const Gram& gram, int tau);

std::vector<Interval> unit_intervals(const std::vector<Sample>& samples);

}  // namespace topolearn::detail
