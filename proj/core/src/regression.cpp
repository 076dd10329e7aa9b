#include "regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace topolearn::detail {

namespace {

std::vector<Interval>::const_iterator first_reaching(const std::vector<Interval>& w, Sample shift, Sample begin) {
  // first interval whose shifted end exceeds begin
  return std::upper_bound(w.begin(), w.end(), begin - shift,
                          [](Sample value, const Interval& iv) { return value < iv.end; });
}

Sample shifted_count(const std::vector<Interval>& u, int lag, Sample begin, Sample end) {
  Sample total = 0;
  for (auto it = first_reaching(u, lag, begin); it != u.end() && it->start + lag < end; ++it)
    total += std::min(it->end + lag, end) - std::max(it->start + lag, begin);
  return total;
}

struct Solve {
  VecL beta;
  bool regularized = false;
};

Solve solve_spd(const MatL& g, const VecL& c) {
  Eigen::LDLT<MatL> ldlt(g);
  const auto d = ldlt.vectorD().cwiseAbs();
  const long double dmax = d.size() ? d.maxCoeff() : 0.0L;
  const long double dmin = d.size() ? d.minCoeff() : 0.0L;
  if (ldlt.info() == Eigen::Success && dmax > 0.0L && dmin > 1e-13L * dmax) return {ldlt.solve(c), false};
  const long double scale = std::max<long double>(1.0L, g.diagonal().cwiseAbs().maxCoeff());
  MatL r = g;
  r.diagonal().array() += 1e-12L * scale;
  Eigen::LDLT<MatL> ridge(r);
  return {ridge.solve(c), true};
}

long double rss_for(const Gram& gram, int k, bool& regularized) {
  const MatL g = gram.xtx.topLeftCorner(k, k);
  const VecL c = gram.xty.head(k);
  const Solve s = solve_spd(g, c);
  regularized = regularized || s.regularized;
  const long double rss = gram.yty - 2.0L * s.beta.dot(c) + s.beta.dot(g * s.beta);
  return std::max(0.0L, rss);
}

}  // namespace

std::vector<Interval> unit_intervals(const std::vector<Sample>& samples) {
  std::vector<Interval> out;
  out.reserve(samples.size());
  for (Sample s : samples) out.push_back({s, s + 1});
  return out;
}

Sample lagged_overlap(const std::vector<Interval>& u, int lag_u, const std::vector<Interval>& v, int lag_v,
                      Sample begin, Sample end) {
  auto a = first_reaching(u, lag_u, begin);
  auto b = first_reaching(v, lag_v, begin);
  Sample total = 0;
  while (a != u.end() && b != v.end()) {
    const Sample as = a->start + lag_u, ae = a->end + lag_u;
    const Sample bs = b->start + lag_v, be = b->end + lag_v;
    if (as >= end || bs >= end) break;
    const Sample lo = std::max({as, bs, begin});
    const Sample hi = std::min({ae, be, end});
    if (hi > lo) total += hi - lo;
    if (ae < be)
      ++a;
    else
      ++b;
  }
  return total;
}

Gram dense_gram(std::span<const double> x, std::span<const double> y, int tau) {
  if (x.size() != y.size()) throw std::invalid_argument("regression series differ in length");
  if (tau < 1) throw std::invalid_argument("regression lag must be >= 1");
  const auto n = static_cast<std::int64_t>(y.size());
  const int p = 2 * tau + 1;
  Gram g;
  g.xtx = MatL::Zero(p, p);
  g.xty = VecL::Zero(p);
  std::vector<long double> row(static_cast<std::size_t>(p));
  for (std::int64_t t = tau; t < n; ++t) {
    row[0] = 1.0L;
    for (int k = 1; k <= tau; ++k) {
      row[static_cast<std::size_t>(k)] = y[static_cast<std::size_t>(t - k)];
      row[static_cast<std::size_t>(tau + k)] = x[static_cast<std::size_t>(t - k)];
    }
    const long double yt = y[static_cast<std::size_t>(t)];
    for (int a = 0; a < p; ++a) {
      g.xty(a) += row[static_cast<std::size_t>(a)] * yt;
      for (int b = a; b < p; ++b) g.xtx(a, b) += row[static_cast<std::size_t>(a)] * row[static_cast<std::size_t>(b)];
    }
    g.yty += yt * yt;
  }
  g.xtx.triangularView<Eigen::StrictlyLower>() = g.xtx.transpose().triangularView<Eigen::StrictlyLower>();
  g.rows = std::max<std::int64_t>(0, n - tau);
  return g;
}

Gram binary_gram(const std::vector<Interval>& x, const std::vector<Interval>& own,
                 const std::vector<Interval>& response, int tau, Sample begin, Sample end) {
  if (tau < 1) throw std::invalid_argument("regression lag must be >= 1");
  const Sample rb = begin + tau;
  const int p = 2 * tau + 1;
  auto series = [&](int col) -> const std::vector<Interval>& { return col <= tau ? own : x; };
  auto lag = [&](int col) { return col <= tau ? col : col - tau; };
  Gram g;
  g.xtx = MatL::Zero(p, p);
  g.xty = VecL::Zero(p);
  g.rows = std::max<Sample>(0, end - rb);
  g.xtx(0, 0) = static_cast<long double>(g.rows);
  for (int a = 1; a < p; ++a) {
    g.xtx(0, a) = g.xtx(a, 0) = static_cast<long double>(shifted_count(series(a), lag(a), rb, end));
    for (int b = a; b < p; ++b)
      g.xtx(a, b) = g.xtx(b, a) =
          static_cast<long double>(lagged_overlap(series(a), lag(a), series(b), lag(b), rb, end));
    g.xty(a) = static_cast<long double>(lagged_overlap(series(a), lag(a), response, 0, rb, end));
  }
  g.yty = static_cast<long double>(shifted_count(response, 0, rb, end));
  g.xty(0) = g.yty;
  return g;
}

LinearFitResult fit_nested(const Gram& gram, int tau) {
  LinearFitResult r;
  r.tau = tau;
  r.n_effective = gram.rows;
  const long double null_rss = rss_for(gram, 1 + tau, r.regularized);
  const long double alt_rss = rss_for(gram, 1 + 2 * tau, r.regularized);
  r.rss_null = static_cast<double>(null_rss);
  r.rss_alt = static_cast<double>(alt_rss);
  return r;
}

GrangerResult granger_from_gram(const Gram& gram, int tau) {
  GrangerResult out;
  out.dof1 = tau;
  const std::int64_t dof2 = gram.rows - (2 * static_cast<std::int64_t>(tau) + 1);
  if (dof2 < 1) throw std::invalid_argument("regression needs more than 3*tau + 1 samples");
  out.dof2 = static_cast<int>(dof2);
  out.fit = fit_nested(gram, tau);
  const double gain = out.fit.rss_null - out.fit.rss_alt;
  if (out.fit.rss_alt > 0.0)
    out.g = std::max(0.0, gain) / out.fit.rss_alt * static_cast<double>(dof2) / tau;
  else
    out.g = gain > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return out;
}

}  // namespace topolearn::detail
