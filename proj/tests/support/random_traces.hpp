// Shared helpers for tests: small random traces and dense brute-force
// reference computations.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <tuple>
#include <vector>

#include "topolearn/trace.hpp"

namespace testsupport {

using topolearn::ActivityTrace;
using topolearn::Sample;

// Each radio is an independent two-state chain: idle -> busy with p_on,
// busy -> idle with p_off.
inline ActivityTrace markov_trace(int m, Sample n, double p_on, double p_off, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  topolearn::TraceBuilder b(5e-6, n, m);
  for (int r = 1; r <= m; ++r) {
    std::vector<std::uint8_t> a(static_cast<std::size_t>(n));
    bool on = false;
    for (Sample t = 0; t < n; ++t) {
      on = on ? u(gen) >= p_off : u(gen) < p_on;
      a[static_cast<std::size_t>(t)] = on;
    }
    b.add_dense(r, a);
  }
  return b.build();
}

// Dense start / end indicators straight from the activity definition.
inline std::vector<std::uint8_t> dense_starts(const std::vector<std::uint8_t>& a) {
  std::vector<std::uint8_t> s(a.size());
  for (std::size_t t = 0; t < a.size(); ++t) s[t] = a[t] && (t == 0 || !a[t - 1]);
  return s;
}

inline std::vector<std::uint8_t> dense_ends(const std::vector<std::uint8_t>& a) {
  std::vector<std::uint8_t> e(a.size());
  for (std::size_t t = 0; t < a.size(); ++t) e[t] = a[t] && (t + 1 == a.size() || !a[t + 1]);
  return e;
}

// Window symbol at lag tau: 0 = no event, p = single event at t - p,
// 255 = two or more events.
inline int window_symbol(const std::vector<std::uint8_t>& e, Sample t, int tau) {
  int count = 0, pos = 0;
  for (int p = 1; p <= tau; ++p)
    if (e[static_cast<std::size_t>(t - p)]) {
      if (count == 0) pos = p;
      ++count;
    }
  return count == 0 ? 0 : (count == 1 ? pos : 255);
}

// Plug-in I(S_j ; W_i | W_j) over t in [first, N-1], by direct counting.
inline double brute_ate(const ActivityTrace& trace, int i, int j, int tau, Sample first) {
  const auto ei = dense_ends(trace.dense(i));
  const auto ej = dense_ends(trace.dense(j));
  const auto sj = dense_starts(trace.dense(j));
  std::map<std::tuple<int, int, int>, double> xyz;
  for (Sample t = first; t < trace.num_samples(); ++t)
    xyz[{window_symbol(ei, t, tau), window_symbol(ej, t, tau), sj[static_cast<std::size_t>(t)]}] += 1.0;
  const double n = static_cast<double>(trace.num_samples() - first);
  std::map<std::pair<int, int>, double> xy, ys;
  std::map<int, double> y;
  for (const auto& [k, c] : xyz) {
    const auto [xi, yj, s] = k;
    xy[{xi, yj}] += c;
    ys[{yj, s}] += c;
    y[yj] += c;
  }
  double a = 0.0;
  for (const auto& [k, c] : xyz) {
    const auto [xi, yj, s] = k;
    a += c / n * std::log(c * y[yj] / (xy[{xi, yj}] * ys[{yj, s}]));
  }
  return a;
}

}  // namespace testsupport
