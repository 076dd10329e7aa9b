// Empirical joint PMF of (S_j[t], E_i window, E_j window) and the plug-in
// asymmetric transfer entropy built from it.  Logarithms are natural.
#pragma once

#include <compare>
#include <cstdint>
#include <vector>

#include "topolearn/trace.hpp"

namespace topolearn {

// Positions are stored in a byte, so lags are limited to this value.
inline constexpr int kMaxLag = 250;

// Lookback window contents at time t.  Position p means the end event happened
// at t - p; 0 means "no event".  `*_next` holds the position of the second most
// recent event in the window; a nonzero value marks an overflow window (two or
// more end events of the same radio).  Keeping the second position makes
// marginalization to shorter lags exact.
struct WindowKey {
  std::uint8_t i_pos = 0;
  std::uint8_t i_next = 0;
  std::uint8_t j_pos = 0;
  std::uint8_t j_next = 0;

  bool i_overflow() const { return i_next != 0; }
  bool j_overflow() const { return j_next != 0; }
  bool overflow() const { return i_overflow() || j_overflow(); }

  friend auto operator<=>(const WindowKey&, const WindowKey&) = default;
};

struct PmfCell {
  WindowKey key;
  bool s = false;       // S_j[t]
  double weight = 0.0;  // integral counts for empirical tables, probabilities for exact ones
};

class JointPmf {
 public:
  JointPmf() = default;
  // Sorts cells and merges duplicates; total is the sum of the weights.
  JointPmf(int tau, std::vector<PmfCell> cells);

  int tau() const { return tau_; }
  double total() const { return total_; }
  const std::vector<PmfCell>& cells() const { return cells_; }
  double weight(const WindowKey& key, bool s) const;
  double overflow_weight() const;

 private:
  int tau_ = 0;
  double total_ = 0.0;
  std::vector<PmfCell> cells_;
};

// Counts windows for every t in [tau_max, N-1].
JointPmf joint_counts(const ActivityTrace& trace, int i, int j, int tau_max);
// Same count from precomputed event series of a trace with N samples.
JointPmf joint_counts(const EventSeries& ends_i, const EventSeries& ends_j, const EventSeries& starts_j,
                      Sample n, int tau_max);

// Remaps event positions beyond tau to "none".  The result covers the samples
// [pmf.tau, N-1] rather than [tau, N-1]: it differs from a directly counted
// lag-tau table by at most (pmf.tau - tau) windows.
JointPmf marginalize(const JointPmf& pmf, int tau);

// Plug-in conditional mutual information I(S_j ; E_i window | E_j window) in
// nats.  Overflow windows form one extra window value per radio side.
double empirical_ate(const JointPmf& pmf, int tau);

struct LagValue {
  int tau = 0;
  double value = 0.0;
};

std::vector<LagValue> ate_profile(const JointPmf& pmf);
std::vector<LagValue> ate_profile(const ActivityTrace& trace, int i, int j, int tau_max);

}  // namespace topolearn
