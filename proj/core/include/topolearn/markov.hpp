// Two-radio shared-channel Markov chain: parameters, transition matrix,
// steady states, exact lag-3 PMF, closed-form ATE and chain simulation.
// Radio i is the candidate cause and radio j the responder; the response
// lag is fixed at 3 samples.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "topolearn/empirical.hpp"
#include "topolearn/trace.hpp"

namespace topolearn {

struct McParams {
  double p_i = 0.0;    // start probability of i per idle sample
  double p_j = 0.0;
  double p_di = 0.0;   // frame continuation
  double p_dj = 0.0;
  double p_ri = 0.0;   // probability that i answers a frame of j
  double p_rj = 0.0;   // probability that j answers a frame of i
  double p_dri = 0.0;  // response continuation
  double p_drj = 0.0;

  void validate() const;  // throws std::invalid_argument
  McParams swapped() const;
};

// Expected durations in seconds; p = ts / (frame + idle), p_d = 1 - ts / (frame - ts).
McParams mc_from_physical(double ts, double frame_i, double idle_i, double frame_j, double idle_j, double resp_i,
                          double resp_j, double p_ri, double p_rj);

enum class McState : std::uint8_t {
  idle,           // Ch[inf]
  i_start,        // IU_i,start
  i_frame,        // IU_i
  ch_i1, ch_i2, ch_i3,
  j_resp_start,   // IU_j,resp start
  j_resp,         // IU_j,resp
  ch_ij1, ch_ij2, ch_ij3,
  j_start,
  j_frame,
  ch_j1, ch_j2, ch_j3,
  i_resp_start,
  i_resp,
  ch_ji1, ch_ji2, ch_ji3,
};

inline constexpr int kMcStates = 21;

std::string_view state_name(McState s);
// Image of a state under exchanging the roles of i and j.
McState mirror(McState s);
bool transmitting_i(McState s);
bool transmitting_j(McState s);

// Indicator tuple observed at a sample spent in a state.
struct StateIndicators {
  std::array<std::uint8_t, 3> e_i{};  // E_i[t-1], E_i[t-2], E_i[t-3]
  std::array<std::uint8_t, 3> e_j{};
  bool s_i = false;
  bool s_j = false;
};
StateIndicators indicators(McState s);

using McMatrix = Eigen::Matrix<double, kMcStates, kMcStates>;

McMatrix transition_matrix(const McParams& params);

struct SteadyState {
  std::array<double, kMcStates> pi{};
  double rho = 0.0;  // normalizer of the closed form (0 for numeric solutions)

  double operator[](McState s) const { return pi[static_cast<std::size_t>(s)]; }
  double sum() const;
};

// Solves pi P = pi, sum(pi) = 1 on the states reachable from Ch[inf].
SteadyState steady_state_numeric(const McMatrix& p);
SteadyState steady_state_closed(const McParams& params);

// Exact PMF of (E_i window, E_j window, S_j) at lag 3, weights sum to 1.
JointPmf joint_pmf_lag3(const SteadyState& ss);

// Closed-form asymmetric transfer entropy from i to j at lag 1, 2 or 3 (nats).
double ate_closed(const McParams& params, int tau);

ActivityTrace simulate_chain(const McParams& params, Sample n, std::uint64_t seed, double ts = 5e-6);
// State path of the same draw as simulate_chain with equal arguments.
std::vector<McState> simulate_chain_states(const McParams& params, Sample n, std::uint64_t seed);

}  // namespace topolearn
