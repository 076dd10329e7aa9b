#include <gtest/gtest.h>

#include <random>

#include "support/random_traces.hpp"
#include "topolearn/markov.hpp"

using namespace topolearn;

namespace {

McParams random_params(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> start(1e-4, 0.3), cont(0.0, 0.999), resp(0.0, 0.999);
  McParams p;
  p.p_i = start(gen);
  p.p_j = start(gen);
  p.p_di = cont(gen);
  p.p_dj = cont(gen);
  p.p_ri = resp(gen);
  p.p_rj = resp(gen);
  p.p_dri = cont(gen);
  p.p_drj = cont(gen);
  return p;
}

McParams linked() { return mc_from_physical(5e-6, 200e-6, 800e-6, 300e-6, 900e-6, 50e-6, 60e-6, 0.2, 0.7); }

}  // namespace

TEST(Markov, TransitionMatrixIsStochastic) {
  std::mt19937_64 gen(1);
  for (int k = 0; k < 50; ++k) {
    const McMatrix p = transition_matrix(random_params(gen));
    EXPECT_GE(p.minCoeff(), 0.0);
    for (int r = 0; r < kMcStates; ++r) EXPECT_NEAR(p.row(r).sum(), 1.0, 1e-14);
  }
}

TEST(Markov, ClosedSteadyStateMatchesNumeric) {
  std::mt19937_64 gen(2);
  for (int k = 0; k < 200; ++k) {
    const McParams q = random_params(gen);
    const McMatrix p = transition_matrix(q);
    const SteadyState a = steady_state_closed(q);
    const SteadyState b = steady_state_numeric(p);
    EXPECT_NEAR(a.sum(), 1.0, 1e-12);
    EXPECT_NEAR(b.sum(), 1.0, 1e-12);
    for (int s = 0; s < kMcStates; ++s) ASSERT_NEAR(a.pi[static_cast<std::size_t>(s)], b.pi[static_cast<std::size_t>(s)], 1e-10);
    // stationarity of the numeric solution
    Eigen::Matrix<double, 1, kMcStates> row;
    for (int s = 0; s < kMcStates; ++s) row(s) = b.pi[static_cast<std::size_t>(s)];
    EXPECT_LT((row * p - row).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(Markov, CertainResponsesStillSolve) {
  McParams q = linked();
  q.p_ri = q.p_rj = 1.0;
  const SteadyState a = steady_state_closed(q), b = steady_state_numeric(transition_matrix(q));
  for (int s = 0; s < kMcStates; ++s) EXPECT_NEAR(a.pi[static_cast<std::size_t>(s)], b.pi[static_cast<std::size_t>(s)], 1e-12);
  EXPECT_EQ(a[McState::ch_i3], 0.0);
  const JointPmf pmf = joint_pmf_lag3(a);
  for (int tau = 1; tau <= 3; ++tau) EXPECT_NEAR(ate_closed(q, tau), empirical_ate(marginalize(pmf, tau), tau), 1e-12);
}

TEST(Markov, UnreachableStatesGetZeroMass) {
  McParams q = linked();
  q.p_ri = 0.0;
  const SteadyState b = steady_state_numeric(transition_matrix(q));
  EXPECT_EQ(b[McState::i_resp], 0.0);
  EXPECT_EQ(b[McState::ch_ji2], 0.0);
  EXPECT_NEAR(b.sum(), 1.0, 1e-12);
}

TEST(Markov, NumericRejectsNonStochasticMatrix) {
  McMatrix p = transition_matrix(linked());
  p(0, 0) += 0.1;
  EXPECT_THROW(steady_state_numeric(p), std::invalid_argument);
}

TEST(Markov, Lag3PmfSumsToOne) {
  const JointPmf pmf = joint_pmf_lag3(steady_state_closed(linked()));
  EXPECT_EQ(pmf.tau(), 3);
  EXPECT_NEAR(pmf.total(), 1.0, 1e-12);
  EXPECT_EQ(pmf.overflow_weight(), 0.0);
}

TEST(Markov, ClosedAteMatchesSummationOverExactPmf) {
  std::mt19937_64 gen(3);
  for (int k = 0; k < 200; ++k) {
    const McParams q = random_params(gen);
    const JointPmf pmf = joint_pmf_lag3(steady_state_closed(q));
    for (int tau = 1; tau <= 3; ++tau)
      ASSERT_NEAR(ate_closed(q, tau), empirical_ate(marginalize(pmf, tau), tau), 1e-10) << "tau=" << tau;
  }
  EXPECT_THROW(ate_closed(linked(), 4), std::invalid_argument);
  EXPECT_THROW(ate_closed(linked(), 0), std::invalid_argument);
}

TEST(Markov, MirrorAndSwap) {
  for (int k = 0; k < kMcStates; ++k) {
    const auto s = static_cast<McState>(k);
    EXPECT_EQ(mirror(mirror(s)), s);
    EXPECT_EQ(transmitting_j(s), transmitting_i(mirror(s)));
    const StateIndicators a = indicators(s), b = indicators(mirror(s));
    EXPECT_EQ(a.e_i, b.e_j);
    EXPECT_EQ(a.s_i, b.s_j);
  }
  EXPECT_EQ(mirror(McState::idle), McState::idle);
  EXPECT_EQ(mirror(McState::i_start), McState::j_start);
  EXPECT_EQ(state_name(McState::idle), "Ch[inf]");
  EXPECT_EQ(state_name(McState::j_resp_start), "IU_j,resp start");

  const McParams q = linked();
  const SteadyState a = steady_state_closed(q), b = steady_state_closed(q.swapped());
  for (int k = 0; k < kMcStates; ++k) {
    const auto s = static_cast<McState>(k);
    EXPECT_NEAR(a[s], b[mirror(s)], 1e-15);
  }
  EXPECT_EQ(q.swapped().swapped().p_rj, q.p_rj);
}

TEST(Markov, ParamsFromPhysicalDurations) {
  const McParams q = mc_from_physical(5e-6, 1e-3, 9e-3, 2e-3, 8e-3, 50e-6, 100e-6, 0.1, 0.5);
  EXPECT_NEAR(q.p_i, 5e-6 / 10e-3, 1e-15);
  EXPECT_NEAR(q.p_di, 1.0 - 5e-6 / (1e-3 - 5e-6), 1e-15);
  EXPECT_NEAR(q.p_drj, 1.0 - 5e-6 / (100e-6 - 5e-6), 1e-15);
  EXPECT_EQ(q.p_ri, 0.1);
  // a two-sample frame never continues
  EXPECT_EQ(mc_from_physical(5e-6, 10e-6, 1e-3, 10e-6, 1e-3, 10e-6, 10e-6, 0, 0).p_di, 0.0);
  EXPECT_THROW(mc_from_physical(5e-6, 5e-6, 1e-3, 1e-3, 1e-3, 1e-4, 1e-4, 0, 0), std::invalid_argument);
  EXPECT_THROW(mc_from_physical(0.0, 1e-3, 1e-3, 1e-3, 1e-3, 1e-4, 1e-4, 0, 0), std::invalid_argument);
  EXPECT_THROW(mc_from_physical(5e-6, 1e-3, 1e-3, 1e-3, 1e-3, 1e-4, 1e-4, 1.5, 0), std::invalid_argument);
  EXPECT_NO_THROW(mc_from_physical(5e-6, 1e-3, 1e-3, 1e-3, 1e-3, 1e-4, 1e-4, 1.0, 1.0));
  McParams bad;
  bad.p_i = 0.7;
  bad.p_j = 0.4;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Markov, SimulatedOccupancyMatchesSteadyState) {
  const McParams q = linked();
  const SteadyState ss = steady_state_closed(q);
  const int batches = 40;
  const Sample per = 50000;
  const auto path = simulate_chain_states(q, batches * per, 77);
  ASSERT_EQ(path.size(), static_cast<std::size_t>(batches * per));
  // batch means absorb the serial correlation of the chain
  for (int k = 0; k < kMcStates; ++k) {
    const auto s = static_cast<McState>(k);
    if (ss[s] < 1e-3) continue;
    double sum = 0.0, sum_sq = 0.0;
    for (int b = 0; b < batches; ++b) {
      double hits = 0.0;
      for (Sample t = b * per; t < (b + 1) * per; ++t) hits += path[static_cast<std::size_t>(t)] == s;
      const double f = hits / static_cast<double>(per);
      sum += f;
      sum_sq += f * f;
    }
    const double mean = sum / batches;
    const double se = std::sqrt(std::max(sum_sq / batches - mean * mean, 0.0) / (batches - 1));
    EXPECT_NEAR(mean, ss[s], 5.0 * se + 1e-5) << state_name(s);
  }
}

TEST(Markov, TraceAgreesWithStatePath) {
  const McParams q = linked();
  const Sample n = 100000;
  const auto path = simulate_chain_states(q, n, 5);
  const ActivityTrace t = simulate_chain(q, n, 5);
  const auto ai = t.dense(1), aj = t.dense(2);
  const auto ei = testsupport::dense_ends(ai), ej = testsupport::dense_ends(aj);
  const auto sj = testsupport::dense_starts(aj);
  for (Sample k = 0; k < n; ++k) {
    const auto u = static_cast<std::size_t>(k);
    ASSERT_EQ(ai[u] != 0, transmitting_i(path[u])) << k;
    ASSERT_EQ(aj[u] != 0, transmitting_j(path[u])) << k;
    if (k < 3) continue;
    // indicator tuples are functions of the current state
    const StateIndicators ind = indicators(path[u]);
    for (int p = 1; p <= 3; ++p) {
      ASSERT_EQ(ei[u - static_cast<std::size_t>(p)], ind.e_i[static_cast<std::size_t>(p - 1)]) << k;
      ASSERT_EQ(ej[u - static_cast<std::size_t>(p)], ind.e_j[static_cast<std::size_t>(p - 1)]) << k;
    }
    ASSERT_EQ(sj[u] != 0, ind.s_j) << k;
  }
}

TEST(Markov, EmpiricalAteConvergesToClosedForm) {
  const McParams q = linked();
  const ActivityTrace t = simulate_chain(q, 2000000, 9);
  const JointPmf pmf = joint_counts(t, 1, 2, 3);
  for (int tau = 1; tau <= 3; ++tau) {
    const double exact = ate_closed(q, tau);
    const double est = empirical_ate(marginalize(pmf, tau), tau);
    // plug-in bias is about dof / (2N)
    EXPECT_NEAR(est, exact, 0.1 * exact + tau * (tau + 1) / 2e6) << "tau=" << tau;
  }
  EXPECT_GT(ate_closed(q, 3), 10.0 * ate_closed(q, 2));
}

TEST(Markov, SimulationIsDeterministicPerSeed) {
  const McParams q = linked();
  EXPECT_EQ(simulate_chain(q, 50000, 1), simulate_chain(q, 50000, 1));
  EXPECT_NE(simulate_chain(q, 50000, 1), simulate_chain(q, 50000, 2));
  EXPECT_THROW(simulate_chain(q, 0, 1), std::invalid_argument);
}
