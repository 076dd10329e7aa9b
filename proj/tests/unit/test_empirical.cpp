#include <gtest/gtest.h>

#include <map>

#include "support/random_traces.hpp"
#include "topolearn/empirical.hpp"

using namespace topolearn;

namespace {

// Most recent and second most recent event positions within lag tau.
std::pair<std::uint8_t, std::uint8_t> brute_positions(const std::vector<std::uint8_t>& e, Sample t, int tau) {
  std::uint8_t first = 0, second = 0;
  for (int p = 1; p <= tau; ++p)
    if (e[static_cast<std::size_t>(t - p)]) {
      if (!first)
        first = static_cast<std::uint8_t>(p);
      else if (!second)
        second = static_cast<std::uint8_t>(p);
    }
  return {first, second};
}

std::map<std::pair<WindowKey, bool>, double> brute_counts(const ActivityTrace& tr, int i, int j, int tau) {
  const auto ei = testsupport::dense_ends(tr.dense(i));
  const auto ej = testsupport::dense_ends(tr.dense(j));
  const auto sj = testsupport::dense_starts(tr.dense(j));
  std::map<std::pair<WindowKey, bool>, double> out;
  for (Sample t = tau; t < tr.num_samples(); ++t) {
    WindowKey k;
    std::tie(k.i_pos, k.i_next) = brute_positions(ei, t, tau);
    std::tie(k.j_pos, k.j_next) = brute_positions(ej, t, tau);
    out[{k, sj[static_cast<std::size_t>(t)] != 0}] += 1.0;
  }
  return out;
}

std::map<std::pair<WindowKey, bool>, double> as_map(const JointPmf& pmf) {
  std::map<std::pair<WindowKey, bool>, double> out;
  for (const PmfCell& c : pmf.cells()) out[{c.key, c.s}] += c.weight;
  return out;
}

}  // namespace

TEST(Empirical, JointCountsMatchBruteForce) {
  std::uint64_t seed = 100;
  for (double p_on : {0.02, 0.1, 0.4})
    for (int tau : {1, 3, 7}) {
      const ActivityTrace t = testsupport::markov_trace(2, 3000, p_on, 0.3, ++seed);
      const JointPmf pmf = joint_counts(t, 1, 2, tau);
      EXPECT_EQ(pmf.tau(), tau);
      EXPECT_DOUBLE_EQ(pmf.total(), 3000.0 - tau);
      EXPECT_EQ(as_map(pmf), brute_counts(t, 1, 2, tau)) << "p_on=" << p_on << " tau=" << tau;
      EXPECT_EQ(as_map(joint_counts(t, 2, 1, tau)), brute_counts(t, 2, 1, tau));
    }
}

TEST(Empirical, EventSeriesOverloadAgrees) {
  const ActivityTrace t = testsupport::markov_trace(3, 4000, 0.05, 0.2, 77);
  const JointPmf a = joint_counts(t, 3, 1, 6);
  const JointPmf b = joint_counts(derive_events(t, 3, EventKind::end), derive_events(t, 1, EventKind::end),
                                  derive_events(t, 1, EventKind::start), t.num_samples(), 6);
  EXPECT_EQ(as_map(a), as_map(b));
}

TEST(Empirical, AteMatchesDirectCounting) {
  const ActivityTrace t = testsupport::markov_trace(2, 20000, 0.05, 0.25, 5);
  const int tau_max = 6;
  const JointPmf pmf = joint_counts(t, 1, 2, tau_max);
  for (int tau = 1; tau <= tau_max; ++tau) {
    const double got = empirical_ate(marginalize(pmf, tau), tau);
    EXPECT_NEAR(got, testsupport::brute_ate(t, 1, 2, tau, tau_max), 1e-13) << "tau=" << tau;
  }
}

TEST(Empirical, MarginalizedCloseToDirectTable) {
  const ActivityTrace t = testsupport::markov_trace(2, 50000, 0.03, 0.2, 6);
  const int tau_max = 10;
  const JointPmf big = joint_counts(t, 1, 2, tau_max);
  for (int tau = 1; tau <= tau_max; ++tau) {
    const JointPmf direct = joint_counts(t, 1, 2, tau);
    const double a = empirical_ate(marginalize(big, tau), tau);
    const double b = empirical_ate(direct, tau);
    // the two tables differ by at most tau_max - tau windows
    EXPECT_NEAR(a, b, 4.0 * tau_max / 50000.0) << "tau=" << tau;
  }
}

TEST(Empirical, MarginalizeClipsPositions) {
  const ActivityTrace t = testsupport::markov_trace(2, 5000, 0.1, 0.3, 8);
  const JointPmf m = marginalize(joint_counts(t, 1, 2, 8), 3);
  EXPECT_EQ(m.tau(), 3);
  for (const PmfCell& c : m.cells()) {
    EXPECT_LE(c.key.i_pos, 3);
    EXPECT_LE(c.key.i_next, 3);
    EXPECT_LE(c.key.j_pos, 3);
    EXPECT_LE(c.key.j_next, 3);
  }
  EXPECT_THROW(marginalize(m, 4), std::invalid_argument);
}

TEST(Empirical, AteIsNonNegativeAndSmallForIndependentRadios) {
  const ActivityTrace t = testsupport::markov_trace(2, 200000, 0.01, 0.1, 9);
  for (const LagValue& v : ate_profile(t, 1, 2, 10)) {
    EXPECT_GE(v.value, 0.0);
    EXPECT_LT(v.value, 1e-3);
  }
}

TEST(Empirical, AteDetectsDeterministicResponse) {
  // radio 2 starts exactly 3 samples after every end of radio 1
  TraceBuilder b(5e-6, 20000, 2);
  for (Sample s = 10; s + 40 < 20000; s += 97) {
    b.add(1, s, s + 20);
    b.add(2, s + 22, s + 30);  // end of 1 at s+19, start of 2 at s+22
  }
  const ActivityTrace t = b.build();
  const auto prof = ate_profile(t, 1, 2, 6);
  ASSERT_EQ(prof.size(), 6u);
  for (int k = 0; k < 6; ++k) EXPECT_EQ(prof[static_cast<std::size_t>(k)].tau, k + 1);
  EXPECT_GT(prof[2].value, 1e-3);
  EXPECT_GT(prof[2].value, 10.0 * prof[1].value);
}

TEST(Empirical, JointPmfMergesAndDropsZeros) {
  WindowKey k1{1, 0, 0, 0}, k2{0, 0, 2, 3};
  const JointPmf p(3, {{k1, true, 2.0}, {k2, false, 1.0}, {k1, true, 3.0}, {k2, true, 0.0}});
  EXPECT_EQ(p.cells().size(), 2u);
  EXPECT_DOUBLE_EQ(p.weight(k1, true), 5.0);
  EXPECT_DOUBLE_EQ(p.weight(k2, true), 0.0);
  EXPECT_DOUBLE_EQ(p.total(), 6.0);
  EXPECT_DOUBLE_EQ(p.overflow_weight(), 1.0);
  EXPECT_THROW(JointPmf(2, {{k2, false, 1.0}}), std::invalid_argument);
  EXPECT_THROW(JointPmf(3, {{k1, false, -1.0}}), std::invalid_argument);
}

TEST(Empirical, ArgumentErrors) {
  const ActivityTrace t = testsupport::markov_trace(2, 100, 0.1, 0.3, 1);
  EXPECT_THROW(joint_counts(t, 1, 1, 3), std::invalid_argument);
  EXPECT_THROW(joint_counts(t, 1, 2, 100), std::invalid_argument);
  EXPECT_THROW(joint_counts(t, 1, 2, kMaxLag + 1), std::invalid_argument);
  EXPECT_THROW(empirical_ate(JointPmf(), 1), std::invalid_argument);
}
