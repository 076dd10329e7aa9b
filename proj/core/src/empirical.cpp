#include "topolearn/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace topolearn {

namespace {

std::uint64_t pack(const WindowKey& k, bool s) {
  return (std::uint64_t{k.i_pos} << 32) | (std::uint64_t{k.i_next} << 24) | (std::uint64_t{k.j_pos} << 16) |
         (std::uint64_t{k.j_next} << 8) | (s ? 1u : 0u);
}

PmfCell unpack(std::uint64_t v, double weight) {
  PmfCell c;
  c.key.i_pos = static_cast<std::uint8_t>(v >> 32);
  c.key.i_next = static_cast<std::uint8_t>(v >> 24);
  c.key.j_pos = static_cast<std::uint8_t>(v >> 16);
  c.key.j_next = static_cast<std::uint8_t>(v >> 8);
  c.s = (v & 1u) != 0;
  c.weight = weight;
  return c;
}

bool cell_less(const PmfCell& a, const PmfCell& b) {
  if (a.key != b.key) return a.key < b.key;
  return a.s < b.s;
}

// Window side at time t for one sorted end-event list: positions of the most
// recent and second most recent events in [t - tau, t - 1].  `idx` is the
// number of events strictly before t and is advanced monotonically.
void side_at(const std::vector<Sample>& ev, std::size_t& idx, Sample t, int tau, std::uint8_t& pos,
             std::uint8_t& next) {
  while (idx < ev.size() && ev[idx] < t) ++idx;
  pos = 0;
  next = 0;
  if (idx >= 1 && ev[idx - 1] >= t - tau) {
    pos = static_cast<std::uint8_t>(t - ev[idx - 1]);
    if (idx >= 2 && ev[idx - 2] >= t - tau) next = static_cast<std::uint8_t>(t - ev[idx - 2]);
  }
}

void check_tau(int tau) {
  if (tau < 1 || tau > kMaxLag)
    throw std::invalid_argument("lag must lie in 1.." + std::to_string(kMaxLag));
}

}  // namespace

JointPmf::JointPmf(int tau, std::vector<PmfCell> cells) : tau_(tau) {
  check_tau(tau);
  std::sort(cells.begin(), cells.end(), cell_less);
  for (const PmfCell& c : cells) {
    if (c.weight < 0.0) throw std::invalid_argument("negative PMF weight");
    if (c.key.i_pos > tau || c.key.i_next > tau || c.key.j_pos > tau || c.key.j_next > tau)
      throw std::invalid_argument("window position beyond the table lag");
    if (c.weight == 0.0) continue;
    if (!cells_.empty() && cells_.back().key == c.key && cells_.back().s == c.s)
      cells_.back().weight += c.weight;
    else
      cells_.push_back(c);
  }
  for (const PmfCell& c : cells_) total_ += c.weight;
}

double JointPmf::weight(const WindowKey& key, bool s) const {
  PmfCell probe{key, s, 0.0};
  auto it = std::lower_bound(cells_.begin(), cells_.end(), probe, cell_less);
  if (it != cells_.end() && it->key == key && it->s == s) return it->weight;
  return 0.0;
}

double JointPmf::overflow_weight() const {
  double w = 0.0;
  for (const PmfCell& c : cells_)
    if (c.key.overflow()) w += c.weight;
  return w;
}

JointPmf joint_counts(const EventSeries& ends_i, const EventSeries& ends_j, const EventSeries& starts_j, Sample n,
                      int tau_max) {
  check_tau(tau_max);
  if (ends_i.kind != EventKind::end || ends_j.kind != EventKind::end || starts_j.kind != EventKind::start)
    throw std::invalid_argument("joint_counts expects (end, end, start) series");
  if (ends_i.radio_id == ends_j.radio_id) throw std::invalid_argument("joint_counts needs two distinct radios");
  if (n <= tau_max) throw std::invalid_argument("trace too short for the requested lag");

  // Samples whose window or start bit can differ from the all-quiet key.
  std::vector<Sample> active;
  active.reserve((ends_i.event_samples.size() + ends_j.event_samples.size()) * static_cast<std::size_t>(tau_max) +
                 starts_j.event_samples.size());
  for (const auto* ev : {&ends_i.event_samples, &ends_j.event_samples})
    for (Sample e : *ev)
      for (Sample t = std::max<Sample>(e + 1, tau_max); t <= std::min<Sample>(e + tau_max, n - 1); ++t)
        active.push_back(t);
  for (Sample s : starts_j.event_samples)
    if (s >= tau_max && s < n) active.push_back(s);
  std::sort(active.begin(), active.end());
  active.erase(std::unique(active.begin(), active.end()), active.end());

  const auto& si = ends_i.event_samples;
  const auto& sj = ends_j.event_samples;
  const auto& st = starts_j.event_samples;
  std::size_t ii = 0, jj = 0, ss = 0;
  std::unordered_map<std::uint64_t, std::uint64_t> counts;
  counts.reserve(256);
  for (Sample t : active) {
    WindowKey k;
    side_at(si, ii, t, tau_max, k.i_pos, k.i_next);
    side_at(sj, jj, t, tau_max, k.j_pos, k.j_next);
    while (ss < st.size() && st[ss] < t) ++ss;
    const bool s = ss < st.size() && st[ss] == t;
    ++counts[pack(k, s)];
  }
  const auto quiet = static_cast<std::uint64_t>(n - tau_max) - static_cast<std::uint64_t>(active.size());
  if (quiet > 0) counts[pack(WindowKey{}, false)] += quiet;

  std::vector<PmfCell> cells;
  cells.reserve(counts.size());
  for (auto [key, c] : counts) cells.push_back(unpack(key, static_cast<double>(c)));
  return JointPmf(tau_max, std::move(cells));
}

JointPmf joint_counts(const ActivityTrace& trace, int i, int j, int tau_max) {
  if (i == j) throw std::invalid_argument("joint_counts needs two distinct radios");
  return joint_counts(derive_events(trace, i, EventKind::end), derive_events(trace, j, EventKind::end),
                      derive_events(trace, j, EventKind::start), trace.num_samples(), tau_max);
}

JointPmf marginalize(const JointPmf& pmf, int tau) {
  if (tau < 1 || tau > pmf.tau()) throw std::invalid_argument("marginalize: lag outside 1..pmf.tau");
  if (tau == pmf.tau()) return pmf;
  auto clip = [tau](std::uint8_t& pos, std::uint8_t& next) {
    if (pos > tau) pos = 0;
    if (pos == 0 || next > tau) next = 0;
  };
  std::vector<PmfCell> cells = pmf.cells();
  for (PmfCell& c : cells) {
    clip(c.key.i_pos, c.key.i_next);
    clip(c.key.j_pos, c.key.j_next);
  }
  return JointPmf(tau, std::move(cells));
}

double empirical_ate(const JointPmf& pmf_in, int tau) {
  if (pmf_in.total() <= 0.0) throw std::invalid_argument("empirical_ate: empty PMF");
  const JointPmf pmf = pmf_in.tau() == tau ? pmf_in : marginalize(pmf_in, tau);

  // Lumped window values: overflow sides collapse to one symbol per radio.
  constexpr int kOverflow = 255;
  auto lump = [](std::uint8_t pos, std::uint8_t next) { return next != 0 ? kOverflow : int{pos}; };

  struct Pair {
    double n[2] = {0.0, 0.0};
  };
  std::map<std::pair<int, int>, Pair> joint;  // (i side, j side) -> counts by s
  std::map<int, Pair> cond;                   // j side -> counts by s
  for (const PmfCell& c : pmf.cells()) {
    const int iv = lump(c.key.i_pos, c.key.i_next);
    const int jv = lump(c.key.j_pos, c.key.j_next);
    joint[{iv, jv}].n[c.s] += c.weight;
    cond[jv].n[c.s] += c.weight;
  }
  double acc = 0.0;
  for (const auto& [ij, p] : joint) {
    const Pair& cj = cond.at(ij.second);
    const double n_ij = p.n[0] + p.n[1];
    const double n_j = cj.n[0] + cj.n[1];
    for (int s = 0; s < 2; ++s) {
      const double n_ijs = p.n[s];
      if (n_ijs <= 0.0) continue;
      acc += n_ijs * std::log((n_ijs * n_j) / (n_ij * cj.n[s]));
    }
  }
  return std::max(0.0, acc / pmf.total());
}

std::vector<LagValue> ate_profile(const JointPmf& pmf) {
  std::vector<LagValue> out;
  out.reserve(static_cast<std::size_t>(pmf.tau()));
  for (int tau = 1; tau <= pmf.tau(); ++tau) out.push_back({tau, empirical_ate(marginalize(pmf, tau), tau)});
  return out;
}

std::vector<LagValue> ate_profile(const ActivityTrace& trace, int i, int j, int tau_max) {
  return ate_profile(joint_counts(trace, i, j, tau_max));
}

}  // namespace topolearn
