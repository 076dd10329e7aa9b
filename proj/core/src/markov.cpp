#include "topolearn/markov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace topolearn {

namespace {

using S = McState;

constexpr std::size_t idx(S s) { return static_cast<std::size_t>(s); }

void check_prob(double p, const char* name) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0,1)");
}

// x * ln(y) with the 0 * ln(.) = 0 convention.
double xlog(double x, double y) { return x > 0.0 ? x * std::log(y) : 0.0; }

}  // namespace

void McParams::validate() const {
  check_prob(p_i, "p_i");
  check_prob(p_j, "p_j");
  check_prob(p_di, "p_di");
  check_prob(p_dj, "p_dj");
  // a radio may answer every frame, but frames must end
  if (!(p_ri >= 0.0 && p_ri <= 1.0)) throw std::invalid_argument("p_ri must lie in [0,1]");
  if (!(p_rj >= 0.0 && p_rj <= 1.0)) throw std::invalid_argument("p_rj must lie in [0,1]");
  check_prob(p_dri, "p_dri");
  check_prob(p_drj, "p_drj");
  if (p_i + p_j > 1.0) throw std::invalid_argument("p_i + p_j must not exceed 1");
}

McParams McParams::swapped() const { return {p_j, p_i, p_dj, p_di, p_rj, p_ri, p_drj, p_dri}; }

McParams mc_from_physical(double ts, double frame_i, double idle_i, double frame_j, double idle_j, double resp_i,
                          double resp_j, double p_ri, double p_rj) {
  if (!(ts > 0.0)) throw std::invalid_argument("sample period must be positive");
  auto start_prob = [ts](double frame, double idle, const char* who) {
    if (!(idle >= 0.0)) throw std::invalid_argument(std::string(who) + ": idle time must be non-negative");
    return ts / (frame + idle);
  };
  // frames and responses span at least two samples
  auto continuation = [ts](double len, const char* who) {
    if (!(len >= 2.0 * ts * (1.0 - 1e-12)))
      throw std::invalid_argument(std::string(who) + ": duration must be at least two samples");
    return std::max(0.0, 1.0 - ts / (len - ts));
  };
  McParams p;
  p.p_di = continuation(frame_i, "frame_i");
  p.p_dj = continuation(frame_j, "frame_j");
  p.p_dri = continuation(resp_i, "resp_i");
  p.p_drj = continuation(resp_j, "resp_j");
  p.p_i = start_prob(frame_i, idle_i, "radio i");
  p.p_j = start_prob(frame_j, idle_j, "radio j");
  p.p_ri = p_ri;
  p.p_rj = p_rj;
  p.validate();
  return p;
}

std::string_view state_name(McState s) {
  static constexpr std::string_view names[kMcStates] = {
      "Ch[inf]",       "IU_i,start", "IU_i",     "Ch_i[1]",  "Ch_i[2]",  "Ch_i[3]",         "IU_j,resp start",
      "IU_j,resp",     "Ch_ij[1]",   "Ch_ij[2]", "Ch_ij[3]", "IU_j,start", "IU_j",          "Ch_j[1]",
      "Ch_j[2]",       "Ch_j[3]",    "IU_i,resp start", "IU_i,resp", "Ch_ji[1]", "Ch_ji[2]", "Ch_ji[3]"};
  return names[idx(s)];
}

McState mirror(McState s) {
  if (s == S::idle) return S::idle;
  const auto k = static_cast<int>(s);
  return static_cast<McState>(k <= 10 ? k + 10 : k - 10);
}

bool transmitting_i(McState s) {
  return s == S::i_start || s == S::i_frame || s == S::i_resp_start || s == S::i_resp;
}

bool transmitting_j(McState s) { return transmitting_i(mirror(s)); }

StateIndicators indicators(McState s) {
  StateIndicators r;
  // i's last transmitted sample was 1, 2 or 3 samples ago
  if (s == S::ch_i1 || s == S::ch_ji1) r.e_i[0] = 1;
  if (s == S::ch_i2 || s == S::ch_ji2) r.e_i[1] = 1;
  if (s == S::ch_i3 || s == S::j_resp_start || s == S::ch_ji3) r.e_i[2] = 1;
  if (s == S::ch_j1 || s == S::ch_ij1) r.e_j[0] = 1;
  if (s == S::ch_j2 || s == S::ch_ij2) r.e_j[1] = 1;
  if (s == S::ch_j3 || s == S::i_resp_start || s == S::ch_ij3) r.e_j[2] = 1;
  r.s_i = s == S::i_start || s == S::i_resp_start;
  r.s_j = s == S::j_start || s == S::j_resp_start;
  return r;
}

McMatrix transition_matrix(const McParams& params) {
  params.validate();
  McMatrix p = McMatrix::Zero();
  auto set = [&](S from, S to, double v) { p(static_cast<int>(from), static_cast<int>(to)) += v; };
  set(S::idle, S::idle, 1.0 - params.p_i - params.p_j);
  set(S::idle, S::i_start, params.p_i);
  set(S::idle, S::j_start, params.p_j);
  // one side of the chain; the other is its mirror image with swapped parameters
  auto side = [&](S start, S frame, S c1, S c2, S c3, S rs, S rb, S r1, S r2, S r3, double pd, double pr, double pdr,
                  double p_self, double p_other, S self_start, S other_start) {
    set(start, frame, 1.0);
    set(frame, frame, pd);
    set(frame, c1, 1.0 - pd);
    set(c1, c2, 1.0);
    set(c2, rs, pr);
    set(c2, c3, 1.0 - pr);
    set(c3, S::idle, 1.0);
    set(rs, rb, 1.0);
    set(rb, rb, pdr);
    set(rb, r1, 1.0 - pdr);
    set(r1, r2, 1.0);
    set(r2, r3, 1.0);
    set(r3, self_start, p_self);
    set(r3, other_start, p_other);
    set(r3, S::idle, 1.0 - p_self - p_other);
  };
  side(S::i_start, S::i_frame, S::ch_i1, S::ch_i2, S::ch_i3, S::j_resp_start, S::j_resp, S::ch_ij1, S::ch_ij2,
       S::ch_ij3, params.p_di, params.p_rj, params.p_drj, params.p_i, params.p_j, S::i_start, S::j_start);
  side(S::j_start, S::j_frame, S::ch_j1, S::ch_j2, S::ch_j3, S::i_resp_start, S::i_resp, S::ch_ji1, S::ch_ji2,
       S::ch_ji3, params.p_dj, params.p_ri, params.p_dri, params.p_j, params.p_i, S::j_start, S::i_start);
  return p;
}

double SteadyState::sum() const {
  double s = 0.0;
  for (double v : pi) s += v;
  return s;
}

SteadyState steady_state_numeric(const McMatrix& p) {
  for (int r = 0; r < kMcStates; ++r) {
    if ((p.row(r).array() < 0.0).any() || std::abs(p.row(r).sum() - 1.0) > 1e-12)
      throw std::invalid_argument("transition matrix is not stochastic");
  }
  // states reachable from Ch[inf]
  std::array<bool, kMcStates> reach{};
  std::vector<int> stack{0};
  reach[0] = true;
  while (!stack.empty()) {
    const int s = stack.back();
    stack.pop_back();
    for (int t = 0; t < kMcStates; ++t)
      if (p(s, t) > 0.0 && !reach[static_cast<std::size_t>(t)]) {
        reach[static_cast<std::size_t>(t)] = true;
        stack.push_back(t);
      }
  }
  std::vector<int> sub;
  for (int s = 0; s < kMcStates; ++s)
    if (reach[static_cast<std::size_t>(s)]) sub.push_back(s);
  const auto k = static_cast<Eigen::Index>(sub.size());
  Eigen::MatrixXd a(k, k);
  for (Eigen::Index r = 0; r < k; ++r)
    for (Eigen::Index c = 0; c < k; ++c)
      a(r, c) = p(sub[static_cast<std::size_t>(c)], sub[static_cast<std::size_t>(r)]) - (r == c ? 1.0 : 0.0);
  a.row(k - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
  b(k - 1) = 1.0;
  const Eigen::VectorXd x = a.fullPivLu().solve(b);
  SteadyState ss;
  for (Eigen::Index r = 0; r < k; ++r) ss.pi[static_cast<std::size_t>(sub[static_cast<std::size_t>(r)])] = x(r);
  return ss;
}

SteadyState steady_state_closed(const McParams& params) {
  params.validate();
  const McParams& q = params;
  const double rho = 1.0 + 4.0 * q.p_i + 2.0 * q.p_i * q.p_rj + q.p_i / (1.0 - q.p_di) +
                     q.p_rj * q.p_i / (1.0 - q.p_drj) + 4.0 * q.p_j + 2.0 * q.p_j * q.p_ri +
                     q.p_j / (1.0 - q.p_dj) + q.p_ri * q.p_j / (1.0 - q.p_dri);
  SteadyState ss;
  ss.rho = rho;
  auto fill = [&](S start, S frame, S c1, S c2, S c3, S rs, S rb, S r1, S r2, S r3, double p, double pd, double pr,
                  double pdr) {
    const double ps = p / rho;
    ss.pi[idx(start)] = ps;
    ss.pi[idx(frame)] = ps / (1.0 - pd);
    ss.pi[idx(c1)] = ps;
    ss.pi[idx(c2)] = ps;
    ss.pi[idx(c3)] = (1.0 - pr) * ps;
    ss.pi[idx(rs)] = pr * ps;
    ss.pi[idx(rb)] = pr * ps / (1.0 - pdr);
    ss.pi[idx(r1)] = pr * ps;
    ss.pi[idx(r2)] = pr * ps;
    ss.pi[idx(r3)] = pr * ps;
  };
  fill(S::i_start, S::i_frame, S::ch_i1, S::ch_i2, S::ch_i3, S::j_resp_start, S::j_resp, S::ch_ij1, S::ch_ij2,
       S::ch_ij3, q.p_i, q.p_di, q.p_rj, q.p_drj);
  fill(S::j_start, S::j_frame, S::ch_j1, S::ch_j2, S::ch_j3, S::i_resp_start, S::i_resp, S::ch_ji1, S::ch_ji2,
       S::ch_ji3, q.p_j, q.p_dj, q.p_ri, q.p_dri);
  ss.pi[idx(S::idle)] = (1.0 - q.p_i * q.p_rj - q.p_j * q.p_ri) / rho;
  return ss;
}

JointPmf joint_pmf_lag3(const SteadyState& ss) {
  std::vector<PmfCell> cells;
  for (int k = 0; k < kMcStates; ++k) {
    const auto s = static_cast<McState>(k);
    const StateIndicators ind = indicators(s);
    PmfCell c;
    for (std::uint8_t pos = 1; pos <= 3; ++pos) {
      if (ind.e_i[pos - 1]) c.key.i_pos = pos;
      if (ind.e_j[pos - 1]) c.key.j_pos = pos;
    }
    c.s = ind.s_j;
    c.weight = ss[s];
    cells.push_back(c);
  }
  return JointPmf(3, std::move(cells));
}

// Closed forms in terms of rho and the per-sample end-event rates (times rho)
// u of radio j and v of radio i; w is the rate of j's responses.
double ate_closed(const McParams& params, int tau) {
  params.validate();
  if (tau < 1 || tau > 3) throw std::invalid_argument("ate_closed: lag must be 1, 2 or 3");
  const double rho = steady_state_closed(params).rho;
  const double u = params.p_j + params.p_rj * params.p_i;
  const double v = params.p_i + params.p_ri * params.p_j;
  const double w = params.p_rj * params.p_i;
  double a = 0.0;
  if (tau == 1) {
    const double c = rho - 2.0 * u - v;
    a = xlog(c, c * (rho - u) / ((rho - u - v) * (rho - 2.0 * u))) + xlog(u, (rho - u) / (rho - u - v)) +
        xlog(v, (rho - u) / (rho - 2.0 * u));
  } else if (tau == 2) {
    const double c = rho - 3.0 * u - 2.0 * v;
    a = xlog(c, c * (rho - 2.0 * u) / ((rho - 2.0 * u - 2.0 * v) * (rho - 3.0 * u))) +
        xlog(u, (rho - 2.0 * u) / (rho - 2.0 * u - 2.0 * v)) + xlog(2.0 * v, (rho - 2.0 * u) / (rho - 3.0 * u));
  } else {
    const double pj = params.p_j;
    const double c = rho - pj - 3.0 * u - 3.0 * v;
    const double base = rho - 3.0 * u;
    a = xlog(c, c * base / ((base - 3.0 * v) * (rho - 4.0 * u))) + xlog(pj, pj * base / ((base - 3.0 * v) * u)) +
        xlog(2.0 * v, base / (rho - 4.0 * u)) + xlog(v - w, (v - w) * base / (v * (rho - 4.0 * u))) +
        xlog(w, w * base / (v * u));
  }
  return std::max(0.0, a / rho);
}

namespace {

class ChainSampler {
 public:
  ChainSampler(const McParams& p, std::uint64_t seed) : p_(p), gen_(seed) { p.validate(); }

  // Samples spent in a state that repeats with probability `stay` (at least 1).
  Sample holding(double leave) {
    if (leave >= 1.0) return 1;
    if (leave <= 0.0) return std::numeric_limits<Sample>::max() / 4;
    const double u = 1.0 - uniform();  // (0, 1]
    const double extra = std::floor(std::log(u) / std::log1p(-leave));
    return 1 + static_cast<Sample>(std::min(extra, 1e15));
  }

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Calls emit(state, run_length) for consecutive runs covering [0, n).
  template <typename Emit>
  void run(Sample n, Emit&& emit) {
    S s = S::idle;
    Sample t = 0;
    while (t < n) {
      Sample len = 1;
      S next = S::idle;
      switch (s) {
        case S::idle: {
          const double leave = p_.p_i + p_.p_j;
          len = holding(leave);
          next = (leave > 0.0 && uniform() * leave < p_.p_i) ? S::i_start : S::j_start;
          break;
        }
        case S::i_start: next = S::i_frame; break;
        case S::j_start: next = S::j_frame; break;
        case S::i_frame: len = holding(1.0 - p_.p_di); next = S::ch_i1; break;
        case S::j_frame: len = holding(1.0 - p_.p_dj); next = S::ch_j1; break;
        case S::ch_i1: next = S::ch_i2; break;
        case S::ch_j1: next = S::ch_j2; break;
        case S::ch_i2: next = uniform() < p_.p_rj ? S::j_resp_start : S::ch_i3; break;
        case S::ch_j2: next = uniform() < p_.p_ri ? S::i_resp_start : S::ch_j3; break;
        case S::ch_i3:
        case S::ch_j3: next = S::idle; break;
        case S::j_resp_start: next = S::j_resp; break;
        case S::i_resp_start: next = S::i_resp; break;
        case S::j_resp: len = holding(1.0 - p_.p_drj); next = S::ch_ij1; break;
        case S::i_resp: len = holding(1.0 - p_.p_dri); next = S::ch_ji1; break;
        case S::ch_ij1: next = S::ch_ij2; break;
        case S::ch_ij2: next = S::ch_ij3; break;
        case S::ch_ji1: next = S::ch_ji2; break;
        case S::ch_ji2: next = S::ch_ji3; break;
        case S::ch_ij3:
        case S::ch_ji3: {
          const double u = uniform();
          next = u < p_.p_i ? S::i_start : (u < p_.p_i + p_.p_j ? S::j_start : S::idle);
          break;
        }
      }
      len = std::min(len, n - t);
      emit(s, len);
      t += len;
      s = next;
    }
  }

 private:
  McParams p_;
  std::mt19937_64 gen_;
};

}  // namespace

ActivityTrace simulate_chain(const McParams& params, Sample n, std::uint64_t seed, double ts) {
  if (n < 1) throw std::invalid_argument("simulate_chain needs n >= 1");
  TraceBuilder b(ts, n, 2);
  Sample t = 0;
  Sample open_i = -1, open_j = -1;
  ChainSampler(params, seed).run(n, [&](S s, Sample len) {
    const bool ti = transmitting_i(s), tj = transmitting_j(s);
    if (ti && open_i < 0) open_i = t;
    if (!ti && open_i >= 0) { b.add(1, open_i, t); open_i = -1; }
    if (tj && open_j < 0) open_j = t;
    if (!tj && open_j >= 0) { b.add(2, open_j, t); open_j = -1; }
    t += len;
  });
  if (open_i >= 0) b.add(1, open_i, n);
  if (open_j >= 0) b.add(2, open_j, n);
  return b.build();
}

std::vector<McState> simulate_chain_states(const McParams& params, Sample n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("simulate_chain needs n >= 1");
  std::vector<McState> out;
  out.reserve(static_cast<std::size_t>(n));
  ChainSampler(params, seed).run(n, [&](S s, Sample len) { out.insert(out.end(), static_cast<std::size_t>(len), s); });
  return out;
}

}  // namespace topolearn
