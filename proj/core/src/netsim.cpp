#include "topolearn/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <stdexcept>
#include <string>

namespace topolearn {

namespace {

constexpr Sample kNever = std::numeric_limits<Sample>::max();

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("netconfig: " + what);
}

bool active_at(const LinkSpec& l, double t_s) { return t_s >= l.active_from_s && t_s < l.active_until_s; }

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double exponential(double mean) { return -mean * std::log1p(-uniform()); }
  int below(int n) { return std::min(n - 1, static_cast<int>(uniform() * n)); }

 private:
  std::mt19937_64 gen_;
};

struct Packet {
  int dst = 0;
  Sample len = 0;
  int flow = -1;
  std::size_t hop = 0;
};

struct Transmission {
  bool active = false;
  bool response = false;
  bool collided = false;
  Sample start = 0;
  Sample end = 0;
  Packet packet;
};

struct Radio {
  std::deque<Packet> queue;
  bool has_head = false;  // contending for the channel with queue.front()
  Sample backoff_left = 0;
  Sample head_since = 0;
  int busy = 0;           // transmitting radios this one hears, itself included
  Sample idle_since = 0;
  Transmission tx;
};

struct PendingResponse {
  Sample at = 0;
  int responder = 0;
  Sample len = 0;
  std::size_t link = 0;
};

struct Generator {
  Sample next = kNever;
  double next_s = 0.0;  // continuous arrival time of the next on period or packet
};

class Simulator {
 public:
  Simulator(const NetConfig& cfg, double duration_s, std::uint64_t seed)
      : cfg_(cfg), rng_(seed), n_(samples(duration_s)), radios_(static_cast<std::size_t>(cfg.radios)) {
    if (n_ < 1) throw std::invalid_argument("simulate_network: duration shorter than one sample");
    l_idle_ = samples(cfg.mac.min_idle_s);
    slot_ = cfg.mac.slot_s / cfg.ts;
    for (Radio& r : radios_) r.idle_since = -l_idle_;
    report_.per_link.resize(cfg.links.size());
    for (std::size_t k = 0; k < cfg.links.size(); ++k) {
      report_.per_link[k].src = cfg.links[k].src;
      report_.per_link[k].dst = cfg.links[k].dst;
    }
    for (const TrafficSpec& tr : cfg.traffic) {
      Generator g;
      g.next_s = tr.start_s + rng_.exponential(tr.mean_off_s);
      arm(g, tr.stop_s);
      onoff_.push_back(g);
    }
    for (const FlowSpec& f : cfg.flows) {
      Generator g;
      g.next_s = f.start_s;
      arm(g, f.stop_s);
      flows_.push_back(g);
    }
  }

  SimReport run() {
    TraceBuilder builder(cfg_.ts, n_, cfg_.radios);
    builder_ = &builder;
    Sample t = 0;
    while ((t = next_event()) < n_) step(t);
    for (std::size_t k = 0; k < radios_.size(); ++k) {
      const Transmission& tx = radios_[k].tx;
      if (tx.active) builder.add(static_cast<int>(k) + 1, tx.start, n_);
    }
    report_.trace = builder.build();
    report_.truth = truth_for_window(cfg_, 0.0, static_cast<double>(n_) * cfg_.ts);
    return std::move(report_);
  }

 private:
  Sample samples(double seconds) const { return static_cast<Sample>(std::llround(seconds / cfg_.ts)); }

  void arm(Generator& g, double stop_s) {
    const Sample at = samples(g.next_s);
    g.next = (g.next_s < stop_s && at < n_) ? std::max<Sample>(at, 0) : kNever;
  }

  Radio& radio(int id) { return radios_[static_cast<std::size_t>(id - 1)]; }

  bool contending(const Radio& r) const { return r.has_head && !r.tx.active; }

  Sample ready_at(const Radio& r) const {
    return std::max(r.idle_since + l_idle_, r.head_since) + r.backoff_left;
  }

  Sample draw_backoff() {
    const int k = rng_.below(cfg_.mac.backoff_slots + 1);
    return static_cast<Sample>(std::llround(k * slot_));
  }

  void make_head(Radio& r, Sample t) {
    if (r.has_head || r.tx.active || r.queue.empty()) return;
    r.has_head = true;
    r.head_since = t;
    r.backoff_left = draw_backoff();
  }

  void enqueue(int id, Packet p, Sample t) {
    Radio& r = radio(id);
    r.queue.push_back(p);
    make_head(r, t);
  }

  Sample next_event() const {
    Sample t = kNever;
    for (const Radio& r : radios_) {
      if (r.tx.active) t = std::min(t, r.tx.end);
      if (contending(r) && r.busy == 0) t = std::min(t, ready_at(r));
    }
    for (const Generator& g : onoff_) t = std::min(t, g.next);
    for (const Generator& g : flows_) t = std::min(t, g.next);
    for (const PendingResponse& p : responses_) t = std::min(t, p.at);
    return t;
  }

  int link_index(int src, int dst) const {
    for (std::size_t k = 0; k < cfg_.links.size(); ++k)
      if (cfg_.links[k].src == src && cfg_.links[k].dst == dst) return static_cast<int>(k);
    return -1;
  }

  void start_tx(int id, Sample t, Sample len, bool response, const Packet& p) {
    Transmission& tx = radio(id).tx;
    tx.collided = false;
    // frames already on the air that this one overlaps
    if (cfg_.collisions && !response) {
      for (int other = 1; other <= cfg_.radios; ++other) {
        const Transmission& o = radio(other).tx;
        if (other == id || !o.active) continue;
        if (p.dst != 0 && (p.dst == other || cfg_.hears(p.dst, other))) tx.collided = true;
      }
    }
    for (int other = 1; other <= cfg_.radios; ++other) {
      Transmission& o = radio(other).tx;
      if (!cfg_.collisions || other == id || !o.active || o.response || o.packet.dst == 0) continue;
      if (o.packet.dst == id || cfg_.hears(o.packet.dst, id)) o.collided = true;
    }
    tx.active = true;
    tx.response = response;
    tx.start = t;
    tx.end = t + len;
    tx.packet = p;
    for (int r = 1; r <= cfg_.radios; ++r) {
      if (r != id && !cfg_.hears(r, id)) continue;
      Radio& x = radio(r);
      if (x.busy++ > 0) continue;
      if (contending(x) || (r == id && x.has_head)) {
        x.backoff_left = std::max<Sample>(0, x.backoff_left - std::max<Sample>(0, t - std::max(x.idle_since + l_idle_, x.head_since)));
        if (r != id) ++report_.deferrals;
      }
    }
  }

  void end_tx(int id, Sample t) {
    Radio& me = radio(id);
    builder_->add(id, me.tx.start, std::min(me.tx.end, n_));
    me.tx.active = false;
    for (int r = 1; r <= cfg_.radios; ++r) {
      if (r != id && !cfg_.hears(r, id)) continue;
      Radio& x = radio(r);
      if (--x.busy == 0) x.idle_since = t;
    }
  }

  void finish_frame(int id, const Transmission& tx, Sample t) {
    if (tx.response) return;
    ++report_.frames_sent;
    if (tx.collided) ++report_.collisions;
    const Packet& p = tx.packet;
    if (p.dst == 0) return;
    const int li = link_index(id, p.dst);
    if (li >= 0) ++report_.per_link[static_cast<std::size_t>(li)].frames;
    if (tx.collided) return;
    const double t_s = static_cast<double>(t) * cfg_.ts;
    if (li >= 0) {
      const LinkSpec& l = cfg_.links[static_cast<std::size_t>(li)];
      if (active_at(l, t_s) && l.response_prob > 0.0 && rng_.uniform() < l.response_prob) {
        // the response starts response_time after the frame's last sample
        responses_.push_back({t - 1 + samples(l.response_time_s), p.dst,
                              std::max<Sample>(1, samples(l.response_len_s)), static_cast<std::size_t>(li)});
      }
    }
    if (p.flow >= 0) {
      const auto& route = cfg_.flows[static_cast<std::size_t>(p.flow)].route;
      if (p.hop + 2 < route.size()) enqueue(p.dst, {route[p.hop + 2], p.len, p.flow, p.hop + 1}, t);
    }
  }

  void arrive_onoff(std::size_t k, Sample t) {
    const TrafficSpec& tr = cfg_.traffic[k];
    Generator& g = onoff_[k];
    const double on = rng_.exponential(tr.mean_on_s);
    Sample total = std::max<Sample>(2, samples(on));
    std::vector<int> dests;
    const double t_s = static_cast<double>(t) * cfg_.ts;
    for (const LinkSpec& l : cfg_.links)
      if (l.src == tr.radio && active_at(l, t_s)) dests.push_back(l.dst);
    while (total > 0) {
      Sample len = total;
      if (tr.frame_len_s > 0.0) {
        len = std::min(total, std::max<Sample>(2, samples(rng_.exponential(tr.frame_len_s))));
        if (total - len < 2) len = total;
      }
      const int dst = dests.empty() ? 0 : dests[static_cast<std::size_t>(rng_.below(static_cast<int>(dests.size())))];
      enqueue(tr.radio, {dst, len, -1, 0}, t);
      total -= len;
    }
    g.next_s += on + rng_.exponential(tr.mean_off_s);
    arm(g, tr.stop_s);
  }

  void arrive_flow(std::size_t k, Sample t) {
    const FlowSpec& f = cfg_.flows[k];
    Generator& g = flows_[k];
    enqueue(f.route[0], {f.route[1], std::max<Sample>(1, samples(f.frame_s)), static_cast<int>(k), 0}, t);
    g.next_s += 1.0 / f.rate_pps;
    arm(g, f.stop_s);
  }

  void step(Sample t) {
    // 1. transmissions ending now
    for (int id = 1; id <= cfg_.radios; ++id) {
      Radio& r = radio(id);
      if (!r.tx.active || r.tx.end != t) continue;
      const Transmission done = r.tx;
      end_tx(id, t);
      finish_frame(id, done, t);
    }
    for (int id = 1; id <= cfg_.radios; ++id) make_head(radio(id), t);
    // 2. arrivals
    for (std::size_t k = 0; k < onoff_.size(); ++k)
      while (onoff_[k].next == t) arrive_onoff(k, t);
    for (std::size_t k = 0; k < flows_.size(); ++k)
      while (flows_[k].next == t) arrive_flow(k, t);
    // 3. responses due now
    std::vector<PendingResponse> due;
    for (auto it = responses_.begin(); it != responses_.end();) {
      if (it->at == t) {
        due.push_back(*it);
        it = responses_.erase(it);
      } else {
        ++it;
      }
    }
    for (const PendingResponse& p : due) {
      Radio& r = radio(p.responder);
      if (r.tx.active) continue;
      if (!cfg_.collisions && r.busy > 0) continue;
      start_tx(p.responder, t, p.len, true, {});
      ++report_.responses_sent;
      ++report_.per_link[p.link].responses;
    }
    // 4. contention winners
    std::vector<int> ready;
    for (int id = 1; id <= cfg_.radios; ++id) {
      const Radio& r = radio(id);
      if (contending(r) && r.busy == 0 && ready_at(r) <= t) ready.push_back(id);
    }
    if (!cfg_.collisions)
      for (std::size_t k = ready.size(); k > 1; --k)
        std::swap(ready[k - 1], ready[static_cast<std::size_t>(rng_.below(static_cast<int>(k)))]);
    for (int id : ready) {
      Radio& r = radio(id);
      if (!cfg_.collisions && r.busy > 0) continue;
      const Packet p = r.queue.front();
      r.queue.pop_front();
      r.has_head = false;
      start_tx(id, t, p.len, false, p);
    }
  }

  const NetConfig& cfg_;
  Rng rng_;
  Sample n_;
  Sample l_idle_ = 0;
  double slot_ = 0.0;
  std::vector<Radio> radios_;
  std::vector<Generator> onoff_;
  std::vector<Generator> flows_;
  std::vector<PendingResponse> responses_;
  TraceBuilder* builder_ = nullptr;
  SimReport report_;
};

}  // namespace

bool NetConfig::hears(int a, int b) const {
  if (a == b || sense.empty()) return true;
  return sense[static_cast<std::size_t>(a - 1)][static_cast<std::size_t>(b - 1)];
}

void NetConfig::validate() const {
  require(ts > 0.0 && std::isfinite(ts), "ts must be positive");
  require(radios >= 1, "need at least one radio");
  require(mac.min_idle_s >= ts, "min_idle_s must be at least one sample");
  require(mac.backoff_slots >= 0, "backoff_slots must be non-negative");
  require(mac.slot_s >= 0.0, "slot_s must be non-negative");
  const auto l_idle = std::llround(mac.min_idle_s / ts);
  auto radio_ok = [&](int r) { return r >= 1 && r <= radios; };
  if (!sense.empty()) {
    require(static_cast<int>(sense.size()) == radios, "sense matrix must be radios x radios");
    for (const auto& row : sense) require(static_cast<int>(row.size()) == radios, "sense matrix must be radios x radios");
  }
  for (const TrafficSpec& t : traffic) {
    require(radio_ok(t.radio), "traffic radio out of range");
    require(t.mean_on_s > 0.0 && t.mean_off_s > 0.0, "traffic means must be positive");
    require(t.frame_len_s >= 0.0, "frame_len_s must be non-negative");
    require(t.start_s >= 0.0 && t.stop_s >= t.start_s, "traffic window is empty or negative");
  }
  for (const LinkSpec& l : links) {
    require(radio_ok(l.src) && radio_ok(l.dst) && l.src != l.dst, "link endpoints invalid");
    require(l.response_prob >= 0.0 && l.response_prob <= 1.0, "response_prob must lie in [0,1]");
    require(l.response_time_s >= ts, "response_time_s must be at least one sample");
    require(l.response_time_s < mac.min_idle_s, "response_time_s must be shorter than min_idle_s");
    require(std::llround(l.response_time_s / ts) < l_idle, "response lag must be shorter than the idle lag in samples");
    require(l.response_len_s > 0.0, "response_len_s must be positive");
    require(l.active_until_s > l.active_from_s, "link window is empty");
  }
  for (std::size_t a = 0; a < links.size(); ++a)
    for (std::size_t b = a + 1; b < links.size(); ++b)
      require(links[a].src != links[b].src || links[a].dst != links[b].dst, "duplicate link");
  for (const FlowSpec& f : flows) {
    require(f.route.size() >= 2, "flow route needs at least two radios");
    for (int r : f.route) require(radio_ok(r), "flow route radio out of range");
    require(f.rate_pps > 0.0 && f.frame_s > 0.0, "flow rate and frame length must be positive");
    require(f.start_s >= 0.0 && f.stop_s >= f.start_s, "flow window is empty or negative");
  }
}

SimReport simulate_network(const NetConfig& config, double duration_s, std::uint64_t seed) {
  config.validate();
  return Simulator(config, duration_s, seed).run();
}

LinkMatrix truth_for_window(const NetConfig& config, double from_s, double until_s) {
  LinkMatrix m(config.radios);
  for (const LinkSpec& l : config.links)
    if (l.response_prob > 0.0 && l.active_from_s < until_s && l.active_until_s > from_s) m.set(l.src, l.dst);
  return m;
}

}  // namespace topolearn
