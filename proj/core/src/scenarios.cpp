#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "topolearn/netsim.hpp"

namespace topolearn {

namespace {

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0') throw std::invalid_argument("knob " + key + ": not a number: " + v);
  return d;
}

int to_int(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long d = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0') throw std::invalid_argument("knob " + key + ": not an integer: " + v);
  return static_cast<int>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw std::invalid_argument("knob " + key + ": not a boolean: " + v);
}

constexpr double kSifs = 16e-6;
constexpr double kAck = 50e-6;

NetConfig infra2ap(const ScenarioKnobs& k) {
  if (k.sta_per_ap < 1) throw std::invalid_argument("infra2ap needs at least one STA per AP");
  NetConfig c;
  c.ts = k.ts;
  c.collisions = k.collisions;
  const int per = k.sta_per_ap + 1;
  c.radios = 2 * per;
  auto bss_of = [per](int r) { return (r - 1) / per; };
  for (int b = 0; b < 2; ++b) {
    const int ap = b * per + 1;
    for (int s = ap + 1; s < ap + per; ++s) {
      c.links.push_back({s, ap, 1.0, kSifs, kAck});
      c.links.push_back({ap, s, 1.0, kSifs, kAck});
      c.traffic.push_back({s, k.mean_on_s, k.mean_off_s, k.frame_len_s});
      if (k.downlink) c.traffic.push_back({ap, k.mean_on_s, k.mean_off_s, k.frame_len_s});
    }
  }
  if (!k.cross_sense) {
    c.sense.assign(static_cast<std::size_t>(c.radios), std::vector<bool>(static_cast<std::size_t>(c.radios)));
    for (int a = 1; a <= c.radios; ++a)
      for (int b = 1; b <= c.radios; ++b)
        c.sense[static_cast<std::size_t>(a - 1)][static_cast<std::size_t>(b - 1)] = bss_of(a) == bss_of(b);
  }
  return c;
}

NetConfig adhoc_grid(const ScenarioKnobs& k) {
  if (k.grid < 2) throw std::invalid_argument("adhoc_grid needs a grid of at least 2x2");
  NetConfig c;
  c.ts = k.ts;
  c.collisions = k.collisions;
  c.radios = k.grid * k.grid;
  const auto m = static_cast<std::size_t>(c.radios);
  c.sense.assign(m, std::vector<bool>(m));
  for (int a = 0; a < c.radios; ++a)
    for (int b = 0; b < c.radios; ++b) {
      const int dr = std::abs(a / k.grid - b / k.grid);
      const int dc = std::abs(a % k.grid - b % k.grid);
      c.sense[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = std::max(dr, dc) <= 2;
    }
  const std::vector<int> route = grid_route(k.grid);
  for (std::size_t h = 0; h + 1 < route.size(); ++h)
    c.links.push_back({route[h], route[h + 1], 1.0, 9e-6, kAck, k.flow_start_s, k.flow_stop_s});
  c.flows.push_back({route, k.flow_rate_pps, k.flow_frame_s, k.flow_start_s, k.flow_stop_s});
  return c;
}

NetConfig pair(const ScenarioKnobs& k) {
  NetConfig c;
  c.ts = k.ts;
  c.collisions = k.collisions;
  c.radios = 2;
  c.links.push_back({1, 2, k.response_prob, kSifs, kAck});
  c.traffic.push_back({1, k.mean_on_s, k.mean_off_s, k.frame_len_s});
  c.traffic.push_back({2, k.mean_on_s, k.mean_off_s, k.frame_len_s});
  if (!k.sense) c.sense = {{true, false}, {false, true}};
  return c;
}

}  // namespace

void ScenarioKnobs::set(const std::string& key, const std::string& value) {
  if (key == "ts") ts = to_double(key, value);
  else if (key == "collisions") collisions = to_bool(key, value);
  else if (key == "mean_on_s") mean_on_s = to_double(key, value);
  else if (key == "mean_off_s") mean_off_s = to_double(key, value);
  else if (key == "frame_len_s") frame_len_s = to_double(key, value);
  else if (key == "sta_per_ap") sta_per_ap = to_int(key, value);
  else if (key == "downlink") downlink = to_bool(key, value);
  else if (key == "cross_sense") cross_sense = to_bool(key, value);
  else if (key == "grid") grid = to_int(key, value);
  else if (key == "flow_rate_pps") flow_rate_pps = to_double(key, value);
  else if (key == "flow_frame_s") flow_frame_s = to_double(key, value);
  else if (key == "flow_start_s") flow_start_s = to_double(key, value);
  else if (key == "flow_stop_s") flow_stop_s = to_double(key, value);
  else if (key == "response_prob") response_prob = to_double(key, value);
  else if (key == "sense") sense = to_bool(key, value);
  else throw std::invalid_argument("unknown scenario knob: " + key);
}

// Staircase from the bottom-right cell to the top-left one, alternating
// one step up and one step left.
std::vector<int> grid_route(int n) {
  if (n < 2) throw std::invalid_argument("grid_route needs n >= 2");
  int row = n - 1, col = n - 1;
  std::vector<int> route{row * n + col + 1};
  bool up = true;
  while (row > 0 || col > 0) {
    if ((up && row > 0) || col == 0)
      --row;
    else
      --col;
    up = !up;
    route.push_back(row * n + col + 1);
  }
  return route;
}

NetConfig make_scenario(const std::string& name, const ScenarioKnobs& knobs) {
  NetConfig c;
  if (name == "infra2ap")
    c = infra2ap(knobs);
  else if (name == "adhoc_grid")
    c = adhoc_grid(knobs);
  else if (name == "pair")
    c = pair(knobs);
  else
    throw std::invalid_argument("unknown scenario: " + name);
  c.validate();
  return c;
}

}  // namespace topolearn
