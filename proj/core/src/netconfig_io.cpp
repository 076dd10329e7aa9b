#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "topolearn/netsim.hpp"

namespace topolearn {

namespace {

using nlohmann::json;

constexpr const char* kSchema = "topolearn.netconfig.v1";

// Infinite window ends travel as null.
json seconds(double v) { return std::isinf(v) ? json(nullptr) : json(v); }

double seconds_or(const json& obj, const char* key, double fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (it->is_null()) return kForever;
  return it->get<double>();
}

template <typename T>
T value_or(const json& obj, const char* key, T fallback) {
  const auto it = obj.find(key);
  return it == obj.end() ? fallback : it->get<T>();
}

}  // namespace

std::string format_netconfig(const NetConfig& c) {
  json j;
  j["schema"] = kSchema;
  j["ts"] = c.ts;
  j["radios"] = c.radios;
  j["mac"] = {{"min_idle_s", c.mac.min_idle_s}, {"backoff_slots", c.mac.backoff_slots}, {"slot_s", c.mac.slot_s}};
  j["collisions"] = c.collisions;
  if (c.sense.empty()) {
    j["sense"] = "all";
  } else {
    json rows = json::array();
    for (const auto& row : c.sense) {
      json r = json::array();
      for (bool b : row) r.push_back(b ? 1 : 0);
      rows.push_back(r);
    }
    j["sense"] = rows;
  }
  j["traffic"] = json::array();
  for (const TrafficSpec& t : c.traffic)
    j["traffic"].push_back({{"radio", t.radio},
                            {"mean_on_s", t.mean_on_s},
                            {"mean_off_s", t.mean_off_s},
                            {"frame_len_s", t.frame_len_s},
                            {"start_s", t.start_s},
                            {"stop_s", seconds(t.stop_s)}});
  j["links"] = json::array();
  for (const LinkSpec& l : c.links)
    j["links"].push_back({{"src", l.src},
                          {"dst", l.dst},
                          {"response_prob", l.response_prob},
                          {"response_time_s", l.response_time_s},
                          {"response_len_s", l.response_len_s},
                          {"active_from_s", l.active_from_s},
                          {"active_until_s", seconds(l.active_until_s)}});
  j["flows"] = json::array();
  for (const FlowSpec& f : c.flows)
    j["flows"].push_back({{"route", f.route},
                          {"rate_pps", f.rate_pps},
                          {"frame_s", f.frame_s},
                          {"start_s", f.start_s},
                          {"stop_s", seconds(f.stop_s)}});
  return j.dump(2) + "\n";
}

NetConfig parse_netconfig(const std::string& text) {
  NetConfig c;
  try {
    const json j = json::parse(text);
    if (value_or<std::string>(j, "schema", kSchema) != kSchema)
      throw std::invalid_argument("netconfig: unsupported schema " + j.at("schema").get<std::string>());
    c.ts = value_or(j, "ts", c.ts);
    c.radios = j.at("radios").get<int>();
    if (const auto it = j.find("mac"); it != j.end()) {
      c.mac.min_idle_s = value_or(*it, "min_idle_s", c.mac.min_idle_s);
      c.mac.backoff_slots = value_or(*it, "backoff_slots", c.mac.backoff_slots);
      c.mac.slot_s = value_or(*it, "slot_s", c.mac.slot_s);
    }
    c.collisions = value_or(j, "collisions", false);
    if (const auto it = j.find("sense"); it != j.end() && !(it->is_string() && it->get<std::string>() == "all")) {
      if (!it->is_array()) throw std::invalid_argument("netconfig: sense must be \"all\" or a 0/1 matrix");
      for (const json& row : *it) {
        std::vector<bool> r;
        for (const json& v : row) r.push_back(v.is_boolean() ? v.get<bool>() : v.get<int>() != 0);
        c.sense.push_back(std::move(r));
      }
    }
    for (const json& t : value_or(j, "traffic", json::array())) {
      TrafficSpec s;
      s.radio = t.at("radio").get<int>();
      s.mean_on_s = value_or(t, "mean_on_s", s.mean_on_s);
      s.mean_off_s = value_or(t, "mean_off_s", s.mean_off_s);
      s.frame_len_s = value_or(t, "frame_len_s", s.frame_len_s);
      s.start_s = value_or(t, "start_s", s.start_s);
      s.stop_s = seconds_or(t, "stop_s", s.stop_s);
      c.traffic.push_back(s);
    }
    for (const json& l : value_or(j, "links", json::array())) {
      LinkSpec s;
      s.src = l.at("src").get<int>();
      s.dst = l.at("dst").get<int>();
      s.response_prob = value_or(l, "response_prob", s.response_prob);
      s.response_time_s = value_or(l, "response_time_s", s.response_time_s);
      s.response_len_s = value_or(l, "response_len_s", s.response_len_s);
      s.active_from_s = value_or(l, "active_from_s", s.active_from_s);
      s.active_until_s = seconds_or(l, "active_until_s", s.active_until_s);
      c.links.push_back(s);
    }
    for (const json& f : value_or(j, "flows", json::array())) {
      FlowSpec s;
      s.route = f.at("route").get<std::vector<int>>();
      s.rate_pps = value_or(f, "rate_pps", s.rate_pps);
      s.frame_s = value_or(f, "frame_s", s.frame_s);
      s.start_s = value_or(f, "start_s", s.start_s);
      s.stop_s = seconds_or(f, "stop_s", s.stop_s);
      c.flows.push_back(s);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("netconfig: ") + e.what());
  }
  c.validate();
  return c;
}

NetConfig load_netconfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_netconfig(ss.str());
}

void save_netconfig(const NetConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << format_netconfig(config);
}

}  // namespace topolearn
