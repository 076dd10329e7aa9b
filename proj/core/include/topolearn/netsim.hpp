// Discrete-event CSMA network simulator on the sample grid, plus canned
// scenarios and the JSON config format.
#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "topolearn/trace.hpp"

namespace topolearn {

inline constexpr double kForever = std::numeric_limits<double>::infinity();

// A directed link src -> dst: dst answers data frames of src.
struct LinkSpec {
  int src = 0;
  int dst = 0;
  double response_prob = 1.0;
  double response_time_s = 16e-6;
  double response_len_s = 50e-6;
  double active_from_s = 0.0;
  double active_until_s = kForever;
};

// Exponential on/off source.  Every on period is queued as one frame when
// frame_len_s is 0, else cut into exponential pieces of mean frame_len_s.
// Destinations are drawn uniformly over the radio's active outbound links.
struct TrafficSpec {
  int radio = 0;
  double mean_on_s = 1e-3;
  double mean_off_s = 10e-3;
  double frame_len_s = 0.0;
  double start_s = 0.0;
  double stop_s = kForever;
};

// Constant-rate packets forwarded hop by hop along a scripted route.
struct FlowSpec {
  std::vector<int> route;
  double rate_pps = 5.0;
  double frame_s = 4e-3;
  double start_s = 0.0;
  double stop_s = kForever;
};

struct MacSpec {
  double min_idle_s = 34e-6;
  int backoff_slots = 15;  // backoff drawn uniformly from 0..backoff_slots
  double slot_s = 9e-6;
};

struct NetConfig {
  double ts = 5e-6;
  int radios = 0;
  MacSpec mac;
  bool collisions = false;
  // sense[a][b]: radio a+1 hears radio b+1.  Empty means everyone hears everyone.
  std::vector<std::vector<bool>> sense;
  std::vector<TrafficSpec> traffic;
  std::vector<LinkSpec> links;
  std::vector<FlowSpec> flows;

  void validate() const;  // throws std::invalid_argument
  bool hears(int a, int b) const;
};

struct LinkCounter {
  int src = 0;
  int dst = 0;
  std::int64_t frames = 0;
  std::int64_t responses = 0;
};

struct SimReport {
  ActivityTrace trace;
  LinkMatrix truth;
  std::int64_t frames_sent = 0;
  std::int64_t responses_sent = 0;
  std::int64_t deferrals = 0;
  std::int64_t collisions = 0;
  std::vector<LinkCounter> per_link;
};

SimReport simulate_network(const NetConfig& config, double duration_s, std::uint64_t seed);

// Links that answer with positive probability and are active somewhere in [from_s, until_s).
LinkMatrix truth_for_window(const NetConfig& config, double from_s, double until_s);

struct ScenarioKnobs {
  double ts = 5e-6;
  bool collisions = false;
  double mean_on_s = 1e-3;
  double mean_off_s = 10e-3;
  double frame_len_s = 0.0;
  // infra2ap
  int sta_per_ap = 3;
  bool downlink = false;
  bool cross_sense = true;
  // adhoc_grid
  int grid = 5;
  double flow_rate_pps = 5.0;
  double flow_frame_s = 4e-3;
  double flow_start_s = 0.0;
  double flow_stop_s = kForever;
  // pair
  double response_prob = 1.0;
  bool sense = true;

  // Sets a field from text, e.g. ("sta_per_ap", "4"); throws on unknown keys.
  void set(const std::string& key, const std::string& value);
};

NetConfig make_scenario(const std::string& name, const ScenarioKnobs& knobs = {});
// Radio ids along the adhoc_grid route from the last grid cell to the first.
std::vector<int> grid_route(int n);

NetConfig parse_netconfig(const std::string& json_text);
std::string format_netconfig(const NetConfig& config);
NetConfig load_netconfig(const std::filesystem::path& path);
void save_netconfig(const NetConfig& config, const std::filesystem::path& path);

}  // namespace topolearn
