// Multi-radio binary activity traces: run-length storage, event series,
// link matrices and the text trace format.
#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace topolearn {

using Sample = std::int64_t;

// Half-open sample range [start, end).
struct Interval {
  Sample start = 0;
  Sample end = 0;

  Sample length() const { return end - start; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct RadioActivity {
  int radio_id = 0;
  std::vector<Interval> intervals;  // sorted, disjoint, non-adjacent

  friend bool operator==(const RadioActivity&, const RadioActivity&) = default;
};

class ActivityTrace {
 public:
  ActivityTrace() = default;
  // Validates every invariant; throws std::invalid_argument on violation.
  ActivityTrace(double sample_period_s, Sample num_samples,
                std::vector<RadioActivity> radios);

  double sample_period_s() const { return ts_; }
  Sample num_samples() const { return n_; }
  int num_radios() const { return static_cast<int>(radios_.size()); }

  // radio ids are 1-based
  const RadioActivity& radio(int radio_id) const;
  const std::vector<RadioActivity>& radios() const { return radios_; }

  // Dense 0/1 materialisation; meant for small traces and tests.
  std::vector<std::uint8_t> dense(int radio_id) const;
  double duty_cycle(int radio_id) const;

  friend bool operator==(const ActivityTrace&, const ActivityTrace&) = default;

 private:
  double ts_ = 0.0;
  Sample n_ = 0;
  std::vector<RadioActivity> radios_;
};

// Accumulates intervals in any order, merging overlapping or adjacent ones.
class TraceBuilder {
 public:
  TraceBuilder(double sample_period_s, Sample num_samples, int num_radios);

  void add(int radio_id, Sample start, Sample end);
  void add_dense(int radio_id, const std::vector<std::uint8_t>& activity);
  ActivityTrace build() const;

 private:
  double ts_;
  Sample n_;
  std::vector<std::vector<Interval>> pending_;
};

enum class EventKind { start, end };

struct EventSeries {
  EventKind kind = EventKind::start;
  int radio_id = 0;
  std::vector<Sample> event_samples;
};

EventSeries derive_events(const ActivityTrace& trace, int radio_id, EventKind kind);

// Rebuilds the intervals of one radio from its start and end series.
std::vector<Interval> intervals_from_events(const EventSeries& starts, const EventSeries& ends);

// OR-downsampling to an integer multiple of the sample period.
ActivityTrace resample(const ActivityTrace& trace, double new_period_s);

// Samples [first, first + count) of every radio, re-based to 0.
ActivityTrace slice(const ActivityTrace& trace, Sample first, Sample count);

// Applies radio relabelling: output radio perm[k-1] carries input radio k.
ActivityTrace permute_radios(const ActivityTrace& trace, const std::vector<int>& perm);

class LinkMatrix {
 public:
  LinkMatrix() = default;
  explicit LinkMatrix(int m);

  int m() const { return m_; }
  bool operator()(int i, int j) const;  // 1-based
  void set(int i, int j, bool value = true);
  int count() const;
  std::vector<std::pair<int, int>> links() const;
  LinkMatrix symmetrized() const;

  friend bool operator==(const LinkMatrix&, const LinkMatrix&) = default;

 private:
  int m_ = 0;
  std::vector<std::uint8_t> entries_;
};

class TraceFormatError : public std::runtime_error {
 public:
  enum class Kind { io, malformed_header, malformed_row, overlapping_interval, out_of_range };

  TraceFormatError(Kind kind, const std::string& what);
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

ActivityTrace load_trace(const std::filesystem::path& path);
void save_trace(const ActivityTrace& trace, const std::filesystem::path& path);
std::string format_trace(const ActivityTrace& trace);
ActivityTrace parse_trace(const std::string& text);

// `.links` sidecar: one "i,j" line per directed link, '#' lines are comments.
LinkMatrix load_links(const std::filesystem::path& path, int m = 0);
void save_links(const LinkMatrix& links, const std::filesystem::path& path,
                const std::string& comment = {});
std::filesystem::path links_path_for(const std::filesystem::path& trace_path);

// Shortest round-trip decimal representation.
std::string format_double(double value);

}  // namespace topolearn
