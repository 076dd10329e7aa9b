#include "topolearn/trace.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace topolearn {

namespace {

void check_intervals(const std::vector<Interval>& intervals, Sample n, int radio_id) {
  Sample prev_end = -1;
  for (const Interval& iv : intervals) {
    if (iv.start < 0 || iv.end > n || iv.start >= iv.end)
      throw std::invalid_argument("radio " + std::to_string(radio_id) + ": interval [" +
                                  std::to_string(iv.start) + "," + std::to_string(iv.end) +
                                  ") outside [0," + std::to_string(n) + ") or empty");
    if (iv.start <= prev_end)
      throw std::invalid_argument("radio " + std::to_string(radio_id) +
                                  ": intervals unsorted, overlapping or adjacent at sample " +
                                  std::to_string(iv.start));
    prev_end = iv.end;
  }
}

std::vector<Interval> merge_sorted(std::vector<Interval> v) {
  std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) {
    return a.start < b.start || (a.start == b.start && a.end < b.end);
  });
  std::vector<Interval> out;
  out.reserve(v.size());
  for (const Interval& iv : v) {
    if (!out.empty() && iv.start <= out.back().end)
      out.back().end = std::max(out.back().end, iv.end);
    else
      out.push_back(iv);
  }
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

ActivityTrace::ActivityTrace(double sample_period_s, Sample num_samples,
                             std::vector<RadioActivity> radios)
    : ts_(sample_period_s), n_(num_samples), radios_(std::move(radios)) {
  if (!(ts_ > 0.0) || !std::isfinite(ts_))
    throw std::invalid_argument("sample period must be positive");
  if (n_ <= 0) throw std::invalid_argument("trace needs at least one sample");
  if (radios_.empty()) throw std::invalid_argument("trace needs at least one radio");
  for (std::size_t k = 0; k < radios_.size(); ++k) {
    if (radios_[k].radio_id != static_cast<int>(k) + 1)
      throw std::invalid_argument("radio ids must be 1..M in order");
    check_intervals(radios_[k].intervals, n_, radios_[k].radio_id);
  }
}

const RadioActivity& ActivityTrace::radio(int radio_id) const {
  if (radio_id < 1 || radio_id > num_radios())
    throw std::out_of_range("unknown radio id " + std::to_string(radio_id));
  return radios_[static_cast<std::size_t>(radio_id - 1)];
}

std::vector<std::uint8_t> ActivityTrace::dense(int radio_id) const {
  std::vector<std::uint8_t> a(static_cast<std::size_t>(n_), 0);
  for (const Interval& iv : radio(radio_id).intervals)
    std::fill(a.begin() + iv.start, a.begin() + iv.end, std::uint8_t{1});
  return a;
}

double ActivityTrace::duty_cycle(int radio_id) const {
  Sample on = 0;
  for (const Interval& iv : radio(radio_id).intervals) on += iv.length();
  return static_cast<double>(on) / static_cast<double>(n_);
}

TraceBuilder::TraceBuilder(double sample_period_s, Sample num_samples, int num_radios)
    : ts_(sample_period_s), n_(num_samples) {
  if (num_radios < 1) throw std::invalid_argument("trace needs at least one radio");
  pending_.resize(static_cast<std::size_t>(num_radios));
}

void TraceBuilder::add(int radio_id, Sample start, Sample end) {
  if (radio_id < 1 || radio_id > static_cast<int>(pending_.size()))
    throw std::out_of_range("unknown radio id " + std::to_string(radio_id));
  if (start < 0 || end > n_ || start >= end)
    throw std::invalid_argument("interval [" + std::to_string(start) + "," +
                                std::to_string(end) + ") outside trace or empty");
  pending_[static_cast<std::size_t>(radio_id - 1)].push_back({start, end});
}

void TraceBuilder::add_dense(int radio_id, const std::vector<std::uint8_t>& activity) {
  const Sample n = std::min<Sample>(n_, static_cast<Sample>(activity.size()));
  Sample t = 0;
  while (t < n) {
    if (!activity[static_cast<std::size_t>(t)]) { ++t; continue; }
    Sample e = t;
    while (e < n && activity[static_cast<std::size_t>(e)]) ++e;
    add(radio_id, t, e);
    t = e;
  }
}

ActivityTrace TraceBuilder::build() const {
  std::vector<RadioActivity> radios;
  radios.reserve(pending_.size());
  for (std::size_t k = 0; k < pending_.size(); ++k)
    radios.push_back({static_cast<int>(k) + 1, merge_sorted(pending_[k])});
  return ActivityTrace(ts_, n_, std::move(radios));
}

EventSeries derive_events(const ActivityTrace& trace, int radio_id, EventKind kind) {
  const RadioActivity& r = trace.radio(radio_id);
  EventSeries out{kind, radio_id, {}};
  out.event_samples.reserve(r.intervals.size());
  for (const Interval& iv : r.intervals)
    out.event_samples.push_back(kind == EventKind::start ? iv.start : iv.end - 1);
  return out;
}

std::vector<Interval> intervals_from_events(const EventSeries& starts, const EventSeries& ends) {
  if (starts.kind != EventKind::start || ends.kind != EventKind::end)
    throw std::invalid_argument("expected a start series and an end series");
  if (starts.event_samples.size() != ends.event_samples.size())
    throw std::invalid_argument("start and end series differ in length");
  std::vector<Interval> out;
  out.reserve(starts.event_samples.size());
  for (std::size_t k = 0; k < starts.event_samples.size(); ++k) {
    const Sample s = starts.event_samples[k];
    const Sample e = ends.event_samples[k];
    if (e < s) throw std::invalid_argument("end event precedes its start event");
    out.push_back({s, e + 1});
  }
  return out;
}

ActivityTrace resample(const ActivityTrace& trace, double new_period_s) {
  const double ratio = new_period_s / trace.sample_period_s();
  const double k_real = std::round(ratio);
  if (k_real < 1.0 || std::abs(ratio - k_real) > 1e-9 * ratio)
    throw std::invalid_argument("new period must be an integer multiple of the sample period");
  const auto k = static_cast<Sample>(k_real);
  const Sample n_out = (trace.num_samples() + k - 1) / k;
  TraceBuilder b(trace.sample_period_s() * static_cast<double>(k), n_out, trace.num_radios());
  for (const RadioActivity& r : trace.radios())
    for (const Interval& iv : r.intervals) b.add(r.radio_id, iv.start / k, (iv.end - 1) / k + 1);
  return b.build();
}

ActivityTrace slice(const ActivityTrace& trace, Sample first, Sample count) {
  if (first < 0 || count <= 0 || first + count > trace.num_samples())
    throw std::invalid_argument("slice outside trace");
  TraceBuilder b(trace.sample_period_s(), count, trace.num_radios());
  for (const RadioActivity& r : trace.radios()) {
    auto it = std::upper_bound(r.intervals.begin(), r.intervals.end(), first,
                               [](Sample v, const Interval& iv) { return v < iv.end; });
    for (; it != r.intervals.end() && it->start < first + count; ++it)
      b.add(r.radio_id, std::max(it->start, first) - first,
            std::min(it->end, first + count) - first);
  }
  return b.build();
}

ActivityTrace permute_radios(const ActivityTrace& trace, const std::vector<int>& perm) {
  const int m = trace.num_radios();
  if (static_cast<int>(perm.size()) != m) throw std::invalid_argument("permutation size mismatch");
  std::vector<RadioActivity> out(static_cast<std::size_t>(m));
  std::vector<bool> seen(static_cast<std::size_t>(m), false);
  for (int k = 1; k <= m; ++k) {
    const int dst = perm[static_cast<std::size_t>(k - 1)];
    if (dst < 1 || dst > m || seen[static_cast<std::size_t>(dst - 1)])
      throw std::invalid_argument("not a permutation of 1..M");
    seen[static_cast<std::size_t>(dst - 1)] = true;
    out[static_cast<std::size_t>(dst - 1)] = {dst, trace.radio(k).intervals};
  }
  return ActivityTrace(trace.sample_period_s(), trace.num_samples(), std::move(out));
}

LinkMatrix::LinkMatrix(int m) : m_(m) {
  if (m < 0) throw std::invalid_argument("negative link matrix size");
  entries_.assign(static_cast<std::size_t>(m) * static_cast<std::size_t>(m), 0);
}

bool LinkMatrix::operator()(int i, int j) const {
  if (i < 1 || j < 1 || i > m_ || j > m_) throw std::out_of_range("link index out of range");
  return entries_[static_cast<std::size_t>((i - 1) * m_ + (j - 1))] != 0;
}

void LinkMatrix::set(int i, int j, bool value) {
  if (i < 1 || j < 1 || i > m_ || j > m_) throw std::out_of_range("link index out of range");
  if (i == j) {
    if (value) throw std::invalid_argument("self links are not allowed");
    return;
  }
  entries_[static_cast<std::size_t>((i - 1) * m_ + (j - 1))] = value ? 1 : 0;
}

int LinkMatrix::count() const {
  return static_cast<int>(std::count(entries_.begin(), entries_.end(), std::uint8_t{1}));
}

std::vector<std::pair<int, int>> LinkMatrix::links() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 1; i <= m_; ++i)
    for (int j = 1; j <= m_; ++j)
      if ((*this)(i, j)) out.emplace_back(i, j);
  return out;
}

LinkMatrix LinkMatrix::symmetrized() const {
  LinkMatrix s(m_);
  for (auto [i, j] : links()) {
    s.set(i, j);
    s.set(j, i);
  }
  return s;
}

TraceFormatError::TraceFormatError(Kind kind, const std::string& what)
    : std::runtime_error(what), kind_(kind) {}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw std::runtime_error("cannot format number");
  return std::string(buf, ptr);
}

std::string format_trace(const ActivityTrace& trace) {
  std::ostringstream os;
  os << "#ts " << format_double(trace.sample_period_s()) << '\n';
  os << "#n " << trace.num_samples() << '\n';
  os << "#m " << trace.num_radios() << '\n';
  for (const RadioActivity& r : trace.radios())
    for (const Interval& iv : r.intervals)
      os << r.radio_id << ',' << iv.start << ',' << iv.end << '\n';
  return os.str();
}

ActivityTrace parse_trace(const std::string& text) {
  using K = TraceFormatError::Kind;
  double ts = 0.0;
  Sample n = -1;
  int m = -1;
  bool have_ts = false;
  std::vector<std::vector<Interval>> rows;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool body_started = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string key, value, extra;
      hs >> key >> value;
      if (key != "ts" && key != "n" && key != "m") continue;  // free-form comment
      if (body_started || value.empty() || (hs >> extra))
        throw TraceFormatError(K::malformed_header, where + "malformed header '" + line + "'");
      bool ok = false;
      if (key == "ts") {
        ok = !have_ts && parse_number(value, ts) && ts > 0.0 && std::isfinite(ts);
        have_ts = true;
      } else if (key == "n") {
        ok = n < 0 && parse_number(value, n) && n > 0;
      } else {
        ok = m < 0 && parse_number(value, m) && m > 0;
        if (ok) rows.resize(static_cast<std::size_t>(m));
      }
      if (!ok) throw TraceFormatError(K::malformed_header, where + "malformed header '" + line + "'");
      continue;
    }
    if (!have_ts || n < 0 || m < 0)
      throw TraceFormatError(K::malformed_header, where + "interval row before #ts/#n/#m header");
    body_started = true;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    int id = 0;
    Sample s = 0, e = 0;
    if (c2 == std::string::npos || !parse_number(trim(line.substr(0, c1)), id) ||
        !parse_number(trim(line.substr(c1 + 1, c2 - c1 - 1)), s) ||
        !parse_number(trim(line.substr(c2 + 1)), e))
      throw TraceFormatError(K::malformed_row, where + "expected '<radio>,<start>,<end>'");
    if (id < 1 || id > m)
      throw TraceFormatError(K::out_of_range, where + "radio id " + std::to_string(id) + " outside 1.." +
                                                  std::to_string(m));
    if (s >= e)
      throw TraceFormatError(K::overlapping_interval,
                             where + "inverted or empty interval " + std::to_string(s) + "," + std::to_string(e));
    if (s < 0 || e > n)
      throw TraceFormatError(K::out_of_range, where + "interval outside [0," + std::to_string(n) + ")");
    rows[static_cast<std::size_t>(id - 1)].push_back({s, e});
  }
  if (!have_ts || n < 0 || m < 0)
    throw TraceFormatError(K::malformed_header, "missing #ts, #n or #m header");
  TraceBuilder b(ts, n, m);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    auto& v = rows[k];
    std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& c) { return a.start < c.start; });
    for (std::size_t q = 1; q < v.size(); ++q)
      if (v[q].start < v[q - 1].end)
        throw TraceFormatError(K::overlapping_interval,
                               "radio " + std::to_string(k + 1) + ": overlapping intervals at sample " +
                                   std::to_string(v[q].start));
    for (const Interval& iv : v) b.add(static_cast<int>(k) + 1, iv.start, iv.end);
  }
  return b.build();
}

ActivityTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TraceFormatError(TraceFormatError::Kind::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_trace(ss.str());
}

void save_trace(const ActivityTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw TraceFormatError(TraceFormatError::Kind::io, "cannot write " + path.string());
  out << format_trace(trace);
  if (!out) throw TraceFormatError(TraceFormatError::Kind::io, "write failed for " + path.string());
}

LinkMatrix load_links(const std::filesystem::path& path, int m) {
  std::ifstream in(path);
  if (!in) throw TraceFormatError(TraceFormatError::Kind::io, "cannot open " + path.string());
  std::vector<std::pair<int, int>> pairs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto c = line.find(',');
    int i = 0, j = 0;
    if (c == std::string::npos || !parse_number(trim(line.substr(0, c)), i) ||
        !parse_number(trim(line.substr(c + 1)), j) || i < 1 || j < 1 || i == j)
      throw TraceFormatError(TraceFormatError::Kind::malformed_row,
                             path.string() + ":" + std::to_string(lineno) + ": expected '<i>,<j>'");
    pairs.emplace_back(i, j);
  }
  int needed = 0;
  for (auto [i, j] : pairs) needed = std::max({needed, i, j});
  if (m == 0) m = needed;
  if (needed > m)
    throw TraceFormatError(TraceFormatError::Kind::out_of_range,
                           path.string() + ": link endpoint exceeds radio count " + std::to_string(m));
  LinkMatrix L(m);
  for (auto [i, j] : pairs) L.set(i, j);
  return L;
}

void save_links(const LinkMatrix& links, const std::filesystem::path& path, const std::string& comment) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw TraceFormatError(TraceFormatError::Kind::io, "cannot write " + path.string());
  if (!comment.empty()) out << "# " << comment << '\n';
  for (auto [i, j] : links.links()) out << i << ',' << j << '\n';
}

std::filesystem::path links_path_for(const std::filesystem::path& trace_path) {
  std::filesystem::path p = trace_path;
  p.replace_extension(".links");
  return p;
}

}  // namespace topolearn
