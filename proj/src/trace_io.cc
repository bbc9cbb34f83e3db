#include "edgempc/trace_io.h"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string_view>

namespace edgempc {

const std::vector<std::string>& TraceColumns() {
  static const std::vector<std::string> columns = {
      "k",        "t",         "ttre_ms",   "exec_ms",   "tter_ms",
      "rtt_ms",   "px",        "py",        "pz",        "vx",
      "vy",       "vz",        "roll",      "pitch",     "thrust_cmd",
      "roll_cmd", "pitch_cmd", "ref_px",    "ref_py",    "ref_pz",
      "ref_vx",   "ref_vy",    "ref_vz",    "ref_roll",  "ref_pitch",
      "error_m",  "cost",      "iterations", "degraded", "descent_ok",
      "odometry_seq", "command_seq"};
  return columns;
}

namespace {

template <typename T>
void Put(std::string& line, T value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (!line.empty()) line.push_back(',');
  line.append(buf, end);
}

void PutState(std::string& line, const UavState& s) {
  for (int i = 0; i < 3; ++i) Put(line, s.position(i));
  for (int i = 0; i < 3; ++i) Put(line, s.velocity(i));
  Put(line, s.roll);
  Put(line, s.pitch);
}

class FieldReader {
 public:
  FieldReader(std::string_view line, int line_no)
      : rest_(line), line_no_(line_no) {}

  template <typename T>
  T Next() {
    const auto comma = rest_.find(',');
    const std::string_view field = rest_.substr(0, comma);
    rest_ = comma == std::string_view::npos ? std::string_view()
                                            : rest_.substr(comma + 1);
    ++column_;
    T value{};
    auto [ptr, ec] =
        std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      throw std::runtime_error("trace.csv line " + std::to_string(line_no_) +
                               ": bad value in column " +
                               std::to_string(column_));
    }
    return value;
  }

  UavState State() {
    UavState s;
    for (int i = 0; i < 3; ++i) s.position(i) = Next<double>();
    for (int i = 0; i < 3; ++i) s.velocity(i) = Next<double>();
    s.roll = Next<double>();
    s.pitch = Next<double>();
    return s;
  }

  int columns_read() const { return column_; }
  bool done() const { return rest_.empty(); }

 private:
  std::string_view rest_;
  int line_no_;
  int column_ = 0;
};

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

void WriteTraceCsv(std::ostream& out, const std::vector<CycleRecord>& records) {
  std::string header;
  for (const auto& c : TraceColumns()) {
    if (!header.empty()) header.push_back(',');
    header += c;
  }
  out << header << '\n';
  for (const auto& r : records) {
    std::string line;
    Put(line, r.k);
    Put(line, r.t);
    Put(line, r.ttre);
    Put(line, r.exec);
    Put(line, r.tter);
    Put(line, r.rtt);
    PutState(line, r.state_at_send);
    Put(line, r.applied_input.thrust);
    Put(line, r.applied_input.roll_ref);
    Put(line, r.applied_input.pitch_ref);
    PutState(line, r.reference.state);
    Put(line, r.tracking_error);
    Put(line, r.cost);
    Put(line, r.iterations);
    Put(line, static_cast<int>(r.degraded));
    Put(line, static_cast<int>(r.descent_ok));
    Put(line, r.odometry_seq);
    Put(line, r.command_seq);
    out << line << '\n';
  }
}

std::vector<CycleRecord> ReadTraceCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("trace.csv is empty");
  }
  std::string expected;
  for (const auto& c : TraceColumns()) {
    if (!expected.empty()) expected.push_back(',');
    expected += c;
  }
  if (line != expected) throw std::runtime_error("trace.csv line 1: unexpected header");

  std::vector<CycleRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    FieldReader f(line, line_no);
    CycleRecord r;
    r.k = f.Next<std::int64_t>();
    r.t = f.Next<double>();
    r.ttre = f.Next<double>();
    r.exec = f.Next<double>();
    r.tter = f.Next<double>();
    r.rtt = f.Next<double>();
    r.state_at_send = f.State();
    r.applied_input.thrust = f.Next<double>();
    r.applied_input.roll_ref = f.Next<double>();
    r.applied_input.pitch_ref = f.Next<double>();
    r.reference.state = f.State();
    r.tracking_error = f.Next<double>();
    r.cost = f.Next<double>();
    r.iterations = f.Next<int>();
    r.degraded = f.Next<int>() != 0;
    r.descent_ok = f.Next<int>() != 0;
    r.odometry_seq = f.Next<std::uint64_t>();
    r.command_seq = f.Next<std::uint64_t>();
    if (!f.done() ||
        f.columns_read() != static_cast<int>(TraceColumns().size())) {
      throw std::runtime_error("trace.csv line " + std::to_string(line_no) +
                               ": wrong column count");
    }
    records.push_back(r);
  }
  return records;
}

void WriteTrajectoryDat(std::ostream& out,
                        const std::vector<CycleRecord>& records) {
  out << "# t x y z x_ref y_ref z_ref\n";
  for (const auto& r : records) {
    const Vec3& p = r.state_at_send.position;
    const Vec3& q = r.reference.state.position;
    out << Fixed(r.t, 3) << ' ' << Fixed(p.x(), 6) << ' ' << Fixed(p.y(), 6)
        << ' ' << Fixed(p.z(), 6) << ' ' << Fixed(q.x(), 6) << ' '
        << Fixed(q.y(), 6) << ' ' << Fixed(q.z(), 6) << '\n';
  }
}

void WriteDelaysDat(std::ostream& out, const std::vector<CycleRecord>& records) {
  out << "# k t ttre exec tter rtt\n";
  for (const auto& r : records) {
    out << r.k << ' ' << Fixed(r.t, 3) << ' ' << Fixed(r.ttre, 6) << ' '
        << Fixed(r.exec, 6) << ' ' << Fixed(r.tter, 6) << ' '
        << Fixed(r.rtt, 6) << '\n';
  }
}

void WriteErrorDat(std::ostream& out, const std::vector<CycleRecord>& records) {
  out << "# t euclidean_error\n";
  for (const auto& r : records) {
    out << Fixed(r.t, 3) << ' ' << Fixed(r.tracking_error, 6) << '\n';
  }
}

std::string FormatSummary(const EpisodeSummary& s) {
  std::ostringstream out;
  auto row = [&out](const char* label, const Stat& st) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "%-16s mean %9.3f ms  std %8.3f  max %9.3f\n", label,
                  st.mean, st.std, st.max);
    out << buf;
  };
  out << "scenario " << s.scenario << "  seed " << s.seed << "  duration "
      << Fixed(s.duration, 3) << " s  cycles " << s.cycles << '\n';
  row("robot->edge", s.ttre);
  row("execution", s.exec);
  row("edge->robot", s.tter);
  row("round trip", s.rtt);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "tracking error   mean %9.4f m   max %9.4f m  (%zu cycles after "
                "transient)\n",
                s.tracking.mean, s.tracking.max, s.tracked_cycles);
  out << buf;
  out << "degraded cycles  " << s.degraded_cycles << '\n';
  out << "solver descent   " << (s.descent_ok ? "ok" : "VIOLATED") << '\n';
  out << "input bounds     " << (s.inputs_feasible ? "ok" : "VIOLATED") << '\n';
  return out.str();
}

}  // namespace edgempc
