#include "accel/trace.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "accel/types.hpp"

namespace accel {

std::string format_double(double v) {
  if (!std::isfinite(v)) return "NA";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_long(long v) {
  if (v < 0) return "NA";
  char buf[24];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_trace_double(const std::string& s) {
  if (s == "NA" || s.empty()) return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw contract_error("malformed number in trace: " + s);
  return v;
}

static long parse_trace_long(const std::string& s) {
  if (s == "NA" || s.empty()) return -1;
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw contract_error("malformed integer in trace: " + s);
  return v;
}

std::string trace_to_csv(const Trace& trace) {
  std::string out;
  for (const auto& c : trace.comments) {
    out += "# ";
    out += c;
    out += '\n';
  }
  out += kTraceHeader;
  out += '\n';
  for (const auto& r : trace.rows) {
    out += format_long(r.iter);
    out += ',';
    out += format_double(r.gap);
    out += ',';
    out += format_double(r.rel_gap);
    out += ',';
    out += format_double(r.wf_calls);
    out += ',';
    out += format_double(r.wg_calls);
    out += ',';
    out += format_long(r.inner_cum);
    out += ',';
    out += format_double(r.wall_ms);
    out += ',';
    out += format_double(r.eta);
    out += ',';
    out += format_double(r.sigma_res);
    out += ',';
    out += format_double(r.psi_gap);
    out += '\n';
  }
  return out;
}

static std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

Trace trace_from_csv(const std::string& text) {
  Trace trace;
  std::istringstream in(text);
  std::string line;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::size_t start = 1;
      if (start < line.size() && line[start] == ' ') ++start;
      trace.comments.push_back(line.substr(start));
      continue;
    }
    if (!saw_header) {
      if (line != kTraceHeader) throw contract_error("unexpected trace header: " + line);
      saw_header = true;
      continue;
    }
    const auto fields = split_csv(line);
    if (fields.size() != 10) throw contract_error("trace row has wrong arity: " + line);
    TraceRecord r;
    r.iter = parse_trace_long(fields[0]);
    r.gap = parse_trace_double(fields[1]);
    r.rel_gap = parse_trace_double(fields[2]);
    r.wf_calls = parse_trace_double(fields[3]);
    r.wg_calls = parse_trace_double(fields[4]);
    r.inner_cum = parse_trace_long(fields[5]);
    r.wall_ms = parse_trace_double(fields[6]);
    r.eta = parse_trace_double(fields[7]);
    r.sigma_res = parse_trace_double(fields[8]);
    r.psi_gap = parse_trace_double(fields[9]);
    trace.rows.push_back(r);
  }
  if (!saw_header) throw contract_error("trace has no header line");
  return trace;
}

std::optional<std::string> trace_comment_value(const Trace& trace, const std::string& key) {
  const std::string prefix = key + "=";
  for (const auto& c : trace.comments)
    if (c.rfind(prefix, 0) == 0) return c.substr(prefix.size());
  return std::nullopt;
}

}  // namespace accel
