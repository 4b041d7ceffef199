#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace accel {

// One CSV row of a benchmark run. Doubles default to NaN and longs to -1,
// both of which serialize as "NA".
struct TraceRecord {
  long iter = 0;
  double gap = std::numeric_limits<double>::quiet_NaN();
  double rel_gap = std::numeric_limits<double>::quiet_NaN();
  double wf_calls = std::numeric_limits<double>::quiet_NaN();
  double wg_calls = std::numeric_limits<double>::quiet_NaN();
  long inner_cum = -1;
  double wall_ms = std::numeric_limits<double>::quiet_NaN();
  double eta = std::numeric_limits<double>::quiet_NaN();
  double sigma_res = std::numeric_limits<double>::quiet_NaN();
  double psi_gap = std::numeric_limits<double>::quiet_NaN();
};

struct Trace {
  std::vector<std::string> comments;  // emitted before the header as "# <text>" lines
  std::vector<TraceRecord> rows;
};

inline constexpr const char* kTraceHeader =
    "iter,gap,rel_gap,wf_calls,wg_calls,inner_cum,wall_ms,eta,sigma_res,psi_gap";

// Shortest decimal that parses back to the same bits; locale-free. Non-finite
// values become "NA" so reruns produce byte-identical files.
std::string format_double(double v);
std::string format_long(long v);
double parse_trace_double(const std::string& s);

std::string trace_to_csv(const Trace& trace);
Trace trace_from_csv(const std::string& text);

// First comment of the form "<key>=<value>", if any.
std::optional<std::string> trace_comment_value(const Trace& trace, const std::string& key);

}  // namespace accel
