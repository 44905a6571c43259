#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "gvb/common.hpp"

namespace gvb {

using TraceDetails = std::vector<std::pair<std::string, std::string>>;

struct TraceRecord {
  Seconds at = 0;
  std::uint64_t seq = 0;
  std::string component;
  std::string event;
  TraceDetails details;

  /// Value for `key`, or empty when absent.
  std::string get(std::string_view key) const {
    for (const auto& [k, v] : details) {
      if (k == key) return v;
    }
    return {};
  }

  bool has(std::string_view key) const {
    for (const auto& kv : details) {
      if (kv.first == key) return true;
    }
    return false;
  }
};

/// Values that would not survive whitespace tokenization are double-quoted
/// with backslash escapes.
inline std::string quote_trace_value(std::string_view v) {
  bool plain = !v.empty();
  for (unsigned char c : v) {
    if (std::isspace(c) || c == '"' || c == '\\' || c == '=' || c == '#' || c < 0x20) {
      plain = false;
      break;
    }
  }
  if (plain) return std::string(v);
  std::string out = "\"";
  for (char c : v) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

/// `t=<sec> seq=<n> <COMPONENT> <EVENT> k1=v1 k2=v2 ...`
inline std::string format_trace_line(const TraceRecord& r) {
  std::string line = "t=" + std::to_string(r.at) + " seq=" + std::to_string(r.seq) + " " + r.component + " " + r.event;
  for (const auto& [k, v] : r.details) {
    line += ' ';
    line += k;
    line += '=';
    line += quote_trace_value(v);
  }
  return line;
}

inline void write_trace(std::ostream& os, const std::vector<TraceRecord>& records) {
  for (const auto& r : records) os << format_trace_line(r) << '\n';
}

/// Append-only trace with a global sequence counter.
class TraceLog {
 public:
  const TraceRecord& emit(Seconds at, std::string component, std::string event, TraceDetails details = {}) {
    records_.push_back(TraceRecord{at, next_seq_++, std::move(component), std::move(event), std::move(details)});
    return records_.back();
  }

  const std::vector<TraceRecord>& records() const noexcept { return records_; }
  std::vector<TraceRecord> take() { return std::move(records_); }

 private:
  std::vector<TraceRecord> records_;
  std::uint64_t next_seq_ = 1;
};

}  // namespace gvb
