#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace gvb {

/// Virtual simulation time in whole seconds.
using Seconds = std::int64_t;

enum class ErrorCode {
  UnknownSubscriber,
  SelfCall,
  CallerBusy,
  NotWaiting,
  NoSuchSession,
  IllegalTransition,
  InvalidPolicy,
  InvalidArgument,
  ZeroWeights,
  InvalidWindow,
  EmptyBundle,
  EmptySeed,
  NoPermit,
  DurationExceeded,
  ExternalTimeout,
  ParseError,
  UnknownDirective,
  BadArgument,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownSubscriber: return "UnknownSubscriber";
    case ErrorCode::SelfCall: return "SelfCall";
    case ErrorCode::CallerBusy: return "CallerBusy";
    case ErrorCode::NotWaiting: return "NotWaiting";
    case ErrorCode::NoSuchSession: return "NoSuchSession";
    case ErrorCode::IllegalTransition: return "IllegalTransition";
    case ErrorCode::InvalidPolicy: return "InvalidPolicy";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroWeights: return "ZeroWeights";
    case ErrorCode::InvalidWindow: return "InvalidWindow";
    case ErrorCode::EmptyBundle: return "EmptyBundle";
    case ErrorCode::EmptySeed: return "EmptySeed";
    case ErrorCode::NoPermit: return "NoPermit";
    case ErrorCode::DurationExceeded: return "DurationExceeded";
    case ErrorCode::ExternalTimeout: return "ExternalTimeout";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownDirective: return "UnknownDirective";
    case ErrorCode::BadArgument: return "BadArgument";
  }
  return "Unknown";
}

/// Base exception for every module. `code()` identifies the failure kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Short ASCII subscriber token such as "A" or "C".
class SubscriberId {
 public:
  SubscriberId() = default;
  explicit SubscriberId(std::string value) : value_(std::move(value)) {
    if (value_.empty()) throw Error(ErrorCode::InvalidArgument, "empty subscriber id");
    for (unsigned char ch : value_) {
      if (ch > 0x7f || std::isspace(ch) || !std::isprint(ch)) {
        throw Error(ErrorCode::InvalidArgument, "subscriber id must be printable ASCII without spaces");
      }
    }
  }

  const std::string& str() const noexcept { return value_; }

  friend auto operator<=>(const SubscriberId&, const SubscriberId&) = default;

 private:
  std::string value_;
};

namespace text {

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::string trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline std::size_t word_count(std::string_view s) { return split_whitespace(s).size(); }

inline bool is_word_char(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_' || u >= 0x80;
}

/// Case-insensitive phrase search that only accepts matches bounded by
/// non-word characters on both sides.
inline bool contains_phrase(std::string_view haystack, std::string_view phrase) {
  if (phrase.empty()) return false;
  const std::string h = to_lower(haystack);
  const std::string p = to_lower(phrase);
  std::size_t pos = h.find(p);
  while (pos != std::string::npos) {
    bool left_ok = pos == 0 || !is_word_char(h[pos - 1]);
    std::size_t end = pos + p.size();
    bool right_ok = end == h.size() || !is_word_char(h[end]);
    if (left_ok && right_ok) return true;
    pos = h.find(p, pos + 1);
  }
  return false;
}

/// Shortest round-trip decimal representation ("0.9", "30", "0.958333...").
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Fixed six-decimal representation used for scores in traces.
inline std::string format_fixed(double v, int precision = 6) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, precision);
  return std::string(buf, res.ptr);
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
  Int value{};
  if (s.empty()) return std::nullopt;
  auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

inline std::optional<double> parse_double(std::string_view s) {
  double value{};
  if (s.empty()) return std::nullopt;
  auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

}  // namespace text
}  // namespace gvb
