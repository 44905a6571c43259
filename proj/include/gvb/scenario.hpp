#pragma once

// Line-oriented scenario files.
//
//   # comment
//   subscriber <id> [home=(x,y)]... [usual_hours=<a>-<b>[,<c>-<d>]] [resting_hr=<int>] [usual_moving=<0|1>]
//   policy <callee> t=<s> G=<s> N=<n> [approve=<id>[,<id>...]]
//   weights <wl>,<wt>,<wh>,<wa>
//   thresholds <connect>,<voice>,<text>
//   keywords "<phrase>[,<phrase>...]"
//   lexicon "<term>[,<term>...]"
//   at <sec> call <caller> <callee> [loc=(x,y)] [loctype=<enum>] [hour=<0-23>] [hr=<int>] [speed=<m/s>]
//   at <sec> burst <caller> (transcript="<text>" | silence) [keywords=..] [image=..] [video=..]
//                            [gesture=..] [noise=..] [duration=<s>]
//   at <sec> media <caller> (image|video|gesture) "<text>"
//   at <sec> hangup <id> | answer <id> | dismiss <callee>
//
// Any directive may carry an `at <sec>` prefix. Unprefixed lines take the
// time of the closest preceding `at` line (0 before the first one).

#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "gvb/approval_policy.hpp"
#include "gvb/common.hpp"
#include "gvb/incapacity_detector.hpp"
#include "gvb/priority_engine.hpp"

namespace gvb {

/// Scenario syntax or argument failure; `code()` is ParseError,
/// UnknownDirective or BadArgument.
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, int line, const std::string& message)
      : Error(code, "line " + std::to_string(line) + ": " + message), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

struct RegisterSubscriber {
  SubscriberId id;
  BaselineProfile profile;
};
struct SetPolicy {
  BurstPolicy policy;
};
struct SetWeights {
  FactorWeights weights;
};
struct SetThresholds {
  TierThresholds thresholds;
};
struct SetKeywords {
  std::set<std::string> keywords;
};
struct SetLexicon {
  std::set<std::string> lexicon;
};
struct PlaceCall {
  SubscriberId caller;
  SubscriberId callee;
  CallerContext context;
  bool has_location_type = false;
};
struct HangUp {
  SubscriberId who;
};
struct Answer {
  SubscriberId callee;
};
struct BurstAttempt {
  SubscriberId caller;
  std::optional<std::string> transcript;  // absent for `silence`
  std::optional<std::string> keywords;
  std::optional<std::string> image;
  std::optional<std::string> video;
  std::optional<std::string> gesture;
  std::optional<std::string> noise;
  std::optional<Seconds> duration;
};
struct MediaDescription {
  SubscriberId caller;
  Modality modality = Modality::ImageDescription;
  std::string description;
};
struct Dismiss {
  SubscriberId callee;
};

using SimEventArgs = std::variant<RegisterSubscriber, SetPolicy, SetWeights, SetThresholds, SetKeywords, SetLexicon,
                                  PlaceCall, HangUp, Answer, BurstAttempt, MediaDescription, Dismiss>;

struct SimEvent {
  Seconds at = 0;
  int line = 0;
  SimEventArgs args;
};

namespace detail {

/// Whitespace tokenizer; double quotes group spaces, `\"` and `\\` escape,
/// `#` outside quotes starts a comment.
inline std::vector<std::string> tokenize_scenario_line(std::string_view line, int line_no) {
  std::vector<std::string> tokens;
  std::string cur;
  bool in_token = false, in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_quotes) {
      if (c == '\\' && i + 1 < line.size() && (line[i + 1] == '"' || line[i + 1] == '\\')) {
        cur += line[++i];
      } else if (c == '"') {
        in_quotes = false;
      } else {
        cur += c;
      }
      continue;
    }
    if (c == '#') break;
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (in_token) tokens.push_back(std::move(cur));
      cur.clear();
      in_token = false;
      continue;
    }
    in_token = true;
    if (c == '"') {
      in_quotes = true;
    } else {
      cur += c;
    }
  }
  if (in_quotes) throw ParseError(ErrorCode::ParseError, line_no, "unterminated quote");
  if (in_token) tokens.push_back(std::move(cur));
  return tokens;
}

class LineParser {
 public:
  LineParser(int line_no, std::vector<std::string> tokens) : line_(line_no), tokens_(std::move(tokens)) {}

  [[noreturn]] void bad(const std::string& msg) const { throw ParseError(ErrorCode::BadArgument, line_, msg); }
  [[noreturn]] void malformed(const std::string& msg) const { throw ParseError(ErrorCode::ParseError, line_, msg); }

  const std::string& positional(std::size_t i, const char* what) const {
    if (i >= tokens_.size()) malformed(std::string("missing ") + what);
    return tokens_[i];
  }

  SubscriberId subscriber(std::size_t i) const {
    const auto& tok = positional(i, "subscriber id");
    if (tok.find('=') != std::string::npos) bad("expected subscriber id, got '" + tok + "'");
    try {
      return SubscriberId(tok);
    } catch (const Error& e) {
      bad(e.what());
    }
  }

  /// key=value options from position `first` on. Keys outside `allowed` are
  /// rejected; `repeatable` keys may occur more than once.
  std::multimap<std::string, std::string> options(std::size_t first, const std::set<std::string>& allowed,
                                                  const std::set<std::string>& flags = {},
                                                  const std::set<std::string>& repeatable = {}) const {
    std::multimap<std::string, std::string> out;
    for (std::size_t i = first; i < tokens_.size(); ++i) {
      const std::string& tok = tokens_[i];
      auto eq = tok.find('=');
      std::string key = eq == std::string::npos ? tok : tok.substr(0, eq);
      if (eq == std::string::npos) {
        if (!flags.contains(key)) bad("unexpected token '" + tok + "'");
        out.emplace(key, "");
        continue;
      }
      if (!allowed.contains(key)) bad("unknown option '" + key + "'");
      if (out.contains(key) && !repeatable.contains(key)) bad("duplicate option '" + key + "'");
      out.emplace(key, tok.substr(eq + 1));
    }
    return out;
  }

  std::size_t size() const { return tokens_.size(); }

  double number(const std::string& s, const char* what) const {
    auto v = text::parse_double(s);
    if (!v || !std::isfinite(*v)) bad(std::string("bad ") + what + " '" + s + "'");
    return *v;
  }

  long long integer(const std::string& s, const char* what) const {
    auto v = text::parse_int<long long>(s);
    if (!v) bad(std::string("bad ") + what + " '" + s + "'");
    return *v;
  }

  Point point(const std::string& s) const {
    if (s.size() < 5 || s.front() != '(' || s.back() != ')') bad("expected (x,y), got '" + s + "'");
    auto parts = text::split(std::string_view(s).substr(1, s.size() - 2), ',');
    if (parts.size() != 2) bad("expected (x,y), got '" + s + "'");
    return Point{number(text::trim(parts[0]), "x"), number(text::trim(parts[1]), "y")};
  }

  std::vector<double> number_list(const std::string& s, std::size_t n, const char* what) const {
    auto parts = text::split(s, ',');
    if (parts.size() != n) bad(std::string("expected ") + std::to_string(n) + " comma-separated " + what);
    std::vector<double> out;
    for (const auto& p : parts) out.push_back(number(text::trim(p), what));
    return out;
  }

  std::set<std::string> phrase_list(const std::string& s, const char* what) const {
    std::set<std::string> out;
    for (const auto& p : text::split(s, ',')) {
      auto t = text::to_lower(text::trim(p));
      if (!t.empty()) out.insert(t);
    }
    if (out.empty()) bad(std::string("empty ") + what + " list");
    return out;
  }

  int line() const { return line_; }

 private:
  int line_;
  std::vector<std::string> tokens_;
};

inline int parse_hour(const LineParser& p, const std::string& s) {
  long long h = p.integer(text::trim(s), "hour");
  if (h < 0 || h > 23) p.bad("hour out of range 0-23: " + s);
  return static_cast<int>(h);
}

inline SimEventArgs parse_directive(const LineParser& p, std::size_t at) {
  const std::string& name = p.positional(at, "directive");

  if (name == "subscriber") {
    RegisterSubscriber ev{p.subscriber(at + 1), {}};
    ev.profile.usual_hours = all_hours();
    auto opts = p.options(at + 2, {"home", "usual_hours", "resting_hr", "usual_moving"}, {}, {"home"});
    for (const auto& [k, v] : opts) {
      if (k == "home") {
        ev.profile.usual_locations.insert(p.point(v));
      } else if (k == "usual_hours") {
        ev.profile.usual_hours.clear();
        for (const auto& range : text::split(v, ',')) {
          auto bounds = text::split(range, '-');
          if (bounds.size() == 1) {
            ev.profile.usual_hours.insert(parse_hour(p, bounds[0]));
          } else if (bounds.size() == 2) {
            auto h = hour_range(parse_hour(p, bounds[0]), parse_hour(p, bounds[1]));
            ev.profile.usual_hours.insert(h.begin(), h.end());
          } else {
            p.bad("bad usual_hours range '" + range + "'");
          }
        }
      } else if (k == "resting_hr") {
        double hr = p.number(v, "resting_hr");
        if (hr < 30 || hr > 120) p.bad("resting_hr must be in [30, 120]");
        ev.profile.resting_heart_rate = hr;
      } else if (k == "usual_moving") {
        if (v != "0" && v != "1") p.bad("usual_moving must be 0 or 1");
        ev.profile.usual_moving = v == "1";
      }
    }
    return ev;
  }

  if (name == "policy") {
    SetPolicy ev;
    ev.policy.callee = p.subscriber(at + 1);
    auto opts = p.options(at + 2, {"t", "G", "N", "approve"});
    for (const char* required : {"t", "G", "N"}) {
      if (!opts.contains(required)) p.malformed(std::string("policy requires ") + required + "=");
    }
    ev.policy.burst_seconds = p.integer(opts.find("t")->second, "t");
    ev.policy.gap_seconds = p.integer(opts.find("G")->second, "G");
    ev.policy.max_bursts = static_cast<int>(p.integer(opts.find("N")->second, "N"));
    if (auto it = opts.find("approve"); it != opts.end()) {
      for (const auto& id : text::split(it->second, ',')) {
        try {
          ev.policy.approved_callers.insert(SubscriberId(text::trim(id)));
        } catch (const Error& e) {
          p.bad(e.what());
        }
      }
    }
    try {
      validate(ev.policy);
    } catch (const Error& e) {
      p.bad(e.what());
    }
    return ev;
  }

  if (name == "weights") {
    auto values = p.number_list(p.positional(at + 1, "weights"), 4, "weights");
    if (p.size() > at + 2) p.bad("unexpected trailing tokens");
    SetWeights ev{{values[0], values[1], values[2], values[3]}};
    try {
      validate_weights(ev.weights);
    } catch (const Error& e) {
      p.bad(e.what());
    }
    return ev;
  }

  if (name == "thresholds") {
    auto values = p.number_list(p.positional(at + 1, "thresholds"), 3, "thresholds");
    if (p.size() > at + 2) p.bad("unexpected trailing tokens");
    SetThresholds ev{{values[0], values[1], values[2]}};
    try {
      validate(ev.thresholds);
    } catch (const Error& e) {
      p.bad(e.what());
    }
    return ev;
  }

  if (name == "keywords" || name == "lexicon") {
    auto list = p.phrase_list(p.positional(at + 1, name.c_str()), name.c_str());
    if (p.size() > at + 2) p.bad("unexpected trailing tokens");
    if (name == "keywords") return SetKeywords{std::move(list)};
    return SetLexicon{std::move(list)};
  }

  if (name == "call") {
    PlaceCall ev{p.subscriber(at + 1), p.subscriber(at + 2), {}};
    auto opts = p.options(at + 3, {"loc", "loctype", "hour", "hr", "speed"});
    for (const auto& [k, v] : opts) {
      if (k == "loc") {
        ev.context.location = p.point(v);
      } else if (k == "loctype") {
        auto t = parse_location_type(v);
        if (!t) p.bad("unknown location type '" + v + "'");
        ev.context.location_type = *t;
        ev.has_location_type = true;
      } else if (k == "hour") {
        ev.context.hour_of_day = parse_hour(p, v);
      } else if (k == "hr") {
        double hr = p.number(v, "hr");
        if (hr < 20 || hr > 250) p.bad("hr must be in [20, 250]");
        ev.context.heart_rate = hr;
      } else if (k == "speed") {
        double s = p.number(v, "speed");
        if (s < 0) p.bad("speed must be >= 0");
        ev.context.moving_speed = s;
      }
    }
    return ev;
  }

  if (name == "burst") {
    BurstAttempt ev;
    ev.caller = p.subscriber(at + 1);
    auto opts = p.options(at + 2, {"transcript", "keywords", "image", "video", "gesture", "noise", "duration"},
                          {"silence"});
    const bool silence = opts.contains("silence");
    const bool has_transcript = opts.contains("transcript");
    if (silence == has_transcript) p.malformed("burst needs exactly one of transcript=\"...\" or silence");
    for (const auto& [k, v] : opts) {
      if (k == "transcript") ev.transcript = v;
      else if (k == "keywords") ev.keywords = v;
      else if (k == "image") ev.image = v;
      else if (k == "video") ev.video = v;
      else if (k == "gesture") ev.gesture = v;
      else if (k == "noise") ev.noise = v;
      else if (k == "duration") {
        long long d = p.integer(v, "duration");
        if (d < 1) p.bad("duration must be >= 1");
        ev.duration = d;
      }
    }
    return ev;
  }

  if (name == "media") {
    MediaDescription ev;
    ev.caller = p.subscriber(at + 1);
    const std::string& kind = p.positional(at + 2, "media kind");
    if (kind == "image") ev.modality = Modality::ImageDescription;
    else if (kind == "video") ev.modality = Modality::VideoDescription;
    else if (kind == "gesture") ev.modality = Modality::Gesture;
    else p.bad("media kind must be image, video or gesture");
    ev.description = p.positional(at + 3, "media description");
    if (p.size() > at + 4) p.bad("unexpected trailing tokens");
    return ev;
  }

  if (name == "hangup" || name == "answer" || name == "dismiss") {
    SubscriberId id = p.subscriber(at + 1);
    if (p.size() > at + 2) p.bad("unexpected trailing tokens");
    if (name == "hangup") return HangUp{id};
    if (name == "answer") return Answer{id};
    return Dismiss{id};
  }

  throw ParseError(ErrorCode::UnknownDirective, p.line(), "unknown directive '" + name + "'");
}

}  // namespace detail

inline std::vector<SimEvent> parse_scenario(std::string_view input) {
  std::vector<SimEvent> events;
  Seconds current = 0;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= input.size()) {
    std::size_t nl = input.find('\n', pos);
    if (nl == std::string_view::npos) nl = input.size();
    std::string_view raw = input.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);

    auto tokens = detail::tokenize_scenario_line(raw, line_no);
    if (tokens.empty()) {
      if (nl == input.size()) break;
      continue;
    }
    detail::LineParser p(line_no, tokens);
    std::size_t first = 0;
    if (tokens[0] == "at") {
      const std::string& t = p.positional(1, "time after 'at'");
      auto v = text::parse_int<long long>(t);
      if (!v) p.bad("time must be a non-negative integer, got '" + t + "'");
      if (*v < 0) p.bad("negative time " + t);
      current = *v;
      first = 2;
    }
    events.push_back(SimEvent{current, line_no, detail::parse_directive(p, first)});
    if (nl == input.size()) break;
  }
  return events;
}

inline std::vector<SimEvent> parse_scenario(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace gvb
