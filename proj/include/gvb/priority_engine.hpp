#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "gvb/common.hpp"

// Contextual emergency scoring. Four anomaly factors (location, timing,
// health, activity) are each mapped to [0,1] against the caller's baseline,
// combined with a normalized weighted average, and partitioned into a
// priority tier by three thresholds.
//
// Missing sensor data always contributes 0.

namespace gvb {

enum class LocationType { Home, Office, Highway, Hospital, Bank, Isolated, Other };

inline const char* to_string(LocationType t) {
  switch (t) {
    case LocationType::Home: return "Home";
    case LocationType::Office: return "Office";
    case LocationType::Highway: return "Highway";
    case LocationType::Hospital: return "Hospital";
    case LocationType::Bank: return "Bank";
    case LocationType::Isolated: return "Isolated";
    case LocationType::Other: return "Other";
  }
  return "Other";
}

inline std::optional<LocationType> parse_location_type(std::string_view s) {
  const std::string lower = text::to_lower(s);
  constexpr std::array all = {LocationType::Home,     LocationType::Office,   LocationType::Highway,
                              LocationType::Hospital, LocationType::Bank,     LocationType::Isolated,
                              LocationType::Other};
  for (auto t : all) {
    if (text::to_lower(to_string(t)) == lower) return t;
  }
  return std::nullopt;
}

inline bool is_high_risk(LocationType t) {
  return t == LocationType::Highway || t == LocationType::Hospital || t == LocationType::Isolated;
}

/// Position in the flat scenario plane, kilometers.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
  friend auto operator<=>(const Point&, const Point&) = default;
};

inline double distance_km(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct CallerContext {
  std::optional<Point> location;
  LocationType location_type = LocationType::Other;
  std::optional<int> hour_of_day;
  std::optional<double> heart_rate;    // bpm
  std::optional<double> moving_speed;  // m/s
};

inline void validate(const CallerContext& ctx) {
  if (ctx.hour_of_day && (*ctx.hour_of_day < 0 || *ctx.hour_of_day > 23)) {
    throw Error(ErrorCode::InvalidArgument, "hour_of_day must be in 0..23");
  }
  if (ctx.heart_rate && (*ctx.heart_rate < 20 || *ctx.heart_rate > 250)) {
    throw Error(ErrorCode::InvalidArgument, "heart_rate must be in [20, 250]");
  }
  if (ctx.moving_speed && !(*ctx.moving_speed >= 0)) {
    throw Error(ErrorCode::InvalidArgument, "moving_speed must be >= 0");
  }
}

struct BaselineProfile {
  std::set<Point> usual_locations;
  std::set<int> usual_hours;
  double resting_heart_rate = 70.0;
  bool usual_moving = false;
};

/// Every hour of the day, i.e. no timing prior.
inline std::set<int> all_hours() {
  std::set<int> h;
  for (int i = 0; i < 24; ++i) h.insert(i);
  return h;
}

/// Inclusive hour range; wraps past midnight when first > last (22-6).
inline std::set<int> hour_range(int first, int last) {
  std::set<int> h;
  for (int i = first;; i = (i + 1) % 24) {
    h.insert(i);
    if (i == last) break;
  }
  return h;
}

inline void validate(const BaselineProfile& p) {
  if (p.usual_hours.empty()) throw Error(ErrorCode::InvalidArgument, "usual_hours must be non-empty");
  for (int h : p.usual_hours) {
    if (h < 0 || h > 23) throw Error(ErrorCode::InvalidArgument, "usual hour out of range");
  }
  if (p.resting_heart_rate < 30 || p.resting_heart_rate > 120) {
    throw Error(ErrorCode::InvalidArgument, "resting_heart_rate must be in [30, 120]");
  }
}

/// Normalization constants for the factor formulas.
struct FactorConstants {
  double distance_norm_km = 5.0;
  double hour_gap_norm = 6.0;
  double heart_rate_span = 60.0;
  double speed_norm_mps = 10.0;
};

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

inline double location_anomaly(const CallerContext& ctx, const BaselineProfile& profile,
                               const FactorConstants& k = {}) {
  if (is_high_risk(ctx.location_type)) return 1.0;
  if (!ctx.location || profile.usual_locations.empty()) return 0.0;
  double nearest = std::numeric_limits<double>::infinity();
  for (const Point& p : profile.usual_locations) nearest = std::min(nearest, distance_km(*ctx.location, p));
  return std::min(1.0, nearest / k.distance_norm_km);
}

/// Distance between two hours on the 24-hour circle.
inline int circular_hour_distance(int a, int b) {
  int d = std::abs(a - b) % 24;
  return std::min(d, 24 - d);
}

inline double timing_anomaly(const CallerContext& ctx, const BaselineProfile& profile,
                             const FactorConstants& k = {}) {
  if (!ctx.hour_of_day || profile.usual_hours.empty()) return 0.0;
  const int hour = *ctx.hour_of_day;
  if (profile.usual_hours.contains(hour)) return 0.0;
  int gap = 24;
  for (int h : profile.usual_hours) gap = std::min(gap, circular_hour_distance(hour, h));
  return std::min(1.0, gap / k.hour_gap_norm);
}

inline double health_anomaly(const CallerContext& ctx, const BaselineProfile& profile,
                             const FactorConstants& k = {}) {
  if (!ctx.heart_rate) return 0.0;
  return clamp01((*ctx.heart_rate - profile.resting_heart_rate) / k.heart_rate_span);
}

inline double activity_anomaly(const CallerContext& ctx, const BaselineProfile& profile,
                               const FactorConstants& k = {}) {
  if (!ctx.moving_speed || profile.usual_moving) return 0.0;
  return std::min(1.0, *ctx.moving_speed / k.speed_norm_mps);
}

/// Order: location, timing, health, activity.
using FactorScores = std::array<double, 4>;
using FactorWeights = std::array<double, 4>;

inline constexpr FactorWeights kDefaultWeights = {1.0, 1.0, 1.0, 1.0};

inline void validate_weights(const FactorWeights& w) {
  double sum = 0.0;
  for (double x : w) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "weights must be finite and >= 0");
    sum += x;
  }
  if (sum <= 0.0) throw Error(ErrorCode::ZeroWeights, "at least one weight must be positive");
}

inline double emergency_score(const FactorScores& s, const FactorWeights& w) {
  validate_weights(w);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    num += w[i] * s[i];
    den += w[i];
  }
  return clamp01(num / den);
}

enum class PriorityTier { None = 0, Low = 1, Medium = 2, Highest = 3 };

inline const char* to_string(PriorityTier t) {
  switch (t) {
    case PriorityTier::None: return "None";
    case PriorityTier::Low: return "Low";
    case PriorityTier::Medium: return "Medium";
    case PriorityTier::Highest: return "Highest";
  }
  return "None";
}

struct TierThresholds {
  double connect = 0.9;
  double voice = 0.6;
  double text = 0.3;
};

inline void validate(const TierThresholds& th) {
  if (!(0.0 < th.text && th.text < th.voice && th.voice < th.connect && th.connect <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "thresholds must satisfy 0 < text < voice < connect <= 1");
  }
}

/// Lower edges are inclusive.
inline PriorityTier classify_tier(double score, const TierThresholds& th) {
  if (score >= th.connect) return PriorityTier::Highest;
  if (score >= th.voice) return PriorityTier::Medium;
  if (score >= th.text) return PriorityTier::Low;
  return PriorityTier::None;
}

struct EmergencyAssessment {
  FactorScores factor_scores{};
  FactorWeights weights = kDefaultWeights;
  double emergency_score = 0.0;
  PriorityTier tier = PriorityTier::None;
};

struct PriorityConfig {
  FactorWeights weights = kDefaultWeights;
  TierThresholds thresholds;
  FactorConstants constants;
};

inline EmergencyAssessment assess(const CallerContext& ctx, const BaselineProfile& profile,
                                  const PriorityConfig& cfg = {}) {
  validate(ctx);
  validate(cfg.thresholds);
  EmergencyAssessment a;
  a.factor_scores = {location_anomaly(ctx, profile, cfg.constants), timing_anomaly(ctx, profile, cfg.constants),
                     health_anomaly(ctx, profile, cfg.constants), activity_anomaly(ctx, profile, cfg.constants)};
  a.weights = cfg.weights;
  a.emergency_score = emergency_score(a.factor_scores, a.weights);
  a.tier = classify_tier(a.emergency_score, cfg.thresholds);
  return a;
}

}  // namespace gvb
