#pragma once

#include <optional>
#include <string>
#include <variant>

#include "gvb/approval_policy.hpp"
#include "gvb/common.hpp"
#include "gvb/message_generator.hpp"

namespace gvb {

struct Permit {
  Seconds start = 0;
  Seconds window_end = 0;
  int sequence = 1;

  friend bool operator==(const Permit&, const Permit&) = default;
};

enum class DenyReason { BudgetExhausted, GapNotElapsed };

inline const char* to_string(DenyReason r) {
  return r == DenyReason::BudgetExhausted ? "BudgetExhausted" : "GapNotElapsed";
}

struct Deny {
  DenyReason reason = DenyReason::BudgetExhausted;
  std::optional<Seconds> eligible_at;  // only for GapNotElapsed

  friend bool operator==(const Deny&, const Deny&) = default;
};

using BurstDecision = std::variant<Permit, Deny>;

struct CallerVoice {
  std::string transcript;
};
struct Generated {
  GeneratedMessage message;
};
struct TextWithBeep {
  std::string text;
};
using BurstPayload = std::variant<CallerVoice, Generated, TextWithBeep>;

struct BurstRecord {
  int session_id = 0;
  int sequence = 1;
  Seconds start = 0;
  Seconds duration = 0;
  BurstPayload payload;
};

/// Per-waiting-episode burst accounting. The gap G runs from the end of the
/// previous burst; a permit stays outstanding until its burst is recorded,
/// and no second permit is issued while one is outstanding.
class BurstLedger {
 public:
  BurstLedger(int session_id, BurstPolicy policy) : session_id_(session_id), policy_(std::move(policy)) {
    validate(policy_);
  }

  int session_id() const noexcept { return session_id_; }
  int bursts_sent() const noexcept { return bursts_sent_; }
  const std::optional<Seconds>& last_burst_end() const noexcept { return last_burst_end_; }
  const BurstPolicy& policy() const noexcept { return policy_; }
  const std::optional<Permit>& outstanding() const noexcept { return outstanding_; }
  bool dismissed() const noexcept { return dismissed_; }

  BurstDecision request_burst(Seconds now) {
    const int committed = bursts_sent_ + (outstanding_ ? 1 : 0);
    if (dismissed_ || committed >= policy_.max_bursts) return Deny{DenyReason::BudgetExhausted, std::nullopt};
    if (outstanding_) return Deny{DenyReason::GapNotElapsed, outstanding_->window_end + policy_.gap_seconds};
    if (last_burst_end_ && now < *last_burst_end_ + policy_.gap_seconds) {
      return Deny{DenyReason::GapNotElapsed, *last_burst_end_ + policy_.gap_seconds};
    }
    outstanding_ = Permit{now, now + policy_.burst_seconds, bursts_sent_ + 1};
    return *outstanding_;
  }

  void record_burst(const BurstRecord& record) {
    if (!outstanding_ || record.session_id != session_id_ || record.sequence != outstanding_->sequence ||
        record.start != outstanding_->start) {
      throw Error(ErrorCode::NoPermit, "no outstanding permit matches burst record");
    }
    if (record.duration > policy_.burst_seconds) {
      throw Error(ErrorCode::DurationExceeded, "burst of " + std::to_string(record.duration) + "s exceeds t=" +
                                                   std::to_string(policy_.burst_seconds) + "s");
    }
    if (record.duration < 1) throw Error(ErrorCode::InvalidArgument, "burst duration must be >= 1");
    ++bursts_sent_;
    last_burst_end_ = record.start + record.duration;
    outstanding_.reset();
  }

  /// Callee dismissal: no further permits this episode.
  void dismiss() { dismissed_ = true; }

  std::optional<Seconds> next_eligible_time() const {
    if (dismissed_ || bursts_sent_ >= policy_.max_bursts) return std::nullopt;
    if (outstanding_) {
      if (bursts_sent_ + 1 >= policy_.max_bursts) return std::nullopt;
      return outstanding_->window_end + policy_.gap_seconds;
    }
    if (bursts_sent_ == 0) return Seconds{0};
    return *last_burst_end_ + policy_.gap_seconds;
  }

 private:
  int session_id_;
  BurstPolicy policy_;
  int bursts_sent_ = 0;
  std::optional<Seconds> last_burst_end_;
  std::optional<Permit> outstanding_;
  bool dismissed_ = false;
};

}  // namespace gvb
