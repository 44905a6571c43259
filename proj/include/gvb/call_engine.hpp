#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "gvb/approval_policy.hpp"
#include "gvb/common.hpp"
#include "gvb/priority_engine.hpp"

namespace gvb {

enum class CallState { Dialing, Active, Waiting, BurstPermitted, Ended, ConnectedByOverride };

inline const char* to_string(CallState s) {
  switch (s) {
    case CallState::Dialing: return "Dialing";
    case CallState::Active: return "Active";
    case CallState::Waiting: return "Waiting";
    case CallState::BurstPermitted: return "BurstPermitted";
    case CallState::Ended: return "Ended";
    case CallState::ConnectedByOverride: return "ConnectedByOverride";
  }
  return "Ended";
}

// Enqueue moves a freshly dialed call into call waiting when the callee is
// engaged.
enum class CallEvent { Answer, HangUp, PermitBurst, Override, Timeout, Enqueue };

inline const char* to_string(CallEvent e) {
  switch (e) {
    case CallEvent::Answer: return "Answer";
    case CallEvent::HangUp: return "HangUp";
    case CallEvent::PermitBurst: return "PermitBurst";
    case CallEvent::Override: return "Override";
    case CallEvent::Timeout: return "Timeout";
    case CallEvent::Enqueue: return "Enqueue";
  }
  return "Timeout";
}

struct CallSession {
  int session_id = 0;
  SubscriberId caller;
  SubscriberId callee;
  CallState state = CallState::Dialing;
  Seconds started_at = 0;
  std::optional<Seconds> ended_at;
  // Active/ConnectedByOverride session parked by a connect override.
  bool held = false;
  std::uint64_t held_order = 0;
  // Which connected state the session reached, if any.
  std::optional<CallState> connected_as;

  bool connected() const { return state == CallState::Active || state == CallState::ConnectedByOverride; }
  bool waiting() const { return state == CallState::Waiting || state == CallState::BurstPermitted; }
  bool involves(const SubscriberId& s) const { return caller == s || callee == s; }
};

/// Target state of `event` from `from`, or nullopt when the graph has no
/// such edge.
///
///   Dialing        -> Active (Answer) | Waiting (Enqueue) | Ended (HangUp)
///   Waiting        -> BurstPermitted (PermitBurst) | ConnectedByOverride (Override)
///                     | Active (Answer) | Ended (HangUp, Timeout)
///   BurstPermitted -> Waiting (Timeout) | Active (Answer) | Ended (HangUp)
///   Active, ConnectedByOverride -> Ended (HangUp)
inline std::optional<CallState> transition_target(CallState from, CallEvent event) {
  switch (from) {
    case CallState::Dialing:
      if (event == CallEvent::Answer) return CallState::Active;
      if (event == CallEvent::Enqueue) return CallState::Waiting;
      if (event == CallEvent::HangUp) return CallState::Ended;
      break;
    case CallState::Waiting:
      if (event == CallEvent::PermitBurst) return CallState::BurstPermitted;
      if (event == CallEvent::Override) return CallState::ConnectedByOverride;
      if (event == CallEvent::Answer) return CallState::Active;
      if (event == CallEvent::HangUp || event == CallEvent::Timeout) return CallState::Ended;
      break;
    case CallState::BurstPermitted:
      if (event == CallEvent::Timeout) return CallState::Waiting;
      if (event == CallEvent::Answer) return CallState::Active;
      if (event == CallEvent::HangUp) return CallState::Ended;
      break;
    case CallState::Active:
    case CallState::ConnectedByOverride:
      if (event == CallEvent::HangUp) return CallState::Ended;
      break;
    case CallState::Ended:
      break;
  }
  return std::nullopt;
}

inline CallSession transition(const CallSession& session, CallEvent event, Seconds now) {
  auto target = transition_target(session.state, event);
  if (!target) {
    throw Error(ErrorCode::IllegalTransition, std::string(to_string(event)) + " from " + to_string(session.state));
  }
  CallSession next = session;
  next.state = *target;
  if (next.connected()) next.connected_as = *target;
  if (*target == CallState::Ended) {
    next.ended_at = now;
    next.held = false;
  }
  return next;
}

enum class RoutingKind { StandardWaiting = 0, PermitTextBurstWithBeep = 1, PermitVoiceBurst = 2, ConnectOverride = 3 };

inline const char* to_string(RoutingKind k) {
  switch (k) {
    case RoutingKind::ConnectOverride: return "ConnectOverride";
    case RoutingKind::PermitVoiceBurst: return "PermitVoiceBurst";
    case RoutingKind::PermitTextBurstWithBeep: return "PermitTextBurstWithBeep";
    case RoutingKind::StandardWaiting: return "StandardWaiting";
  }
  return "StandardWaiting";
}

enum class RoutingReason { PreApproved, ScoreThreshold, Default };

inline const char* to_string(RoutingReason r) {
  switch (r) {
    case RoutingReason::PreApproved: return "PreApproved";
    case RoutingReason::ScoreThreshold: return "ScoreThreshold";
    case RoutingReason::Default: return "Default";
  }
  return "Default";
}

struct RoutingDecision {
  RoutingKind kind = RoutingKind::StandardWaiting;
  PriorityTier tier = PriorityTier::None;
  RoutingReason reason = RoutingReason::Default;

  bool admits_bursts() const {
    return kind == RoutingKind::PermitVoiceBurst || kind == RoutingKind::PermitTextBurstWithBeep;
  }

  friend bool operator==(const RoutingDecision&, const RoutingDecision&) = default;
};

inline RoutingKind routing_kind_for(PriorityTier tier) {
  switch (tier) {
    case PriorityTier::Highest: return RoutingKind::ConnectOverride;
    case PriorityTier::Medium: return RoutingKind::PermitVoiceBurst;
    case PriorityTier::Low: return RoutingKind::PermitTextBurstWithBeep;
    case PriorityTier::None: return RoutingKind::StandardWaiting;
  }
  return RoutingKind::StandardWaiting;
}

/// Tier table with the pre-approval floor: an approved caller is treated as
/// at least Medium.
inline RoutingDecision route(PriorityTier scored, bool pre_approved) {
  PriorityTier effective = scored;
  RoutingReason reason = scored == PriorityTier::None ? RoutingReason::Default : RoutingReason::ScoreThreshold;
  if (pre_approved && scored < PriorityTier::Medium) {
    effective = PriorityTier::Medium;
    reason = RoutingReason::PreApproved;
  }
  return {routing_kind_for(effective), effective, reason};
}

inline RoutingDecision route_waiting_call(const CallSession& waiting, const EmergencyAssessment& assessment,
                                          const BurstPolicy& policy) {
  if (waiting.state != CallState::Waiting) {
    throw Error(ErrorCode::NotWaiting, "session " + std::to_string(waiting.session_id) + " is " +
                                           to_string(waiting.state));
  }
  return route(assessment.tier, policy.approves(waiting.caller));
}

/// Subscriber and session registry driving the per-session state machine.
/// Confined to one thread.
class CallEngine {
 public:
  struct HangUpResult {
    int ended = 0;
    std::vector<int> resumed;
  };

  struct AnswerResult {
    int answered = 0;
    std::vector<int> ended;
  };

  void register_subscriber(const SubscriberId& id) {
    if (!subscribers_.insert(id).second) {
      throw Error(ErrorCode::InvalidArgument, "subscriber " + id.str() + " already registered");
    }
  }

  bool is_registered(const SubscriberId& id) const { return subscribers_.contains(id); }

  const CallSession& session(int id) const {
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::NoSuchSession, "session " + std::to_string(id));
    return it->second;
  }

  const std::map<int, CallSession>& sessions() const { return sessions_; }

  /// Engaged: party to a connected session, held or not.
  bool is_engaged(const SubscriberId& s) const {
    return std::any_of(sessions_.begin(), sessions_.end(),
                       [&](const auto& kv) { return kv.second.connected() && kv.second.involves(s); });
  }

  std::optional<int> live_connected_session(const SubscriberId& s) const {
    for (const auto& [id, sess] : sessions_) {
      if (sess.connected() && !sess.held && sess.involves(s)) return id;
    }
    return std::nullopt;
  }

  CallSession place_call(const SubscriberId& caller, const SubscriberId& callee, Seconds now) {
    if (!is_registered(caller)) throw Error(ErrorCode::UnknownSubscriber, caller.str());
    if (!is_registered(callee)) throw Error(ErrorCode::UnknownSubscriber, callee.str());
    if (caller == callee) throw Error(ErrorCode::SelfCall, caller.str() + " calling itself");
    for (const auto& [id, sess] : sessions_) {
      if (sess.state != CallState::Ended && sess.involves(caller) && (sess.connected() || sess.caller == caller)) {
        throw Error(ErrorCode::CallerBusy, caller.str() + " already in session " + std::to_string(id));
      }
    }
    CallSession s;
    s.session_id = next_session_id_++;
    s.caller = caller;
    s.callee = callee;
    s.started_at = now;
    const bool engaged = is_engaged(callee);
    s = transition(s, engaged ? CallEvent::Enqueue : CallEvent::Answer, now);
    sessions_.emplace(s.session_id, s);
    if (engaged) queue_.push_back({s.session_id, PriorityTier::None, enqueue_counter_++});
    return s;
  }

  /// Records the effective tier used for waiting-queue ordering.
  void set_queue_tier(int session_id, PriorityTier tier) {
    for (auto& e : queue_) {
      if (e.session_id == session_id) e.tier = tier;
    }
  }

  /// Waiting calls for `callee`, highest tier first, FIFO within a tier.
  std::vector<int> waiting_queue(const SubscriberId& callee) const {
    std::vector<QueueEntry> entries;
    for (const auto& e : queue_) {
      if (sessions_.at(e.session_id).callee == callee) entries.push_back(e);
    }
    std::stable_sort(entries.begin(), entries.end(), [](const QueueEntry& a, const QueueEntry& b) {
      if (a.tier != b.tier) return a.tier > b.tier;
      return a.order < b.order;
    });
    std::vector<int> ids;
    for (const auto& e : entries) ids.push_back(e.session_id);
    return ids;
  }

  const CallSession& apply(int session_id, CallEvent event, Seconds now) {
    auto& sess = mutable_session(session_id);
    sess = transition(sess, event, now);
    if (!sess.waiting()) dequeue(session_id);
    return sess;
  }

  /// Connects a waiting call directly, holding whatever connected call the
  /// callee is on. Returns the ids of the sessions placed on hold.
  std::vector<int> connect_override(int session_id, Seconds now) {
    const CallSession& target = session(session_id);
    if (target.state != CallState::Waiting) {
      throw Error(ErrorCode::NotWaiting, "session " + std::to_string(session_id) + " is " + to_string(target.state));
    }
    std::vector<int> held;
    const SubscriberId callee = target.callee;
    if (auto live = live_connected_session(callee)) {
      auto& s = mutable_session(*live);
      s.held = true;
      s.held_order = hold_counter_++;
      held.push_back(*live);
    }
    apply(session_id, CallEvent::Override, now);
    return held;
  }

  /// Callee takes the head of its waiting queue, ending its current live
  /// call first if it has one.
  AnswerResult answer(const SubscriberId& callee, Seconds now) {
    if (!is_registered(callee)) throw Error(ErrorCode::UnknownSubscriber, callee.str());
    auto queue = waiting_queue(callee);
    if (queue.empty()) throw Error(ErrorCode::NoSuchSession, callee.str() + " has no waiting call");
    AnswerResult r;
    if (auto live = live_connected_session(callee)) {
      apply(*live, CallEvent::HangUp, now);
      r.ended.push_back(*live);
    }
    r.answered = queue.front();
    apply(r.answered, CallEvent::Answer, now);
    return r;
  }

  /// Ends the subscriber's live call (else a held call, else the waiting call
  /// it placed) and resumes any held call that becomes unblocked.
  HangUpResult hang_up(const SubscriberId& who, Seconds now) {
    if (!is_registered(who)) throw Error(ErrorCode::UnknownSubscriber, who.str());
    std::optional<int> target = live_connected_session(who);
    if (!target) {
      for (const auto& [id, sess] : sessions_) {
        if (sess.connected() && sess.involves(who)) {
          target = id;
          break;
        }
      }
    }
    if (!target) {
      for (const auto& [id, sess] : sessions_) {
        if (sess.waiting() && sess.caller == who) {
          target = id;
          break;
        }
      }
    }
    if (!target) throw Error(ErrorCode::NoSuchSession, who.str() + " has no call to hang up");

    HangUpResult r;
    r.ended = *target;
    const CallSession ended = apply(*target, CallEvent::HangUp, now);
    for (const auto& party : {ended.caller, ended.callee}) {
      if (auto resumed = resume_held(party)) r.resumed.push_back(*resumed);
    }
    return r;
  }

  bool abandon(int session_id, Seconds now) {
    if (session(session_id).state != CallState::Waiting) return false;
    apply(session_id, CallEvent::Timeout, now);
    return true;
  }

  /// Each subscriber is on at most one live (non-held) connected call.
  bool live_call_invariant_holds() const {
    std::map<SubscriberId, int> live;
    for (const auto& [id, sess] : sessions_) {
      if (!sess.connected() || sess.held) continue;
      if (++live[sess.caller] > 1 || ++live[sess.callee] > 1) return false;
    }
    return true;
  }

 private:
  struct QueueEntry {
    int session_id;
    PriorityTier tier;
    std::uint64_t order;
  };

  CallSession& mutable_session(int id) {
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::NoSuchSession, "session " + std::to_string(id));
    return it->second;
  }

  void dequeue(int session_id) {
    std::erase_if(queue_, [&](const QueueEntry& e) { return e.session_id == session_id; });
  }

  std::optional<int> resume_held(const SubscriberId& party) {
    if (live_connected_session(party)) return std::nullopt;
    std::optional<int> best;
    std::uint64_t best_order = 0;
    for (const auto& [id, sess] : sessions_) {
      if (!sess.held || !sess.connected() || !sess.involves(party)) continue;
      const SubscriberId& other = sess.caller == party ? sess.callee : sess.caller;
      if (live_connected_session(other)) continue;
      if (!best || sess.held_order > best_order) {
        best = id;
        best_order = sess.held_order;
      }
    }
    if (best) mutable_session(*best).held = false;
    return best;
  }

  std::set<SubscriberId> subscribers_;
  std::map<int, CallSession> sessions_;
  std::vector<QueueEntry> queue_;
  int next_session_id_ = 1;
  std::uint64_t enqueue_counter_ = 0;
  std::uint64_t hold_counter_ = 0;
};

}  // namespace gvb
