#pragma once

#include <algorithm>
#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "gvb/approval_policy.hpp"
#include "gvb/burst_scheduler.hpp"
#include "gvb/call_engine.hpp"
#include "gvb/common.hpp"
#include "gvb/external_generator.hpp"
#include "gvb/incapacity_detector.hpp"
#include "gvb/message_generator.hpp"
#include "gvb/priority_engine.hpp"
#include "gvb/scenario.hpp"
#include "gvb/trace.hpp"

namespace gvb {

/// A module failure while processing the scenario event on `line()`.
class SimError : public Error {
 public:
  SimError(int line, const Error& cause)
      : Error(cause.code(), "scenario line " + std::to_string(line) + ": " + cause.what()), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

struct SimConfig {
  PriorityConfig priority;
  BackendKind backend = BackendKind::Template;
  std::string external_command;  // shell command for the external generator
  std::chrono::milliseconds external_timeout = kDefaultExternalTimeout;
  std::uint64_t rng_seed = 0;
  double speaking_rate = kDefaultSpeakingRate;
  Seconds abandon_after = 120;
  GenerationParams generation;
  // Overrides `external_command` when set; tests inject fakes here.
  std::shared_ptr<LineTransport> transport;
};

namespace component {
inline constexpr const char* kCallEngine = "CALL_ENGINE";
inline constexpr const char* kApprovalPolicy = "APPROVAL_POLICY";
inline constexpr const char* kPriorityEngine = "PRIORITY_ENGINE";
inline constexpr const char* kIncapacity = "INCAPACITY_DETECTOR";
inline constexpr const char* kGenerator = "MESSAGE_GENERATOR";
inline constexpr const char* kScheduler = "BURST_SCHEDULER";
inline constexpr const char* kHarness = "SIM_HARNESS";
}  // namespace component

/// Discrete-event driver. Scenario events run in (time, line) order;
/// burst completions and abandonment checks are internal events that run
/// ahead of scenario events scheduled at the same second.
class Simulator {
 public:
  explicit Simulator(SimConfig config) : config_(std::move(config)) {
    validate_weights(config_.priority.weights);
    validate(config_.priority.thresholds);
    validate(config_.generation);
    burst_word_budget(1, config_.speaking_rate);
    if (config_.abandon_after < 1) throw Error(ErrorCode::InvalidArgument, "abandon timeout must be >= 1");
    config_.generation.rng_seed = config_.rng_seed;
    if (config_.backend == BackendKind::External && !config_.transport && !config_.external_command.empty()) {
      config_.transport = std::make_shared<SubprocessTransport>(config_.external_command);
    }
  }

  std::vector<TraceRecord> run(const std::vector<SimEvent>& events) {
    std::vector<std::size_t> order(events.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (events[a].at != events[b].at) return events[a].at < events[b].at;
      return events[a].line < events[b].line;
    });
    for (std::size_t idx : order) {
      const SimEvent& ev = events[idx];
      push(ev.at, 1, Pending{ScenarioStep{&ev}});
    }

    while (!queue_.empty()) {
      QueueItem item = queue_.top();
      queue_.pop();
      now_ = item.at;
      std::visit([&](const auto& step) { handle(step); }, item.pending);
    }
    return trace_.take();
  }

 private:
  struct ScenarioStep {
    const SimEvent* event;
  };
  struct BurstComplete {
    int line;
    int session_id;
    BurstRecord record;
  };
  struct AbandonCheck {
    int session_id;
  };
  using Pending = std::variant<ScenarioStep, BurstComplete, AbandonCheck>;

  struct QueueItem {
    Seconds at;
    int phase;  // 0 internal, 1 scenario
    std::uint64_t order;
    Pending pending;

    bool operator>(const QueueItem& o) const {
      if (at != o.at) return at > o.at;
      if (phase != o.phase) return phase > o.phase;
      return order > o.order;
    }
  };

  struct Episode {
    RoutingDecision decision;
    std::optional<BurstLedger> ledger;
    CallerContext context;
    bool has_location_type = false;
    std::vector<ModalitySignal> media_signals;
    std::map<Modality, std::vector<std::string>> media_descriptions;
    Seconds last_activity = 0;
  };

  void push(Seconds at, int phase, Pending p) { queue_.push(QueueItem{at, phase, next_order_++, std::move(p)}); }

  void emit(const char* comp, const char* event, TraceDetails details) {
    trace_.emit(now_, comp, event, std::move(details));
  }

  static std::string sid(int id) { return std::to_string(id); }

  // ---- scenario events ----------------------------------------------------

  void handle(const ScenarioStep& step) {
    current_line_ = step.event->line;
    try {
      std::visit([&](const auto& args) { on(args); }, step.event->args);
    } catch (const SimError&) {
      throw;
    } catch (const Error& e) {
      throw SimError(current_line_, e);
    }
  }

  void on(const RegisterSubscriber& ev) {
    validate(ev.profile);
    engine_.register_subscriber(ev.id);
    profiles_[ev.id] = ev.profile;
    std::string homes;
    for (const auto& p : ev.profile.usual_locations) {
      if (!homes.empty()) homes += ';';
      homes += "(" + text::format_double(p.x) + "," + text::format_double(p.y) + ")";
    }
    emit(component::kHarness, "SUBSCRIBER_REGISTERED",
         {{"id", ev.id.str()},
          {"homes", homes.empty() ? "-" : homes},
          {"usual_hours", std::to_string(ev.profile.usual_hours.size())},
          {"resting_hr", text::format_double(ev.profile.resting_heart_rate)},
          {"usual_moving", ev.profile.usual_moving ? "1" : "0"}});
  }

  void on(const SetPolicy& ev) {
    const auto& p = policies_.set_policy(ev.policy.callee, ev.policy.burst_seconds, ev.policy.gap_seconds,
                                         ev.policy.max_bursts, ev.policy.approved_callers);
    std::string approved;
    for (const auto& id : p.approved_callers) {
      if (!approved.empty()) approved += ',';
      approved += id.str();
    }
    emit(component::kApprovalPolicy, "POLICY_SET",
         {{"callee", p.callee.str()},
          {"t", std::to_string(p.burst_seconds)},
          {"G", std::to_string(p.gap_seconds)},
          {"N", std::to_string(p.max_bursts)},
          {"approved", approved.empty() ? "-" : approved}});
  }

  void on(const SetWeights& ev) {
    validate_weights(ev.weights);
    config_.priority.weights = ev.weights;
    std::string w;
    for (double x : ev.weights) w += (w.empty() ? "" : ",") + text::format_double(x);
    emit(component::kPriorityEngine, "WEIGHTS_SET", {{"weights", w}});
  }

  void on(const SetThresholds& ev) {
    validate(ev.thresholds);
    config_.priority.thresholds = ev.thresholds;
    emit(component::kPriorityEngine, "THRESHOLDS_SET",
         {{"connect", text::format_double(ev.thresholds.connect)},
          {"voice", text::format_double(ev.thresholds.voice)},
          {"text", text::format_double(ev.thresholds.text)}});
  }

  void on(const SetKeywords& ev) {
    keywords_ = ev.keywords;
    emit(component::kIncapacity, "KEYWORDS_SET", {{"count", std::to_string(keywords_.size())}});
  }

  void on(const SetLexicon& ev) {
    lexicon_ = ev.lexicon;
    emit(component::kIncapacity, "LEXICON_SET", {{"count", std::to_string(lexicon_.size())}});
  }

  void on(const PlaceCall& ev) {
    CallSession s = engine_.place_call(ev.caller, ev.callee, now_);
    emit(component::kCallEngine, "CALL_PLACED",
         {{"session", sid(s.session_id)},
          {"caller", s.caller.str()},
          {"callee", s.callee.str()},
          {"state", to_string(s.state)}});
    if (s.state != CallState::Waiting) return;

    const BaselineProfile& profile = profiles_.at(ev.caller);
    EmergencyAssessment a = assess(ev.context, profile, config_.priority);
    emit(component::kPriorityEngine, "ASSESSMENT",
         {{"session", sid(s.session_id)},
          {"caller", s.caller.str()},
          {"location", text::format_fixed(a.factor_scores[0])},
          {"timing", text::format_fixed(a.factor_scores[1])},
          {"health", text::format_fixed(a.factor_scores[2])},
          {"activity", text::format_fixed(a.factor_scores[3])},
          {"score", text::format_fixed(a.emergency_score)},
          {"tier", to_string(a.tier)}});

    const BurstPolicy policy = policies_.get_policy(ev.callee);
    RoutingDecision d = route_waiting_call(s, a, policy);
    engine_.set_queue_tier(s.session_id, d.tier);
    emit(component::kCallEngine, "ROUTING_DECISION",
         {{"session", sid(s.session_id)},
          {"kind", to_string(d.kind)},
          {"tier", to_string(d.tier)},
          {"reason", to_string(d.reason)}});

    Episode& ep = episodes_[s.session_id];
    ep.decision = d;
    ep.context = ev.context;
    ep.has_location_type = ev.has_location_type;
    ep.last_activity = now_;

    if (d.kind == RoutingKind::ConnectOverride) {
      for (int held : engine_.connect_override(s.session_id, now_)) {
        emit(component::kCallEngine, "CALL_HELD", {{"session", sid(held)}, {"by", sid(s.session_id)}});
      }
      emit(component::kCallEngine, "CALL_CONNECTED",
           {{"session", sid(s.session_id)}, {"state", to_string(CallState::ConnectedByOverride)}});
      return;
    }
    if (d.admits_bursts()) {
      ep.ledger.emplace(s.session_id, policy);
      emit(component::kScheduler, "LEDGER_OPENED",
           {{"session", sid(s.session_id)},
            {"t", std::to_string(policy.burst_seconds)},
            {"G", std::to_string(policy.gap_seconds)},
            {"N", std::to_string(policy.max_bursts)},
            {"mode", d.kind == RoutingKind::PermitVoiceBurst ? "voice" : "text"}});
    }
    schedule_abandon_check(s.session_id);
  }

  void on(const HangUp& ev) {
    auto r = engine_.hang_up(ev.who, now_);
    emit(component::kCallEngine, "CALL_ENDED", {{"session", sid(r.ended)}, {"by", ev.who.str()}});
    for (int id : r.resumed) emit(component::kCallEngine, "CALL_RESUMED", {{"session", sid(id)}});
  }

  void on(const Answer& ev) {
    auto r = engine_.answer(ev.callee, now_);
    for (int id : r.ended) emit(component::kCallEngine, "CALL_ENDED", {{"session", sid(id)}, {"by", ev.callee.str()}});
    emit(component::kCallEngine, "CALL_ANSWERED", {{"session", sid(r.answered)}, {"by", ev.callee.str()}});
  }

  void on(const Dismiss& ev) {
    if (!engine_.is_registered(ev.callee)) throw Error(ErrorCode::UnknownSubscriber, ev.callee.str());
    std::string ids;
    for (int id : engine_.waiting_queue(ev.callee)) {
      auto it = episodes_.find(id);
      if (it == episodes_.end() || !it->second.ledger) continue;
      it->second.ledger->dismiss();
      ids += (ids.empty() ? "" : ",") + sid(id);
    }
    emit(component::kScheduler, "BURSTS_DISMISSED", {{"callee", ev.callee.str()}, {"sessions", ids.empty() ? "-" : ids}});
  }

  void on(const MediaDescription& ev) {
    int id = waiting_session_of(ev.caller);
    Episode& ep = episodes_.at(id);
    touch(id);
    ep.media_descriptions[ev.modality].push_back(ev.description);
    auto sig = flag_media(ev.description, ev.modality, lexicon_);
    if (sig) ep.media_signals.push_back(*sig);
    emit(component::kIncapacity, "MEDIA_RECEIVED",
         {{"session", sid(id)},
          {"modality", to_string(ev.modality)},
          {"strength", text::format_fixed(sig ? sig->strength : 0.0)},
          {"matched", sig ? sig->evidence : "-"}});
  }

  void on(const BurstAttempt& ev) {
    int id = 0;
    for (const auto& [sess_id, sess] : engine_.sessions()) {
      if (sess.caller == ev.caller && sess.state != CallState::Ended) id = sess_id;
    }
    if (id == 0) throw Error(ErrorCode::NoSuchSession, ev.caller.str() + " has no call in progress");
    const CallSession& sess = engine_.session(id);
    if (!sess.waiting()) {
      emit(component::kScheduler, "BURST_DENIED", {{"session", sid(id)}, {"reason", "NotWaiting"}});
      return;
    }
    touch(id);
    Episode& ep = episodes_.at(id);
    if (!ep.decision.admits_bursts() || !ep.ledger) {
      emit(component::kScheduler, "BURST_DENIED", {{"session", sid(id)}, {"reason", "NotAdmitted"}});
      return;
    }
    BurstLedger& ledger = *ep.ledger;
    const Seconds duration = ev.duration.value_or(ledger.policy().burst_seconds);
    if (duration > ledger.policy().burst_seconds) {
      throw Error(ErrorCode::DurationExceeded, "burst of " + std::to_string(duration) + "s exceeds t=" +
                                                   std::to_string(ledger.policy().burst_seconds) + "s");
    }

    BurstDecision decision = ledger.request_burst(now_);
    if (const auto* deny = std::get_if<Deny>(&decision)) {
      TraceDetails d{{"session", sid(id)}, {"reason", to_string(deny->reason)}};
      if (deny->eligible_at) d.emplace_back("eligible_at", std::to_string(*deny->eligible_at));
      emit(component::kScheduler, "BURST_DENIED", std::move(d));
      return;
    }
    const Permit permit = std::get<Permit>(decision);
    engine_.apply(id, CallEvent::PermitBurst, now_);
    emit(component::kScheduler, "BURST_PERMIT",
         {{"session", sid(id)}, {"sequence", std::to_string(permit.sequence)}, {"window_end", std::to_string(permit.window_end)}});

    BurstRecord record{id, permit.sequence, now_, duration, CallerVoice{}};
    record.payload = build_payload(id, ep, ev, duration);
    push(now_ + duration, 0, BurstComplete{current_line_, id, std::move(record)});
  }

  // ---- burst content --------------------------------------------------------

  BurstPayload build_payload(int id, Episode& ep, const BurstAttempt& ev, Seconds duration) {
    const bool speech = ev.transcript && !text::trim(*ev.transcript).empty();
    const bool text_mode = ep.decision.kind == RoutingKind::PermitTextBurstWithBeep;

    std::vector<ModalitySignal> signals = ep.media_signals;
    if (auto s = detect_silence(BurstWindow{duration, speech})) signals.push_back(*s);
    if (speech) {
      if (auto s = detect_keywords(*ev.transcript, keywords_)) signals.push_back(*s);
    }
    const std::pair<const std::optional<std::string>*, Modality> burst_media[] = {
        {&ev.image, Modality::ImageDescription}, {&ev.video, Modality::VideoDescription}, {&ev.gesture, Modality::Gesture}};
    for (const auto& [desc, modality] : burst_media) {
      if (!*desc) continue;
      if (auto s = flag_media(**desc, modality, lexicon_)) signals.push_back(*s);
    }
    IncapacityVerdict verdict = assess_incapacity(signals);
    std::string modalities;
    for (const auto& s : verdict.contributing) modalities += (modalities.empty() ? "" : ",") + std::string(to_string(s.modality));
    emit(component::kIncapacity, "INCAPACITY_VERDICT",
         {{"session", sid(id)},
          {"incapacitated", verdict.incapacitated ? "1" : "0"},
          {"confidence", text::format_fixed(verdict.confidence)},
          {"signals", modalities.empty() ? "-" : modalities}});

    std::optional<std::string> content;
    bool generated = false;
    GeneratedMessage message;
    if (verdict.incapacitated) {
      SeedBundle bundle = seed_bundle(ep, ev);
      if (!bundle.empty()) {
        message = generate(id, compose_seed(bundle), duration);
        content = message.text;
        generated = true;
      }
    }
    if (!content && speech) {
      GeneratedMessage fitted =
          fit_to_duration(make_message(text::trim(*ev.transcript), BackendKind::Template, config_.speaking_rate),
                          duration, config_.speaking_rate);
      content = fitted.text;
    }

    if (!content) return CallerVoice{};
    if (text_mode) return TextWithBeep{*content};
    if (generated) return Generated{message};
    return CallerVoice{*content};
  }

  SeedBundle seed_bundle(const Episode& ep, const BurstAttempt& ev) const {
    auto join = [](std::optional<std::string> first, const std::vector<std::string>* more) {
      std::string out = first.value_or("");
      if (more) {
        for (const auto& m : *more) out += (out.empty() ? "" : ", ") + m;
      }
      return out.empty() ? std::optional<std::string>{} : std::optional<std::string>{out};
    };
    auto media = [&](Modality m) -> const std::vector<std::string>* {
      auto it = ep.media_descriptions.find(m);
      return it == ep.media_descriptions.end() ? nullptr : &it->second;
    };
    SeedBundle b;
    if (ev.keywords && !text::trim(*ev.keywords).empty()) b.keywords = text::trim(*ev.keywords);
    b.gesture_desc = join(ev.gesture, media(Modality::Gesture));
    b.image_desc = join(ev.image, media(Modality::ImageDescription));
    b.video_desc = join(ev.video, media(Modality::VideoDescription));
    if (ev.transcript && !text::trim(*ev.transcript).empty()) b.background_speech = text::trim(*ev.transcript);
    if (ev.noise && !text::trim(*ev.noise).empty()) b.background_noise_desc = text::trim(*ev.noise);

    std::string ctx;
    auto add = [&](const std::string& part) { ctx += (ctx.empty() ? "" : " ") + part; };
    if (ep.context.hour_of_day) add("hour=" + std::to_string(*ep.context.hour_of_day));
    if (ep.context.heart_rate) add("hr=" + text::format_double(*ep.context.heart_rate));
    if (ep.context.moving_speed) add("speed=" + text::format_double(*ep.context.moving_speed));
    if (!ctx.empty()) b.context_summary = ctx;
    if (ep.has_location_type) b.location_type = to_string(ep.context.location_type);
    return b;
  }

  GeneratedMessage generate(int id, const std::string& seed, Seconds duration) {
    const bool external = config_.backend == BackendKind::External;
    if (external) {
      emit(component::kGenerator, "GEN_REQUEST",
           {{"session", sid(id)}, {"backend", "External"}, {"request", format_generate_request(seed, config_.generation)}});
    }
    GenerationOutcome out = generate_message(seed, config_.generation, config_.backend, config_.transport.get(),
                                             config_.external_timeout, config_.speaking_rate);
    if (out.fallback_reason) {
      emit(component::kGenerator, "GEN_FALLBACK", {{"session", sid(id)}, {"reason", *out.fallback_reason}});
    }
    emit(component::kGenerator, "GEN_RESULT",
         {{"session", sid(id)},
          {"backend", to_string(out.message.backend)},
          {"seed", seed},
          {"words", std::to_string(out.message.word_count)},
          {"text", out.message.text}});
    GeneratedMessage fitted = fit_to_duration(out.message, duration, config_.speaking_rate);
    if (fitted.word_count != out.message.word_count) {
      emit(component::kGenerator, "GEN_FIT",
           {{"session", sid(id)},
            {"words", std::to_string(fitted.word_count)},
            {"seconds", text::format_fixed(fitted.estimated_speech_seconds, 3)},
            {"t", std::to_string(duration)}});
    }
    return fitted;
  }

  // ---- internal events ------------------------------------------------------

  void handle(const BurstComplete& done) {
    current_line_ = done.line;
    try {
      Episode& ep = episodes_.at(done.session_id);
      ep.ledger->record_burst(done.record);
      if (engine_.session(done.session_id).state == CallState::BurstPermitted) {
        engine_.apply(done.session_id, CallEvent::Timeout, now_);
      }
      ep.last_activity = now_;

      TraceDetails d{{"session", sid(done.session_id)},
                     {"sequence", std::to_string(done.record.sequence)},
                     {"start", std::to_string(done.record.start)},
                     {"duration", std::to_string(done.record.duration)}};
      const auto* voice = std::get_if<CallerVoice>(&done.record.payload);
      if (voice && voice->transcript.empty()) {
        emit(component::kScheduler, "BURST_WINDOW_SILENT", std::move(d));
      } else {
        auto [kind, beep, body] = std::visit(
            [](const auto& p) -> std::tuple<const char*, const char*, std::string> {
              using P = std::decay_t<decltype(p)>;
              if constexpr (std::is_same_v<P, CallerVoice>) return {"CallerVoice", "0", p.transcript};
              else if constexpr (std::is_same_v<P, Generated>) return {"Generated", "0", p.message.text};
              else return {"TextWithBeep", "1", p.text};
            },
            done.record.payload);
        const std::size_t words = text::word_count(body);
        d.emplace_back("payload", kind);
        d.emplace_back("beep", beep);
        d.emplace_back("words", std::to_string(words));
        d.emplace_back("seconds", text::format_fixed(static_cast<double>(words) / config_.speaking_rate, 3));
        d.emplace_back("text", body);
        emit(component::kScheduler, "BURST_SENT", std::move(d));
      }
      if (engine_.session(done.session_id).state == CallState::Waiting) schedule_abandon_check(done.session_id);
    } catch (const Error& e) {
      throw SimError(current_line_, e);
    }
  }

  void handle(const AbandonCheck& check) {
    auto it = episodes_.find(check.session_id);
    if (it == episodes_.end()) return;
    if (now_ < it->second.last_activity + config_.abandon_after) return;
    if (engine_.abandon(check.session_id, now_)) {
      emit(component::kCallEngine, "CALL_ABANDONED",
           {{"session", sid(check.session_id)}, {"idle", std::to_string(now_ - it->second.last_activity)}});
    }
  }

  // ---- helpers --------------------------------------------------------------

  int waiting_session_of(const SubscriberId& caller) const {
    for (const auto& [id, sess] : engine_.sessions()) {
      if (sess.caller == caller && sess.waiting()) return id;
    }
    throw Error(ErrorCode::NoSuchSession, caller.str() + " has no waiting call");
  }

  void touch(int id) {
    episodes_.at(id).last_activity = now_;
    schedule_abandon_check(id);
  }

  void schedule_abandon_check(int id) { push(now_ + config_.abandon_after, 0, AbandonCheck{id}); }

  SimConfig config_;
  CallEngine engine_;
  ApprovalRegistry policies_;
  std::map<SubscriberId, BaselineProfile> profiles_;
  std::map<int, Episode> episodes_;
  std::set<std::string> keywords_ = default_keywords();
  std::set<std::string> lexicon_ = default_lexicon();
  TraceLog trace_;
  std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>> queue_;
  std::uint64_t next_order_ = 0;
  Seconds now_ = 0;
  int current_line_ = 0;
};

inline std::vector<TraceRecord> run_scenario(const std::vector<SimEvent>& events, SimConfig config = {}) {
  Simulator sim(std::move(config));
  return sim.run(events);
}

}  // namespace gvb
