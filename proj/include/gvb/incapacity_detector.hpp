#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gvb/common.hpp"

namespace gvb {

enum class Modality { Keyword, Silence, ImageDescription, VideoDescription, Gesture };

inline const char* to_string(Modality m) {
  switch (m) {
    case Modality::Keyword: return "Keyword";
    case Modality::Silence: return "Silence";
    case Modality::ImageDescription: return "ImageDescription";
    case Modality::VideoDescription: return "VideoDescription";
    case Modality::Gesture: return "Gesture";
  }
  return "Keyword";
}

struct ModalitySignal {
  Modality modality = Modality::Keyword;
  double strength = 0.0;
  std::string evidence;

  friend bool operator==(const ModalitySignal&, const ModalitySignal&) = default;
};

struct IncapacityVerdict {
  bool incapacitated = false;
  double confidence = 0.0;
  std::vector<ModalitySignal> contributing;
};

inline constexpr double kIncapacityThreshold = 0.5;

inline std::set<std::string> default_keywords() { return {"help", "can't speak", "cant speak"}; }

inline std::set<std::string> default_lexicon() {
  return {"fire", "accident", "blood", "collapsed", "smoke", "intruder", "faint"};
}

/// First phrase (in set order) found in the transcript on word boundaries,
/// case-insensitively.
inline std::optional<ModalitySignal> detect_keywords(std::string_view transcript,
                                                     const std::set<std::string>& keywords = default_keywords()) {
  if (keywords.empty()) throw Error(ErrorCode::InvalidArgument, "keyword set must be non-empty");
  for (const auto& phrase : keywords) {
    if (text::contains_phrase(transcript, phrase)) {
      return ModalitySignal{Modality::Keyword, 1.0, text::to_lower(phrase)};
    }
  }
  return std::nullopt;
}

/// Observed content of one permitted burst window.
struct BurstWindow {
  Seconds duration = 0;
  bool speech_present = false;
};

inline std::optional<ModalitySignal> detect_silence(const BurstWindow& window) {
  if (window.duration <= 0) throw Error(ErrorCode::InvalidWindow, "burst window duration must be > 0");
  if (window.speech_present) return std::nullopt;
  return ModalitySignal{Modality::Silence, 1.0, "no speech in " + std::to_string(window.duration) + "s window"};
}

/// Lexicon scan over a textual media description. Each matched term adds 0.5.
inline std::optional<ModalitySignal> flag_media(std::string_view description, Modality modality,
                                                const std::set<std::string>& lexicon = default_lexicon()) {
  if (modality == Modality::Keyword || modality == Modality::Silence) {
    throw Error(ErrorCode::InvalidArgument, "flag_media expects an image, video or gesture modality");
  }
  std::string evidence;
  int matched = 0;
  for (const auto& term : lexicon) {
    if (text::contains_phrase(description, term)) {
      if (matched++) evidence += ',';
      evidence += text::to_lower(term);
    }
  }
  if (matched == 0) return std::nullopt;
  return ModalitySignal{modality, std::min(1.0, matched / 2.0), evidence};
}

/// Max-fusion over all signals, inclusive at the threshold.
inline IncapacityVerdict assess_incapacity(const std::vector<ModalitySignal>& signals) {
  IncapacityVerdict v;
  for (const auto& s : signals) {
    if (s.strength > 0.0) {
      v.contributing.push_back(s);
      v.confidence = std::max(v.confidence, std::min(1.0, s.strength));
    }
  }
  v.incapacitated = v.confidence >= kIncapacityThreshold;
  return v;
}

}  // namespace gvb
