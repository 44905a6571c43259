#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gvb/common.hpp"

namespace gvb {

/// Contextual inputs a generated emergency message is seeded from. Fields are
/// emitted in declaration order by compose_seed.
struct SeedBundle {
  std::optional<std::string> keywords;
  std::optional<std::string> gesture_desc;
  std::optional<std::string> image_desc;
  std::optional<std::string> video_desc;
  std::optional<std::string> background_speech;
  std::optional<std::string> background_noise_desc;
  std::optional<std::string> context_summary;
  std::optional<std::string> location_type;

  bool empty() const {
    return !keywords && !gesture_desc && !image_desc && !video_desc && !background_speech &&
           !background_noise_desc && !context_summary && !location_type;
  }
};

struct GenerationParams {
  int max_words = 50;
  double temperature = 0.9;
  bool sampling = true;
  std::uint64_t rng_seed = 0;
};

inline void validate(const GenerationParams& p) {
  if (p.max_words < 1) throw Error(ErrorCode::InvalidArgument, "max_words must be >= 1");
  if (!(p.temperature > 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be > 0");
}

enum class BackendKind { Template, External };

inline const char* to_string(BackendKind b) { return b == BackendKind::Template ? "Template" : "External"; }

inline constexpr double kDefaultSpeakingRate = 2.5;  // words per second

struct GeneratedMessage {
  std::string text;
  std::size_t word_count = 0;
  double estimated_speech_seconds = 0.0;
  BackendKind backend = BackendKind::Template;
};

inline GeneratedMessage make_message(std::string text_value, BackendKind backend,
                                     double speaking_rate = kDefaultSpeakingRate) {
  if (!(speaking_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "speaking rate must be > 0");
  GeneratedMessage m;
  m.text = std::move(text_value);
  m.word_count = text::word_count(m.text);
  m.estimated_speech_seconds = static_cast<double>(m.word_count) / speaking_rate;
  m.backend = backend;
  return m;
}

namespace detail {

struct SeedField {
  const char* label;
  std::optional<std::string> SeedBundle::*member;
};

inline constexpr std::array<SeedField, 8> kSeedFields = {{
    {"keywords", &SeedBundle::keywords},
    {"gesture", &SeedBundle::gesture_desc},
    {"image", &SeedBundle::image_desc},
    {"video", &SeedBundle::video_desc},
    {"speech", &SeedBundle::background_speech},
    {"noise", &SeedBundle::background_noise_desc},
    {"context", &SeedBundle::context_summary},
    {"location", &SeedBundle::location_type},
}};

}  // namespace detail

inline std::string compose_seed(const SeedBundle& bundle) {
  if (bundle.empty()) throw Error(ErrorCode::EmptyBundle, "seed bundle has no fields");
  std::string seed;
  for (const auto& field : detail::kSeedFields) {
    const auto& value = bundle.*(field.member);
    if (!value) continue;
    if (!seed.empty()) seed += "; ";
    seed += field.label;
    seed += ": ";
    seed += *value;
  }
  return seed;
}

/// Value of a labeled segment ("location: Highway") inside a composed seed.
inline std::optional<std::string> seed_field(std::string_view seed, std::string_view label) {
  const std::string prefix = std::string(label) + ": ";
  std::size_t start = 0;
  while (start <= seed.size()) {
    std::size_t end = seed.find("; ", start);
    if (end == std::string_view::npos) end = seed.size();
    std::string_view segment = seed.substr(start, end - start);
    if (segment.starts_with(prefix)) return std::string(segment.substr(prefix.size()));
    start = end + 2;
  }
  return std::nullopt;
}

namespace detail {

inline bool ends_sentence(std::string_view word) {
  if (word.empty()) return false;
  char c = word.back();
  return c == '.' || c == '!' || c == '?';
}

/// Longest prefix of whole sentences within `budget` words; the first
/// `budget` words when even the first sentence is longer.
inline std::string truncate_words(const std::vector<std::string>& words, std::size_t budget) {
  std::size_t keep = 0;
  for (std::size_t i = 0; i < words.size() && i < budget; ++i) {
    if (ends_sentence(words[i])) keep = i + 1;
  }
  if (keep == 0) keep = std::min(budget, words.size());
  std::string out;
  for (std::size_t i = 0; i < keep; ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

inline std::string bare_word(std::string_view word) {
  std::string out;
  for (char c : word) {
    if (text::is_word_char(c)) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

/// True when the output contains "emergency" or any word of the seed.
inline bool echoes_seed(std::string_view output, std::string_view seed) {
  std::vector<std::string> seed_words;
  for (const auto& w : text::split_whitespace(seed)) seed_words.push_back(bare_word(w));
  for (const auto& w : text::split_whitespace(output)) {
    const std::string b = bare_word(w);
    if (b.empty()) continue;
    if (b == "emergency") return true;
    if (std::find(seed_words.begin(), seed_words.end(), b) != seed_words.end()) return true;
  }
  return false;
}

struct TemplateRule {
  const char* trigger;
  const char* response;
};

// Each response contains its trigger word so the output always echoes the seed.
inline constexpr std::array<TemplateRule, 9> kTemplateRules = {{
    {"fire", "The house is on fire. Please send help immediately."},
    {"smoke", "There is smoke everywhere. Please send the fire brigade."},
    {"accident", "I have met an accident. Please send an ambulance."},
    {"thief", "A thief has entered the house. Please call the police."},
    {"intruder", "There is an intruder in the house. Please call the police."},
    {"fainting", "I am fainting. Please send medical help."},
    {"faint", "I am about to faint. Please send medical help."},
    {"collapsed", "I have collapsed. Please send medical help."},
    {"blood", "I am losing blood. Please send an ambulance."},
}};

}  // namespace detail

/// Deterministic rule-table backend. Every matched rule contributes its
/// response in table order; unmatched seeds get the "Emergency." fallback.
/// A labeled location in the seed is appended as a final sentence.
inline GeneratedMessage template_generate(std::string_view seed, const GenerationParams& params,
                                          double speaking_rate = kDefaultSpeakingRate) {
  if (text::trim(seed).empty()) throw Error(ErrorCode::EmptySeed, "seed text is empty");
  validate(params);

  std::string out;
  for (const auto& rule : detail::kTemplateRules) {
    if (!text::contains_phrase(seed, rule.trigger)) continue;
    if (!out.empty()) out += ' ';
    out += rule.response;
  }
  if (out.empty()) out = "Emergency. Please call back immediately.";
  if (auto location = seed_field(seed, "location"); location && !text::trim(*location).empty()) {
    out += " Location: " + text::trim(*location) + ".";
  }

  auto words = text::split_whitespace(out);
  if (words.size() > static_cast<std::size_t>(params.max_words)) {
    out = detail::truncate_words(words, static_cast<std::size_t>(params.max_words));
    if (!detail::ends_sentence(out)) out += '.';
    if (!detail::echoes_seed(out, seed)) out = "Emergency.";
  }
  return make_message(std::move(out), BackendKind::Template, speaking_rate);
}

/// Word budget of a t-second burst, guaranteed to satisfy budget / rate <= t.
inline std::size_t burst_word_budget(Seconds t, double speaking_rate) {
  if (t < 1) throw Error(ErrorCode::InvalidArgument, "burst duration must be >= 1");
  if (!(speaking_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "speaking rate must be > 0");
  auto budget = static_cast<std::size_t>(std::floor(static_cast<double>(t) * speaking_rate));
  while (budget > 0 && static_cast<double>(budget) / speaking_rate > static_cast<double>(t)) --budget;
  if (budget == 0) throw Error(ErrorCode::InvalidArgument, "speaking rate too low for a one-word burst");
  return budget;
}

inline GeneratedMessage fit_to_duration(const GeneratedMessage& msg, Seconds t,
                                        double speaking_rate = kDefaultSpeakingRate) {
  const std::size_t budget = burst_word_budget(t, speaking_rate);
  if (msg.word_count <= budget) return make_message(msg.text, msg.backend, speaking_rate);
  return make_message(detail::truncate_words(text::split_whitespace(msg.text), budget), msg.backend,
                      speaking_rate);
}

}  // namespace gvb
