#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "gvb/incapacity_detector.hpp"
#include "oracles.hpp"

using namespace gvb;

TEST(DetectKeywords, MatchesCaseInsensitively) {
  auto s = detect_keywords("please HELP me");
  ASSERT_TRUE(s);
  EXPECT_EQ(s->modality, Modality::Keyword);
  EXPECT_DOUBLE_EQ(s->strength, 1.0);
  EXPECT_EQ(s->evidence, "help");
}

TEST(DetectKeywords, NoMatch) { EXPECT_FALSE(detect_keywords("everything is fine")); }

TEST(DetectKeywords, RespectsWordBoundaries) {
  EXPECT_FALSE(detect_keywords("helpful advice"));
  EXPECT_FALSE(detect_keywords("unhelp"));
  EXPECT_TRUE(detect_keywords("help!"));
  EXPECT_TRUE(detect_keywords("...help."));
}

TEST(DetectKeywords, MultiWordPhrase) {
  auto s = detect_keywords("I Can't Speak right now");
  ASSERT_TRUE(s);
  EXPECT_EQ(s->evidence, "can't speak");
  EXPECT_TRUE(detect_keywords("cant speak"));
  EXPECT_FALSE(detect_keywords("can't speaker"));
}

TEST(DetectKeywords, AgreesWithRegexOracle) {
  const std::vector<std::string> corpus = {"help",         "Help me",       "helpful",     "self-help",
                                           "HELPS",        "no help here",  "xhelp",       "help_desk",
                                           "can't speak!", "I cant  speak", "cant speak?", "cannot speak"};
  for (const auto& t : corpus) {
    bool expected = false;
    for (const auto& k : default_keywords()) expected = expected || oracle::regex_phrase_match(t, k);
    EXPECT_EQ(detect_keywords(t).has_value(), expected) << t;
  }
}

TEST(DetectKeywords, InvariantUnderCaseChanges) {
  std::mt19937 rng(3);
  const std::string base = "oh no please help i can't speak";
  for (int i = 0; i < 200; ++i) {
    std::string t = base;
    for (char& c : t) {
      if (rng() % 2) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    auto s = detect_keywords(t);
    ASSERT_TRUE(s);
    EXPECT_EQ(s->evidence, detect_keywords(base)->evidence);
  }
}

TEST(DetectKeywords, EmptyKeywordSetRejected) { EXPECT_THROW(detect_keywords("help", {}), Error); }

TEST(DetectSilence, Examples) {
  auto s = detect_silence({5, false});
  ASSERT_TRUE(s);
  EXPECT_EQ(s->modality, Modality::Silence);
  EXPECT_DOUBLE_EQ(s->strength, 1.0);
  EXPECT_FALSE(detect_silence({5, true}));
  try {
    detect_silence({0, false});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidWindow);
  }
}

TEST(FlagMedia, CountsLexiconMatches) {
  auto two = flag_media("smoke and fire in kitchen", Modality::ImageDescription);
  ASSERT_TRUE(two);
  EXPECT_DOUBLE_EQ(two->strength, 1.0);
  EXPECT_EQ(two->evidence, "fire,smoke");

  EXPECT_FALSE(flag_media("sunny garden photo", Modality::ImageDescription));

  auto one = flag_media("person collapsed", Modality::VideoDescription);
  ASSERT_TRUE(one);
  EXPECT_DOUBLE_EQ(one->strength, 0.5);
  EXPECT_EQ(one->modality, Modality::VideoDescription);
}

TEST(FlagMedia, CustomLexiconAndModalityCheck) {
  auto s = flag_media("waving both arms", Modality::Gesture, {"waving"});
  ASSERT_TRUE(s);
  EXPECT_DOUBLE_EQ(s->strength, 0.5);
  EXPECT_THROW(flag_media("fire", Modality::Keyword), Error);
}

TEST(AssessIncapacity, Examples) {
  auto none = assess_incapacity({});
  EXPECT_FALSE(none.incapacitated);
  EXPECT_DOUBLE_EQ(none.confidence, 0.0);

  auto silent = assess_incapacity({{Modality::Silence, 1.0, "quiet"}});
  EXPECT_TRUE(silent.incapacitated);
  EXPECT_DOUBLE_EQ(silent.confidence, 1.0);

  auto boundary = assess_incapacity({{Modality::ImageDescription, 0.5, "collapsed"}, {Modality::Keyword, 0.0, ""}});
  EXPECT_TRUE(boundary.incapacitated);
  EXPECT_DOUBLE_EQ(boundary.confidence, 0.5);
  EXPECT_EQ(boundary.contributing.size(), 1u);

  EXPECT_FALSE(assess_incapacity({{Modality::Gesture, 0.49, "x"}}).incapacitated);
}

TEST(AssessIncapacity, OrderInvariantAndMonotone) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<ModalitySignal> sigs;
    int n = static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) sigs.push_back({static_cast<Modality>(rng() % 5), u(rng), "e"});
    auto v = assess_incapacity(sigs);
    auto shuffled = sigs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto w = assess_incapacity(shuffled);
    ASSERT_EQ(v.incapacitated, w.incapacitated);
    ASSERT_DOUBLE_EQ(v.confidence, w.confidence);
    sigs.push_back({Modality::Gesture, u(rng), "e"});
    ASSERT_GE(assess_incapacity(sigs).confidence, v.confidence);
    if (v.incapacitated) {
      ASSERT_GE(v.confidence, 0.5);
    }
  }
}
