#include <gtest/gtest.h>

#include "gvb/scenario.hpp"

using namespace gvb;

namespace {

ErrorCode parse_error_code(std::string_view text, int* line = nullptr) {
  try {
    parse_scenario(text);
  } catch (const ParseError& e) {
    if (line) *line = e.line();
    return e.code();
  }
  ADD_FAILURE() << "parsed: " << text;
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(ParseScenario, SubscriberLine) {
  auto ev = parse_scenario("subscriber A home=(0,0) home=(3,4) usual_hours=8-22,23 resting_hr=65 usual_moving=1");
  ASSERT_EQ(ev.size(), 1u);
  const auto& s = std::get<RegisterSubscriber>(ev[0].args);
  EXPECT_EQ(s.id.str(), "A");
  EXPECT_EQ(s.profile.usual_locations.size(), 2u);
  EXPECT_EQ(s.profile.usual_hours.size(), 16u);
  EXPECT_DOUBLE_EQ(s.profile.resting_heart_rate, 65);
  EXPECT_TRUE(s.profile.usual_moving);
}

TEST(ParseScenario, SubscriberDefaults) {
  auto ev = parse_scenario("subscriber Z");
  const auto& s = std::get<RegisterSubscriber>(ev[0].args);
  EXPECT_EQ(s.profile.usual_hours.size(), 24u);
  EXPECT_TRUE(s.profile.usual_locations.empty());
  EXPECT_DOUBLE_EQ(s.profile.resting_heart_rate, 70);
}

TEST(ParseScenario, PolicyLine) {
  auto ev = parse_scenario("policy A t=5 G=30 N=3 approve=C,D");
  const auto& p = std::get<SetPolicy>(ev[0].args).policy;
  EXPECT_EQ(p.callee.str(), "A");
  EXPECT_EQ(p.burst_seconds, 5);
  EXPECT_EQ(p.gap_seconds, 30);
  EXPECT_EQ(p.max_bursts, 3);
  EXPECT_EQ(p.approved_callers.size(), 2u);
}

TEST(ParseScenario, CallWithContext) {
  auto ev = parse_scenario("at 30 call D A loc=(40,3) loctype=highway hour=3 hr=130 speed=14");
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].at, 30);
  const auto& c = std::get<PlaceCall>(ev[0].args);
  EXPECT_EQ(c.caller.str(), "D");
  EXPECT_EQ(c.context.location_type, LocationType::Highway);
  EXPECT_TRUE(c.has_location_type);
  ASSERT_TRUE(c.context.location);
  EXPECT_DOUBLE_EQ(c.context.location->x, 40);
  EXPECT_EQ(c.context.hour_of_day, 3);
  EXPECT_EQ(c.context.heart_rate, 130);
  EXPECT_EQ(c.context.moving_speed, 14);
}

TEST(ParseScenario, BurstVariants) {
  auto ev = parse_scenario(
      "at 5 burst C transcript=\"help me \\\"now\\\"\" image=\"smoke in hall\"\n"
      "at 9 burst C silence keywords=fire duration=3\n");
  ASSERT_EQ(ev.size(), 2u);
  const auto& a = std::get<BurstAttempt>(ev[0].args);
  EXPECT_EQ(a.transcript, "help me \"now\"");
  EXPECT_EQ(a.image, "smoke in hall");
  const auto& b = std::get<BurstAttempt>(ev[1].args);
  EXPECT_FALSE(b.transcript);
  EXPECT_EQ(b.keywords, "fire");
  EXPECT_EQ(b.duration, 3);
}

TEST(ParseScenario, CommentsBlankLinesAndTimeCarryOver) {
  auto ev = parse_scenario(
      "# header\n"
      "\n"
      "subscriber A   # trailing comment\n"
      "at 12 hangup A\n"
      "answer A\n"
      "dismiss A\r\n");
  ASSERT_EQ(ev.size(), 4u);
  EXPECT_EQ(ev[0].at, 0);
  EXPECT_EQ(ev[0].line, 3);
  EXPECT_EQ(ev[2].at, 12);
  EXPECT_TRUE(std::holds_alternative<Answer>(ev[2].args));
  EXPECT_TRUE(std::holds_alternative<Dismiss>(ev[3].args));
}

TEST(ParseScenario, ConfigDirectives) {
  auto ev = parse_scenario(
      "weights 1,2,0,1\n"
      "thresholds 0.8,0.5,0.2\n"
      "keywords \"help,Can't Speak\"\n"
      "lexicon \"fire,flood\"\n"
      "at 3 media C video \"person collapsed\"\n");
  EXPECT_EQ(std::get<SetWeights>(ev[0].args).weights, (FactorWeights{1, 2, 0, 1}));
  EXPECT_DOUBLE_EQ(std::get<SetThresholds>(ev[1].args).thresholds.connect, 0.8);
  EXPECT_EQ(std::get<SetKeywords>(ev[2].args).keywords, (std::set<std::string>{"help", "can't speak"}));
  EXPECT_EQ(std::get<SetLexicon>(ev[3].args).lexicon.size(), 2u);
  const auto& m = std::get<MediaDescription>(ev[4].args);
  EXPECT_EQ(m.modality, Modality::VideoDescription);
  EXPECT_EQ(m.description, "person collapsed");
}

TEST(ParseScenario, Errors) {
  int line = 0;
  EXPECT_EQ(parse_error_code("subscriber A\nfrobnicate A\n", &line), ErrorCode::UnknownDirective);
  EXPECT_EQ(line, 2);
  EXPECT_EQ(parse_error_code("at -1 hangup A"), ErrorCode::BadArgument);
  EXPECT_EQ(parse_error_code("at 1.5 hangup A"), ErrorCode::BadArgument);
  EXPECT_EQ(parse_error_code("policy A t=0 G=30 N=3"), ErrorCode::BadArgument);
  EXPECT_EQ(parse_error_code("policy A t=5 G=30"), ErrorCode::ParseError);
  EXPECT_EQ(parse_error_code("call A"), ErrorCode::ParseError);
  EXPECT_EQ(parse_error_code("call A B hour=24"), ErrorCode::BadArgument);
  EXPECT_EQ(parse_error_code("call A B loctype=Moon"), ErrorCode::BadArgument);
  EXPECT_EQ(parse_error_code("call A B color=red"), ErrorCode::BadArgument);
  EXPECT_EQ(parse_error_code("burst C"), ErrorCode::ParseError);
  EXPECT_EQ(parse_error_code("burst C silence transcript=\"x\""), ErrorCode::ParseError);
  EXPECT_EQ(parse_error_code("burst C transcript=\"unterminated"), ErrorCode::ParseError);
  EXPECT_EQ(parse_error_code("weights 0,0,0,0"), ErrorCode::BadArgument);
  EXPECT_EQ(parse_error_code("thresholds 0.3,0.6,0.9"), ErrorCode::BadArgument);
  EXPECT_EQ(parse_error_code("subscriber A home=0,0"), ErrorCode::BadArgument);
  EXPECT_EQ(parse_error_code("hangup A B"), ErrorCode::BadArgument);
}
