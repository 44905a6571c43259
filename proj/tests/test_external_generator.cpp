#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>

#include "gvb/external_generator.hpp"

using namespace gvb;
using namespace std::chrono_literals;

namespace {

class ScriptedTransport : public LineTransport {
 public:
  explicit ScriptedTransport(ExchangeResult r) : result_(std::move(r)) {}
  ExchangeResult exchange(std::string_view line, std::chrono::milliseconds) override {
    last_request = std::string(line);
    return result_;
  }
  std::string last_request;

 private:
  ExchangeResult result_;
};

std::filesystem::path write_script(const std::string& name, const std::string& body) {
  auto dir = std::filesystem::temp_directory_path() / "gvb_ext_test";
  std::filesystem::create_directories(dir);
  auto path = dir / name;
  std::ofstream(path) << "#!/bin/sh\n" << body;
  std::filesystem::permissions(path, std::filesystem::perms::owner_all);
  return path;
}

}  // namespace

TEST(PercentEncoding, EscapesOnlyReservedCharacters) {
  EXPECT_EQ(percent_encode("a b%c\nd"), "a%20b%25c%0Ad");
  EXPECT_EQ(percent_encode("keywords: fire;"), "keywords:%20fire;");
}

TEST(PercentEncoding, DecodeRejectsMalformed) {
  EXPECT_EQ(percent_decode("a%20b"), "a b");
  EXPECT_EQ(percent_decode("%41"), "A");
  EXPECT_FALSE(percent_decode("%2"));
  EXPECT_FALSE(percent_decode("%zz"));
}

TEST(PercentEncoding, RoundTripProperty) {
  std::mt19937 rng(17);
  for (int i = 0; i < 5000; ++i) {
    std::string s;
    int n = static_cast<int>(rng() % 30);
    for (int k = 0; k < n; ++k) s += static_cast<char>(1 + rng() % 255);
    auto enc = percent_encode(s);
    ASSERT_EQ(enc.find(' '), std::string::npos);
    ASSERT_EQ(enc.find('\n'), std::string::npos);
    ASSERT_EQ(percent_decode(enc), s);
  }
}

TEST(Protocol, RequestLineFormat) {
  GenerationParams p;
  p.rng_seed = 42;
  EXPECT_EQ(format_generate_request("keywords: fire", p),
            "GENERATE max_words=50 temperature=0.9 sample=1 seed_rng=42 text=keywords:%20fire");
  auto parsed = parse_generate_request(format_generate_request("a b", p));
  ASSERT_TRUE(parsed);
  EXPECT_EQ(parsed->seed, "a b");
  EXPECT_EQ(parsed->params.rng_seed, 42u);
  EXPECT_FALSE(parse_generate_request("GENERATE text=x"));
}

TEST(Protocol, ReplyParsing) {
  auto ok = parse_generate_reply("OK text=Send%20help");
  ASSERT_TRUE(ok);
  EXPECT_TRUE(ok->ok);
  EXPECT_EQ(ok->text, "Send help");
  auto err = parse_generate_reply("ERR overloaded");
  ASSERT_TRUE(err);
  EXPECT_FALSE(err->ok);
  EXPECT_EQ(err->text, "overloaded");
  EXPECT_FALSE(parse_generate_reply("hello"));
}

TEST(GenerateMessage, ExternalSuccess) {
  ScriptedTransport t({ExchangeStatus::Ok, "OK text=Car%20crash.%20Send%20help."});
  auto out = generate_message("keywords: accident", GenerationParams{}, BackendKind::External, &t);
  EXPECT_FALSE(out.fallback_reason);
  EXPECT_EQ(out.message.text, "Car crash. Send help.");
  EXPECT_EQ(out.message.backend, BackendKind::External);
  EXPECT_EQ(out.request_line, t.last_request);
}

TEST(GenerateMessage, FallbackReasons) {
  struct Case {
    ExchangeResult result;
    std::string reason;
  };
  std::vector<Case> cases = {{{ExchangeStatus::Timeout, ""}, "timeout"},
                             {{ExchangeStatus::Unavailable, ""}, "unavailable"},
                             {{ExchangeStatus::Ok, "garbage"}, "malformed"},
                             {{ExchangeStatus::Ok, "ERR busy"}, "ERR busy"},
                             {{ExchangeStatus::Ok, "OK text="}, "empty"}};
  for (const auto& c : cases) {
    ScriptedTransport t(c.result);
    auto out = generate_message("accident", GenerationParams{}, BackendKind::External, &t);
    ASSERT_TRUE(out.fallback_reason);
    EXPECT_EQ(*out.fallback_reason, c.reason);
    EXPECT_EQ(out.message.backend, BackendKind::Template);
    EXPECT_EQ(out.message.text, "I have met an accident. Please send an ambulance.");
  }
  auto none = generate_message("accident", GenerationParams{}, BackendKind::External, nullptr);
  EXPECT_EQ(none.fallback_reason, "unavailable");
}

TEST(SubprocessTransport, ExchangesWithChildProcess) {
  auto script = write_script("echo_ok.sh", "while read line; do echo 'OK text=Stub%20reply.'; done\n");
  SubprocessTransport t(script.string());
  auto first = t.exchange("GENERATE x", 2000ms);
  EXPECT_EQ(first.status, ExchangeStatus::Ok);
  EXPECT_EQ(first.line, "OK text=Stub%20reply.");
  auto second = t.exchange("GENERATE y", 2000ms);
  EXPECT_EQ(second.line, "OK text=Stub%20reply.");
}

TEST(SubprocessTransport, TimesOutOnSilentChild) {
  auto script = write_script("sleepy.sh", "read line; sleep 30\n");
  SubprocessTransport t(script.string());
  auto start = std::chrono::steady_clock::now();
  auto r = t.exchange("GENERATE x", 200ms);
  auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_EQ(r.status, ExchangeStatus::Timeout);
  EXPECT_LT(elapsed, 5s);
}

TEST(SubprocessTransport, ExitedChildIsUnavailable) {
  auto script = write_script("quits.sh", "exit 0\n");
  SubprocessTransport t(script.string());
  EXPECT_EQ(t.exchange("GENERATE x", 1000ms).status, ExchangeStatus::Unavailable);
  SubprocessTransport missing("/nonexistent/generator-binary");
  EXPECT_EQ(missing.exchange("GENERATE x", 1000ms).status, ExchangeStatus::Unavailable);
}
