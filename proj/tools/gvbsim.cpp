// gvbsim: scenario runner and one-shot scoring/generation front end.
//
//   gvbsim run <scenario> [--trace <path>] [--weights a,b,c,d] [--thresholds c,v,t]
//              [--backend template|external=<command>] [--rng-seed <uint>] [--speaking-rate <wps>]
//   gvbsim score --profile <file> [--loctype ..] [--hour ..] [--hr ..] [--speed ..] [--loc x,y]
//   gvbsim gen --keywords "<text>" [--t <s>]
//
// Exit codes: 0 success, 1 simulation error, 2 parse/usage error.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "gvb/gvb.hpp"

namespace {

constexpr int kExitSimError = 1;
constexpr int kExitParseError = 2;

struct BackendChoice {
  gvb::BackendKind kind = gvb::BackendKind::Template;
  std::string command;
};

BackendChoice parse_backend(const std::string& value) {
  if (value == "template") return {};
  if (value.starts_with("external=") && value.size() > 9) return {gvb::BackendKind::External, value.substr(9)};
  throw gvb::Error(gvb::ErrorCode::BadArgument, "--backend must be 'template' or 'external=<command>'");
}

gvb::FactorWeights parse_weights(const std::string& s) {
  auto parts = gvb::text::split(s, ',');
  if (parts.size() != 4) throw gvb::Error(gvb::ErrorCode::BadArgument, "--weights needs 4 values");
  gvb::FactorWeights w{};
  for (std::size_t i = 0; i < 4; ++i) {
    auto v = gvb::text::parse_double(gvb::text::trim(parts[i]));
    if (!v) throw gvb::Error(gvb::ErrorCode::BadArgument, "bad weight '" + parts[i] + "'");
    w[i] = *v;
  }
  gvb::validate_weights(w);
  return w;
}

gvb::TierThresholds parse_thresholds(const std::string& s) {
  auto parts = gvb::text::split(s, ',');
  if (parts.size() != 3) throw gvb::Error(gvb::ErrorCode::BadArgument, "--thresholds needs 3 values");
  double v[3];
  for (std::size_t i = 0; i < 3; ++i) {
    auto x = gvb::text::parse_double(gvb::text::trim(parts[i]));
    if (!x) throw gvb::Error(gvb::ErrorCode::BadArgument, "bad threshold '" + parts[i] + "'");
    v[i] = *x;
  }
  gvb::TierThresholds th{v[0], v[1], v[2]};
  gvb::validate(th);
  return th;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw gvb::Error(gvb::ErrorCode::BadArgument, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generative voice burst call-waiting simulator"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run a scenario file and emit its trace");
  std::string scenario_path, trace_path, weights, thresholds, backend = "template";
  std::uint64_t rng_seed = 0;
  double speaking_rate = gvb::kDefaultSpeakingRate;
  long long gen_timeout_ms = gvb::kDefaultExternalTimeout.count();
  long long abandon_after = 120;
  run->add_option("scenario", scenario_path, "Scenario file")->required();
  run->add_option("--trace", trace_path, "Write the trace here instead of stdout");
  run->add_option("--weights", weights, "Factor weights: location,timing,health,activity");
  run->add_option("--thresholds", thresholds, "Tier thresholds: connect,voice,text");
  run->add_option("--backend", backend, "template | external=<command>");
  run->add_option("--rng-seed", rng_seed, "Seed forwarded to the generator");
  run->add_option("--speaking-rate", speaking_rate, "Words per second used to fit bursts");
  run->add_option("--gen-timeout-ms", gen_timeout_ms, "External generator timeout");
  run->add_option("--abandon-after", abandon_after, "Idle seconds before a waiting call is abandoned");

  // score
  auto* score = app.add_subcommand("score", "Score one caller context against a baseline profile");
  std::string profile_path, loctype = "Other", loc;
  std::optional<int> hour;
  std::optional<double> hr, speed;
  std::string score_weights, score_thresholds;
  score->add_option("--profile", profile_path, "File holding a 'subscriber' line (scenario syntax)")->required();
  score->add_option("--loctype", loctype, "Home|Office|Highway|Hospital|Bank|Isolated|Other");
  score->add_option("--loc", loc, "Caller position x,y in km");
  score->add_option("--hour", hour, "Hour of day 0-23");
  score->add_option("--hr", hr, "Heart rate, bpm");
  score->add_option("--speed", speed, "Moving speed, m/s");
  score->add_option("--weights", score_weights, "Factor weights");
  score->add_option("--thresholds", score_thresholds, "Tier thresholds");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate one emergency message");
  std::string keywords, image, location, gen_backend = "template";
  long long t = 5;
  double gen_rate = gvb::kDefaultSpeakingRate;
  std::uint64_t gen_seed = 0;
  gen->add_option("--keywords", keywords, "Caller keywords")->required();
  gen->add_option("--image", image, "Image description");
  gen->add_option("--location", location, "Location type");
  gen->add_option("--t", t, "Burst duration in seconds");
  gen->add_option("--backend", gen_backend, "template | external=<command>");
  gen->add_option("--rng-seed", gen_seed, "Seed forwarded to the generator");
  gen->add_option("--speaking-rate", gen_rate, "Words per second");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParseError;
  }

  try {
    if (*run) {
      gvb::SimConfig cfg;
      BackendChoice b = parse_backend(backend);
      cfg.backend = b.kind;
      cfg.external_command = b.command;
      if (!weights.empty()) cfg.priority.weights = parse_weights(weights);
      if (!thresholds.empty()) cfg.priority.thresholds = parse_thresholds(thresholds);
      cfg.rng_seed = rng_seed;
      cfg.speaking_rate = speaking_rate;
      cfg.external_timeout = std::chrono::milliseconds(gen_timeout_ms);
      cfg.abandon_after = abandon_after;

      auto events = gvb::parse_scenario(read_file(scenario_path));
      std::vector<gvb::TraceRecord> trace;
      try {
        trace = gvb::run_scenario(events, cfg);
      } catch (const gvb::Error& e) {
        std::cerr << "gvbsim: " << e.what() << '\n';
        return kExitSimError;
      }
      if (trace_path.empty()) {
        gvb::write_trace(std::cout, trace);
      } else {
        std::ofstream out(trace_path, std::ios::binary);
        if (!out) {
          std::cerr << "gvbsim: cannot write " << trace_path << '\n';
          return kExitSimError;
        }
        gvb::write_trace(out, trace);
      }
      return 0;
    }

    if (*score) {
      auto events = gvb::parse_scenario(read_file(profile_path));
      gvb::PriorityConfig cfg;
      std::optional<gvb::BaselineProfile> profile;
      for (const auto& ev : events) {
        if (const auto* s = std::get_if<gvb::RegisterSubscriber>(&ev.args); s && !profile) profile = s->profile;
        if (const auto* w = std::get_if<gvb::SetWeights>(&ev.args)) cfg.weights = w->weights;
        if (const auto* th = std::get_if<gvb::SetThresholds>(&ev.args)) cfg.thresholds = th->thresholds;
      }
      if (!profile) throw gvb::ParseError(gvb::ErrorCode::ParseError, 0, "profile file has no subscriber line");
      if (!score_weights.empty()) cfg.weights = parse_weights(score_weights);
      if (!score_thresholds.empty()) cfg.thresholds = parse_thresholds(score_thresholds);

      gvb::CallerContext ctx;
      auto type = gvb::parse_location_type(loctype);
      if (!type) throw gvb::Error(gvb::ErrorCode::BadArgument, "unknown location type '" + loctype + "'");
      ctx.location_type = *type;
      if (!loc.empty()) {
        auto parts = gvb::text::split(loc, ',');
        auto x = parts.size() == 2 ? gvb::text::parse_double(gvb::text::trim(parts[0])) : std::nullopt;
        auto y = parts.size() == 2 ? gvb::text::parse_double(gvb::text::trim(parts[1])) : std::nullopt;
        if (!x || !y) throw gvb::Error(gvb::ErrorCode::BadArgument, "--loc expects x,y");
        ctx.location = gvb::Point{*x, *y};
      }
      ctx.hour_of_day = hour;
      ctx.heart_rate = hr;
      ctx.moving_speed = speed;
      gvb::validate(ctx);

      auto a = gvb::assess(ctx, *profile, cfg);
      auto routing = gvb::route(a.tier, false);
      std::cout << "location=" << gvb::text::format_fixed(a.factor_scores[0])
                << " timing=" << gvb::text::format_fixed(a.factor_scores[1])
                << " health=" << gvb::text::format_fixed(a.factor_scores[2])
                << " activity=" << gvb::text::format_fixed(a.factor_scores[3])
                << " score=" << gvb::text::format_fixed(a.emergency_score) << " tier=" << gvb::to_string(a.tier)
                << " routing=" << gvb::to_string(routing.kind) << '\n';
      return 0;
    }

    if (*gen) {
      gvb::SeedBundle bundle;
      bundle.keywords = keywords;
      if (!image.empty()) bundle.image_desc = image;
      if (!location.empty()) bundle.location_type = location;
      gvb::GenerationParams params;
      params.rng_seed = gen_seed;
      BackendChoice b = parse_backend(gen_backend);
      std::unique_ptr<gvb::LineTransport> transport;
      if (b.kind == gvb::BackendKind::External) transport = std::make_unique<gvb::SubprocessTransport>(b.command);

      auto outcome = gvb::generate_message(gvb::compose_seed(bundle), params, b.kind, transport.get(),
                                           gvb::kDefaultExternalTimeout, gen_rate);
      if (outcome.fallback_reason) std::cerr << "gvbsim: external generator fallback: " << *outcome.fallback_reason << '\n';
      auto fitted = gvb::fit_to_duration(outcome.message, t, gen_rate);
      std::cout << "text=" << gvb::quote_trace_value(fitted.text) << " words=" << fitted.word_count
                << " seconds=" << gvb::text::format_fixed(fitted.estimated_speech_seconds, 3)
                << " backend=" << gvb::to_string(fitted.backend) << '\n';
      return 0;
    }
  } catch (const gvb::Error& e) {
    std::cerr << "gvbsim: " << e.what() << '\n';
    return kExitParseError;
  }
  return 0;
}
