#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sim_helpers.hpp"

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult gvbsim(const std::string& args) {
  std::string cmd = std::string(GVBSIM_PATH) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string temp_file(const std::string& name, const std::string& content) {
  auto dir = std::filesystem::temp_directory_path() / "gvb_cli_test";
  std::filesystem::create_directories(dir);
  auto path = dir / name;
  std::ofstream(path) << content;
  return path.string();
}

}  // namespace

TEST(Cli, RunPrintsTrace) {
  auto r = gvbsim("run " + testing_support::scenario_path("fig1_preapproved.scn"));
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out, testing_support::render(testing_support::run_file("fig1_preapproved.scn")));
}

TEST(Cli, RunWritesTraceFile) {
  auto out = (std::filesystem::temp_directory_path() / "gvb_cli_test_trace.txt").string();
  auto r = gvbsim("run " + testing_support::scenario_path("fig2_runtime_override.scn") + " --trace " + out);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(out);
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first.rfind("t=0 seq=1 SIM_HARNESS SUBSCRIBER_REGISTERED", 0), 0u) << first;
}

TEST(Cli, ParseErrorExitsTwo) {
  auto bad = temp_file("bad.scn", "subscriber A\nfrobnicate\n");
  EXPECT_EQ(gvbsim("run " + bad).exit_code, 2);
  EXPECT_EQ(gvbsim("run /nonexistent/file.scn").exit_code, 2);
  EXPECT_EQ(gvbsim("run " + testing_support::scenario_path("fig1_preapproved.scn") + " --weights 0,0,0,0").exit_code, 2);
  EXPECT_EQ(gvbsim("bogus").exit_code, 2);
}

TEST(Cli, SimErrorExitsOne) {
  auto bad = temp_file("sim_err.scn", "subscriber A\nat 0 call A Z\n");
  EXPECT_EQ(gvbsim("run " + bad).exit_code, 1);
}

TEST(Cli, Score) {
  auto profile = temp_file("profile.scn", "subscriber D home=(0,0) usual_hours=8-22 resting_hr=70\n");
  auto r = gvbsim("score --profile " + profile + " --loctype Highway --loc 40,3 --hour 3 --hr 130 --speed 14");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out,
            "location=1.000000 timing=0.833333 health=1.000000 activity=1.000000 score=0.958333 tier=Highest "
            "routing=ConnectOverride\n");
  EXPECT_EQ(gvbsim("score --profile " + profile + " --hour 25").exit_code, 2);
}

TEST(Cli, Gen) {
  auto r = gvbsim("gen --keywords accident --t 5");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out, "text=\"I have met an accident. Please send an ambulance.\" words=9 seconds=3.600 backend=Template\n");
}
