#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "ellgamma/cli.hpp"

using namespace ellgamma;

namespace {

struct Invocation {
  int status;
  std::string out, err;
};

Invocation run(std::vector<std::string> args) {
  args.insert(args.begin(), "ellgamma");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int st = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {st, out.str(), err.str()};
}

std::string kv(const std::string& report, const std::string& key) {
  std::istringstream in(report);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  return "<missing>";
}

std::filesystem::path scratch(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("ellgamma_test_" + name);
}

}  // namespace

TEST(Cli, GammaDefaultBatteryPasses) {
  const Invocation r = run({"gamma", "--ring", "unram(3,6,1)", "--rep", "spherical2(2,1)", "--battery", "default", "--format", "kv"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(kv(r.out, "status"), "pass");
  EXPECT_EQ(kv(r.out, "battery_passed"), kv(r.out, "battery_size"));
  EXPECT_GE(std::stoi(kv(r.out, "battery_size")), 12);
  EXPECT_EQ(kv(r.out, "pivot_independent"), "true");
}

TEST(Cli, NointerpExitsZeroWithWitness) {
  const Invocation r = run({"nointerp", "--l", "3", "--p", "7", "--format", "kv"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(kv(r.out, "obstruction"), "true");
  EXPECT_EQ(kv(r.out, "mismatch_degree"), "1");
}

TEST(Cli, LFactorTrivialCharacter) {
  const Invocation r = run({"lfactor", "--chi", "unram(c=1)", "--format", "kv"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(kv(r.out, "L"), "1/(1-X)");
}

TEST(Cli, IdenticalInvocationsAreByteIdentical) {
  const std::vector<std::vector<std::string>> invocations{
      {"gamma", "--rep", "spherical(2,1+s)"},
      {"zeta", "--rep", "spherical(2,1,1)", "--j", "1"},
      {"congruence", "--rep", "spherical(2,1+t)", "--rep2", "twist(spherical(2,1+t),tame(c=1,g=t))"},
      {"nointerp"},
  };
  for (const auto& args : invocations) {
    const Invocation a = run(args), b = run(args);
    ASSERT_EQ(a.status, 0) << args[0] << ": " << a.err;
    EXPECT_EQ(a.out, b.out) << args[0];
  }
}

TEST(Cli, ReportHasAllThreeSections) {
  const Invocation r = run({"lfactor", "--chi", "unram(c=1)"});
  ASSERT_EQ(r.status, 0);
  const auto kv_at = r.out.find("--- key=value ---"), json_at = r.out.find("--- json ---");
  ASSERT_NE(kv_at, std::string::npos);
  ASSERT_NE(json_at, std::string::npos);
  EXPECT_LT(kv_at, json_at);
  const auto j = nlohmann::json::parse(r.out.substr(r.out.find('\n', json_at) + 1));
  EXPECT_EQ(j["command"], "lfactor");
  EXPECT_EQ(j["L"], "1/(1-X)");
}

TEST(Cli, ParseErrorsExitTwoWithPosition) {
  const Invocation r = run({"gamma", "--ring", "unram(3,6", "--rep", "spherical2(2,1)"});
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find('^'), std::string::npos) << r.err;
  EXPECT_EQ(run({"gamma", "--rep", "sphericul(2,1)"}).status, 2);
  EXPECT_EQ(run({"gamma", "--bogus-flag"}).status, 2);
  EXPECT_EQ(run({"lfactor", "--ring", "ram(3,6,t^2+t+1)", "--p", "7", "--chi", "unram(c=2+t)"}).status, 2);
}

TEST(Cli, ContractErrorsExitTwo) {
  // l = 3 does not divide p - 1 = 4
  EXPECT_EQ(run({"nointerp", "--l", "3", "--p", "5"}).status, 2);
  // 2^60 overflows the p-adic digit budget
  EXPECT_EQ(run({"gamma", "--precision", "60"}).status, 2);
}

TEST(Cli, OutputFileMatchesStdout) {
  const auto path = scratch("out.txt");
  const Invocation a = run({"lfactor", "--chi", "tame(c=1+t,g=t)"});
  const Invocation b = run({"lfactor", "--chi", "tame(c=1+t,g=t)", "--output", path.string()});
  ASSERT_EQ(b.status, 0) << b.err;
  std::ifstream in(path);
  std::stringstream file;
  file << in.rdbuf();
  EXPECT_EQ(file.str(), a.out);
  std::filesystem::remove(path);
}

TEST(Cli, ConfigFileSuppliesOptions) {
  const auto path = scratch("config.ini");
  {
    std::ofstream cfg(path);
    cfg << "format = \"kv\"\n";
  }
  const Invocation r = run({"--config", path.string(), "lfactor", "--chi", "unram(c=1)"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out.find("--- json ---"), std::string::npos);
  EXPECT_EQ(kv(r.out, "L"), "1/(1-X)");
  std::filesystem::remove(path);
}

TEST(Cli, SpecializeFamilyFile) {
  const Invocation r = run({"specialize", "--family", ELLGAMMA_DEMO_DATA "/tame_twist.family", "--format", "kv"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(kv(r.out, "status"), "pass");
}

TEST(Cli, VerifyFeOnRamifiedTwist) {
  const Invocation r = run({"verify-fe", "--ring", "unram(17,3,1)", "--rep", "avg(twist(spherical(2,1),char(c=1,a=2,g=[-1])),2)", "--conductor", "2", "--format", "kv"});
  EXPECT_EQ(r.status, 0) << r.err << r.out;
}
