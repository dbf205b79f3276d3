#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "spinesim/errors.hpp"

using namespace spinesim;
using namespace spinesim::cli;

namespace {

RunConfig make(const std::string& command, const std::string& text, Overrides ov = {}) {
  return resolve_config(command, parse_config_text(text, "test.json"), ov);
}

template <class Fn>
std::string render(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

const char* kYule = R"({"model":{"id":"yule","b":1,"m":2},"population":{"horizon":2}})";
const char* kLinear = R"({"model":{"id":"linear_growth","a":1,"alpha":1},"auxiliary":{"t":2}})";

}  // namespace

TEST(Cli, SimulateIsDeterministicAcrossThreads) {
  Overrides one{.seed = 5, .replicates = 6, .threads = 1};
  Overrides four{.seed = 5, .replicates = 6, .threads = 4};
  const auto a = render([&](std::ostream& os) { run_simulate(make("simulate", kYule, one), os); });
  const auto b = render([&](std::ostream& os) { run_simulate(make("simulate", kYule, four), os); });
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("# replicate: 5\n"), std::string::npos);
}

TEST(Cli, EveryCommandRepeats) {
  Overrides ov{.seed = 9, .replicates = 3, .threads = 2};
  for (auto fn : {run_simulate, run_auxiliary, run_tagged, run_sample}) {
    const auto a = render([&](std::ostream& os) { fn(make("x", kLinear, ov), os); });
    const auto b = render([&](std::ostream& os) { fn(make("x", kLinear, ov), os); });
    EXPECT_EQ(a, b);
  }
}

TEST(Cli, HeaderRoundTrips) {
  const auto first = render([&](std::ostream& os) { run_simulate(make("simulate", kYule, {.seed = 77}), os); });
  const auto again = render([&](std::ostream& os) { run_simulate(make("simulate", first), os); });
  EXPECT_EQ(first, again);
  EXPECT_NE(first.find("# seed: 77\n"), std::string::npos);
  EXPECT_NE(first.find("# config_hash: fnv1a64:"), std::string::npos);
}

TEST(Cli, ThreadCountIsNotPartOfTheHeader) {
  const auto a = make("simulate", kYule, {.threads = 1});
  const auto b = make("simulate", kYule, {.threads = 3});
  EXPECT_EQ(a.resolved.dump(), b.resolved.dump());
}

TEST(Cli, SimulateZeroHorizon) {
  const auto out = render([&](std::ostream& os) {
    run_simulate(make("simulate", R"({"model":{"id":"yule","b":1,"m":2},"population":{"horizon":0}})"), os);
  });
  const auto body = out.substr(out.find("label,"));
  EXPECT_EQ(body, "label,parent,alpha,beta,trait_at_birth,trait_at_horizon\n0,,0,,1,1\n");
}

TEST(Cli, VerifyYuleMeanPasses) {
  auto cfg = make("verify", kYule, {.seed = 3, .replicates = 2000});
  const auto r = verify(cfg, "many-to-one");
  ASSERT_EQ(r.reports.size(), 1u);
  EXPECT_TRUE(r.reports[0].pass);
  const auto csv = render([&](std::ostream& os) { write_verify_csv(os, cfg, "many_to_one", r); });
  EXPECT_NE(csv.find("identity,lhs_mean,lhs_se,rhs_mean,rhs_se,z,pass\nmany_to_one,"), std::string::npos);
  const auto doc = verify_document(cfg, "many_to_one", r);
  EXPECT_EQ(parse_config_text(doc.dump(), "r.json"), cfg.resolved);
}

TEST(Cli, SamplingCsvColumns) {
  auto cfg = make("verify",
                  R"({"model":{"id":"exp_growth","a":0.1,"alpha":0.1},
                      "analysis":{"t":1,"n_grid":[1,4],"samples":100}})");
  const auto r = verify(cfg, "sampling");
  ASSERT_EQ(r.sampling.size(), 2u);
  const auto csv = render([&](std::ostream& os) { write_verify_csv(os, cfg, "sampling", r); });
  EXPECT_NE(csv.find("n,ks_statistic,ks_p_value,ks_ci_low,ks_ci_high,uniform_mean,auxiliary_mean\n1,"),
            std::string::npos);
}

TEST(Cli, FigureDefaults) {
  const auto cfg = make("figure", "{}", {.replicates = 10});
  EXPECT_EQ(cfg.model.id(), "exp_growth");
  EXPECT_EQ(cfg.analysis.t, 30.0);
}

TEST(Cli, ParseErrorHasLineAndColumn) {
  try {
    parse_config_text("{\"model\": {\n  \"id\": ,\n}}", "cfg.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string{e.what()}.rfind("cfg.json:2:9: parse error", 0), 0u) << e.what();
  }
}

TEST(Cli, ValidationErrors) {
  EXPECT_THROW(make("simulate", "{}"), ConfigError);
  EXPECT_THROW(make("simulate", R"({"model":{"id":"yule","b":1,"m":2},"population":{"horizn":1}})"), ConfigError);
  EXPECT_THROW(make("simulate", R"({"model":{"id":"yule","b":1,"m":2},"extra":{}})"), ConfigError);
  EXPECT_THROW(make("simulate", R"({"model":{"id":"parasite","beta":-1,"g":1}})"), ConfigError);
  EXPECT_THROW(normalize_identity("two_to_one"), ConfigError);
}

TEST(Cli, ExitCodes) {
  const std::string exe = SPINESIM_EXE;
  const std::string dir = ::testing::TempDir();
  {
    std::ofstream f{dir + "bad.json"};
    f << "{\"model\": }";
  }
  {
    std::ofstream f{dir + "big.json"};
    f << R"({"model":{"id":"yule","b":3,"m":2},"population":{"horizon":10}})";
  }
  const auto run = [&](const std::string& args) {
    const int s = std::system((exe + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(s);
  };
  EXPECT_EQ(run("simulate --config " + dir + "bad.json"), 2);
  EXPECT_EQ(run("simulate --config " + dir + "big.json --cap-individuals 50"), 3);
  EXPECT_EQ(run("verify two_to_one --config " + dir + "big.json"), 2);
  EXPECT_EQ(run("simulate --replicates 2"), 2);
}
