#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "oracles.hpp"
#include "spinesim/errors.hpp"
#include "spinesim/model.hpp"
#include "spinesim/models.hpp"
#include "spinesim/numerics.hpp"
#include "spinesim/population.hpp"
#include "spinesim/stats.hpp"
#include "support.hpp"

using namespace spinesim;
using testing_support::cfg;

namespace {

std::string config_error(const std::string& text) {
  try {
    build_model(cfg(text));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

struct Point {
  double x, s, t;
};

std::vector<Point> random_points(std::uint64_t seed, int n, double x_max, double tau_max, bool integer = false) {
  std::mt19937_64 gen{seed};
  std::uniform_real_distribution<double> ux{0.0, x_max}, us{0.0, 3.0}, ut{0.0, tau_max};
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) {
    double x = ux(gen);
    if (integer) x = std::floor(x);
    const double s = us(gen);
    pts.push_back({x, s, s + ut(gen)});
  }
  return pts;
}

void expect_rel(double got, double want, double tol) {
  EXPECT_LE(std::abs(got - want), tol * std::abs(want)) << "got " << got << " want " << want;
}

}  // namespace

TEST(BuildModel, AcceptsMinimalConfigs) {
  EXPECT_EQ(build_model(cfg(R"({"id":"yule","b":1,"m":2})")).id(), "yule");
  EXPECT_EQ(build_model(cfg(R"({"id":"linear_growth","a":1,"alpha":1})")).id(), "linear_growth");
  EXPECT_EQ(build_model(cfg(R"({"id":"exp_growth","a":0.1,"alpha":{"breaks":[2],"values":[0.1,0.3]}})")).id(),
            "exp_growth");
  EXPECT_EQ(build_model(cfg(R"({"id":"two_type_switch","b0":1,"b1":2,"p":0.5})")).id(), "two_type_switch");
  EXPECT_EQ(build_model(cfg(R"({"id":"plasmid_bd","λ":2,"μ":1})")).id(), "plasmid_bd");
  EXPECT_EQ(build_model(cfg(R"({"id":"parasite","g":1,"σ²":0.5,"α":1,"β":0.5})")).id(), "parasite");
}

TEST(BuildModel, ErrorsNameTheKey) {
  EXPECT_EQ(config_error(R"({"id":"parasite","g":1,"sigma2":0.5,"alpha":1,"beta":0})"), "beta must be > 0");
  EXPECT_EQ(config_error(R"({"id":"parasite","g":1,"σ²":0.5,"α":1,"β":0})"), "beta must be > 0");
  EXPECT_EQ(config_error(R"({"id":"plasmid_bd","lambda":1,"mu":2})"), "plasmid_bd requires lambda-mu>0");
  EXPECT_EQ(config_error(R"({"id":"two_type_switch","b0":1,"b1":1,"p":1.5})"), "p must be in [0,1]");
  EXPECT_EQ(config_error(R"({"id":"cubic"})"), "unknown model id 'cubic'");
  EXPECT_NE(config_error(R"({"id":"yule","b":1,"m":2,"c":3})").find("unknown parameter 'c'"), std::string::npos);
  EXPECT_NE(config_error(R"({"id":"linear_growth","a":1})").find("missing parameter 'alpha'"), std::string::npos);
  EXPECT_NE(config_error(R"({"id":"yule","b":1,"m":2.5})").find("m must be"), std::string::npos);
}

TEST(DivisionRate, Examples) {
  auto lin = build_model(cfg(R"({"id":"linear_growth","a":1,"alpha":1})"));
  EXPECT_EQ(division_rate(lin, 2.0, 0.0), 2.0);
  EXPECT_EQ(division_rate(lin, 0.0, 0.0), 0.0);
  auto par = build_model(cfg(R"({"id":"parasite","g":1,"sigma2":0.5,"alpha":1,"beta":0.5})"));
  EXPECT_EQ(division_rate(par, 0.0, 0.0), 0.5);
  auto ex = build_model(cfg(R"({"id":"exp_growth","a":0.1,"alpha":{"breaks":[2],"values":[0.1,0.3]}})"));
  EXPECT_DOUBLE_EQ(division_rate(ex, 2.0, 1.0), 0.2);
  EXPECT_DOUBLE_EQ(division_rate(ex, 2.0, 2.5), 0.6);
}

TEST(Offspring, Examples) {
  RandomStream rng{1};
  auto lin = build_model(cfg(R"({"id":"linear_growth","a":1,"alpha":1})"));
  auto d = offspring_sample(lin, 4.0, rng);
  ASSERT_EQ(d.count, 2u);
  EXPECT_EQ(d.children, (std::vector<double>{2.0, 2.0}));

  auto par = build_model(cfg(R"({"id":"parasite","g":1,"sigma2":0.5,"alpha":1,"beta":0.5})"));
  auto split = dynamic_cast<const ParasiteModel&>(par.model()).split(1.0, 0.3);
  ASSERT_EQ(split.children.size(), 2u);
  EXPECT_DOUBLE_EQ(split.children[0], 0.3);
  EXPECT_DOUBLE_EQ(split.children[1], 0.7);

  auto yule = build_model(cfg(R"({"id":"yule","b":1,"m":3})"));
  auto y = offspring_sample(yule, 1.25, rng);
  EXPECT_EQ(y.count, 3u);
  EXPECT_EQ(y.children, (std::vector<double>{1.25, 1.25, 1.25}));
}

TEST(Offspring, MassIsConserved) {
  RandomStream rng{2};
  auto par = build_model(cfg(R"({"id":"parasite","g":1,"sigma2":0.5,"alpha":1,"beta":0.5})"));
  auto pl = build_model(cfg(R"({"id":"plasmid_bd","lambda":2,"mu":1})"));
  auto sw = build_model(cfg(R"({"id":"two_type_switch","b0":1,"b1":2,"p":0.3})"));
  for (int i = 0; i < 1000; ++i) {
    const double x = 0.1 + i * 0.01;
    auto d = offspring_sample(par, x, rng);
    ASSERT_EQ(d.count, 2u);
    EXPECT_NEAR(d.children[0] + d.children[1], x, 1e-15 * x);
    EXPECT_GE(d.children[0], 0.0);
    EXPECT_GE(d.children[1], 0.0);

    const double n = static_cast<double>(i % 37);
    auto p = offspring_sample(pl, n, rng);
    ASSERT_EQ(p.count, 2u);
    EXPECT_EQ(p.children[0] + p.children[1], n);
    EXPECT_EQ(p.children[0], std::floor(p.children[0]));

    auto s = offspring_sample(sw, static_cast<double>(i % 2), rng);
    ASSERT_EQ(s.count, 2u);
    for (double c : s.children) EXPECT_TRUE(c == 0.0 || c == 1.0);
  }
}

TEST(Offspring, SwitchDaughtersFlipIndependently) {
  RandomStream rng{3};
  auto sw = build_model(cfg(R"({"id":"two_type_switch","b0":1,"b1":2,"p":0.3})"));
  Welford flips, both;
  for (int i = 0; i < 40000; ++i) {
    auto d = offspring_sample(sw, 0.0, rng);
    flips.add(d.children[0]);
    flips.add(d.children[1]);
    both.add(d.children[0] * d.children[1]);
  }
  EXPECT_NEAR(flips.mean(), 0.3, 4 * std::sqrt(0.21 / 80000));
  EXPECT_NEAR(both.mean(), 0.09, 4 * std::sqrt(0.09 * 0.91 / 40000));
}

TEST(EvolveTrait, DeterministicFlows) {
  RandomStream rng{4};
  auto lin = build_model(cfg(R"({"id":"linear_growth","a":1,"alpha":1})"));
  EXPECT_DOUBLE_EQ(evolve_trait(lin, 1.0, 0.0, 2.0, rng).value_at(2.0), 3.0);
  auto ex = build_model(cfg(R"({"id":"exp_growth","a":0.1,"alpha":0.1})"));
  EXPECT_NEAR(evolve_trait(ex, 1.0, 0.0, 10.0, rng).value_at(10.0), std::numbers::e, 1e-14);
  auto yule = build_model(cfg(R"({"id":"yule","b":1,"m":2})"));
  EXPECT_EQ(evolve_trait(yule, 0.7, 0.0, 5.0, rng).value_at(5.0), 0.7);
}

TEST(EvolveTrait, ParasiteMeanMatchesMoment) {
  auto par = build_model(cfg(R"({"id":"parasite","g":1,"sigma2":0.5,"alpha":1,"beta":0.5})"));
  RandomStream root{5};
  Welford w;
  for (int i = 0; i < 10000; ++i) {
    RandomStream rng = root.derive(static_cast<std::uint64_t>(i));
    const Motion m = evolve_trait(par, 1.0, 0.0, 1.0, rng);
    const double x = m.value_at(1.0);
    ASSERT_GE(x, 0.0);
    w.add(x);
  }
  const auto est = w.estimate();
  EXPECT_LE(std::abs(est.mean - std::numbers::e), 3 * est.std_error) << est.mean << " +- " << est.std_error;
}

TEST(EvolveTrait, PlasmidCountsStayIntegral) {
  auto pl = build_model(cfg(R"({"id":"plasmid_bd","lambda":2,"mu":1})"));
  RandomStream rng{6};
  const Motion m = evolve_trait(pl, 3.0, 0.0, 1.0, rng);
  for (double v : m.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_EQ(v, std::floor(v));
  }
}

TEST(MeanPopulation, Examples) {
  auto lin = build_model(cfg(R"({"id":"linear_growth","a":1,"alpha":1})"));
  EXPECT_NEAR(mean_population(lin, 1.0, 0.0, 1.0), std::numbers::e, 1e-14);
  EXPECT_NEAR(mean_population(lin, 0.0, 0.0, 1.0), std::cosh(1.0), 1e-14);
  auto par = build_model(cfg(R"({"id":"parasite","g":1,"sigma2":0.5,"alpha":1,"beta":0.5})"));
  EXPECT_NEAR(mean_population(par, 0.0, 1.0, 3.0), std::exp(1.0), 1e-13);
  for (const char* text :
       {R"({"id":"yule","b":1,"m":2})", R"({"id":"linear_growth","a":1,"alpha":1})",
        R"({"id":"exp_growth","a":0.1,"alpha":0.1})", R"({"id":"parasite","g":1,"sigma2":0.5,"alpha":1,"beta":1})",
        R"({"id":"plasmid_bd","lambda":2,"mu":1})", R"({"id":"two_type_switch","b0":1,"b1":2,"p":0.2})"}) {
    auto m = build_model(cfg(text));
    EXPECT_EQ(mean_population(m, 1.0, 2.5, 2.5), 1.0) << text;
  }
}

TEST(MeanPopulation, ParasiteEqualRatesIsTheLimit) {
  auto par = build_model(cfg(R"({"id":"parasite","g":0.5,"sigma2":0.5,"alpha":1,"beta":0.5})"));
  const double x = 2.0, tau = 1.5;
  EXPECT_NEAR(mean_population(par, x, 1.0, 1.0 + tau), (1 + x * tau) * std::exp(0.5 * tau), 1e-12);
  auto near = build_model(cfg(R"({"id":"parasite","g":0.5000001,"sigma2":0.5,"alpha":1,"beta":0.5})"));
  EXPECT_NEAR(mean_population(near, x, 1.0, 1.0 + tau), mean_population(par, x, 1.0, 1.0 + tau), 1e-6);
}

TEST(MeanPopulation, WithoutClosedFormThrows) {
  testing_support::DyingModel dying{1.0, 0.2};
  EXPECT_THROW(dying.mean_population(1.0, 0.0, 1.0), NoClosedForm);
  try {
    dying.mean_population(1.0, 0.0, 1.0);
  } catch (const NoClosedForm& e) {
    EXPECT_NE(std::string{e.what()}.find("mean_population_mc"), std::string::npos);
  }
}

TEST(MeanPopulation, RejectsBadArguments) {
  auto lin = build_model(cfg(R"({"id":"linear_growth","a":1,"alpha":1})"));
  EXPECT_THROW(mean_population(lin, 1.0, 2.0, 1.0), DomainError);
  EXPECT_THROW(mean_population(lin, -1.0, 0.0, 1.0), DomainError);
  auto pl = build_model(cfg(R"({"id":"plasmid_bd","lambda":2,"mu":1})"));
  EXPECT_THROW(mean_population(pl, 1.5, 0.0, 1.0), DomainError);
}

TEST(MeanPopulation, AgreesWithOdeOracles) {
  for (const auto& p : random_points(11, 25, 5.0, 3.0)) {
    expect_rel(mean_population(build_model(cfg(R"({"id":"linear_growth","a":0.7,"alpha":1.3})")), p.x, p.s, p.t),
               oracle::linear_growth_mean(0.7, 1.3, p.x, p.s, p.t), 1e-8);
    expect_rel(mean_population(build_model(cfg(R"({"id":"parasite","g":1,"sigma2":0.5,"alpha":1,"beta":0.5})")),
                               p.x, p.s, p.t),
               oracle::parasite_mean(1.0, 1.0, 0.5, p.x, p.s, p.t), 1e-8);
    expect_rel(mean_population(build_model(cfg(R"({"id":"parasite","g":0.8,"sigma2":0.5,"alpha":2,"beta":0.8})")),
                               p.x, p.s, p.t),
               oracle::parasite_mean(0.8, 2.0, 0.8, p.x, p.s, p.t), 1e-8);
  }
  auto ex = build_model(cfg(R"({"id":"exp_growth","a":0.3,"alpha":{"breaks":[1,2.5,4],"values":[0.1,0.4,0.2,1]}})"));
  for (const auto& p : random_points(12, 25, 5.0, 3.0))
    expect_rel(mean_population(ex, p.x, p.s, p.t),
               oracle::exp_growth_mean_piecewise(0.3, {1, 2.5, 4}, {0.1, 0.4, 0.2, 1}, p.x, p.s, p.t), 1e-8);
  auto pl = build_model(cfg(R"({"id":"plasmid_bd","lambda":1.5,"mu":0.5})"));
  for (const auto& p : random_points(13, 25, 10.0, 2.0, true))
    expect_rel(mean_population(pl, p.x, p.s, p.t), oracle::plasmid_mean(1.5, 0.5, p.x, p.s, p.t), 1e-8);
  auto sw = build_model(cfg(R"({"id":"two_type_switch","b0":1,"b1":2.5,"p":0.3})"));
  for (const auto& p : random_points(14, 25, 2.0, 3.0, true))
    expect_rel(mean_population(sw, p.x, p.s, p.t), oracle::switch_mean(1.0, 2.5, 0.3, p.x, p.s, p.t), 1e-8);
}

TEST(MeanPopulation, SwitchHalfProbabilityFormula) {
  const double b0 = 3.0, b1 = 1.2, tau = 0.9;
  auto sw = build_model(cfg(R"({"id":"two_type_switch","b0":3,"b1":1.2,"p":0.5})"));
  const double gamma = b0 / b1;
  const double r = std::sqrt(b0 * b1);
  const double expected = mean_population(sw, 0.0, 0.0, tau) +
                          (std::exp(r * tau) - std::exp(-r * tau)) / (2 * std::sqrt(gamma)) * (1 - gamma);
  EXPECT_NEAR(mean_population(sw, 1.0, 0.0, tau), expected, 1e-12);
}

TEST(LambdaFactor, Examples) {
  auto par = build_model(cfg(R"({"id":"parasite","g":1,"sigma2":0.5,"alpha":1,"beta":0.5})"));
  EXPECT_NEAR(lambda_factor(par, 1.0, 0.0, 2 * std::numbers::ln2), 4.0 / 3.0, 1e-12);
  auto yule = build_model(cfg(R"({"id":"yule","b":1,"m":2})"));
  EXPECT_DOUBLE_EQ(lambda_factor(yule, 0.3, 0.0, 4.0), 2.0);
  auto yule3 = build_model(cfg(R"({"id":"yule","b":1,"m":3})"));
  EXPECT_DOUBLE_EQ(lambda_factor(yule3, 0.3, 1.0, 1.0), 3.0);
}

TEST(LambdaFactor, BinaryModelsStayBetweenOneAndTwo) {
  const char* binaries[] = {R"({"id":"linear_growth","a":1,"alpha":1})", R"({"id":"exp_growth","a":0.1,"alpha":0.1})",
                            R"({"id":"parasite","g":1,"sigma2":0.5,"alpha":1,"beta":0.5})",
                            R"({"id":"plasmid_bd","lambda":2,"mu":1})", R"({"id":"yule","b":1,"m":2})"};
  for (const char* text : binaries) {
    auto m = build_model(cfg(text));
    const bool integer = m->trait_kind() == TraitKind::count;
    for (const auto& p : random_points(21, 40, 6.0, 4.0, integer)) {
      EXPECT_DOUBLE_EQ(lambda_factor(m, p.x, p.t, p.t), 2.0) << text;
      if (p.t <= p.s) continue;
      const double l = lambda_factor(m, p.x, p.s, p.t);
      EXPECT_GT(l, 1.0) << text;
      EXPECT_LE(l, 2.0 + 1e-12) << text;
    }
  }
}

TEST(LambdaFactor, SwitchCanExceedTwo) {
  auto sw = build_model(cfg(R"({"id":"two_type_switch","b0":0.1,"b1":5,"p":0.5})"));
  EXPECT_GT(lambda_factor(sw, 0.0, 0.0, 2.0), 2.0);
  EXPECT_GE(sw->lambda_bound(0.0, 0.0, 0.5, 2.0), lambda_factor(sw, 0.0, 0.25, 2.0));
}
