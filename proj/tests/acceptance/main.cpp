#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "../oracles.hpp"
#include "commands.hpp"
#include "spinesim/auxiliary.hpp"
#include "spinesim/models.hpp"
#include "spinesim/stats.hpp"

using namespace spinesim;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSeed = 20261018;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [fail: " << what << "]";
    }
  }
};

ModelSpec model(const std::string& text) { return build_model(json::parse(text)); }

double rel_err(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

bool within(const MCEstimate& e, double want, double k = 3.0) { return std::abs(e.mean - want) <= k * e.std_error; }

std::string show(const MCEstimate& e) {
  std::ostringstream os;
  os << e.mean << " +- " << e.std_error;
  return os.str();
}

std::vector<double> counts(std::size_t n, const std::function<double(RandomStream&)>& draw, std::uint64_t seed) {
  const RandomStream root{seed};
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    RandomStream rng = root.derive(i);
    out.push_back(draw(rng));
  }
  return out;
}

CheckOptions budget(std::size_t n) {
  CheckOptions o;
  o.n_pop = n;
  o.n_aux = n;
  return o;
}

// ---- 1 ----

struct MeanCase {
  std::string name;
  ModelSpec spec;
  std::function<double(double x, double s, double t)> oracle;
  std::function<double(std::mt19937_64&)> trait;
  double t_max;
  std::vector<std::array<double, 3>> mc_points;
};

Outcome criterion1() {
  Outcome o;
  std::vector<MeanCase> cases;
  cases.push_back({"yule", model(R"({"id":"yule","b":1,"m":3})"),
                   [](double, double s, double t) { return oracle::yule_mean(1.0, 3, s, t); },
                   [](std::mt19937_64&) { return 0.0; }, 2.0, {{0, 0, 0.5}, {0, 0.3, 1.0}, {0, 0, 1.2}}});
  cases.push_back({"linear_growth", model(R"({"id":"linear_growth","a":0.5,"alpha":2})"),
                   [](double x, double s, double t) { return oracle::linear_growth_mean(0.5, 2.0, x, s, t); },
                   [](std::mt19937_64& g) { return 3.0 * std::uniform_real_distribution<double>{}(g); }, 2.0,
                   {{0.5, 0, 1}, {1, 0.5, 1.5}, {2, 0, 0.8}}});
  cases.push_back({"exp_growth", model(R"({"id":"exp_growth","a":0.3,"alpha":{"breaks":[1,2],"values":[0.2,0.6,0.1]}})"),
                   [](double x, double s, double t) {
                     return oracle::exp_growth_mean_piecewise(0.3, {1, 2}, {0.2, 0.6, 0.1}, x, s, t);
                   },
                   [](std::mt19937_64& g) { return 3.0 * std::uniform_real_distribution<double>{}(g); }, 4.0,
                   {{1, 0, 2}, {0.5, 0.5, 3}, {2, 1.5, 3.5}}});
  cases.push_back({"parasite", model(R"({"id":"parasite","g":1,"sigma2":0.25,"alpha":1,"beta":0.5})"),
                   [](double x, double s, double t) { return oracle::parasite_mean(1.0, 1.0, 0.5, x, s, t); },
                   [](std::mt19937_64& g) { return 3.0 * std::uniform_real_distribution<double>{}(g); }, 2.0,
                   {{1, 0, 1}, {0.5, 0.5, 1.5}, {2, 0, 0.7}}});
  cases.push_back({"parasite_g_eq_beta", model(R"({"id":"parasite","g":0.5,"sigma2":0.25,"alpha":1,"beta":0.5})"),
                   [](double x, double s, double t) { return oracle::parasite_mean(0.5, 1.0, 0.5, x, s, t); },
                   [](std::mt19937_64& g) { return 3.0 * std::uniform_real_distribution<double>{}(g); }, 2.0,
                   {{1, 0, 1}, {0.5, 0.5, 1.5}, {2, 0, 0.7}}});
  cases.push_back({"plasmid_bd", model(R"({"id":"plasmid_bd","lambda":1.5,"mu":0.5})"),
                   [](double x, double s, double t) { return oracle::plasmid_mean(1.5, 0.5, x, s, t); },
                   [](std::mt19937_64& g) { return std::floor(10.0 * std::uniform_real_distribution<double>{}(g)); },
                   2.0, {{1, 0, 1}, {3, 0.5, 1.2}, {0, 0, 1.5}}});
  cases.push_back({"two_type_switch", model(R"({"id":"two_type_switch","b0":1,"b1":3,"p":0.2})"),
                   [](double x, double s, double t) { return oracle::switch_mean(1.0, 3.0, 0.2, x, s, t); },
                   [](std::mt19937_64& g) { return std::bernoulli_distribution{0.5}(g) ? 1.0 : 0.0; }, 2.0,
                   {{0, 0, 1}, {1, 0, 1}, {1, 0.5, 1.3}}});

  std::mt19937_64 gen{kSeed};
  std::uniform_real_distribution<double> u{0.0, 1.0};
  const RandomStream root{kSeed};
  std::size_t k = 0;
  for (const auto& c : cases) {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double x = c.trait(gen);
      const double s = c.t_max * u(gen);
      const double t = s + (c.t_max - s) * u(gen);
      worst = std::max(worst, rel_err(mean_population(c.spec, x, s, t), c.oracle(x, s, t)));
    }
    o.require(worst <= 1e-8, c.name + " oracle rel err");
    int mc_ok = 0;
    for (const auto& p : c.mc_points) {
      const auto e = mean_population_mc(c.spec, p[0], p[1], p[2], 10000, root.derive(k++));
      const double want = mean_population(c.spec, p[0], p[1], p[2]);
      if (within(e, want)) {
        ++mc_ok;
      } else {
        o.detail << " " << c.name << "(" << p[0] << "," << p[1] << "," << p[2] << ") mc " << show(e) << " vs " << want;
      }
    }
    o.require(mc_ok == 3, c.name + " Monte Carlo");
    o.detail << " " << c.name << ": max rel " << worst << ", mc " << mc_ok << "/3;";
  }
  return o;
}

// ---- 2 ----

Outcome criterion2() {
  Outcome o;
  const auto yule = model(R"({"id":"yule","b":1,"m":2})");
  const RandomStream root{kSeed};

  const auto n1 = mean_population_mc(yule, 0.0, 0.0, 1.0, 10000, root.derive(0));
  o.require(within(n1, std::numbers::e), "E[N_1]");
  o.detail << " E[N1] " << show(n1) << ";";

  auto fo = budget(10000);
  const double ln2 = std::numbers::ln2;
  const auto pairs = check_forks(yule, 0.0, ln2, ln2, Functional::one(), Functional::one(), fo, root.derive(1));
  o.require(within(pairs.lhs, 4.0), "E[N(N-1)]");
  o.detail << " E[N(N-1)] " << show(pairs.lhs) << ";";

  const auto deaths = check_whole_tree(yule, 0.0, 1.0, 0.0, budget(10000), root.derive(2));
  o.require(within(deaths.lhs, std::numbers::e - 1.0), "deaths by T=1");
  o.detail << " deaths " << show(deaths.lhs) << ";";

  const auto aux = counts(
      10000, [&](RandomStream& r) { return double(simulate_auxiliary(yule, 0.0, 1.0, r).division_count()); },
      kSeed + 3);
  const auto ca = chi_square_poisson(aux, 2.0);
  o.require(ca.p_value > 0.01, "auxiliary Poisson(2)");
  const auto tag = counts(
      10000, [&](RandomStream& r) { return double(simulate_tagged_cell(yule, 0.0, 1.0, r).division_count()); },
      kSeed + 4);
  const auto ct = chi_square_poisson(tag, 1.0);
  o.require(ct.p_value > 0.01, "tagged Poisson(1)");
  o.detail << " chi2 p auxiliary " << ca.p_value << ", tagged " << ct.p_value << ";";
  return o;
}

// ---- 3 ----

const std::vector<Functional>& criterion3_functionals() {
  static const std::vector<Functional> fs{Functional::one(), Functional::terminal(), Functional::z_power_d(0.5)};
  return fs;
}

bool many_to_one_all(const ModelSpec& spec, double x0, double t, const CheckOptions& opts, std::uint64_t seed,
                     Outcome& o, const std::string& label) {
  bool all = true;
  const RandomStream root{seed};
  for (std::size_t i = 0; i < criterion3_functionals().size(); ++i) {
    const auto& f = criterion3_functionals()[i];
    const auto r = check_many_to_one(spec, x0, t, f, opts, root.derive(i));
    all = all && r.ci_overlap;
    o.detail << " " << label << "/" << f.id() << ": " << show(r.lhs) << " vs " << show(r.rhs)
             << (r.ci_overlap ? " overlap;" : " disjoint;");
  }
  return all;
}

Outcome criterion3() {
  Outcome o;
  const auto expg = model(R"({"id":"exp_growth","a":0.1,"alpha":0.1})");
  const auto par = model(R"({"id":"parasite","g":1,"sigma2":0.25,"alpha":1,"beta":0.5})");
  o.require(many_to_one_all(expg, 1.0, 10.0, budget(5000), kSeed, o, "exp_growth"), "exp_growth");
  o.require(many_to_one_all(par, 1.0, 2.0, budget(5000), kSeed + 1, o, "parasite"), "parasite");
  return o;
}

// ---- 4 ----

Outcome criterion4() {
  Outcome o;
  std::mt19937_64 gen{kSeed};
  std::uniform_real_distribution<double> u{0.0, 1.0};

  const auto par_spec = model(R"({"id":"parasite","g":1,"sigma2":0.25,"alpha":1,"beta":0.5})");
  const auto& par = dynamic_cast<const ParasiteModel&>(par_spec.model());
  const auto pl_spec = model(R"({"id":"plasmid_bd","lambda":1.5,"mu":0.5})");
  const auto& pl = dynamic_cast<const PlasmidModel&>(pl_spec.model());

  double worst_rate = 0.0, worst_kernel = 0.0, worst_drift = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double x = 0.05 + 5.0 * u(gen), s = 3.0 * u(gen), t = s + 3.0 * u(gen);
    worst_rate = std::max(worst_rate, rel_err(biased_rate(par, x, s, t), biased_rate_generic(par, x, s, t)));
    const double lam = lambda_factor(par, x, s, t);
    const double mx = par.mean_population(x, s, t);
    for (double y : {0.0, 0.25 * x, 0.5 * x, 0.9 * x, x}) {
      const double generic = par.mean_population(y, s, t) / mx * (2.0 / x) / lam;
      worst_kernel = std::max(worst_kernel, rel_err(par.biased_kernel_density(y, x, s, t), generic));
    }
    worst_drift = std::max(worst_drift, rel_err(biased_drift(par, x, s, t), biased_drift_generic(par, x, s, t)));

    const double n = std::floor(20.0 * u(gen));
    worst_rate = std::max(worst_rate, rel_err(biased_rate(pl, n, s, t), biased_rate_generic(pl, n, s, t)));
    // Uniform split of n plasmids reweighted by m(j) = 1 + j E, E = expm1(c tau) / c.
    const double c = pl.lambda() - pl.mu();
    const double big_e = std::expm1(c * (t - s)) / c;
    const auto kernel = pl.mean_kernel(n);
    double norm = 0.0;
    for (const auto& a : kernel.atoms) norm += a.mass * pl.mean_population(a.y, s, t);
    for (const auto& a : kernel.atoms) {
      const double closed = (1.0 + a.y * big_e) / ((n + 1.0) * (1.0 + 0.5 * n * big_e));
      worst_kernel = std::max(worst_kernel, rel_err(closed, a.mass * pl.mean_population(a.y, s, t) / norm));
    }
    const auto closed = biased_jump_moves(pl, n, s, t);
    const auto generic = biased_jump_moves_generic(pl, n, s, t);
    if (closed.size() != generic.size()) {
      worst_drift = 1.0;
      continue;
    }
    for (std::size_t j = 0; j < closed.size(); ++j) {
      if (closed[j].target != generic[j].target) worst_drift = 1.0;
      worst_drift = std::max(worst_drift, rel_err(closed[j].rate, generic[j].rate));
    }
  }
  o.require(worst_rate <= 1e-10, "biased rate");
  o.require(worst_kernel <= 1e-10, "biased kernel");
  o.require(worst_drift <= 1e-10, "biased drift/jumps");
  o.detail << " max rel err rate " << worst_rate << ", kernel " << worst_kernel << ", drift " << worst_drift << ";";

  // Generic spine rates pass the many-to-one check; the uncorrected ones do not.
  const auto lin_spec = model(R"({"id":"linear_growth","a":0.25,"alpha":1})");
  const auto& lin = dynamic_cast<const LinearGrowthModel&>(lin_spec.model());
  const auto exp_spec = model(R"({"id":"exp_growth","a":0.1,"alpha":0.1})");
  const auto& ex = dynamic_cast<const ExpGrowthModel&>(exp_spec.model());

  auto generic_opts = budget(5000);
  o.require(many_to_one_all(lin_spec, 1.0, 2.0, generic_opts, kSeed + 10, o, "linear/generic"),
            "linear generic form passes");
  o.require(many_to_one_all(exp_spec, 1.0, 10.0, generic_opts, kSeed + 11, o, "exp/generic"),
            "exp generic form passes");

  auto pub_lin = budget(5000);
  pub_lin.aux.rate_override = uncorrected_linear_override(lin);
  o.require(!many_to_one_all(lin_spec, 1.0, 2.0, pub_lin, kSeed + 12, o, "linear/uncorrected"),
            "linear uncorrected form fails");
  auto pub_exp = budget(5000);
  pub_exp.aux.rate_override = uncorrected_exp_override(ex, 0.1);
  o.require(!many_to_one_all(exp_spec, 1.0, 10.0, pub_exp, kSeed + 13, o, "exp/uncorrected(beta=0.1)"),
            "exp uncorrected form fails");
  return o;
}

// ---- 5 ----

Outcome criterion5() {
  Outcome o;
  const auto yule = model(R"({"id":"yule","b":1,"m":2})");
  const double ln2 = std::numbers::ln2;
  const auto y = check_forks(yule, 0.0, ln2, ln2, Functional::one(), Functional::one(), budget(10000),
                             RandomStream{kSeed});
  const double exact = 2.0 * std::exp(ln2) * (std::exp(ln2) - 1.0);
  o.require(std::abs(y.rhs.mean - exact) <= 1e-10, "yule exact rhs");
  o.require(within(y.lhs, exact), "yule lhs within 3 SE");
  o.detail << " yule lhs " << show(y.lhs) << " rhs " << y.rhs.mean << ";";

  const auto expg = model(R"({"id":"exp_growth","a":0.1,"alpha":0.1})");
  const auto e = check_forks(expg, 1.0, 2.5, 5.0, Functional::one(), Functional::one(), budget(5000),
                             RandomStream{kSeed + 1});
  o.require(e.ci_overlap, "exp_growth 99% CI overlap");
  o.detail << " exp_growth lhs " << show(e.lhs) << " rhs " << show(e.rhs) << ";";
  return o;
}

// ---- 6 ----

Outcome criterion6() {
  Outcome o;
  const auto expg = model(R"({"id":"exp_growth","a":0.1,"alpha":0.1})");
  const auto pts = check_sampling_convergence(expg, {{1.0, 1.0}}, {1, 10, 100}, 10.0, 5000, CheckOptions{},
                                              RandomStream{kSeed});
  for (const auto& p : pts) o.detail << " n=" << p.n << ": D " << p.ks.statistic << " p " << p.ks.p_value << ";";
  bool monotone = pts.size() == 3;
  for (std::size_t i = 1; monotone && i < pts.size(); ++i) monotone = pts[i].ks.statistic < pts[i - 1].ks.statistic;
  o.require(monotone, "KS distance decreasing over n");
  o.require(!pts.empty() && pts.back().ks.p_value > 0.01, "KS p > 0.01 at n=100");
  return o;
}

// ---- 7 ----

Outcome criterion7() {
  Outcome o;
  const auto cfg = cli::resolve_config("figure", json::object(), {.seed = kSeed, .replicates = 5000});
  const auto d = cli::figure(cfg);
  o.require(d.uniform_vs_auxiliary.p_value > 0.01, "uniform vs auxiliary KS p > 0.01");
  o.require(d.tagged_vs_auxiliary.p_value < 1e-3, "tagged vs auxiliary KS p < 1e-3");
  o.require(d.tagged.mean() < d.auxiliary.mean(), "tagged mean < auxiliary mean");
  o.detail << " KS p uniform/aux " << d.uniform_vs_auxiliary.p_value << ", tagged/aux "
           << d.tagged_vs_auxiliary.p_value << "; means uniform " << d.uniform.mean() << " aux "
           << d.auxiliary.mean() << " tagged " << d.tagged.mean() << ";";

  const auto yule = model(R"({"id":"yule","b":1,"m":2})");
  const double b = 1.0, t = 2.0;
  const auto aux = counts(
      10000, [&](RandomStream& r) { return double(simulate_auxiliary(yule, 0.0, t, r).division_count()); },
      kSeed + 1);
  const auto tag = counts(
      10000, [&](RandomStream& r) { return double(simulate_tagged_cell(yule, 0.0, t, r).division_count()); },
      kSeed + 2);
  const auto ca = chi_square_poisson(aux, 2 * b * t);
  const auto ct = chi_square_poisson(tag, b * t);
  o.require(ca.p_value > 0.01, "yule auxiliary Poisson(2bt)");
  o.require(ct.p_value > 0.01, "yule tagged Poisson(bt)");
  o.detail << " yule chi2 p auxiliary " << ca.p_value << ", tagged " << ct.p_value << ";";
  return o;
}

// ---- 8 ----

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in{p, std::ios::binary};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion8(const std::string& exe) {
  Outcome o;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("spinesim_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream f{dir / name};
    f << text;
    return (dir / name).string();
  };
  const std::string lin = write("linear.json", R"({"model":{"id":"linear_growth","a":1,"alpha":1},
      "population":{"horizon":2},"auxiliary":{"t":2},"analysis":{"t":1,"s":0.5,"T":1,"n_grid":[1,5],"samples":200}})");
  const std::string par = write("parasite.json", R"({"model":{"id":"parasite","g":1,"sigma2":0.25,"alpha":1,"beta":0.5},
      "population":{"horizon":1.5},"auxiliary":{"t":1.5}})");
  const std::string fig = write("figure.json", R"({"analysis":{"t":10}})");

  const std::vector<std::string> runs{
      "simulate --config " + lin + " --replicates 4",
      "simulate --config " + par + " --replicates 3",
      "auxiliary --config " + par + " --replicates 5",
      "tagged --config " + lin + " --replicates 5",
      "sample --config " + lin + " --replicates 5",
      "verify many_to_one --config " + lin + " --replicates 300",
      "verify whole_tree --config " + lin + " --replicates 300",
      "verify forks --config " + lin + " --replicates 200",
      "verify feynman_kac --config " + lin + " --replicates 300",
      "verify sampling --config " + lin,
      "figure --config " + fig + " --replicates 300",
  };
  int identical = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::vector<std::string> outputs;
    for (const char* threads : {"1", "3"}) {
      const fs::path out = dir / ("out_" + std::to_string(i) + "_" + threads + ".csv");
      const std::string cmd = exe + " " + runs[i] + " --seed 11 --threads " + threads + " --out " + out.string();
      if (std::system(cmd.c_str()) != 0) {
        o.require(false, "command failed: " + runs[i]);
        break;
      }
      std::string text = slurp(out);
      if (fs::exists(out.string() + ".report.json")) text += slurp(out.string() + ".report.json");
      outputs.push_back(text);
    }
    const bool same = outputs.size() == 2 && !outputs[0].empty() && outputs[0] == outputs[1];
    o.require(same, "byte-identical: " + runs[i]);
    identical += same;
  }
  o.detail << " " << identical << "/" << runs.size() << " commands byte-identical across reruns (1 and 3 threads);";
  fs::remove_all(dir);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  std::string exe = SPINESIM_EXE;
  app.add_option("--criterion", only, "Run a single criterion (1-8)")->check(CLI::Range(1, 8));
  app.add_option("--spinesim", exe, "Path to the spinesim executable");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> all{
      {"mean-growth closed forms", criterion1},
      {"yule exact oracles", criterion2},
      {"many-to-one", criterion3},
      {"biased objects and uncorrected forms", criterion4},
      {"fork identity", criterion5},
      {"sampling limit", criterion6},
      {"figure reproduction", criterion7},
      {"determinism", [&] { return criterion8(exe); }},
  };
  bool ok = true;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (only != 0 && static_cast<std::size_t>(only) != i + 1) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome r;
    try {
      r = all[i].second();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail << " exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %zu (%s): %s [%.1fs]%s\n", i + 1, all[i].first.c_str(), r.pass ? "PASS" : "FAIL", secs,
                r.detail.str().c_str());
    std::fflush(stdout);
    ok = ok && r.pass;
  }
  return ok ? 0 : 1;
}
