#include "spinesim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "spinesim/errors.hpp"
#include "spinesim/format.hpp"
#include "spinesim/numerics.hpp"
#include "spinesim/parallel.hpp"

namespace spinesim {

namespace {

enum Side : std::uint64_t { kTrees = 0, kSpine = 1, kNested = 2, kOffspring = 3, kTagged = 4, kInit = 5, kPick = 6 };

void require_closed_form(const Model& model, const char* what) {
  if (!model.has_closed_form_mean()) throw NoClosedForm{model.name() + std::string{" ("} + what + ")"};
}

MCEstimate with_level(MCEstimate e, double level) {
  e.ci_level = level;
  return e;
}

MCEstimate scaled(MCEstimate e, double c) {
  e.mean *= c;
  e.std_error *= std::abs(c);
  return e;
}

/// Sum over quadrature nodes of weight_j * (MC mean at node j), with the
/// per-node standard errors combined in quadrature.
template <class Sample>
MCEstimate node_sum(const std::vector<QuadratureNode>& nodes, const std::vector<double>& node_scale,
                    std::size_t n_inner, unsigned threads, Sample&& sample) {
  const std::size_t total = nodes.size() * n_inner;
  const auto values = parallel_map(total, threads, [&](std::size_t k) { return sample(k / n_inner, k % n_inner); });
  double mean = 0.0;
  double var = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    Welford w;
    for (std::size_t i = 0; i < n_inner; ++i) w.add(values[j * n_inner + i]);
    const double c = nodes[j].w * node_scale[j];
    mean += c * w.mean();
    var += c * c * (n_inner > 1 ? w.variance() / static_cast<double>(n_inner) : 0.0);
  }
  return MCEstimate{total, mean, std::sqrt(var)};
}

PopulationTree surviving_tree(const Model& model, const std::vector<double>& init, double t, const CheckOptions& opts,
                              const RandomStream& stream) {
  for (std::size_t attempt = 0; attempt < opts.max_resample; ++attempt) {
    PopulationTree tree = simulate_population(model, init, t, opts.caps, stream.derive(attempt));
    if (tree.count_alive(t) > 0) return tree;
  }
  throw DomainError{"survival conditioning: population extinct in every resample"};
}

}  // namespace

std::size_t sample_uniform_index(const PopulationTree& tree, double t, RandomStream& rng) {
  const auto alive = tree.alive_at(t);
  if (alive.empty()) throw DomainError{"sample_uniform_lineage: population extinct at t"};
  return alive[rng.index(alive.size())];
}

LineagePath sample_uniform_lineage(const PopulationTree& tree, double t, RandomStream& rng) {
  return lineage_of(tree, sample_uniform_index(tree, t, rng), t);
}

VerificationReport make_report(std::string identity, const Model& model, const MCEstimate& lhs, const MCEstimate& rhs,
                               const CheckOptions& opts) {
  VerificationReport r;
  r.identity = std::move(identity);
  r.model = model.name();
  r.lhs = with_level(lhs, opts.ci_level);
  r.rhs = with_level(rhs, opts.ci_level);
  const Comparison c = compare_estimates(r.lhs, r.rhs, opts.z_threshold);
  r.z = c.z;
  r.ci_overlap = c.ci_overlap;
  r.pass = c.pass;
  r.policy = "|z| <= " + fmt17(opts.z_threshold) + " or " + fmt17(opts.ci_level) + " CI overlap";
  return r;
}

VerificationReport check_many_to_one(const Model& model, double x0, double t, const Functional& F,
                                     const CheckOptions& opts, RandomStream rng) {
  require_closed_form(model, "many-to-one");
  model.validate_trait(x0);
  const double m = t > 0.0 ? model.mean_population(x0, 0.0, t) : 1.0;
  MCEstimate lhs;
  MCEstimate rhs;
  if (F.is_constant()) {
    lhs = t > 0.0 ? mean_population_mc(model, x0, 0.0, t, opts.n_pop, rng.derive(kTrees), opts.caps, opts.threads)
                  : MCEstimate{opts.n_pop, 1.0, 0.0};
    rhs = MCEstimate::exact(m);
  } else {
    const RandomStream trees = rng.derive(kTrees);
    const auto sums = parallel_map(opts.n_pop, opts.threads, [&](std::size_t i) {
      const PopulationTree tree = simulate_population(model, {x0}, t, opts.caps, trees.derive(i));
      double sum = 0.0;
      for (std::size_t u : tree.alive_at(t)) sum += F(TreeLineage{tree, u, t}, t);
      return sum;
    });
    lhs = estimate_of(sums);
    const RandomStream spine = rng.derive(kSpine);
    const auto vals = parallel_map(opts.n_aux, opts.threads, [&](std::size_t i) {
      RandomStream s = spine.derive(i);
      return F(simulate_auxiliary(model, x0, t, s, opts.aux), t);
    });
    rhs = scaled(estimate_of(vals), m);
  }
  VerificationReport r = make_report("many_to_one", model, lhs, rhs, opts);
  r.details = {{"x0", x0}, {"t", t}, {"functional", F.to_json()}, {"m", m},
               {"n_pop", opts.n_pop}, {"n_aux", F.is_constant() ? 0 : opts.n_aux}};
  return r;
}

VerificationReport check_whole_tree(const Model& model, double x0, double T, double decay, const CheckOptions& opts,
                                    RandomStream rng) {
  require_closed_form(model, "whole tree");
  model.validate_trait(x0);
  const auto weight = [decay](double s) { return std::exp(-decay * s); };
  if (T <= 0.0) {
    VerificationReport r = make_report("whole_tree", model, MCEstimate{opts.n_pop, 0.0, 0.0}, MCEstimate::exact(0.0), opts);
    r.details = {{"x0", x0}, {"T", T}, {"decay", decay}};
    return r;
  }

  const auto count_term = [&](double s) { return model.mean_population(x0, 0.0, s) * weight(s); };
  const int q = opts.quadrature_points;
  const int q2 = q >= 128 ? 64 : q * 2;
  const double coarse = integrate_gauss_legendre(count_term, 0.0, T, q);
  const double fine = integrate_gauss_legendre(count_term, 0.0, T, q2);
  const double rel = std::abs(coarse - fine) / std::max(std::abs(fine), 1e-300);
  if (rel > 1e-8) {
    throw QuadratureError{"whole tree: " + std::to_string(q) + "-point grid too coarse (relative change " + fmt17(rel) +
                          " on refinement)"};
  }

  const RandomStream trees = rng.derive(kTrees);
  const auto sums = parallel_map(opts.n_pop, opts.threads, [&](std::size_t i) {
    const PopulationTree tree = simulate_population(model, {x0}, T, opts.caps, trees.derive(i));
    double sum = 0.0;
    for (std::size_t u : tree.dead_by(T)) sum += weight(tree[u].death);
    return sum;
  });
  const MCEstimate lhs = estimate_of(sums);

  const auto nodes = gauss_legendre(q, 0.0, T);
  std::vector<double> scale;
  for (const auto& n : nodes) scale.push_back(count_term(n.x));
  const RandomStream spine = rng.derive(kSpine);
  const MCEstimate rhs = node_sum(nodes, scale, opts.n_inner, opts.threads, [&](std::size_t j, std::size_t i) {
    const double s = nodes[j].x;
    RandomStream st = spine.derive(j).derive(i);
    const AuxiliaryPath p = simulate_auxiliary(model, x0, s, st, opts.aux);
    return model.division_rate(p.terminal(), s);
  });

  VerificationReport r = make_report("whole_tree", model, lhs, rhs, opts);
  r.details = {{"x0", x0},
               {"T", T},
               {"decay", decay},
               {"quadrature_points", q},
               {"count_integral", coarse},
               {"count_integral_refined", fine},
               {"n_pop", opts.n_pop},
               {"n_inner", opts.n_inner}};
  return r;
}

VerificationReport check_forks(const Model& model, double x0, double s, double t, const Functional& f,
                               const Functional& g, const CheckOptions& opts, RandomStream rng) {
  require_closed_form(model, "forks");
  model.validate_trait(x0);
  if (!(0.0 <= s && s <= t)) throw DomainError{"check_forks: requires 0 <= s <= t"};
  if (!f.is_trait_function() || !g.is_trait_function())
    throw DomainError{"check_forks: f and g must be functions of the trait"};

  const RandomStream trees = rng.derive(kTrees);
  const auto sums = parallel_map(opts.n_pop, opts.threads, [&](std::size_t i) {
    const PopulationTree tree = simulate_population(model, {x0}, t, opts.caps, trees.derive(i));
    double sf = 0.0;
    double sg = 0.0;
    double sfg = 0.0;
    for (std::size_t u : tree.alive_at(t)) {
      const double xs = TreeLineage{tree, u, t}.trait_at(s);
      const double a = f.of_trait(xs);
      const double b = g.of_trait(xs);
      sf += a;
      sg += b;
      sfg += a * b;
    }
    return sf * sg - sfg;
  });
  const MCEstimate lhs = estimate_of(sums);

  const int q = opts.quadrature_points;
  const auto m_at = [&](double r) { return [&model, r, t](double y) { return model.mean_population(y, r, t); }; };

  // Common ancestor dies in [s, t]: both lineages share the trait at s.
  MCEstimate late{0, 0.0, 0.0};
  if (t > s) {
    const auto nodes = gauss_legendre(q, s, t);
    std::vector<double> scale;
    for (const auto& n : nodes) scale.push_back(model.mean_population(x0, 0.0, n.x));
    const RandomStream spine = rng.derive(kSpine).derive(0);
    late = node_sum(nodes, scale, opts.n_inner, opts.threads, [&](std::size_t j, std::size_t i) {
      const double r = nodes[j].x;
      RandomStream st = spine.derive(j).derive(i);
      const AuxiliaryPath p = simulate_auxiliary(model, x0, r, st, opts.aux);
      const double xs = p.trait_at(s);
      const double y = p.terminal();
      const auto m = m_at(r);
      return f.of_trait(xs) * g.of_trait(xs) * model.division_rate(y, r) * model.pair_moment(y, m, m);
    });
  }

  // Common ancestor dies in [0, s): lineages evolve as independent spines from the children.
  MCEstimate early{0, 0.0, 0.0};
  if (s > 0.0) {
    const auto nodes = gauss_legendre(q, 0.0, s);
    std::vector<double> scale;
    for (const auto& n : nodes) scale.push_back(model.mean_population(x0, 0.0, n.x));
    const RandomStream spine = rng.derive(kSpine).derive(1);
    const RandomStream nested = rng.derive(kNested);
    const RandomStream offspring = rng.derive(kOffspring);
    const bool constant = f.is_constant() && g.is_constant();
    early = node_sum(nodes, scale, opts.n_inner, opts.threads, [&](std::size_t j, std::size_t i) {
      const double r = nodes[j].x;
      RandomStream st = spine.derive(j).derive(i);
      const AuxiliaryPath p = simulate_auxiliary(model, x0, r, st, opts.aux);
      const double y = p.terminal();
      const double b = model.division_rate(y, r);
      if (b == 0.0) return 0.0;
      const auto m = m_at(r);
      if (constant) return b * model.pair_moment(y, m, m);
      RandomStream os = offspring.derive(j).derive(i);
      const OffspringDraw draw = model.sample_offspring(y, os);
      std::vector<double> fa;
      std::vector<double> ga;
      for (std::size_t c = 0; c < draw.children.size(); ++c) {
        const double yc = draw.children[c];
        AuxiliaryOptions child_opts = opts.aux;
        child_opts.start = r;
        RandomStream ns = nested.derive(j).derive(i).derive(c);
        const AuxiliaryPath cp = simulate_auxiliary(model, yc, t, ns, child_opts);
        const double xs = cp.trait_at(s);
        const double w = model.mean_population(yc, r, t);
        fa.push_back(w * f.of_trait(xs));
        ga.push_back(w * g.of_trait(xs));
      }
      double pairs = 0.0;
      for (std::size_t a = 0; a < fa.size(); ++a) {
        for (std::size_t c = 0; c < ga.size(); ++c) {
          if (a != c) pairs += fa[a] * ga[c];
        }
      }
      return b * pairs;
    });
  }

  MCEstimate rhs{late.n + early.n, late.mean + early.mean,
                 std::sqrt(late.std_error * late.std_error + early.std_error * early.std_error)};
  if (rhs.n == 0) rhs = MCEstimate::exact(0.0);
  VerificationReport r = make_report("forks", model, lhs, rhs, opts);
  r.details = {{"x0", x0},
               {"s", s},
               {"t", t},
               {"f", f.to_json()},
               {"g", g.to_json()},
               {"late_integral", late.mean},
               {"late_se", late.std_error},
               {"early_integral", early.mean},
               {"early_se", early.std_error},
               {"quadrature_points", q},
               {"n_pop", opts.n_pop},
               {"n_inner", opts.n_inner}};
  return r;
}

VerificationReport check_feynman_kac(const Model& model, double x0, double r, double s, double t, const Functional& f,
                                     const CheckOptions& opts, RandomStream rng) {
  require_closed_form(model, "feynman-kac");
  model.validate_trait(x0);
  if (!(r <= s && s <= t)) throw DomainError{"check_feynman_kac: requires r <= s <= t"};
  if (!f.is_trait_function()) throw DomainError{"check_feynman_kac: f must be a function of the trait"};
  const double mbar = model.mean_offspring(x0);
  const double m0 = model.mean_population(x0, r, t);

  AuxiliaryOptions aux = opts.aux;
  aux.start = r;
  const RandomStream spine = rng.derive(kSpine);
  const auto lhs_vals = parallel_map(opts.n_aux, opts.threads, [&](std::size_t i) {
    RandomStream st = spine.derive(i);
    return f.of_trait(simulate_auxiliary(model, x0, t, st, aux).trait_at(s));
  });

  const RandomStream tagged = rng.derive(kTagged);
  const auto rhs_vals = parallel_map(opts.n_aux, opts.threads, [&](std::size_t i) {
    RandomStream st = tagged.derive(i);
    const LineagePath p = simulate_tagged_cell(model, x0, s, st, r, mbar);
    const double log_w = (mbar - 1.0) * integrated_rate_on_path(model, p, r, s);
    if (log_w > 700.0) throw DomainError{"check_feynman_kac: weight overflow (horizon too large)"};
    const double xs = p.terminal();
    return std::exp(log_w) * model.mean_population(xs, s, t) / m0 * f.of_trait(xs);
  });

  VerificationReport rep = make_report("feynman_kac", model, estimate_of(lhs_vals), estimate_of(rhs_vals), opts);
  rep.details = {{"x0", x0}, {"r", r}, {"s", s}, {"t", t}, {"f", f.to_json()}, {"n", opts.n_aux}};
  return rep;
}

std::vector<SamplingPoint> check_sampling_convergence(const Model& model, const std::vector<WeightedAtom>& nu,
                                                      const std::vector<std::size_t>& n_grid, double t,
                                                      std::size_t samples, const CheckOptions& opts,
                                                      RandomStream rng) {
  require_closed_form(model, "sampling convergence");
  if (nu.empty()) throw DomainError{"check_sampling_convergence: empty initial law"};
  if (samples == 0) throw DomainError{"check_sampling_convergence: need samples > 0"};
  for (std::size_t k = 1; k < n_grid.size(); ++k) {
    if (!(n_grid[k] > n_grid[k - 1])) throw DomainError{"check_sampling_convergence: n grid must increase"};
  }
  double total = 0.0;
  for (const auto& a : nu) {
    if (a.weight < 0.0) throw DomainError{"check_sampling_convergence: negative weight"};
    total += a.weight;
  }
  if (!(total > 0.0)) throw DomainError{"check_sampling_convergence: all weights are zero"};
  const auto draw_nu = [&](RandomStream& st) {
    double u = st.uniform() * total;
    for (const auto& a : nu) {
      if (u < a.weight) return a.x;
      u -= a.weight;
    }
    return nu.back().x;
  };

  const RandomStream spine = rng.derive(kSpine);
  const auto aux_counts = parallel_map(samples, opts.threads, [&](std::size_t i) {
    RandomStream st = spine.derive(i);
    const double x = sample_pi_t(model, nu, t, st);
    return static_cast<double>(simulate_auxiliary(model, x, t, st, opts.aux).division_count());
  });
  const EmpiricalDistribution aux{aux_counts};

  std::vector<SamplingPoint> out;
  for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
    const std::size_t n = n_grid[gi];
    if (n == 0) throw DomainError{"check_sampling_convergence: n must be >= 1"};
    const RandomStream base = rng.derive(kTrees).derive(n);
    const auto counts = parallel_map(samples, opts.threads, [&](std::size_t i) {
      RandomStream init_rng = base.derive(i).derive(kInit);
      std::vector<double> init(n);
      for (auto& x : init) x = draw_nu(init_rng);
      const PopulationTree tree = surviving_tree(model, init, t, opts, base.derive(i).derive(kTrees));
      RandomStream pick = base.derive(i).derive(kPick);
      return static_cast<double>(TreeLineage{tree, sample_uniform_index(tree, t, pick), t}.division_count());
    });
    const EmpiricalDistribution uni{counts};
    SamplingPoint pt;
    pt.n = n;
    pt.ks = ks_two_sample(uni, aux);
    RandomStream boot = rng.derive(7).derive(n);
    pt.ks_interval = bootstrap_ks_interval(uni, aux, 200, 0.95, boot);
    pt.uniform_mean = uni.mean();
    pt.auxiliary_mean = aux.mean();
    out.push_back(pt);
  }
  return out;
}

FigureData figure_division_counts(const Model& model, double x0, double t, std::size_t replicates,
                                  const CheckOptions& opts, RandomStream rng) {
  model.validate_trait(x0);
  if (replicates == 0) throw DomainError{"figure: need replicates > 0"};
  const RandomStream trees = rng.derive(kTrees);
  const auto uni = parallel_map(replicates, opts.threads, [&](std::size_t i) {
    const PopulationTree tree = surviving_tree(model, {x0}, t, opts, trees.derive(i).derive(kTrees));
    RandomStream pick = trees.derive(i).derive(kPick);
    return static_cast<double>(TreeLineage{tree, sample_uniform_index(tree, t, pick), t}.division_count());
  });
  const RandomStream spine = rng.derive(kSpine);
  const auto aux = parallel_map(replicates, opts.threads, [&](std::size_t i) {
    RandomStream st = spine.derive(i);
    return static_cast<double>(simulate_auxiliary(model, x0, t, st, opts.aux).division_count());
  });
  const RandomStream tagged = rng.derive(kTagged);
  const auto tag = parallel_map(replicates, opts.threads, [&](std::size_t i) {
    RandomStream st = tagged.derive(i);
    return static_cast<double>(simulate_tagged_cell(model, x0, t, st).division_count());
  });
  FigureData d;
  d.uniform = EmpiricalDistribution{uni};
  d.auxiliary = EmpiricalDistribution{aux};
  d.tagged = EmpiricalDistribution{tag};
  d.uniform_vs_auxiliary = ks_two_sample(d.uniform, d.auxiliary);
  d.tagged_vs_auxiliary = ks_two_sample(d.tagged, d.auxiliary);
  d.uniform_vs_tagged = ks_two_sample(d.uniform, d.tagged);
  return d;
}

namespace {

nlohmann::json estimate_json(const MCEstimate& e) {
  return {{"n", e.n},           {"mean", e.mean},         {"std_error", e.std_error},
          {"ci_level", e.ci_level}, {"ci_low", e.ci_low()}, {"ci_high", e.ci_high()}};
}

}  // namespace

nlohmann::json report_json(const VerificationReport& r) {
  return {{"identity", r.identity}, {"model", r.model},     {"lhs", estimate_json(r.lhs)},
          {"rhs", estimate_json(r.rhs)}, {"z", r.z},         {"ci_overlap", r.ci_overlap},
          {"pass", r.pass},         {"policy", r.policy},   {"details", r.details}};
}

void write_summary_csv(std::ostream& os, const std::vector<VerificationReport>& reports) {
  os << "identity,lhs_mean,lhs_se,rhs_mean,rhs_se,z,pass\n";
  for (const auto& r : reports) {
    os << r.identity << ',' << fmt17(r.lhs.mean) << ',' << fmt17(r.lhs.std_error) << ',' << fmt17(r.rhs.mean) << ','
       << fmt17(r.rhs.std_error) << ',' << fmt17(r.z) << ',' << (r.pass ? "true" : "false") << '\n';
  }
}

}  // namespace spinesim
