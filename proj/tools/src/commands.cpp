#include "commands.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include "spinesim/errors.hpp"
#include "spinesim/format.hpp"
#include "spinesim/parallel.hpp"

namespace spinesim::cli {

void write_header(std::ostream& os, const RunConfig& cfg, const std::string& what) {
  os << "# spinesim " << cfg.command << (what.empty() ? "" : " " + what) << '\n';
  os << "# config: " << cfg.resolved.dump() << '\n';
  os << "# config_hash: fnv1a64:" << config_hash(cfg.resolved) << '\n';
  os << "# seed: " << cfg.run.seed << '\n';
}

namespace {

AuxiliaryOptions aux_options(const RunConfig& cfg) {
  AuxiliaryOptions o;
  o.grid = cfg.auxiliary.grid;
  o.use_closed_forms = cfg.auxiliary.closed_forms;
  return o;
}

template <class Fn>
void write_blocks(std::ostream& os, std::size_t replicates, unsigned threads, Fn&& render) {
  const auto blocks = parallel_map(replicates, threads, [&](std::size_t i) {
    std::ostringstream b;
    render(i, b);
    return b.str();
  });
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (replicates > 1) os << "# replicate: " << i << '\n';
    os << blocks[i];
  }
}

}  // namespace

void run_simulate(const RunConfig& cfg, std::ostream& os) {
  const auto& p = cfg.population;
  write_header(os, cfg, "");
  os << "# horizon: " << fmt17(p.horizon) << '\n';
  const RandomStream root{cfg.run.seed};
  write_blocks(os, *cfg.run.replicates, cfg.run.threads, [&](std::size_t i, std::ostream& b) {
    const PopulationTree tree = simulate_population(cfg.model, p.init, p.horizon, p.caps, root.derive(i));
    write_tree_csv(b, tree);
  });
}

void run_auxiliary(const RunConfig& cfg, std::ostream& os) {
  write_header(os, cfg, "");
  os << "# horizon: " << fmt17(cfg.auxiliary.t) << '\n';
  const RandomStream root{cfg.run.seed};
  const AuxiliaryOptions opts = aux_options(cfg);
  write_blocks(os, *cfg.run.replicates, cfg.run.threads, [&](std::size_t i, std::ostream& b) {
    RandomStream rng = root.derive(i);
    write_path_csv(b, simulate_auxiliary(cfg.model, cfg.auxiliary.x0, cfg.auxiliary.t, rng, opts));
  });
}

void run_tagged(const RunConfig& cfg, std::ostream& os) {
  write_header(os, cfg, "");
  os << "# horizon: " << fmt17(cfg.auxiliary.t) << '\n';
  const RandomStream root{cfg.run.seed};
  write_blocks(os, *cfg.run.replicates, cfg.run.threads, [&](std::size_t i, std::ostream& b) {
    RandomStream rng = root.derive(i);
    write_path_csv(b, simulate_tagged_cell(cfg.model, cfg.auxiliary.x0, cfg.auxiliary.t, rng));
  });
}

void run_sample(const RunConfig& cfg, std::ostream& os) {
  const auto& p = cfg.population;
  write_header(os, cfg, "");
  os << "# horizon: " << fmt17(p.horizon) << '\n';
  const RandomStream root{cfg.run.seed};
  const std::size_t budget = cfg.analysis.check.max_resample;
  write_blocks(os, *cfg.run.replicates, cfg.run.threads, [&](std::size_t i, std::ostream& b) {
    const RandomStream rep = root.derive(i);
    for (std::size_t attempt = 0; attempt < budget; ++attempt) {
      const PopulationTree tree = simulate_population(cfg.model, p.init, p.horizon, p.caps, rep.derive(attempt));
      if (tree.count_alive(p.horizon) == 0) continue;
      RandomStream pick = rep.derive(budget + attempt);
      write_path_csv(b, sample_uniform_lineage(tree, p.horizon, pick));
      return;
    }
    throw DomainError{"sample: population extinct in every resample"};
  });
}

std::string normalize_identity(const std::string& identity) {
  std::string id = identity;
  std::replace(id.begin(), id.end(), '-', '_');
  if (id == "sampling_convergence") id = "sampling";
  static const std::vector<std::string> known{"many_to_one", "whole_tree", "forks", "feynman_kac", "sampling"};
  if (std::find(known.begin(), known.end(), id) == known.end())
    throw ConfigError{"unknown identity '" + identity + "' (many_to_one, whole_tree, forks, feynman_kac, sampling)"};
  return id;
}

VerifyResult verify(const RunConfig& cfg, const std::string& identity) {
  const std::string id = normalize_identity(identity);
  const auto& a = cfg.analysis;
  const RandomStream root{cfg.run.seed};
  VerifyResult out;
  if (id == "many_to_one") {
    for (std::size_t k = 0; k < a.functionals.size(); ++k)
      out.reports.push_back(check_many_to_one(cfg.model, a.x0, a.t, a.functionals[k], a.check, root.derive(k)));
  } else if (id == "whole_tree") {
    out.reports.push_back(check_whole_tree(cfg.model, a.x0, a.T, a.decay, a.check, root));
  } else if (id == "forks") {
    out.reports.push_back(check_forks(cfg.model, a.x0, a.s, a.t, a.f, a.g, a.check, root));
  } else if (id == "feynman_kac") {
    out.reports.push_back(check_feynman_kac(cfg.model, a.x0, a.r, a.s, a.t, a.f, a.check, root));
  } else {
    out.sampling = check_sampling_convergence(cfg.model, a.nu, a.n_grid, a.t, a.samples, a.check, root);
  }
  return out;
}

void write_verify_csv(std::ostream& os, const RunConfig& cfg, const std::string& identity, const VerifyResult& r) {
  const std::string id = normalize_identity(identity);
  write_header(os, cfg, id);
  if (id != "sampling") {
    write_summary_csv(os, r.reports);
    return;
  }
  os << "n,ks_statistic,ks_p_value,ks_ci_low,ks_ci_high,uniform_mean,auxiliary_mean\n";
  for (const auto& p : r.sampling) {
    os << p.n << ',' << fmt17(p.ks.statistic) << ',' << fmt17(p.ks.p_value) << ',' << fmt17(p.ks_interval.first)
       << ',' << fmt17(p.ks_interval.second) << ',' << fmt17(p.uniform_mean) << ',' << fmt17(p.auxiliary_mean) << '\n';
  }
}

nlohmann::json verify_document(const RunConfig& cfg, const std::string& identity, const VerifyResult& r) {
  nlohmann::json doc;
  doc["header"] = {{"command", "verify"},
                   {"identity", normalize_identity(identity)},
                   {"config", cfg.resolved},
                   {"config_hash", "fnv1a64:" + config_hash(cfg.resolved)},
                   {"seed", cfg.run.seed}};
  nlohmann::json reports = nlohmann::json::array();
  for (const auto& rep : r.reports) reports.push_back(report_json(rep));
  doc["reports"] = reports;
  nlohmann::json sampling = nlohmann::json::array();
  for (const auto& p : r.sampling) {
    sampling.push_back({{"n", p.n},
                        {"ks_statistic", p.ks.statistic},
                        {"ks_p_value", p.ks.p_value},
                        {"ks_ci", {p.ks_interval.first, p.ks_interval.second}},
                        {"uniform_mean", p.uniform_mean},
                        {"auxiliary_mean", p.auxiliary_mean}});
  }
  if (!sampling.empty()) doc["sampling"] = sampling;
  return doc;
}

FigureData figure(const RunConfig& cfg) {
  CheckOptions opts = cfg.analysis.check;
  opts.aux = aux_options(cfg);
  return figure_division_counts(cfg.model, cfg.analysis.x0, cfg.analysis.t, *cfg.run.replicates, opts,
                                RandomStream{cfg.run.seed});
}

void write_figure_csv(std::ostream& os, const RunConfig& cfg, const FigureData& d) {
  write_header(os, cfg, "");
  os << "# series: uniform = lineage of a uniformly sampled cell alive at t; auxiliary = spine process; "
        "tagged = uniformly chosen child at each division\n";
  os << "# x0: " << fmt17(cfg.analysis.x0) << ", t: " << fmt17(cfg.analysis.t)
     << ", realizations: " << *cfg.run.replicates << '\n';
  double top = 0.0;
  for (const auto* e : {&d.uniform, &d.auxiliary, &d.tagged}) {
    if (!e->empty()) top = std::max(top, e->values().back());
  }
  const auto max_d = static_cast<std::size_t>(top);
  const auto fu = d.uniform.integer_frequencies(max_d);
  const auto fa = d.auxiliary.integer_frequencies(max_d);
  const auto ft = d.tagged.integer_frequencies(max_d);
  os << "divisions,uniform,auxiliary,tagged\n";
  for (std::size_t k = 0; k <= max_d; ++k)
    os << k << ',' << fmt17(fu[k]) << ',' << fmt17(fa[k]) << ',' << fmt17(ft[k]) << '\n';
  os << "# mean: uniform " << fmt17(d.uniform.mean()) << ", auxiliary " << fmt17(d.auxiliary.mean()) << ", tagged "
     << fmt17(d.tagged.mean()) << '\n';
  const auto ks = [&](const char* name, const KsResult& k) {
    os << "# ks " << name << ": D " << fmt17(k.statistic) << ", p " << fmt17(k.p_value) << '\n';
  };
  ks("uniform_vs_auxiliary", d.uniform_vs_auxiliary);
  ks("tagged_vs_auxiliary", d.tagged_vs_auxiliary);
  ks("uniform_vs_tagged", d.uniform_vs_tagged);
}

}  // namespace spinesim::cli
