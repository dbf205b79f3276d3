#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "spinesim/auxiliary.hpp"
#include "spinesim/functionals.hpp"
#include "spinesim/model.hpp"
#include "spinesim/population.hpp"
#include "spinesim/stats.hpp"

namespace spinesim {

struct CheckOptions {
  std::size_t n_pop = 5000;
  std::size_t n_aux = 5000;
  /// Monte Carlo samples per quadrature node (whole-tree and fork right-hand sides).
  std::size_t n_inner = 1000;
  int quadrature_points = 64;
  double ci_level = 0.99;
  double z_threshold = 3.0;
  unsigned threads = 1;
  std::size_t max_resample = 1000;
  Caps caps{};
  AuxiliaryOptions aux{};
};

struct VerificationReport {
  std::string identity;
  std::string model;
  MCEstimate lhs;
  MCEstimate rhs;
  double z = 0.0;
  bool ci_overlap = false;
  bool pass = false;
  std::string policy;
  nlohmann::json details = nlohmann::json::object();
};

std::size_t sample_uniform_index(const PopulationTree& tree, double t, RandomStream& rng);
LineagePath sample_uniform_lineage(const PopulationTree& tree, double t, RandomStream& rng);
inline std::size_t division_count(const Path& path) { return path.division_count(); }

VerificationReport check_many_to_one(const Model& model, double x0, double t, const Functional& F,
                                     const CheckOptions& opts, RandomStream rng);
inline VerificationReport check_many_to_one(const ModelSpec& model, double x0, double t, const Functional& F,
                                            const CheckOptions& opts, RandomStream rng) {
  return check_many_to_one(model.model(), x0, t, F, opts, std::move(rng));
}

/// Time-only weight w(s) = exp(-decay * s).
VerificationReport check_whole_tree(const Model& model, double x0, double T, double decay, const CheckOptions& opts,
                                    RandomStream rng);
inline VerificationReport check_whole_tree(const ModelSpec& model, double x0, double T, double decay,
                                           const CheckOptions& opts, RandomStream rng) {
  return check_whole_tree(model.model(), x0, T, decay, opts, std::move(rng));
}

VerificationReport check_forks(const Model& model, double x0, double s, double t, const Functional& f,
                               const Functional& g, const CheckOptions& opts, RandomStream rng);
inline VerificationReport check_forks(const ModelSpec& model, double x0, double s, double t, const Functional& f,
                                      const Functional& g, const CheckOptions& opts, RandomStream rng) {
  return check_forks(model.model(), x0, s, t, f, g, opts, std::move(rng));
}

VerificationReport check_feynman_kac(const Model& model, double x0, double r, double s, double t, const Functional& f,
                                     const CheckOptions& opts, RandomStream rng);
inline VerificationReport check_feynman_kac(const ModelSpec& model, double x0, double r, double s, double t,
                                            const Functional& f, const CheckOptions& opts, RandomStream rng) {
  return check_feynman_kac(model.model(), x0, r, s, t, f, opts, std::move(rng));
}

struct SamplingPoint {
  std::size_t n = 0;
  KsResult ks;
  std::pair<double, double> ks_interval{0.0, 0.0};
  double uniform_mean = 0.0;
  double auxiliary_mean = 0.0;
};

/// Uniformly sampled lineages from populations started with n i.i.d. draws from
/// nu, against spine paths started from pi_t; division counts compared by KS.
std::vector<SamplingPoint> check_sampling_convergence(const Model& model, const std::vector<WeightedAtom>& nu,
                                                      const std::vector<std::size_t>& n_grid, double t,
                                                      std::size_t samples, const CheckOptions& opts, RandomStream rng);
inline std::vector<SamplingPoint> check_sampling_convergence(const ModelSpec& model, const std::vector<WeightedAtom>& nu,
                                                             const std::vector<std::size_t>& n_grid, double t,
                                                             std::size_t samples, const CheckOptions& opts,
                                                             RandomStream rng) {
  return check_sampling_convergence(model.model(), nu, n_grid, t, samples, opts, std::move(rng));
}

struct FigureData {
  EmpiricalDistribution uniform;
  EmpiricalDistribution auxiliary;
  EmpiricalDistribution tagged;
  KsResult uniform_vs_auxiliary;
  KsResult tagged_vs_auxiliary;
  KsResult uniform_vs_tagged;
};

FigureData figure_division_counts(const Model& model, double x0, double t, std::size_t replicates,
                                  const CheckOptions& opts, RandomStream rng);
inline FigureData figure_division_counts(const ModelSpec& model, double x0, double t, std::size_t replicates,
                                         const CheckOptions& opts, RandomStream rng) {
  return figure_division_counts(model.model(), x0, t, replicates, opts, std::move(rng));
}

VerificationReport make_report(std::string identity, const Model& model, const MCEstimate& lhs, const MCEstimate& rhs,
                               const CheckOptions& opts);
nlohmann::json report_json(const VerificationReport& r);
void write_summary_csv(std::ostream& os, const std::vector<VerificationReport>& reports);

}  // namespace spinesim
