#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spinesim/errors.hpp"
#include "spinesim/model.hpp"
#include "spinesim/motion.hpp"
#include "spinesim/random.hpp"
#include "spinesim/stats.hpp"

namespace spinesim {

/// Ulam-Harris label; the empty path is the root. Forest roots are {1}, {2}, ...
struct UlamHarrisLabel {
  std::vector<std::uint32_t> path;

  bool is_root() const { return path.empty(); }
  std::size_t depth() const { return path.size(); }
  UlamHarrisLabel child(std::uint32_t i) const;
  UlamHarrisLabel parent() const;
  bool is_prefix_of(const UlamHarrisLabel& other) const;
  /// Dot-separated; the root is written "0".
  std::string str() const;
  static UlamHarrisLabel parse(const std::string& s);

  auto operator<=>(const UlamHarrisLabel&) const = default;
};

constexpr std::size_t npos_individual = std::numeric_limits<std::size_t>::max();

struct Individual {
  UlamHarrisLabel label;
  std::size_t parent = npos_individual;
  double birth = 0.0;
  /// +inf when alive at the horizon.
  double death = std::numeric_limits<double>::infinity();
  double trait_at_birth = 0.0;
  /// Trait just before division (or at the horizon).
  double trait_at_end = 0.0;
  Motion motion;
  std::size_t first_child = npos_individual;
  std::size_t child_count = 0;

  bool alive_at(double s) const { return birth <= s && s < death; }
  bool divided() const { return death != std::numeric_limits<double>::infinity(); }
};

struct Caps {
  std::size_t max_individuals = 1'000'000;
  std::size_t max_events = 10'000'000;
};

class PopulationTree {
 public:
  PopulationTree() = default;
  PopulationTree(double start_time, double horizon, std::uint64_t seed, Caps caps)
      : start_time_{start_time}, horizon_{horizon}, seed_{seed}, caps_{caps} {}

  const std::vector<Individual>& individuals() const { return individuals_; }
  const Individual& operator[](std::size_t i) const { return individuals_[i]; }
  std::size_t size() const { return individuals_.size(); }
  double start_time() const { return start_time_; }
  double horizon() const { return horizon_; }
  std::uint64_t seed() const { return seed_; }
  const Caps& caps() const { return caps_; }
  std::size_t events() const { return events_; }
  const std::optional<double>& extinct_at() const { return extinct_at_; }

  std::size_t find(const UlamHarrisLabel& label) const;
  std::vector<std::size_t> alive_at(double s) const;
  std::size_t count_alive(double s) const;
  /// Individuals whose death time is at or before T.
  std::vector<std::size_t> dead_by(double T) const;
  double trait_at(std::size_t i, double s) const;

 private:
  friend class PopulationBuilder;

  double start_time_ = 0.0;
  double horizon_ = 0.0;
  std::uint64_t seed_ = 0;
  Caps caps_{};
  std::size_t events_ = 0;
  std::optional<double> extinct_at_;
  std::vector<Individual> individuals_;
};

/// Thrown when a cap is hit; carries everything simulated so far.
class CapExceeded : public Error {
 public:
  CapExceeded(const std::string& what, std::shared_ptr<const PopulationTree> partial, double time_reached)
      : Error{what}, partial_{std::move(partial)}, time_reached_{time_reached} {}

  const PopulationTree& partial() const { return *partial_; }
  double time_reached() const { return time_reached_; }

 private:
  std::shared_ptr<const PopulationTree> partial_;
  double time_reached_;
};

PopulationTree simulate_population(const Model& model, const std::vector<double>& init, double horizon, Caps caps,
                                   RandomStream rng, double start_time = 0.0);
inline PopulationTree simulate_population(const ModelSpec& model, const std::vector<double>& init, double horizon,
                                          Caps caps, RandomStream rng, double start_time = 0.0) {
  return simulate_population(model.model(), init, horizon, caps, std::move(rng), start_time);
}

std::vector<std::pair<UlamHarrisLabel, double>> population_snapshot(const PopulationTree& tree, double s);

/// Ancestral trajectory of individual i on [start, t].
LineagePath lineage_of(const PopulationTree& tree, std::size_t i, double t);
LineagePath lineage_of(const PopulationTree& tree, const UlamHarrisLabel& u, double t);

/// Lightweight view of the lineage of individual i up to t; same queries as Path
/// without materialising segments.
class TreeLineage {
 public:
  TreeLineage(const PopulationTree& tree, std::size_t i, double t);
  std::size_t division_count() const;
  double trait_at(double s) const;
  double terminal() const { return trait_at(t_); }

 private:
  const PopulationTree* tree_;
  std::size_t index_;
  double t_;
};

/// One row per individual: label,parent,alpha,beta,trait_at_birth,trait_at_horizon.
void write_tree_csv(std::ostream& os, const PopulationTree& tree);

MCEstimate mean_population_mc(const Model& model, double x, double s, double t, std::size_t n, RandomStream rng,
                              Caps caps = {}, unsigned threads = 1);
inline MCEstimate mean_population_mc(const ModelSpec& model, double x, double s, double t, std::size_t n,
                                     RandomStream rng, Caps caps = {}, unsigned threads = 1) {
  return mean_population_mc(model.model(), x, s, t, n, std::move(rng), caps, threads);
}

}  // namespace spinesim
