#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spinesim/analysis.hpp"
#include "spinesim/model.hpp"

namespace spinesim::cli {

struct PopulationSection {
  std::vector<double> init{1.0};
  double horizon = 1.0;
  Caps caps{};
};

struct AuxiliarySection {
  double x0 = 1.0;
  double t = 1.0;
  double grid = 0.01;
  bool closed_forms = true;
};

struct AnalysisSection {
  double x0 = 1.0;
  double t = 1.0;
  double s = 0.0;
  double r = 0.0;
  double T = 1.0;
  double decay = 0.0;
  std::vector<Functional> functionals{Functional::one()};
  Functional f = Functional::one();
  Functional g = Functional::one();
  std::vector<std::size_t> n_grid{1, 10, 100};
  std::vector<WeightedAtom> nu{{1.0, 1.0}};
  std::size_t samples = 5000;
  CheckOptions check{};
};

struct RunSection {
  std::uint64_t seed = 1;
  std::optional<std::size_t> replicates;
  unsigned threads = 1;
};

/// Everything a command needs. `resolved` is the normalized document that is
/// written into output headers; it excludes settings that never change output
/// bytes (thread count, output path).
struct RunConfig {
  std::string command;
  ModelSpec model;
  PopulationSection population;
  AuxiliarySection auxiliary;
  AnalysisSection analysis;
  RunSection run;
  nlohmann::json resolved;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates;
  std::optional<unsigned> threads;
  std::optional<std::size_t> cap_individuals;
};

/// Parses config text. Accepts a JSON document or a file previously written by
/// the CLI (the "# config:" header line or a report's "header.config").
/// Parse errors carry line and column.
nlohmann::json parse_config_text(const std::string& text, const std::string& source);

RunConfig resolve_config(const std::string& command, const nlohmann::json& doc, const Overrides& overrides);

/// Command defaults: `figure` runs the exponential-growth setting unless the
/// document names another model.
nlohmann::json default_document(const std::string& command);

std::uint64_t fnv1a64(const std::string& bytes);
std::string config_hash(const nlohmann::json& resolved);

}  // namespace spinesim::cli
