#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace spinesim::cli {

/// Comment lines shared by every output: command, resolved config, hash, seed.
void write_header(std::ostream& os, const RunConfig& cfg, const std::string& what);

void run_simulate(const RunConfig& cfg, std::ostream& os);
void run_auxiliary(const RunConfig& cfg, std::ostream& os);
void run_tagged(const RunConfig& cfg, std::ostream& os);
void run_sample(const RunConfig& cfg, std::ostream& os);

struct VerifyResult {
  std::vector<VerificationReport> reports;
  std::vector<SamplingPoint> sampling;
};

/// identity: many_to_one, whole_tree, forks, feynman_kac or sampling (dashes accepted).
std::string normalize_identity(const std::string& identity);
VerifyResult verify(const RunConfig& cfg, const std::string& identity);
void write_verify_csv(std::ostream& os, const RunConfig& cfg, const std::string& identity, const VerifyResult& r);
nlohmann::json verify_document(const RunConfig& cfg, const std::string& identity, const VerifyResult& r);

FigureData figure(const RunConfig& cfg);
void write_figure_csv(std::ostream& os, const RunConfig& cfg, const FigureData& d);

}  // namespace spinesim::cli
