#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "spinesim/errors.hpp"
#include "spinesim/population.hpp"

namespace {

using namespace spinesim;
using namespace spinesim::cli;

std::string read_file(const std::string& path) {
  std::ifstream in{path, std::ios::binary};
  if (!in) throw ConfigError{path + ": cannot open"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f{out, std::ios::binary};
  if (!f) throw ConfigError{out + ": cannot write"};
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spinesim: branching populations, spine processes and many-to-one checks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  Overrides ov;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config, or a previous output file");
    sub->add_option("--seed", ov.seed, "Root seed");
    sub->add_option("--replicates", ov.replicates, "Replicates (or per-side sample size for verify)");
    sub->add_option("--out", out, "Output path (default stdout)");
    sub->add_option("--threads", ov.threads, "Worker threads");
    sub->add_option("--cap-individuals", ov.cap_individuals, "Maximum individuals per tree");
  };

  std::string identity;
  std::vector<CLI::App*> subs;
  for (const char* name : {"simulate", "auxiliary", "tagged", "sample", "verify", "figure"}) {
    CLI::App* sub = app.add_subcommand(name);
    add_common(sub);
    if (std::string{name} == "verify")
      sub->add_option("identity", identity, "many_to_one, whole_tree, forks, feynman_kac or sampling")->required();
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  std::string command;
  for (auto* s : subs) {
    if (s->parsed()) command = s->get_name();
  }

  try {
    nlohmann::json doc = nlohmann::json::object();
    if (!config_path.empty()) doc = parse_config_text(read_file(config_path), config_path);
    const RunConfig cfg = resolve_config(command, doc, ov);

    std::ostringstream os;
    if (command == "simulate") {
      run_simulate(cfg, os);
    } else if (command == "auxiliary") {
      run_auxiliary(cfg, os);
    } else if (command == "tagged") {
      run_tagged(cfg, os);
    } else if (command == "sample") {
      run_sample(cfg, os);
    } else if (command == "verify") {
      const VerifyResult r = verify(cfg, identity);
      write_verify_csv(os, cfg, identity, r);
      if (!out.empty() && out != "-") emit(out + ".report.json", verify_document(cfg, identity, r).dump(2) + "\n");
    } else {
      write_figure_csv(os, cfg, figure(cfg));
    }
    emit(out, os.str());
    return 0;
  } catch (const CapExceeded& e) {
    std::cerr << "spinesim: cap exceeded: " << e.what() << " (reached t=" << e.time_reached() << ")\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "spinesim: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "spinesim: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "spinesim: " << e.what() << '\n';
    return 1;
  }
}
