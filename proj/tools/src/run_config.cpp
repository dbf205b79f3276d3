#include "run_config.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include "spinesim/errors.hpp"
#include "spinesim/parallel.hpp"

namespace spinesim::cli {

using nlohmann::json;

namespace {

class Section {
 public:
  Section(const json& doc, std::string name) : name_{std::move(name)} {
    if (!doc.contains(name_)) return;
    node_ = &doc.at(name_);
    if (!node_->is_object()) throw ConfigError{"section '" + name_ + "' must be an object"};
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return node_ && node_->contains(key);
  }

  const json& at(const std::string& key) { return node_->at(key); }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_number()) throw ConfigError{where(key) + " must be a number"};
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError{where(key) + " must be finite"};
    return d;
  }

  double nonnegative(const std::string& key, double fallback) {
    const double d = number(key, fallback);
    if (d < 0.0) throw ConfigError{where(key) + " must be >= 0"};
    return d;
  }

  std::size_t count(const std::string& key, std::size_t fallback, std::size_t min = 1) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(min))
      throw ConfigError{where(key) + " must be an integer >= " + std::to_string(min)};
    return v.get<std::size_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    if (!at(key).is_boolean()) throw ConfigError{where(key) + " must be true or false"};
    return at(key).get<bool>();
  }

  Functional functional(const std::string& key, const Functional& fallback) {
    if (!has(key)) return fallback;
    return Functional::from_json(at(key));
  }

  std::string where(const std::string& key) const { return name_ + "." + key; }

  void finish() const {
    if (!node_) return;
    for (auto it = node_->begin(); it != node_->end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError{"unknown key '" + where(it.key()) + "'"};
    }
  }

 private:
  std::string name_;
  const json* node_ = nullptr;
  std::set<std::string> used_;
};

json functional_list_json(const std::vector<Functional>& fs) {
  json a = json::array();
  for (const auto& f : fs) a.push_back(f.to_json());
  return a;
}

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    if (auto p = msg.find("parse error"); p != std::string::npos) msg = msg.substr(p);
    throw ConfigError{source + ":" + line_column(text, e.byte) + ": " + msg};
  }
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const json& resolved) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(resolved.dump())));
  return buf;
}

json parse_config_text(const std::string& text, const std::string& source) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '#') {
    std::istringstream is{text};
    std::string line;
    std::size_t n = 0;
    const std::string tag = "# config: ";
    while (std::getline(is, line)) {
      ++n;
      if (line.rfind(tag, 0) == 0) return parse_json(line.substr(tag.size()), source + ":" + std::to_string(n));
    }
    throw ConfigError{source + ": no '# config:' header line"};
  }
  json doc = parse_json(text, source);
  if (doc.is_object() && doc.contains("header") && doc.at("header").is_object() &&
      doc.at("header").contains("config"))
    return doc.at("header").at("config");
  return doc;
}

json default_document(const std::string& command) {
  if (command == "figure") {
    return {{"model", {{"id", "exp_growth"}, {"a", 0.1}, {"alpha", 0.1}}}, {"analysis", {{"x0", 1.0}, {"t", 30.0}}}};
  }
  return json::object();
}

RunConfig resolve_config(const std::string& command, const json& input, const Overrides& overrides) {
  if (!input.is_object()) throw ConfigError{"config: expected an object at the top level"};
  json doc = default_document(command);
  doc.merge_patch(input);
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    static const std::set<std::string> known{"model", "population", "auxiliary", "analysis", "run"};
    if (!known.count(it.key())) throw ConfigError{"unknown section '" + it.key() + "'"};
  }
  if (!doc.contains("model")) throw ConfigError{"config: missing section 'model'"};
  ModelSpec model = build_model(doc.at("model"));

  PopulationSection pop;
  {
    Section s{doc, "population"};
    if (s.has("init")) {
      const json& v = s.at("init");
      if (v.is_number()) {
        pop.init = {v.get<double>()};
      } else {
        try {
          pop.init = v.get<std::vector<double>>();
        } catch (const json::exception&) {
          throw ConfigError{"population.init must be a number or an array of numbers"};
        }
      }
      if (pop.init.empty()) throw ConfigError{"population.init must not be empty"};
    }
    for (double x : pop.init) model->validate_trait(x);
    pop.horizon = s.nonnegative("horizon", pop.horizon);
    pop.caps.max_individuals = s.count("max_individuals", pop.caps.max_individuals);
    pop.caps.max_events = s.count("max_events", pop.caps.max_events);
    s.finish();
  }
  if (overrides.cap_individuals) {
    if (*overrides.cap_individuals == 0) throw ConfigError{"--cap-individuals must be >= 1"};
    pop.caps.max_individuals = *overrides.cap_individuals;
  }

  AuxiliarySection aux;
  {
    Section s{doc, "auxiliary"};
    aux.x0 = s.number("x0", aux.x0);
    aux.t = s.nonnegative("t", aux.t);
    aux.grid = s.number("grid", aux.grid);
    if (!(aux.grid > 0.0)) throw ConfigError{"auxiliary.grid must be > 0"};
    aux.closed_forms = s.boolean("closed_forms", aux.closed_forms);
    s.finish();
    model->validate_trait(aux.x0);
  }

  AnalysisSection an;
  {
    Section s{doc, "analysis"};
    an.x0 = s.number("x0", an.x0);
    an.t = s.nonnegative("t", an.t);
    an.s = s.nonnegative("s", an.s);
    an.r = s.nonnegative("r", an.r);
    an.T = s.nonnegative("T", an.T);
    an.decay = s.number("decay", an.decay);
    if (s.has("functional")) {
      const json& v = s.at("functional");
      an.functionals.clear();
      if (v.is_array()) {
        for (const auto& f : v) an.functionals.push_back(Functional::from_json(f));
      } else {
        an.functionals.push_back(Functional::from_json(v));
      }
      if (an.functionals.empty()) throw ConfigError{"analysis.functional must not be empty"};
    }
    an.f = s.functional("f", an.f);
    an.g = s.functional("g", an.g);
    if (s.has("n_grid")) {
      try {
        an.n_grid = s.at("n_grid").get<std::vector<std::size_t>>();
      } catch (const json::exception&) {
        throw ConfigError{"analysis.n_grid must be an array of positive integers"};
      }
    }
    if (s.has("nu")) {
      an.nu.clear();
      const json& v = s.at("nu");
      if (!v.is_array() || v.empty()) throw ConfigError{"analysis.nu must be a nonempty array of [x, weight] pairs"};
      for (const auto& a : v) {
        if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
          throw ConfigError{"analysis.nu must be a nonempty array of [x, weight] pairs"};
        an.nu.push_back({a[0].get<double>(), a[1].get<double>()});
      }
    }
    an.samples = s.count("samples", an.samples);
    auto& c = an.check;
    c.n_pop = s.count("n_pop", c.n_pop, 2);
    c.n_aux = s.count("n_aux", c.n_aux, 2);
    c.n_inner = s.count("n_inner", c.n_inner);
    c.quadrature_points = static_cast<int>(s.count("quadrature_points", static_cast<std::size_t>(c.quadrature_points)));
    c.ci_level = s.number("ci_level", c.ci_level);
    if (!(c.ci_level > 0.0 && c.ci_level < 1.0)) throw ConfigError{"analysis.ci_level must be in (0,1)"};
    c.z_threshold = s.number("z_threshold", c.z_threshold);
    c.max_resample = s.count("max_resample", c.max_resample);
    s.finish();
    model->validate_trait(an.x0);
  }

  RunSection run;
  {
    Section s{doc, "run"};
    if (s.has("seed")) {
      const json& v = s.at("seed");
      if (!v.is_number_unsigned()) throw ConfigError{"run.seed must be an unsigned 64-bit integer"};
      run.seed = v.get<std::uint64_t>();
    }
    if (s.has("replicates")) run.replicates = s.count("replicates", 1);
    s.finish();
  }
  if (overrides.seed) run.seed = *overrides.seed;
  if (overrides.replicates) {
    if (*overrides.replicates == 0) throw ConfigError{"--replicates must be >= 1"};
    run.replicates = *overrides.replicates;
  }
  if (!run.replicates) run.replicates = command == "figure" ? 5000 : 1;
  if (command == "verify" && overrides.replicates) {
    an.check.n_pop = an.check.n_aux = an.samples = std::max<std::size_t>(*overrides.replicates, 2);
  }
  run.threads = overrides.threads.value_or(default_threads());
  if (run.threads == 0) throw ConfigError{"--threads must be >= 1"};

  an.check.caps = pop.caps;
  an.check.threads = run.threads;
  an.check.aux.grid = aux.grid;
  an.check.aux.use_closed_forms = aux.closed_forms;

  json nu = json::array();
  for (const auto& a : an.nu) nu.push_back({a.x, a.weight});
  json resolved = {
      {"population",
       {{"init", pop.init},
        {"horizon", pop.horizon},
        {"max_individuals", pop.caps.max_individuals},
        {"max_events", pop.caps.max_events}}},
      {"auxiliary", {{"x0", aux.x0}, {"t", aux.t}, {"grid", aux.grid}, {"closed_forms", aux.closed_forms}}},
      {"analysis",
       {{"x0", an.x0},
        {"t", an.t},
        {"s", an.s},
        {"r", an.r},
        {"T", an.T},
        {"decay", an.decay},
        {"functional", functional_list_json(an.functionals)},
        {"f", an.f.to_json()},
        {"g", an.g.to_json()},
        {"n_grid", an.n_grid},
        {"nu", nu},
        {"samples", an.samples},
        {"n_pop", an.check.n_pop},
        {"n_aux", an.check.n_aux},
        {"n_inner", an.check.n_inner},
        {"quadrature_points", an.check.quadrature_points},
        {"ci_level", an.check.ci_level},
        {"z_threshold", an.check.z_threshold},
        {"max_resample", an.check.max_resample}}},
      {"run", {{"seed", run.seed}, {"replicates", *run.replicates}}},
  };
  resolved["model"] = model.params();
  return RunConfig{command, std::move(model), std::move(pop), aux, std::move(an), run, std::move(resolved)};
}

}  // namespace spinesim::cli
