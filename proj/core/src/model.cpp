#include "spinesim/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <utility>

#include "spinesim/errors.hpp"
#include "spinesim/models.hpp"
#include "spinesim/numerics.hpp"

namespace spinesim {

using nlohmann::json;

double MeanKernel::total_mass(double abs_tol) const {
  double sum = 0.0;
  for (const auto& a : atoms) sum += a.mass;
  if (density && hi > lo) sum += integrate_or_throw(density, lo, hi, abs_tol);
  return sum;
}

void Model::validate_trait(double x) const {
  if (!std::isfinite(x)) throw DomainError{name() + ": trait must be finite"};
  switch (trait_kind()) {
    case TraitKind::real:
      if (x < 0.0) throw DomainError{name() + ": trait must be >= 0"};
      break;
    case TraitKind::count:
      if (x < 0.0 || x != std::floor(x)) throw DomainError{name() + ": trait must be a nonnegative integer"};
      break;
    case TraitKind::flag:
      if (x != 0.0 && x != 1.0) throw DomainError{name() + ": trait must be 0 or 1"};
      break;
  }
}

double Model::mean_population(double, double, double) const { throw NoClosedForm{name()}; }

double Model::flow(double x, double, double) const {
  if (motion_kind() == MotionKind::none) return x;
  throw DomainError{name() + ": no deterministic flow"};
}

Motion Model::flow_motion(double x, double s) const {
  if (motion_kind() == MotionKind::none) return Motion::constant(x, s);
  throw DomainError{name() + ": no deterministic flow"};
}

double Model::integrated_rate(double x, double s, double t) const {
  if (t <= s) return 0.0;
  return integrate_gauss_legendre([&](double r) { return division_rate(flow(x, s, r), r); }, s, t, 64);
}

double Model::division_time(double x, double s, double hazard) const {
  if (hazard <= 0.0) return s;
  double width = 1.0;
  int doublings = 0;
  while (integrated_rate(x, s, s + width) < hazard) {
    width *= 2.0;
    if (++doublings > 60) return std::numeric_limits<double>::infinity();
  }
  return bracketed_root([&](double r) { return integrated_rate(x, s, r) - hazard; }, s, s + width);
}

double Model::rate_bound(double x, double s, double s_end) const {
  return std::max(division_rate(x, s), division_rate(flow(x, s, s_end), s_end));
}

double Model::drift(double) const { throw DomainError{name() + ": not a diffusion"}; }
double Model::diffusion_sq(double) const { throw DomainError{name() + ": not a diffusion"}; }
std::vector<JumpMove> Model::jump_moves(double) const { return {}; }

std::optional<double> Model::biased_rate_closed(double, double, double) const { return std::nullopt; }
std::optional<double> Model::biased_drift_closed(double, double, double) const { return std::nullopt; }
std::optional<std::vector<JumpMove>> Model::biased_jump_moves_closed(double, double, double) const {
  return std::nullopt;
}

std::vector<double> Model::biased_jump_bounds(double) const {
  throw DomainError{name() + ": no biased jump bounds"};
}

double Model::lambda_bound(double x, double, double, double) const { return mean_offspring(x); }

double Model::sample_biased_kernel(double x, double s, double t, RandomStream& rng) const {
  const MeanKernel k = mean_kernel(x);
  if (k.density) throw DomainError{name() + ": continuous kernel needs a model-specific sampler"};
  std::vector<double> w;
  w.reserve(k.atoms.size());
  double total = 0.0;
  for (const auto& a : k.atoms) {
    w.push_back(a.mass * mean_population(a.y, s, t));
    total += w.back();
  }
  if (!(total > 0.0)) throw DomainError{name() + ": degenerate biased kernel"};
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (u < w[i]) return k.atoms[i].y;
    u -= w[i];
  }
  return k.atoms.back().y;
}

ModelSpec::ModelSpec(std::string id, json params, std::shared_ptr<const Model> impl)
    : id_{std::move(id)}, params_(std::move(params)), impl_{std::move(impl)} {}

namespace {

const std::map<std::string, std::string>& key_aliases() {
  static const std::map<std::string, std::string> aliases{
      {"α", "alpha"}, {"β", "beta"},   {"σ²", "sigma2"}, {"λ", "lambda"},
      {"μ", "mu"},    {"b₀", "b0"},    {"b₁", "b1"},
  };
  return aliases;
}

class ParamReader {
 public:
  ParamReader(const json& cfg, std::string model) : model_{std::move(model)} {
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
      if (it.key() == "id") continue;
      std::string key = it.key();
      if (auto a = key_aliases().find(key); a != key_aliases().end()) key = a->second;
      if (params_.contains(key)) throw ConfigError{model_ + ": duplicate parameter '" + key + "'"};
      params_[key] = it.value();
    }
  }

  const json& raw(const std::string& key) {
    if (!params_.contains(key)) throw ConfigError{model_ + ": missing parameter '" + key + "'"};
    used_.insert(key);
    return params_.at(key);
  }

  bool has(const std::string& key) const { return params_.contains(key); }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError{model_ + ": parameter '" + key + "' must be a number"};
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError{model_ + ": parameter '" + key + "' must be finite"};
    return d;
  }

  double number_or(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  double positive(const std::string& key) {
    const double d = number(key);
    if (!(d > 0.0)) throw ConfigError{key + " must be > 0"};
    return d;
  }

  double nonnegative(const std::string& key) {
    const double d = number(key);
    if (d < 0.0) throw ConfigError{key + " must be >= 0"};
    return d;
  }

  void finish() const {
    for (auto it = params_.begin(); it != params_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError{model_ + ": unknown parameter '" + it.key() + "'"};
    }
  }

  const json& normalized() const { return params_; }

 private:
  std::string model_;
  json params_ = json::object();
  std::set<std::string> used_;
};

PiecewiseConstant read_alpha(ParamReader& r) {
  const json& v = r.raw("alpha");
  if (v.is_number()) {
    const double a = v.get<double>();
    if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError{"alpha must be > 0"};
    return PiecewiseConstant{a};
  }
  if (!v.is_object()) throw ConfigError{"exp_growth: parameter 'alpha' must be a number or {breaks, values}"};
  for (auto it = v.begin(); it != v.end(); ++it) {
    if (it.key() != "breaks" && it.key() != "values")
      throw ConfigError{"exp_growth: unknown parameter 'alpha." + it.key() + "'"};
  }
  if (!v.contains("breaks") || !v.contains("values"))
    throw ConfigError{"exp_growth: parameter 'alpha' needs both 'breaks' and 'values'"};
  std::vector<double> breaks;
  std::vector<double> values;
  try {
    breaks = v.at("breaks").get<std::vector<double>>();
    values = v.at("values").get<std::vector<double>>();
  } catch (const json::exception&) {
    throw ConfigError{"exp_growth: 'alpha.breaks' and 'alpha.values' must be arrays of numbers"};
  }
  if (values.size() != breaks.size() + 1)
    throw ConfigError{"exp_growth: 'alpha.values' must have one more entry than 'alpha.breaks'"};
  for (std::size_t i = 0; i < breaks.size(); ++i) {
    if (!std::isfinite(breaks[i]) || breaks[i] < 0.0 || (i > 0 && !(breaks[i] > breaks[i - 1])))
      throw ConfigError{"exp_growth: 'alpha.breaks' must be increasing and >= 0"};
  }
  for (double a : values) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError{"alpha must be > 0"};
  }
  return PiecewiseConstant{std::move(breaks), std::move(values)};
}

}  // namespace

const std::vector<std::string>& bundled_model_ids() {
  static const std::vector<std::string> ids{"yule", "linear_growth", "exp_growth",
                                            "parasite", "plasmid_bd", "two_type_switch"};
  return ids;
}

ModelSpec build_model(const json& config) {
  if (!config.is_object()) throw ConfigError{"model: expected an object"};
  if (!config.contains("id") || !config.at("id").is_string()) throw ConfigError{"model: missing parameter 'id'"};
  const std::string id = config.at("id").get<std::string>();
  ParamReader r{config, id};
  std::shared_ptr<const Model> impl;

  if (id == "yule") {
    const double b = r.positive("b");
    const double m = r.number_or("m", 2.0);
    if (m < 2.0 || m != std::floor(m) || m > 1e6) throw ConfigError{"m must be an integer >= 2"};
    impl = std::make_shared<YuleModel>(b, static_cast<int>(m));
  } else if (id == "linear_growth") {
    const double a = r.positive("a");
    const double alpha = r.positive("alpha");
    impl = std::make_shared<LinearGrowthModel>(a, alpha);
  } else if (id == "exp_growth") {
    const double a = r.positive("a");
    impl = std::make_shared<ExpGrowthModel>(a, read_alpha(r));
  } else if (id == "parasite") {
    const double g = r.number("g");
    const double sigma2 = r.nonnegative("sigma2");
    const double alpha = r.nonnegative("alpha");
    const double beta = r.positive("beta");
    const double dt = r.has("dt") ? r.positive("dt") : 1e-3;
    impl = std::make_shared<ParasiteModel>(g, sigma2, alpha, beta, dt);
  } else if (id == "plasmid_bd") {
    const double lambda = r.positive("lambda");
    const double mu = r.nonnegative("mu");
    if (!(lambda - mu > 0.0)) throw ConfigError{"plasmid_bd requires lambda-mu>0"};
    impl = std::make_shared<PlasmidModel>(lambda, mu);
  } else if (id == "two_type_switch") {
    const double b0 = r.positive("b0");
    const double b1 = r.positive("b1");
    const double p = r.number("p");
    if (p < 0.0 || p > 1.0) throw ConfigError{"p must be in [0,1]"};
    impl = std::make_shared<SwitchModel>(b0, b1, p);
  } else {
    throw ConfigError{"unknown model id '" + id + "'"};
  }
  r.finish();
  json params = r.normalized();
  params["id"] = id;
  return ModelSpec{id, std::move(params), std::move(impl)};
}

double division_rate(const ModelSpec& model, double x, double t) {
  model->validate_trait(x);
  return model->division_rate(x, t);
}

OffspringDraw offspring_sample(const ModelSpec& model, double x, RandomStream& rng) {
  model->validate_trait(x);
  return model->sample_offspring(x, rng);
}

double mean_population(const ModelSpec& model, double x, double s, double t) {
  model->validate_trait(x);
  if (t < s) throw DomainError{"mean_population: requires s <= t"};
  if (t == s) return 1.0;
  return model->mean_population(x, s, t);
}

double lambda_factor(const Model& model, double x, double s, double t) {
  if (t < s) throw DomainError{"lambda_factor: requires s <= t"};
  const double mx = model.mean_population(x, s, t);
  if (!(mx > 0.0)) throw DomainError{"lambda_factor: m(x,s,t) must be > 0"};
  const MeanKernel k = model.mean_kernel(x);
  double sum = 0.0;
  for (const auto& a : k.atoms) sum += a.mass * model.mean_population(a.y, s, t);
  if (k.density && k.hi > k.lo) {
    sum += integrate_or_throw([&](double y) { return k.density(y) * model.mean_population(y, s, t); }, k.lo, k.hi,
                              1e-10);
  }
  return sum / mx;
}

namespace {

LifeRecord life_flow(const Model& model, double x, double birth, double horizon, RandomStream& rng,
                     bool allow_division, double scale) {
  LifeRecord rec;
  rec.motion = model.flow_motion(x, birth);
  if (allow_division) {
    const double hazard = rng.exponential() / scale;
    const double r = model.division_time(x, birth, hazard);
    if (r <= horizon) {
      rec.end = r;
      rec.divided = true;
      rec.trait_at_end = model.flow(x, birth, r);
      rec.integrated_rate = hazard;
      return rec;
    }
  }
  rec.end = horizon;
  rec.trait_at_end = model.flow(x, birth, horizon);
  rec.integrated_rate = model.integrated_rate(x, birth, horizon);
  return rec;
}

// Full-truncation Euler; the hazard over each step is B(x_k, s_k) * h and is
// inverted exactly within the step.
LifeRecord life_diffusion(const Model& model, double x, double birth, double horizon, RandomStream& rng,
                          bool allow_division, double scale) {
  const double dt = model.step_size();
  if (!(dt > 0.0)) throw DomainError{model.name() + ": step size must be > 0"};
  LifeRecord rec;
  std::vector<double> times{birth};
  std::vector<double> values{x};
  const double hazard = allow_division ? rng.exponential() / scale : std::numeric_limits<double>::infinity();
  double acc = 0.0;
  double s = birth;
  std::size_t k = 0;
  while (s < horizon) {
    const double s_next = std::min(birth + static_cast<double>(k + 1) * dt, horizon);
    const double h = s_next - s;
    const double rate = model.division_rate(x, s);
    if (acc + rate * h >= hazard) {
      const double r = std::min(s + (hazard - acc) / rate, s_next);
      times.push_back(r);
      values.push_back(x);
      rec.motion = Motion::knots(Motion::Kind::linear_knots, std::move(times), std::move(values));
      rec.end = r;
      rec.divided = true;
      rec.trait_at_end = x;
      rec.integrated_rate = hazard;
      return rec;
    }
    acc += rate * h;
    const double noise = std::sqrt(std::max(model.diffusion_sq(x), 0.0) * h) * rng.normal();
    x = std::max(0.0, x + model.drift(x) * h + noise);
    times.push_back(s_next);
    values.push_back(x);
    s = s_next;
    ++k;
  }
  rec.motion = Motion::knots(Motion::Kind::linear_knots, std::move(times), std::move(values));
  rec.end = horizon;
  rec.trait_at_end = x;
  rec.integrated_rate = acc;
  return rec;
}

LifeRecord life_jump(const Model& model, double x, double birth, double horizon, RandomStream& rng,
                     bool allow_division, double scale) {
  LifeRecord rec;
  std::vector<double> times{birth};
  std::vector<double> values{x};
  double acc = 0.0;
  double s = birth;
  while (true) {
    const auto moves = model.jump_moves(x);
    const double div = model.division_rate(x, s);
    double total = allow_division ? div * scale : 0.0;
    for (const auto& m : moves) total += m.rate;
    const double wait = total > 0.0 ? rng.exponential() / total : std::numeric_limits<double>::infinity();
    if (s + wait >= horizon) {
      acc += div * (horizon - s);
      break;
    }
    s += wait;
    acc += div * wait;
    double u = rng.uniform() * total;
    if (allow_division) {
      if (u < div * scale) {
        rec.motion = Motion::knots(Motion::Kind::step_knots, std::move(times), std::move(values));
        rec.end = s;
        rec.divided = true;
        rec.trait_at_end = x;
        rec.integrated_rate = acc;
        return rec;
      }
      u -= div * scale;
    }
    double target = moves.back().target;
    for (const auto& m : moves) {
      if (u < m.rate) {
        target = m.target;
        break;
      }
      u -= m.rate;
    }
    x = target;
    times.push_back(s);
    values.push_back(x);
  }
  rec.motion = Motion::knots(Motion::Kind::step_knots, std::move(times), std::move(values));
  rec.end = horizon;
  rec.trait_at_end = x;
  rec.integrated_rate = acc;
  return rec;
}

}  // namespace

LifeRecord simulate_life(const Model& model, double x, double birth, double horizon, RandomStream& rng,
                         bool allow_division, double rate_scale) {
  if (horizon < birth) throw DomainError{"simulate_life: horizon before birth"};
  if (!(rate_scale > 0.0)) throw DomainError{"simulate_life: rate scale must be > 0"};
  switch (model.motion_kind()) {
    case MotionKind::deterministic_flow:
    case MotionKind::none: return life_flow(model, x, birth, horizon, rng, allow_division, rate_scale);
    case MotionKind::diffusion: return life_diffusion(model, x, birth, horizon, rng, allow_division, rate_scale);
    case MotionKind::jump_markov: return life_jump(model, x, birth, horizon, rng, allow_division, rate_scale);
  }
  throw DomainError{"simulate_life: unknown motion kind"};
}

Motion evolve_trait(const ModelSpec& model, double x, double s, double t, RandomStream& rng) {
  model->validate_trait(x);
  if (t < s) throw DomainError{"evolve_trait: requires s <= t"};
  return simulate_life(model.model(), x, s, t, rng, false).motion;
}

double integrated_rate_along(const Model& model, const Motion& motion, double s0, double s1) {
  if (s1 <= s0) return 0.0;
  switch (motion.kind()) {
    case Motion::Kind::constant:
    case Motion::Kind::linear_drift:
    case Motion::Kind::exponential: return model.integrated_rate(motion.value_at(s0), s0, s1);
    case Motion::Kind::linear_knots:
    case Motion::Kind::step_knots: {
      const auto& ts = motion.times();
      const auto& vs = motion.values();
      double acc = 0.0;
      for (std::size_t i = 0; i < ts.size(); ++i) {
        const double lo = std::max(ts[i], s0);
        const double hi = std::min(i + 1 < ts.size() ? ts[i + 1] : s1, s1);
        if (hi > lo) acc += model.division_rate(vs[i], ts[i]) * (hi - lo);
      }
      if (s0 < ts.front()) acc += model.division_rate(vs.front(), s0) * (std::min(ts.front(), s1) - s0);
      return acc;
    }
  }
  return 0.0;
}

}  // namespace spinesim
