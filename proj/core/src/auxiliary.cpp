#include "spinesim/auxiliary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "spinesim/errors.hpp"
#include "spinesim/format.hpp"
#include "spinesim/models.hpp"

namespace spinesim {

namespace {

constexpr double kSlack = 1e-12;

void check_bound(double rate, double bound, const char* what) {
  if (rate > bound * (1.0 + kSlack)) {
    throw ThinningBoundViolated{std::string{what} + ": rate " + fmt17(rate) + " exceeds bound " + fmt17(bound)};
  }
}

}  // namespace

double biased_rate_generic(const Model& model, double x, double s, double t) {
  const double b = model.division_rate(x, s);
  if (b == 0.0) return 0.0;
  return b * lambda_factor(model, x, s, t);
}

double biased_rate(const Model& model, double x, double s, double t) {
  if (auto r = model.biased_rate_closed(x, s, t)) return *r;
  return biased_rate_generic(model, x, s, t);
}

double biased_kernel_sample(const Model& model, double x, double s, double t, RandomStream& rng) {
  if (t < s) throw DomainError{"biased_kernel_sample: requires s <= t"};
  return model.sample_biased_kernel(x, s, t, rng);
}

double biased_drift_generic(const Model& model, double x, double s, double t) {
  const double h = 1e-4 * std::max(1.0, std::abs(x));
  const double m = model.mean_population(x, s, t);
  const double dm = (model.mean_population(x + h, s, t) - model.mean_population(x - h, s, t)) / (2.0 * h);
  return model.drift(x) + model.diffusion_sq(x) * dm / m;
}

double biased_drift(const Model& model, double x, double s, double t) {
  if (auto d = model.biased_drift_closed(x, s, t)) return *d;
  return biased_drift_generic(model, x, s, t);
}

std::vector<JumpMove> biased_jump_moves_generic(const Model& model, double x, double s, double t) {
  auto moves = model.jump_moves(x);
  const double m = model.mean_population(x, s, t);
  for (auto& mv : moves) mv.rate *= model.mean_population(mv.target, s, t) / m;
  return moves;
}

std::vector<JumpMove> biased_jump_moves(const Model& model, double x, double s, double t) {
  if (auto mv = model.biased_jump_moves_closed(x, s, t)) return *mv;
  return biased_jump_moves_generic(model, x, s, t);
}

namespace {

double euler_step(const Model& model, double x, double s, double t, double h, RandomStream& rng, bool closed) {
  const double drift = closed ? biased_drift(model, x, s, t) : biased_drift_generic(model, x, s, t);
  const double noise = std::sqrt(std::max(model.diffusion_sq(x), 0.0) * h) * rng.normal();
  return std::max(0.0, x + drift * h + noise);
}

std::vector<JumpMove> spine_moves(const Model& model, double x, double s, double t, bool closed) {
  return closed ? biased_jump_moves(model, x, s, t) : biased_jump_moves_generic(model, x, s, t);
}

}  // namespace

double biased_motion_step(const Model& model, double x, double s, double t, double dt, RandomStream& rng) {
  if (!(dt >= 0.0) || s + dt > t * (1.0 + kSlack) + kSlack) throw DomainError{"biased_motion_step: invalid dt"};
  switch (model.motion_kind()) {
    case MotionKind::none: return x;
    case MotionKind::deterministic_flow: return model.flow(x, s, s + dt);
    case MotionKind::diffusion: return euler_step(model, x, s, t, dt, rng, true);
    case MotionKind::jump_markov: {
      double r = s;
      const double end = s + dt;
      while (true) {
        const auto bounds = model.biased_jump_bounds(x);
        double total = 0.0;
        for (double b : bounds) total += b;
        if (total <= 0.0) return x;
        r += rng.exponential() / total;
        if (r >= end) return x;
        const auto moves = biased_jump_moves(model, x, r, t);
        double u = rng.uniform() * total;
        for (std::size_t j = 0; j < bounds.size(); ++j) {
          if (u < bounds[j]) {
            check_bound(moves[j].rate, bounds[j], "biased jump");
            if (rng.uniform() * bounds[j] < moves[j].rate) x = moves[j].target;
            break;
          }
          u -= bounds[j];
        }
      }
    }
  }
  return x;
}

namespace {

class SpineBuilder {
 public:
  SpineBuilder(const Model& model, double t, RandomStream& rng, const AuxiliaryOptions& opts)
      : model_{model}, t_{t}, rng_{rng}, opts_{opts}, path_{opts.start, t} {}

  double rate(double x, double s) const {
    if (opts_.rate_override) return opts_.rate_override->rate(x, s, t_);
    return opts_.use_closed_forms ? biased_rate(model_, x, s, t_) : biased_rate_generic(model_, x, s, t_);
  }

  double kernel(double x, double s) { return model_.sample_biased_kernel(x, s, t_, rng_); }

  AuxiliaryPath flow(double x0) {
    double seg_start = opts_.start;
    double seg_x = x0;
    double s = opts_.start;
    const double grid = opts_.grid > 0.0 ? opts_.grid : 0.01;
    while (s < t_) {
      const double s_end = std::min(s + grid, t_);
      const double xs = model_.flow(seg_x, seg_start, s);
      const double bound = opts_.rate_override
                               ? opts_.rate_override->bound(xs, s, s_end)
                               : model_.lambda_bound(xs, s, s_end, t_) * model_.rate_bound(xs, s, s_end);
      if (!(bound > 0.0)) {
        s = s_end;
        continue;
      }
      const double r = s + rng_.exponential() / bound;
      if (r >= s_end) {
        s = s_end;
        continue;
      }
      s = r;
      const double x = model_.flow(seg_x, seg_start, s);
      const double b = rate(x, s);
      check_bound(b, bound, "spine division");
      if (rng_.uniform() * bound < b) {
        const double y = kernel(x, s);
        path_.add_segment({seg_start, s, model_.flow_motion(seg_x, seg_start)});
        path_.add_jump({s, x, y});
        seg_start = s;
        seg_x = y;
      }
    }
    path_.add_segment({seg_start, t_, model_.flow_motion(seg_x, seg_start)});
    return std::move(path_);
  }

  AuxiliaryPath diffusion(double x0) {
    const double dt = model_.step_size();
    if (!(dt > 0.0)) throw DomainError{model_.name() + ": step size must be > 0"};
    double seg_start = opts_.start;
    std::vector<double> times{seg_start};
    std::vector<double> values{x0};
    double x = x0;
    double s = seg_start;
    std::size_t k = 0;
    while (s < t_) {
      const double s_next = std::min(seg_start + static_cast<double>(k + 1) * dt, t_);
      const double bound = opts_.rate_override ? opts_.rate_override->bound(x, s, s_next)
                                               : model_.lambda_bound(x, s, s_next, t_) * model_.division_rate(x, s);
      bool jumped = false;
      double r = s;
      while (bound > 0.0) {
        r += rng_.exponential() / bound;
        if (r >= s_next) break;
        const double b = rate(x, r);
        check_bound(b, bound, "spine division");
        if (rng_.uniform() * bound < b) {
          jumped = true;
          break;
        }
      }
      if (jumped) {
        const double y = kernel(x, r);
        times.push_back(r);
        values.push_back(x);
        path_.add_segment({seg_start, r, Motion::knots(Motion::Kind::linear_knots, std::move(times), std::move(values))});
        path_.add_jump({r, x, y});
        seg_start = r;
        s = r;
        x = y;
        times = {r};
        values = {y};
        k = 0;
        continue;
      }
      x = euler_step(model_, x, s, t_, s_next - s, rng_, opts_.use_closed_forms);
      times.push_back(s_next);
      values.push_back(x);
      s = s_next;
      ++k;
    }
    path_.add_segment({seg_start, t_, Motion::knots(Motion::Kind::linear_knots, std::move(times), std::move(values))});
    return std::move(path_);
  }

  AuxiliaryPath jumps(double x0) {
    double seg_start = opts_.start;
    std::vector<double> times{seg_start};
    std::vector<double> values{x0};
    double x = x0;
    double s = seg_start;
    while (true) {
      const auto bounds = model_.biased_jump_bounds(x);
      const double div_bound = opts_.rate_override ? opts_.rate_override->bound(x, s, t_)
                                                   : model_.lambda_bound(x, s, t_, t_) * model_.division_rate(x, s);
      double total = div_bound;
      for (double b : bounds) total += b;
      if (!(total > 0.0)) break;
      s += rng_.exponential() / total;
      if (s >= t_) break;
      double u = rng_.uniform() * total;
      if (u < div_bound) {
        const double b = rate(x, s);
        check_bound(b, div_bound, "spine division");
        if (rng_.uniform() * div_bound < b) {
          const double y = kernel(x, s);
          path_.add_segment({seg_start, s, Motion::knots(Motion::Kind::step_knots, std::move(times), std::move(values))});
          path_.add_jump({s, x, y});
          seg_start = s;
          x = y;
          times = {s};
          values = {y};
        }
        continue;
      }
      u -= div_bound;
      const auto moves = spine_moves(model_, x, s, t_, opts_.use_closed_forms);
      for (std::size_t j = 0; j < bounds.size(); ++j) {
        if (u < bounds[j] || j + 1 == bounds.size()) {
          check_bound(moves[j].rate, bounds[j], "spine motion");
          if (rng_.uniform() * bounds[j] < moves[j].rate) {
            x = moves[j].target;
            times.push_back(s);
            values.push_back(x);
          }
          break;
        }
        u -= bounds[j];
      }
    }
    path_.add_segment({seg_start, t_, Motion::knots(Motion::Kind::step_knots, std::move(times), std::move(values))});
    return std::move(path_);
  }

 private:
  const Model& model_;
  double t_;
  RandomStream& rng_;
  const AuxiliaryOptions& opts_;
  AuxiliaryPath path_;
};

}  // namespace

AuxiliaryPath simulate_auxiliary(const Model& model, double x0, double t, RandomStream& rng,
                                 const AuxiliaryOptions& opts) {
  model.validate_trait(x0);
  if (t < opts.start) throw DomainError{"simulate_auxiliary: horizon before start"};
  SpineBuilder b{model, t, rng, opts};
  switch (model.motion_kind()) {
    case MotionKind::none:
    case MotionKind::deterministic_flow: return b.flow(x0);
    case MotionKind::diffusion: return b.diffusion(x0);
    case MotionKind::jump_markov: return b.jumps(x0);
  }
  throw DomainError{"simulate_auxiliary: unknown motion kind"};
}

LineagePath simulate_tagged_cell(const Model& model, double x0, double t, RandomStream& rng, double start,
                                 double rate_scale) {
  model.validate_trait(x0);
  if (t < start) throw DomainError{"simulate_tagged_cell: horizon before start"};
  LineagePath path{start, t};
  double s = start;
  double x = x0;
  while (true) {
    LifeRecord rec = simulate_life(model, x, s, t, rng, true, rate_scale);
    path.add_segment({s, rec.end, std::move(rec.motion)});
    if (!rec.divided) break;
    const OffspringDraw draw = model.sample_offspring(rec.trait_at_end, rng);
    if (draw.children.empty()) {
      throw DomainError{"simulate_tagged_cell: the tagged line died out"};
    }
    const double y = draw.children[rng.index(draw.children.size())];
    path.add_jump({rec.end, rec.trait_at_end, y});
    s = rec.end;
    x = y;
  }
  return path;
}

double integrated_rate_on_path(const Model& model, const Path& path, double s0, double s1) {
  double acc = 0.0;
  for (const auto& seg : path.segments()) {
    const double lo = std::max(seg.start, s0);
    const double hi = std::min(seg.end, s1);
    if (hi > lo) acc += integrated_rate_along(model, seg.motion, lo, hi);
  }
  return acc;
}

double sample_pi_t(const Model& model, const std::vector<WeightedAtom>& atoms, double t, RandomStream& rng) {
  if (atoms.empty()) throw DomainError{"sample_pi_t: no atoms"};
  std::vector<double> w;
  w.reserve(atoms.size());
  double total = 0.0;
  for (const auto& a : atoms) {
    if (a.weight < 0.0 || !std::isfinite(a.weight)) throw DomainError{"sample_pi_t: weights must be >= 0"};
    model.validate_trait(a.x);
    w.push_back(a.weight == 0.0 ? 0.0 : a.weight * (t > 0.0 ? model.mean_population(a.x, 0.0, t) : 1.0));
    total += w.back();
  }
  if (!(total > 0.0)) throw DomainError{"sample_pi_t: all weights are zero"};
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (u < w[i]) return atoms[i].x;
    u -= w[i];
  }
  for (std::size_t i = w.size(); i-- > 0;) {
    if (w[i] > 0.0) return atoms[i].x;
  }
  return atoms.back().x;
}

RateOverride uncorrected_linear_override(const LinearGrowthModel& model) {
  const LinearGrowthModel* m = &model;
  return {[m](double x, double s, double t) { return m->uncorrected_biased_rate(x, s, t); },
          [m](double x, double s, double s_end) { return 2.0 * m->rate_bound(x, s, s_end); }};
}

RateOverride uncorrected_exp_override(const ExpGrowthModel& model, double beta) {
  const ExpGrowthModel* m = &model;
  return {[m, beta](double x, double s, double t) { return m->uncorrected_biased_rate(x, s, t, beta); },
          [m, beta](double x, double s, double s_end) { return 2.0 * (m->rate_bound(x, s, s_end) + beta); }};
}

void write_path_csv(std::ostream& os, const Path& path) {
  os << "time,trait,event\n";
  const auto& segs = path.segments();
  const auto& jumps = path.jumps();
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto& seg = segs[i];
    const auto& m = seg.motion;
    const bool knots = m.kind() == Motion::Kind::linear_knots || m.kind() == Motion::Kind::step_knots;
    double last = seg.start;
    if (knots) {
      for (std::size_t k = 0; k < m.times().size() && m.times()[k] <= seg.end; ++k) {
        os << fmt17(m.times()[k]) << ',' << fmt17(m.values()[k]) << ",motion\n";
        last = m.times()[k];
      }
    } else {
      os << fmt17(seg.start) << ',' << fmt17(m.value_at(seg.start)) << ",motion\n";
    }
    if (i < jumps.size()) {
      os << fmt17(jumps[i].time) << ',' << fmt17(jumps[i].pre) << ",division\n";
    } else if (!knots || last < seg.end) {
      os << fmt17(seg.end) << ',' << fmt17(m.value_at(seg.end)) << ",motion\n";
    }
  }
}

}  // namespace spinesim
