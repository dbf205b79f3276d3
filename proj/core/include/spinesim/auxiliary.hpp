#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "spinesim/model.hpp"
#include "spinesim/motion.hpp"
#include "spinesim/random.hpp"

namespace spinesim {

class LinearGrowthModel;
class ExpGrowthModel;

/// B(x,s) * Lambda(x,s,t), always through mean_population and lambda_factor.
double biased_rate_generic(const Model& model, double x, double s, double t);
/// Closed form when the model provides one, generic otherwise.
double biased_rate(const Model& model, double x, double s, double t);
inline double biased_rate(const ModelSpec& model, double x, double s, double t) {
  return biased_rate(model.model(), x, s, t);
}

double biased_kernel_sample(const Model& model, double x, double s, double t, RandomStream& rng);
inline double biased_kernel_sample(const ModelSpec& model, double x, double s, double t, RandomStream& rng) {
  return biased_kernel_sample(model.model(), x, s, t, rng);
}

/// drift(x) + diffusion_sq(x) * d/dx log m(x,s,t), by central difference.
double biased_drift_generic(const Model& model, double x, double s, double t);
double biased_drift(const Model& model, double x, double s, double t);

/// Jump rates reweighted by m(target,s,t)/m(x,s,t).
std::vector<JumpMove> biased_jump_moves_generic(const Model& model, double x, double s, double t);
std::vector<JumpMove> biased_jump_moves(const Model& model, double x, double s, double t);

/// One step of the spine motion on [s, s+dt] (no divisions).
double biased_motion_step(const Model& model, double x, double s, double t, double dt, RandomStream& rng);
inline double biased_motion_step(const ModelSpec& model, double x, double s, double t, double dt,
                                 RandomStream& rng) {
  return biased_motion_step(model.model(), x, s, t, dt, rng);
}

/// Replacement for the spine division rate, with a majorant of it on [s, s_end].
struct RateOverride {
  std::function<double(double x, double s, double t)> rate;
  std::function<double(double x, double s, double s_end)> bound;
};

struct AuxiliaryOptions {
  double start = 0.0;
  /// Bound-refresh interval along deterministic flows.
  double grid = 0.01;
  bool use_closed_forms = true;
  std::optional<RateOverride> rate_override;
};

AuxiliaryPath simulate_auxiliary(const Model& model, double x0, double t, RandomStream& rng,
                                 const AuxiliaryOptions& opts = {});
inline AuxiliaryPath simulate_auxiliary(const ModelSpec& model, double x0, double t, RandomStream& rng,
                                        const AuxiliaryOptions& opts = {}) {
  return simulate_auxiliary(model.model(), x0, t, rng, opts);
}

/// Line of descent with unbiased motion, following a uniformly chosen child.
/// The division rate is B times `rate_scale` (1 for the plain tagged cell,
/// the mean offspring number for the Feynman-Kac particle).
LineagePath simulate_tagged_cell(const Model& model, double x0, double t, RandomStream& rng, double start = 0.0,
                                 double rate_scale = 1.0);
inline LineagePath simulate_tagged_cell(const ModelSpec& model, double x0, double t, RandomStream& rng,
                                        double start = 0.0, double rate_scale = 1.0) {
  return simulate_tagged_cell(model.model(), x0, t, rng, start, rate_scale);
}

/// Integral of B along a path, using the simulators' discretisation.
double integrated_rate_on_path(const Model& model, const Path& path, double s0, double s1);

struct WeightedAtom {
  double x;
  double weight;
};

/// Categorical draw with probability proportional to weight * m(x, 0, t).
double sample_pi_t(const Model& model, const std::vector<WeightedAtom>& atoms, double t, RandomStream& rng);
inline double sample_pi_t(const ModelSpec& model, const std::vector<WeightedAtom>& atoms, double t,
                          RandomStream& rng) {
  return sample_pi_t(model.model(), atoms, t, rng);
}

/// Spine rate with the exponent 2*sqrt(alpha)*(t-s) in place of 2*sqrt(a*alpha)*(t-s).
RateOverride uncorrected_linear_override(const LinearGrowthModel& model);
/// Spine rate with an extra constant beta in the division rate and the exponent a-beta.
RateOverride uncorrected_exp_override(const ExpGrowthModel& model, double beta);

/// time,trait,event rows (event is motion or division).
void write_path_csv(std::ostream& os, const Path& path);

}  // namespace spinesim
