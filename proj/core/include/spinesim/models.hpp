#pragma once

// Concrete bundled models. Exposed so that tests and tools can reach the
// closed-form spine quantities directly.

#include <cmath>
#include <vector>

#include "spinesim/model.hpp"

namespace spinesim {

/// Neutral clonal splitting at constant rate b into k identical copies.
class YuleModel final : public Model {
 public:
  YuleModel(double b, int offspring);

  std::string name() const override { return "yule"; }
  MotionKind motion_kind() const override { return MotionKind::none; }
  TraitKind trait_kind() const override { return TraitKind::real; }

  double division_rate(double, double) const override { return b_; }
  double mean_offspring(double) const override { return k_; }
  OffspringDraw sample_offspring(double x, RandomStream& rng) const override;
  MeanKernel mean_kernel(double x) const override;
  double pair_moment(double x, const RealFn& f, const RealFn& g) const override;

  bool has_closed_form_mean() const override { return true; }
  double mean_population(double x, double s, double t) const override;

  double integrated_rate(double x, double s, double t) const override;
  double division_time(double x, double s, double hazard) const override;

  std::optional<double> biased_rate_closed(double x, double s, double t) const override;
  double lambda_bound(double x, double s, double s_end, double t) const override;

 private:
  double b_;
  int k_;
};

/// Piecewise-constant function of time: values[i] on [breaks[i-1], breaks[i]).
class PiecewiseConstant {
 public:
  explicit PiecewiseConstant(double value) : values_{value} {}
  PiecewiseConstant(std::vector<double> breaks, std::vector<double> values);

  double operator()(double t) const;
  /// Integral of f(r) e^{c (r - s)} over [s, t].
  double weighted_integral(double s, double t, double c) const;
  /// Smallest r >= s with scale * weighted_integral(s, r, c) = target; +inf if unreachable.
  double invert_weighted_integral(double s, double c, double scale, double target) const;
  double max_on(double s, double t) const;
  bool is_constant() const { return breaks_.empty(); }
  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> breaks_;
  std::vector<double> values_;
};

/// Size grows linearly at rate a; divides at rate alpha*x into two halves.
class LinearGrowthModel final : public Model {
 public:
  LinearGrowthModel(double a, double alpha);

  std::string name() const override { return "linear_growth"; }
  MotionKind motion_kind() const override { return MotionKind::deterministic_flow; }
  TraitKind trait_kind() const override { return TraitKind::real; }

  double division_rate(double x, double) const override { return alpha_ * x; }
  double mean_offspring(double) const override { return 2.0; }
  OffspringDraw sample_offspring(double x, RandomStream& rng) const override;
  MeanKernel mean_kernel(double x) const override;
  double pair_moment(double x, const RealFn& f, const RealFn& g) const override;

  bool has_closed_form_mean() const override { return true; }
  double mean_population(double x, double s, double t) const override;

  double flow(double x, double s, double t) const override { return x + a_ * (t - s); }
  Motion flow_motion(double x, double s) const override { return Motion::linear_drift(x, s, a_); }
  double integrated_rate(double x, double s, double t) const override;
  double division_time(double x, double s, double hazard) const override;

  std::optional<double> biased_rate_closed(double x, double s, double t) const override;
  /// Variant with the exponent 2*sqrt(alpha)*(t-s) in place of 2*sqrt(a*alpha)*(t-s).
  double uncorrected_biased_rate(double x, double s, double t) const;

  double a() const { return a_; }
  double alpha() const { return alpha_; }

 private:
  double a_;
  double alpha_;
};

/// Size grows exponentially at rate a; divides at rate alpha(t)*x into two halves.
class ExpGrowthModel final : public Model {
 public:
  ExpGrowthModel(double a, PiecewiseConstant alpha);

  std::string name() const override { return "exp_growth"; }
  MotionKind motion_kind() const override { return MotionKind::deterministic_flow; }
  TraitKind trait_kind() const override { return TraitKind::real; }

  double division_rate(double x, double t) const override { return alpha_(t) * x; }
  double mean_offspring(double) const override { return 2.0; }
  OffspringDraw sample_offspring(double x, RandomStream& rng) const override;
  MeanKernel mean_kernel(double x) const override;
  double pair_moment(double x, const RealFn& f, const RealFn& g) const override;

  bool has_closed_form_mean() const override { return true; }
  double mean_population(double x, double s, double t) const override;

  double flow(double x, double s, double t) const override { return x * std::exp(a_ * (t - s)); }
  Motion flow_motion(double x, double s) const override { return Motion::exponential(x, s, a_); }
  double integrated_rate(double x, double s, double t) const override;
  double division_time(double x, double s, double hazard) const override;
  double rate_bound(double x, double s, double s_end) const override;

  std::optional<double> biased_rate_closed(double x, double s, double t) const override;
  /// Variant (alpha(s)x + beta)(1 + 1/(1 + x int alpha e^{(a-beta)(r-s)})).
  double uncorrected_biased_rate(double x, double s, double t, double beta) const;

  double a() const { return a_; }
  const PiecewiseConstant& alpha() const { return alpha_; }

 private:
  double a_;
  PiecewiseConstant alpha_;
};

/// Parasite load follows a Feller diffusion dX = gX dt + sqrt(2 sigma2 X) dW; the cell
/// divides at rate alpha*x + beta and the load is split uniformly between daughters.
class ParasiteModel final : public Model {
 public:
  ParasiteModel(double g, double sigma2, double alpha, double beta, double dt);

  std::string name() const override { return "parasite"; }
  MotionKind motion_kind() const override { return MotionKind::diffusion; }
  TraitKind trait_kind() const override { return TraitKind::real; }

  double division_rate(double x, double) const override { return alpha_ * x + beta_; }
  double mean_offspring(double) const override { return 2.0; }
  OffspringDraw sample_offspring(double x, RandomStream& rng) const override;
  OffspringDraw split(double x, double delta) const;
  MeanKernel mean_kernel(double x) const override;
  double pair_moment(double x, const RealFn& f, const RealFn& g) const override;

  bool has_closed_form_mean() const override { return true; }
  double mean_population(double x, double s, double t) const override;

  double drift(double x) const override { return g_ * x; }
  double diffusion_sq(double x) const override { return 2.0 * sigma2_ * x; }
  double step_size() const override { return dt_; }

  std::optional<double> biased_rate_closed(double x, double s, double t) const override;
  std::optional<double> biased_drift_closed(double x, double s, double t) const override;
  double sample_biased_kernel(double x, double s, double t, RandomStream& rng) const override;
  /// Density of the biased birth kernel at y in [0, x].
  double biased_kernel_density(double y, double x, double s, double t) const;

  double g() const { return g_; }
  double beta() const { return beta_; }
  double alpha() const { return alpha_; }
  double sigma2() const { return sigma2_; }

 private:
  /// m(x,s,t) = e^{beta tau} (1 + slope * x).
  double slope(double tau) const;

  double g_;
  double sigma2_;
  double alpha_;
  double beta_;
  double dt_;
};

/// Plasmid count follows a linear birth-death process (per-plasmid rates lambda, mu);
/// the cell divides at rate x and plasmids are shared Binomial(x, U) / rest.
class PlasmidModel final : public Model {
 public:
  PlasmidModel(double lambda, double mu);

  std::string name() const override { return "plasmid_bd"; }
  MotionKind motion_kind() const override { return MotionKind::jump_markov; }
  TraitKind trait_kind() const override { return TraitKind::count; }

  double division_rate(double x, double) const override { return x; }
  double mean_offspring(double) const override { return 2.0; }
  OffspringDraw sample_offspring(double x, RandomStream& rng) const override;
  MeanKernel mean_kernel(double x) const override;
  double pair_moment(double x, const RealFn& f, const RealFn& g) const override;

  bool has_closed_form_mean() const override { return true; }
  double mean_population(double x, double s, double t) const override;

  std::vector<JumpMove> jump_moves(double x) const override;

  std::optional<double> biased_rate_closed(double x, double s, double t) const override;
  std::optional<std::vector<JumpMove>> biased_jump_moves_closed(double x, double s, double t) const override;
  std::vector<double> biased_jump_bounds(double x) const override;

  /// Per-plasmid birth and death rates of the spine motion.
  double biased_birth_factor(double x, double s, double t) const;
  double biased_death_factor(double x, double s, double t) const;

  double lambda() const { return lambda_; }
  double mu() const { return mu_; }

 private:
  double lambda_;
  double mu_;
};

/// Two types with rates b0, b1; each daughter switches type with probability p.
class SwitchModel final : public Model {
 public:
  SwitchModel(double b0, double b1, double p);

  std::string name() const override { return "two_type_switch"; }
  MotionKind motion_kind() const override { return MotionKind::none; }
  TraitKind trait_kind() const override { return TraitKind::flag; }

  double division_rate(double x, double) const override { return x < 0.5 ? b0_ : b1_; }
  double mean_offspring(double) const override { return 2.0; }
  OffspringDraw sample_offspring(double x, RandomStream& rng) const override;
  MeanKernel mean_kernel(double x) const override;
  double pair_moment(double x, const RealFn& f, const RealFn& g) const override;

  bool has_closed_form_mean() const override { return true; }
  double mean_population(double x, double s, double t) const override;

  double integrated_rate(double x, double s, double t) const override;
  double division_time(double x, double s, double hazard) const override;

  std::optional<double> biased_rate_closed(double x, double s, double t) const override;
  double lambda_bound(double x, double s, double s_end, double t) const override;

  double b0() const { return b0_; }
  double b1() const { return b1_; }
  double p() const { return p_; }

 private:
  double b0_;
  double b1_;
  double p_;
};

}  // namespace spinesim
