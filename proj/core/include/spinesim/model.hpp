#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spinesim/motion.hpp"
#include "spinesim/random.hpp"

namespace spinesim {

enum class MotionKind { deterministic_flow, diffusion, jump_markov, none };
enum class TraitKind { real, count, flag };

using RealFn = std::function<double(double)>;

struct OffspringDraw {
  std::size_t count = 0;
  std::vector<double> children;
};

/// Expected number of children with trait in dy, m(x, dy): point masses plus
/// an optional density on [lo, hi].
struct MeanKernel {
  struct Atom {
    double y;
    double mass;
  };
  std::vector<Atom> atoms;
  double lo = 0.0;
  double hi = 0.0;
  RealFn density;

  double total_mass(double abs_tol = 1e-12) const;
};

/// One life: motion from birth until division (or the horizon).
struct LifeRecord {
  Motion motion;
  double end = 0.0;
  bool divided = false;
  double trait_at_end = 0.0;
  /// Integral of the division rate along the recorded motion on [birth, end].
  double integrated_rate = 0.0;
};

struct JumpMove {
  double target;
  double rate;
};

/// Immutable description of a branching model: trait motion, division rate
/// B(x, t), offspring law and the mean-growth function m(x, s, t) when known.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string name() const = 0;
  virtual MotionKind motion_kind() const = 0;
  virtual TraitKind trait_kind() const = 0;
  void validate_trait(double x) const;

  virtual double division_rate(double x, double t) const = 0;
  virtual double mean_offspring(double x) const = 0;
  virtual OffspringDraw sample_offspring(double x, RandomStream& rng) const = 0;
  virtual MeanKernel mean_kernel(double x) const = 0;
  /// Sum over ordered pairs of distinct children of f(child a) g(child b), averaged over the offspring law.
  virtual double pair_moment(double x, const RealFn& f, const RealFn& g) const = 0;

  virtual bool has_closed_form_mean() const { return false; }
  virtual double mean_population(double x, double s, double t) const;

  // Deterministic flows (motion kinds deterministic_flow and none).
  virtual double flow(double x, double s, double t) const;
  virtual Motion flow_motion(double x, double s) const;
  /// Integral of B along the flow started from (x, s), up to time t.
  virtual double integrated_rate(double x, double s, double t) const;
  /// Time r >= s at which integrated_rate(x, s, r) reaches `hazard`; +inf if never.
  virtual double division_time(double x, double s, double hazard) const;
  /// Upper bound of B along the flow from (x, s) on [s, s_end].
  virtual double rate_bound(double x, double s, double s_end) const;

  // Diffusions: dX = drift dt + sqrt(diffusion_sq) dW, truncated at 0.
  virtual double drift(double x) const;
  virtual double diffusion_sq(double x) const;
  virtual double step_size() const { return 1e-3; }

  // Jump-Markov motions (time-homogeneous).
  virtual std::vector<JumpMove> jump_moves(double x) const;

  // Spine quantities with closed forms. Empty optional means "use the generic path".
  virtual std::optional<double> biased_rate_closed(double x, double s, double t) const;
  virtual std::optional<double> biased_drift_closed(double x, double s, double t) const;
  virtual std::optional<std::vector<JumpMove>> biased_jump_moves_closed(double x, double s, double t) const;
  /// Per-move upper bounds for biased jump rates, valid for every s <= t.
  virtual std::vector<double> biased_jump_bounds(double x) const;
  /// Upper bound of Lambda(y, r, t) for r in [s, s_end] along the current motion.
  virtual double lambda_bound(double x, double s, double s_end, double t) const;
  /// Draw from the biased birth kernel. Default: reweight the discrete mean kernel by m(., s, t).
  virtual double sample_biased_kernel(double x, double s, double t, RandomStream& rng) const;
};

/// Handle to an immutable model plus the parameters it was built from.
class ModelSpec {
 public:
  ModelSpec(std::string id, nlohmann::json params, std::shared_ptr<const Model> impl);

  const std::string& id() const { return id_; }
  const nlohmann::json& params() const { return params_; }
  const Model& model() const { return *impl_; }
  const Model* operator->() const { return impl_.get(); }
  const Model& operator*() const { return *impl_; }
  bool has_closed_form_mean() const { return impl_->has_closed_form_mean(); }

 private:
  std::string id_;
  nlohmann::json params_;
  std::shared_ptr<const Model> impl_;
};

/// Builds a bundled model from {"id": ..., parameters...}. Rejects unknown ids,
/// unknown keys, missing keys and out-of-range values; messages name the key.
ModelSpec build_model(const nlohmann::json& config);

const std::vector<std::string>& bundled_model_ids();

double division_rate(const ModelSpec& model, double x, double t);
OffspringDraw offspring_sample(const ModelSpec& model, double x, RandomStream& rng);
double mean_population(const ModelSpec& model, double x, double s, double t);
/// Lambda(x,s,t) = integral of m(y,s,t)/m(x,s,t) m(x,dy); quadrature for densities.
double lambda_factor(const Model& model, double x, double s, double t);
inline double lambda_factor(const ModelSpec& model, double x, double s, double t) {
  return lambda_factor(model.model(), x, s, t);
}

/// Simulates one life started at (x, birth): motion until division or `horizon`.
/// With `allow_division` false the motion runs to the horizon. The division
/// rate is multiplied by `rate_scale`; integrated_rate is reported unscaled.
LifeRecord simulate_life(const Model& model, double x, double birth, double horizon, RandomStream& rng,
                         bool allow_division = true, double rate_scale = 1.0);

/// Trait motion on [s, t] with divisions switched off.
Motion evolve_trait(const ModelSpec& model, double x, double s, double t, RandomStream& rng);

/// Integral of B along a recorded motion on [s0, s1], consistent with how the
/// simulators discretize the hazard.
double integrated_rate_along(const Model& model, const Motion& motion, double s0, double s1);

}  // namespace spinesim
