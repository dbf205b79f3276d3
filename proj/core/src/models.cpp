#include "spinesim/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spinesim/errors.hpp"
#include "spinesim/numerics.hpp"

namespace spinesim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// ---- yule ----

YuleModel::YuleModel(double b, int offspring) : b_{b}, k_{offspring} {}

OffspringDraw YuleModel::sample_offspring(double x, RandomStream&) const {
  return {static_cast<std::size_t>(k_), std::vector<double>(static_cast<std::size_t>(k_), x)};
}

MeanKernel YuleModel::mean_kernel(double x) const {
  MeanKernel k;
  k.atoms.push_back({x, static_cast<double>(k_)});
  return k;
}

double YuleModel::pair_moment(double x, const RealFn& f, const RealFn& g) const {
  return static_cast<double>(k_) * (k_ - 1) * f(x) * g(x);
}

double YuleModel::mean_population(double, double s, double t) const { return std::exp(b_ * (k_ - 1) * (t - s)); }

double YuleModel::integrated_rate(double, double s, double t) const { return t > s ? b_ * (t - s) : 0.0; }

double YuleModel::division_time(double, double s, double hazard) const { return s + hazard / b_; }

std::optional<double> YuleModel::biased_rate_closed(double, double, double) const { return b_ * k_; }

double YuleModel::lambda_bound(double, double, double, double) const { return k_; }

// ---- piecewise-constant alpha(t) ----

PiecewiseConstant::PiecewiseConstant(std::vector<double> breaks, std::vector<double> values)
    : breaks_{std::move(breaks)}, values_{std::move(values)} {
  if (values_.size() != breaks_.size() + 1) throw DomainError{"PiecewiseConstant: need one more value than breaks"};
}

double PiecewiseConstant::operator()(double t) const {
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  return values_[static_cast<std::size_t>(it - breaks_.begin())];
}

double PiecewiseConstant::weighted_integral(double s, double t, double c) const {
  if (t <= s) return 0.0;
  double sum = 0.0;
  double lo = s;
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), s);
  std::size_t i = static_cast<std::size_t>(it - breaks_.begin());
  while (lo < t) {
    const double hi = std::min(i < breaks_.size() ? breaks_[i] : kInf, t);
    const double w = hi - lo;
    sum += values_[i] * std::exp(c * (lo - s)) * w * expm1_ratio(c * w);
    lo = hi;
    ++i;
  }
  return sum;
}

double PiecewiseConstant::invert_weighted_integral(double s, double c, double scale, double target) const {
  if (target <= 0.0) return s;
  if (!(scale > 0.0)) return kInf;
  double acc = 0.0;
  double lo = s;
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), s);
  std::size_t i = static_cast<std::size_t>(it - breaks_.begin());
  while (true) {
    const bool last = i >= breaks_.size();
    const double hi = last ? kInf : breaks_[i];
    const double lead = scale * values_[i] * std::exp(c * (lo - s));
    double piece;
    if (last) {
      piece = c >= 0.0 ? kInf : lead / (-c);
    } else {
      const double w = hi - lo;
      piece = lead * w * expm1_ratio(c * w);
    }
    if (acc + piece >= target) {
      const double rest = (target - acc) / lead;
      double u;
      if (std::abs(c) < 1e-300) {
        u = rest;
      } else {
        const double arg = c * rest;
        if (arg <= -1.0) return kInf;
        u = std::log1p(arg) / c;
      }
      return last ? lo + u : std::min(lo + u, hi);
    }
    if (last) return kInf;
    acc += piece;
    lo = hi;
    ++i;
  }
}

double PiecewiseConstant::max_on(double s, double t) const {
  auto first = std::upper_bound(breaks_.begin(), breaks_.end(), s);
  auto last = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  const auto i0 = static_cast<std::size_t>(first - breaks_.begin());
  const auto i1 = static_cast<std::size_t>(last - breaks_.begin());
  return *std::max_element(values_.begin() + static_cast<std::ptrdiff_t>(i0),
                           values_.begin() + static_cast<std::ptrdiff_t>(i1) + 1);
}

// ---- halving helpers ----

namespace {

OffspringDraw halves(double x) { return {2, {0.5 * x, 0.5 * x}}; }

MeanKernel halves_kernel(double x) {
  MeanKernel k;
  k.atoms.push_back({0.5 * x, 2.0});
  return k;
}

double halves_pair(double x, const RealFn& f, const RealFn& g) { return 2.0 * f(0.5 * x) * g(0.5 * x); }

}  // namespace

// ---- linear growth ----

LinearGrowthModel::LinearGrowthModel(double a, double alpha) : a_{a}, alpha_{alpha} {}

OffspringDraw LinearGrowthModel::sample_offspring(double x, RandomStream&) const { return halves(x); }
MeanKernel LinearGrowthModel::mean_kernel(double x) const { return halves_kernel(x); }
double LinearGrowthModel::pair_moment(double x, const RealFn& f, const RealFn& g) const {
  return halves_pair(x, f, g);
}

double LinearGrowthModel::mean_population(double x, double s, double t) const {
  const double tau = t - s;
  const double abar = std::sqrt(a_ * alpha_);
  const double q = std::sqrt(alpha_ / a_);
  return std::cosh(abar * tau) + x * q * std::sinh(abar * tau);
}

double LinearGrowthModel::integrated_rate(double x, double s, double t) const {
  if (t <= s) return 0.0;
  const double tau = t - s;
  return alpha_ * (x * tau + 0.5 * a_ * tau * tau);
}

double LinearGrowthModel::division_time(double x, double s, double hazard) const {
  if (hazard <= 0.0) return s;
  const double ax = alpha_ * x;
  return s + 2.0 * hazard / (ax + std::sqrt(ax * ax + 2.0 * a_ * alpha_ * hazard));
}

std::optional<double> LinearGrowthModel::biased_rate_closed(double x, double s, double t) const {
  const double q = std::sqrt(alpha_ / a_);
  const double e = std::exp(-2.0 * std::sqrt(a_ * alpha_) * (t - s));
  return alpha_ * x * (1.0 + (1.0 + e) / ((1.0 - x * q) * e + 1.0 + x * q));
}

double LinearGrowthModel::uncorrected_biased_rate(double x, double s, double t) const {
  const double q = std::sqrt(alpha_ / a_);
  const double e = std::exp(-2.0 * std::sqrt(alpha_) * (t - s));
  return alpha_ * x * (1.0 + (1.0 + e) / ((1.0 - x * q) * e + 1.0 + x * q));
}

// ---- exponential growth ----

ExpGrowthModel::ExpGrowthModel(double a, PiecewiseConstant alpha) : a_{a}, alpha_{std::move(alpha)} {}

OffspringDraw ExpGrowthModel::sample_offspring(double x, RandomStream&) const { return halves(x); }
MeanKernel ExpGrowthModel::mean_kernel(double x) const { return halves_kernel(x); }
double ExpGrowthModel::pair_moment(double x, const RealFn& f, const RealFn& g) const { return halves_pair(x, f, g); }

double ExpGrowthModel::mean_population(double x, double s, double t) const {
  return 1.0 + x * alpha_.weighted_integral(s, t, a_);
}

double ExpGrowthModel::integrated_rate(double x, double s, double t) const {
  return x * alpha_.weighted_integral(s, t, a_);
}

double ExpGrowthModel::division_time(double x, double s, double hazard) const {
  return alpha_.invert_weighted_integral(s, a_, x, hazard);
}

double ExpGrowthModel::rate_bound(double x, double s, double s_end) const {
  return alpha_.max_on(s, s_end) * x * std::exp(std::max(a_, 0.0) * (s_end - s));
}

std::optional<double> ExpGrowthModel::biased_rate_closed(double x, double s, double t) const {
  return alpha_(s) * x * (1.0 + 1.0 / (1.0 + x * alpha_.weighted_integral(s, t, a_)));
}

double ExpGrowthModel::uncorrected_biased_rate(double x, double s, double t, double beta) const {
  return (alpha_(s) * x + beta) * (1.0 + 1.0 / (1.0 + x * alpha_.weighted_integral(s, t, a_ - beta)));
}

// ---- parasite ----

ParasiteModel::ParasiteModel(double g, double sigma2, double alpha, double beta, double dt)
    : g_{g}, sigma2_{sigma2}, alpha_{alpha}, beta_{beta}, dt_{dt} {}

double ParasiteModel::slope(double tau) const { return alpha_ * tau * expm1_ratio((g_ - beta_) * tau); }

OffspringDraw ParasiteModel::split(double x, double delta) const { return {2, {delta * x, (1.0 - delta) * x}}; }

OffspringDraw ParasiteModel::sample_offspring(double x, RandomStream& rng) const { return split(x, rng.uniform()); }

MeanKernel ParasiteModel::mean_kernel(double x) const {
  MeanKernel k;
  if (x <= 0.0) {
    k.atoms.push_back({0.0, 2.0});
    return k;
  }
  k.lo = 0.0;
  k.hi = x;
  k.density = [x](double) { return 2.0 / x; };
  return k;
}

double ParasiteModel::pair_moment(double x, const RealFn& f, const RealFn& g) const {
  if (x <= 0.0) return 2.0 * f(0.0) * g(0.0);
  return integrate_or_throw(
      [&](double d) { return f(d * x) * g((1.0 - d) * x) + f((1.0 - d) * x) * g(d * x); }, 0.0, 1.0, 1e-10);
}

double ParasiteModel::mean_population(double x, double s, double t) const {
  const double tau = t - s;
  return std::exp(beta_ * tau) * (1.0 + slope(tau) * x);
}

std::optional<double> ParasiteModel::biased_rate_closed(double x, double s, double t) const {
  const double tau = t - s;
  const double d = g_ - beta_;
  const double growth = d != 0.0 ? alpha_ * x * std::expm1(d * tau) / d : alpha_ * x * tau;
  return (alpha_ * x + beta_) * (1.0 + 1.0 / (1.0 + growth));
}

std::optional<double> ParasiteModel::biased_drift_closed(double x, double s, double t) const {
  const double tau = t - s;
  if (g_ != beta_) {
    const double diff = std::exp(g_ * tau) - std::exp(beta_ * tau);
    const double num = alpha_ * x * diff;
    const double den = num + (g_ - beta_) * std::exp(beta_ * tau);
    return g_ * x + 2.0 * sigma2_ * num / den;
  }
  const double k = alpha_ * tau;
  return g_ * x + 2.0 * sigma2_ * k * x / (1.0 + k * x);
}

double ParasiteModel::biased_kernel_density(double y, double x, double s, double t) const {
  if (y < 0.0 || y > x) return 0.0;
  const double tau = t - s;
  const double d = g_ - beta_;
  if (d != 0.0) {
    const double e = std::expm1(d * tau);
    return (2.0 * d + 2.0 * alpha_ * y * e) / ((2.0 * d + alpha_ * x * e) * x);
  }
  const double k = alpha_ * tau;
  return (2.0 + 2.0 * k * y) / ((2.0 + k * x) * x);
}

double ParasiteModel::sample_biased_kernel(double x, double s, double t, RandomStream& rng) const {
  if (x <= 0.0) return 0.0;
  const double k = slope(t - s);
  const double c = rng.uniform() * (x + 0.5 * k * x * x);
  return std::min(x, 2.0 * c / (1.0 + std::sqrt(1.0 + 2.0 * k * c)));
}

// ---- plasmid ----

PlasmidModel::PlasmidModel(double lambda, double mu) : lambda_{lambda}, mu_{mu} {}

OffspringDraw PlasmidModel::sample_offspring(double x, RandomStream& rng) const {
  const double delta = rng.uniform();
  const long n = static_cast<long>(std::llround(x));
  const long first = rng.binomial(n, delta);
  return {2, {static_cast<double>(first), static_cast<double>(n - first)}};
}

MeanKernel PlasmidModel::mean_kernel(double x) const {
  const long n = static_cast<long>(std::llround(x));
  MeanKernel k;
  const double w = 2.0 / static_cast<double>(n + 1);
  for (long j = 0; j <= n; ++j) k.atoms.push_back({static_cast<double>(j), w});
  return k;
}

double PlasmidModel::pair_moment(double x, const RealFn& f, const RealFn& g) const {
  const long n = static_cast<long>(std::llround(x));
  double sum = 0.0;
  for (long j = 0; j <= n; ++j) {
    const double a = static_cast<double>(j);
    const double b = static_cast<double>(n - j);
    sum += f(a) * g(b) + f(b) * g(a);
  }
  return sum / static_cast<double>(n + 1);
}

double PlasmidModel::mean_population(double x, double s, double t) const {
  const double c = lambda_ - mu_;
  return 1.0 + x * std::expm1(c * (t - s)) / c;
}

std::vector<JumpMove> PlasmidModel::jump_moves(double x) const {
  if (x <= 0.0) return {};
  return {{x + 1.0, lambda_ * x}, {x - 1.0, mu_ * x}};
}

std::optional<double> PlasmidModel::biased_rate_closed(double x, double s, double t) const {
  const double c = lambda_ - mu_;
  const double k = std::expm1(c * (t - s)) / c;
  return x * (1.0 + 1.0 / (1.0 + x * k));
}

double PlasmidModel::biased_birth_factor(double x, double s, double t) const {
  const double c = lambda_ - mu_;
  const double e = std::expm1(c * (t - s));
  return lambda_ * (1.0 + e / (c + x * e));
}

double PlasmidModel::biased_death_factor(double x, double s, double t) const {
  const double c = lambda_ - mu_;
  const double e = std::expm1(c * (t - s));
  return std::max(0.0, mu_ * (1.0 - e / (c + x * e)));
}

std::optional<std::vector<JumpMove>> PlasmidModel::biased_jump_moves_closed(double x, double s, double t) const {
  if (x <= 0.0) return std::vector<JumpMove>{};
  return std::vector<JumpMove>{{x + 1.0, x * biased_birth_factor(x, s, t)},
                               {x - 1.0, x * biased_death_factor(x, s, t)}};
}

std::vector<double> PlasmidModel::biased_jump_bounds(double x) const {
  if (x <= 0.0) return {};
  return {lambda_ * (x + 1.0), mu_ * x};
}

// ---- two-type switch ----

SwitchModel::SwitchModel(double b0, double b1, double p) : b0_{b0}, b1_{b1}, p_{p} {}

OffspringDraw SwitchModel::sample_offspring(double x, RandomStream& rng) const {
  OffspringDraw d{2, {x, x}};
  for (auto& c : d.children) {
    if (rng.bernoulli(p_)) c = 1.0 - x;
  }
  return d;
}

MeanKernel SwitchModel::mean_kernel(double x) const {
  MeanKernel k;
  if (p_ < 1.0) k.atoms.push_back({x, 2.0 * (1.0 - p_)});
  if (p_ > 0.0) k.atoms.push_back({1.0 - x, 2.0 * p_});
  return k;
}

double SwitchModel::pair_moment(double x, const RealFn& f, const RealFn& g) const {
  const double fx = (1.0 - p_) * f(x) + p_ * f(1.0 - x);
  const double gx = (1.0 - p_) * g(x) + p_ * g(1.0 - x);
  return 2.0 * fx * gx;
}

double SwitchModel::mean_population(double x, double s, double t) const {
  const auto [m0, m1] =
      expm2_apply_ones(b0_ * (1.0 - 2.0 * p_), 2.0 * p_ * b0_, 2.0 * p_ * b1_, b1_ * (1.0 - 2.0 * p_), t - s);
  return x < 0.5 ? m0 : m1;
}

double SwitchModel::integrated_rate(double x, double s, double t) const {
  return t > s ? division_rate(x, s) * (t - s) : 0.0;
}

double SwitchModel::division_time(double x, double s, double hazard) const {
  return s + hazard / division_rate(x, s);
}

std::optional<double> SwitchModel::biased_rate_closed(double x, double s, double t) const {
  const double mx = mean_population(x, s, t);
  const double mo = mean_population(1.0 - x, s, t);
  return division_rate(x, s) * 2.0 * ((1.0 - p_) * mx + p_ * mo) / mx;
}

double SwitchModel::lambda_bound(double x, double s, double s_end, double t) const {
  const auto lam = [&](double r) {
    const double mx = mean_population(x, r, t);
    return 2.0 * ((1.0 - p_) + p_ * mean_population(1.0 - x, r, t) / mx);
  };
  return std::max(lam(s), lam(std::min(s_end, t)));
}

}  // namespace spinesim
