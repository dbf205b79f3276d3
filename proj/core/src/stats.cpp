#include "spinesim/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/poisson.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "spinesim/errors.hpp"

namespace spinesim {

double normal_critical(double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError{"confidence level must be in (0,1)"};
  return boost::math::quantile(boost::math::normal{}, 0.5 + 0.5 * level);
}

double MCEstimate::ci_low() const { return mean - normal_critical(ci_level) * std_error; }
double MCEstimate::ci_high() const { return mean + normal_critical(ci_level) * std_error; }

void Welford::add(double x) {
  ++n_;
  const double d = x - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (x - mean_);
}

void Welford::merge(const Welford& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double n = static_cast<double>(n_ + other.n_);
  const double d = other.mean_ - mean_;
  mean_ += d * static_cast<double>(other.n_) / n;
  m2_ += other.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(other.n_) / n;
  n_ += other.n_;
}

double Welford::variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

MCEstimate Welford::estimate(double ci_level) const {
  MCEstimate e;
  e.n = n_;
  e.mean = mean_;
  e.std_error = n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  e.ci_level = ci_level;
  return e;
}

MCEstimate estimate_of(const std::vector<double>& samples, double ci_level) {
  Welford w;
  for (double x : samples) w.add(x);
  return w.estimate(ci_level);
}

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> values) : values_{std::move(values)} {
  std::sort(values_.begin(), values_.end());
}

double EmpiricalDistribution::cdf(double x) const {
  if (values_.empty()) return 0.0;
  const auto it = std::upper_bound(values_.begin(), values_.end(), x);
  return static_cast<double>(it - values_.begin()) / static_cast<double>(values_.size());
}

double EmpiricalDistribution::mean() const {
  if (values_.empty()) return 0.0;
  double s = 0.0;
  for (double v : values_) s += v;
  return s / static_cast<double>(values_.size());
}

std::vector<double> EmpiricalDistribution::integer_frequencies(std::size_t max_value) const {
  std::vector<double> f(max_value + 1, 0.0);
  if (values_.empty()) return f;
  for (double v : values_) {
    const auto k = static_cast<std::size_t>(std::llround(v));
    if (k <= max_value) f[k] += 1.0;
  }
  for (auto& x : f) x /= static_cast<double>(values_.size());
  return f;
}

double kolmogorov_q(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 200; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-17) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

double ks_statistic(const std::vector<double>& a, const std::vector<double>& b) {
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

}  // namespace

KsResult ks_two_sample(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
  if (a.empty() || b.empty()) throw DomainError{"ks_two_sample: empty sample"};
  KsResult r;
  r.statistic = ks_statistic(a.values(), b.values());
  const double ne = static_cast<double>(a.size()) * static_cast<double>(b.size()) /
                    static_cast<double>(a.size() + b.size());
  const double sq = std::sqrt(ne);
  r.p_value = kolmogorov_q((sq + 0.12 + 0.11 / sq) * r.statistic);
  return r;
}

std::pair<double, double> bootstrap_ks_interval(const EmpiricalDistribution& a, const EmpiricalDistribution& b,
                                                std::size_t resamples, double level, RandomStream& rng) {
  if (a.empty() || b.empty()) throw DomainError{"bootstrap_ks_interval: empty sample"};
  std::vector<double> stats;
  stats.reserve(resamples);
  std::vector<double> ra(a.size());
  std::vector<double> rb(b.size());
  for (std::size_t k = 0; k < resamples; ++k) {
    for (auto& v : ra) v = a.values()[rng.index(a.size())];
    for (auto& v : rb) v = b.values()[rng.index(b.size())];
    std::sort(ra.begin(), ra.end());
    std::sort(rb.begin(), rb.end());
    stats.push_back(ks_statistic(ra, rb));
  }
  std::sort(stats.begin(), stats.end());
  if (stats.empty()) return {0.0, 0.0};
  const double tail = 0.5 * (1.0 - level);
  const auto at = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(stats.size() - 1)));
    return stats[std::min(idx, stats.size() - 1)];
  };
  return {at(tail), at(1.0 - tail)};
}

ChiSquareResult chi_square_poisson(const std::vector<double>& counts, double lambda, double min_expected) {
  if (counts.empty()) throw DomainError{"chi_square_poisson: empty sample"};
  if (!(lambda > 0.0)) throw DomainError{"chi_square_poisson: lambda must be > 0"};
  const double n = static_cast<double>(counts.size());
  std::size_t kmax = 0;
  for (double c : counts) kmax = std::max(kmax, static_cast<std::size_t>(std::llround(c)));
  const boost::math::poisson_distribution<double> pois{lambda};

  // Classes 0..kmax-1 and a final tail class {k >= kmax}.
  std::vector<double> observed(kmax + 1, 0.0);
  std::vector<double> expected(kmax + 1, 0.0);
  for (double c : counts) observed[static_cast<std::size_t>(std::llround(c))] += 1.0;
  for (std::size_t k = 0; k < kmax; ++k) expected[k] = n * boost::math::pdf(pois, static_cast<double>(k));
  expected[kmax] = kmax == 0 ? n : n * boost::math::cdf(boost::math::complement(pois, static_cast<double>(kmax - 1)));

  std::vector<double> obs;
  std::vector<double> exp;
  double o_acc = 0.0;
  double e_acc = 0.0;
  for (std::size_t k = 0; k <= kmax; ++k) {
    o_acc += observed[k];
    e_acc += expected[k];
    if (e_acc >= min_expected) {
      obs.push_back(o_acc);
      exp.push_back(e_acc);
      o_acc = 0.0;
      e_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (exp.empty()) {
      obs.push_back(o_acc);
      exp.push_back(e_acc);
    } else {
      obs.back() += o_acc;
      exp.back() += e_acc;
    }
  }

  ChiSquareResult r;
  r.bins = obs.size();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double d = obs[i] - exp[i];
    r.statistic += d * d / exp[i];
  }
  r.dof = static_cast<int>(obs.size()) - 1;
  if (r.dof < 1) {
    r.p_value = 1.0;
    return r;
  }
  r.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared{static_cast<double>(r.dof)},
                                                       r.statistic));
  return r;
}

Comparison compare_estimates(const MCEstimate& lhs, const MCEstimate& rhs, double z_threshold) {
  Comparison c;
  const double se = std::sqrt(lhs.std_error * lhs.std_error + rhs.std_error * rhs.std_error);
  const double diff = lhs.mean - rhs.mean;
  if (se > 0.0) {
    c.z = diff / se;
  } else {
    c.z = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
  }
  c.ci_overlap = lhs.ci_low() <= rhs.ci_high() && rhs.ci_low() <= lhs.ci_high();
  c.pass = std::abs(c.z) <= z_threshold || c.ci_overlap;
  return c;
}

}  // namespace spinesim
