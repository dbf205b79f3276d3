#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "spinesim/random.hpp"

namespace spinesim {

/// Monte Carlo mean with its standard error. `n == 0` marks an exact value.
struct MCEstimate {
  std::size_t n = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double ci_level = 0.99;

  static MCEstimate exact(double v, double level = 0.99) { return {0, v, 0.0, level}; }
  bool is_exact() const { return n == 0; }
  double ci_low() const;
  double ci_high() const;
};

/// Two-sided normal quantile z with P(|Z| <= z) = level.
double normal_critical(double level);

class Welford {
 public:
  void add(double x);
  void merge(const Welford& other);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;
  MCEstimate estimate(double ci_level = 0.99) const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

MCEstimate estimate_of(const std::vector<double>& samples, double ci_level = 0.99);

/// Sorted sample.
class EmpiricalDistribution {
 public:
  EmpiricalDistribution() = default;
  explicit EmpiricalDistribution(std::vector<double> values);

  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double cdf(double x) const;
  double mean() const;
  /// Relative frequency of each integer value 0..max (values are rounded).
  std::vector<double> integer_frequencies(std::size_t max_value) const;

 private:
  std::vector<double> values_;
};

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Kolmogorov limiting survival function Q(lambda) = 2 sum (-1)^{j-1} exp(-2 j^2 lambda^2).
double kolmogorov_q(double lambda);

KsResult ks_two_sample(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

/// Percentile bootstrap interval for the KS statistic.
std::pair<double, double> bootstrap_ks_interval(const EmpiricalDistribution& a, const EmpiricalDistribution& b,
                                                std::size_t resamples, double level, RandomStream& rng);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  std::size_t bins = 0;
};

/// Goodness of fit of nonnegative integer counts to Poisson(lambda). Adjacent
/// classes are merged until every expected count is at least `min_expected`.
ChiSquareResult chi_square_poisson(const std::vector<double>& counts, double lambda, double min_expected = 5.0);

struct Comparison {
  double z = 0.0;
  bool ci_overlap = false;
  bool pass = false;
};

/// z of (lhs - rhs) on independent estimates, plus the CI-overlap test.
Comparison compare_estimates(const MCEstimate& lhs, const MCEstimate& rhs, double z_threshold = 3.0);

}  // namespace spinesim
