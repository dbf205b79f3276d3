#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace spinesim {

/// expm1(z)/z, continuous at z = 0.
double expm1_ratio(double z);

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
};

/// Adaptive Simpson on [lo, hi] with absolute tolerance. Does not throw;
/// callers decide what an unconverged result means.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                                  double abs_tol = 1e-10, int max_depth = 40);

/// Same, but throws QuadratureError when the tolerance is not met.
double integrate_or_throw(const std::function<double(double)>& f, double lo, double hi,
                          double abs_tol = 1e-10);

struct QuadratureNode {
  double x;
  double w;
};

/// Composite-free Gauss-Legendre rule with `points` nodes mapped to [lo, hi].
/// Supported sizes: 8, 16, 32, 64, 128.
std::vector<QuadratureNode> gauss_legendre(int points, double lo, double hi);

double integrate_gauss_legendre(const std::function<double(double)>& f, double lo, double hi, int points);

/// Root of a monotone function on [lo, hi] with f(lo) <= 0 <= f(hi).
double bracketed_root(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-14);

/// exp(M tau) applied to (1,1) for a real 2x2 matrix M = [[a, b], [c, d]].
std::pair<double, double> expm2_apply_ones(double a, double b, double c, double d, double tau);

}  // namespace spinesim
