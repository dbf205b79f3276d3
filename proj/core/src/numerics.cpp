#include "spinesim/numerics.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "spinesim/errors.hpp"

namespace spinesim {

double expm1_ratio(double z) {
  if (std::abs(z) < 1e-8) return 1.0 + z / 2.0 + z * z / 6.0;
  return std::expm1(z) / z;
}

namespace {

struct SimpsonState {
  const std::function<double(double)>& f;
  int max_depth;
  bool converged = true;
  double error = 0.0;
};

double simpson_step(SimpsonState& st, double a, double b, double fa, double fm, double fb, double whole,
                    double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = st.f(lm);
  const double frm = st.f(rm);
  const double h = (b - a) / 12.0;
  const double left = h * (fa + 4.0 * flm + fm);
  const double right = h * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) {
    st.error += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  if (depth >= st.max_depth) {
    st.converged = false;
    st.error += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  return simpson_step(st, a, m, fa, flm, fm, left, tol / 2.0, depth + 1) +
         simpson_step(st, m, b, fm, frm, fb, right, tol / 2.0, depth + 1);
}

template <int N>
void append_nodes(std::vector<QuadratureNode>& out, double lo, double hi) {
  using Rule = boost::math::quadrature::gauss<double, N>;
  const auto& abscissa = Rule::abscissa();
  const auto& weights = Rule::weights();
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  for (std::size_t i = 0; i < abscissa.size(); ++i) {
    if (abscissa[i] == 0.0) {
      out.push_back({mid, half * weights[i]});
    } else {
      out.push_back({mid - half * abscissa[i], half * weights[i]});
      out.push_back({mid + half * abscissa[i], half * weights[i]});
    }
  }
}

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double lo, double hi, double abs_tol,
                                  int max_depth) {
  if (hi <= lo) return {};
  SimpsonState st{f, max_depth};
  const double fa = f(lo);
  const double fb = f(hi);
  const double fm = f(0.5 * (lo + hi));
  const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
  QuadratureResult r;
  r.value = simpson_step(st, lo, hi, fa, fm, fb, whole, abs_tol, 0);
  r.error_estimate = st.error;
  r.converged = st.converged;
  return r;
}

double integrate_or_throw(const std::function<double(double)>& f, double lo, double hi, double abs_tol) {
  auto r = adaptive_simpson(f, lo, hi, abs_tol);
  if (!r.converged) {
    throw QuadratureError{"adaptive Simpson did not reach tolerance " + std::to_string(abs_tol) +
                          " (estimate " + std::to_string(r.error_estimate) + ")"};
  }
  return r.value;
}

std::vector<QuadratureNode> gauss_legendre(int points, double lo, double hi) {
  std::vector<QuadratureNode> out;
  out.reserve(static_cast<std::size_t>(points));
  switch (points) {
    case 8: append_nodes<8>(out, lo, hi); break;
    case 16: append_nodes<16>(out, lo, hi); break;
    case 32: append_nodes<32>(out, lo, hi); break;
    case 64: append_nodes<64>(out, lo, hi); break;
    case 128: append_nodes<128>(out, lo, hi); break;
    default: throw DomainError{"unsupported Gauss-Legendre size " + std::to_string(points)};
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
  return out;
}

double integrate_gauss_legendre(const std::function<double(double)>& f, double lo, double hi, int points) {
  double sum = 0.0;
  for (const auto& n : gauss_legendre(points, lo, hi)) sum += n.w * f(n.x);
  return sum;
}

double bracketed_root(const std::function<double(double)>& f, double lo, double hi, double tol) {
  const double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (flo > 0.0 || fhi < 0.0) throw DomainError{"bracketed_root: interval does not bracket a root"};
  std::uintmax_t iters = 200;
  auto stop = [tol](double a, double b) { return std::abs(b - a) <= tol * std::max(1.0, std::abs(a)); };
  auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, stop, iters);
  return 0.5 * (a + b);
}

std::pair<double, double> expm2_apply_ones(double a, double b, double c, double d, double tau) {
  // exp(M tau) = e^{h tau} [cosh(q tau) I + sinh(q tau)/q (M - h I)], h = tr/2,
  // q^2 = ((a-d)/2)^2 + b c. Off-diagonals are nonnegative here so q is real.
  const double h = 0.5 * (a + d);
  const double q2 = 0.25 * (a - d) * (a - d) + b * c;
  double ch;
  double sh_over_q;
  if (q2 >= 0.0) {
    const double q = std::sqrt(q2);
    ch = std::cosh(q * tau);
    sh_over_q = q * tau < 1e-8 ? tau : std::sinh(q * tau) / q;
  } else {
    const double q = std::sqrt(-q2);
    ch = std::cos(q * tau);
    sh_over_q = q * tau < 1e-8 ? tau : std::sin(q * tau) / q;
  }
  const double scale = std::exp(h * tau);
  const double r0 = ch + sh_over_q * ((a - h) + b);
  const double r1 = ch + sh_over_q * (c + (d - h));
  return {scale * r0, scale * r1};
}

}  // namespace spinesim
