#pragma once

// One-dimensional quadrature used across the library.
//
// adaptive_simpson is the workhorse for the piecewise-smooth convolution
// integrals of the resolvent; gauss_kronrod wraps Boost's adaptive
// Gauss-Kronrod rule and also handles a semi-infinite upper limit;
// gauss_legendre is a fixed 8-node rule for short cells of tabulated integrals.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "refracted/errors.hpp"

namespace refracted::quad {

struct SimpsonOptions {
  double abs_tol = 1e-9;
  int max_depth = 40;
};

namespace detail {

struct SimpsonState {
  double residual = 0.0;
  bool exhausted = false;
};

template <class F>
double simpson_recurse(F& f, double a, double fa, double m, double fm, double b, double fb,
                       double whole, double tol, int depth, SimpsonState& st) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double both = left + right;
  const double err = both - whole;
  // Below this the difference is roundoff, not truncation.
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(both);
  if (std::abs(err) <= 15.0 * std::max(tol, floor) || !(lm > a && rm < b)) {
    return both + err / 15.0;
  }
  if (depth <= 0) {
    st.exhausted = true;
    st.residual += std::abs(err) / 15.0;
    return both + err / 15.0;
  }
  return simpson_recurse(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1, st) +
         simpson_recurse(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1, st);
}

}  // namespace detail

// Adaptive Simpson with Richardson correction on [a, b]. Throws
// QuadratureError when the depth budget runs out before the error target is
// met.
template <class F>
double adaptive_simpson(F&& f, double a, double b, SimpsonOptions opt = {}) {
  if (a == b) return 0.0;
  if (a > b) return -adaptive_simpson(f, b, a, opt);
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  detail::SimpsonState st;
  const double r = detail::simpson_recurse(f, a, fa, m, fm, b, fb, whole, opt.abs_tol,
                                           opt.max_depth, st);
  if (!std::isfinite(r)) {
    throw QuadratureError("adaptive Simpson: non-finite integrand", a, b, r);
  }
  if (st.exhausted && st.residual > opt.abs_tol) {
    throw QuadratureError("adaptive Simpson: depth limit reached on [" + std::to_string(a) +
                              ", " + std::to_string(b) + "]",
                          a, b, st.residual);
  }
  return r;
}

// Splits [a, b] at every breakpoint strictly inside it and sums the pieces.
template <class F>
double simpson_piecewise(F&& f, double a, double b, std::span<const double> breaks,
                         SimpsonOptions opt = {}) {
  if (a == b) return 0.0;
  const double sign = a < b ? 1.0 : -1.0;
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  std::vector<double> pts{lo};
  for (double p : breaks) {
    if (p > lo && p < hi) pts.push_back(p);
  }
  pts.push_back(hi);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    total += adaptive_simpson(f, pts[i], pts[i + 1], opt);
  }
  return sign * total;
}

struct KronrodOptions {
  double rel_tol = 1e-13;
  double abs_tol = 1e-15;
  unsigned max_depth = 25;
};

// Adaptive 15-point Gauss-Kronrod. `b` may be +infinity.
template <class F>
double gauss_kronrod(F&& f, double a, double b, KronrodOptions opt = {}) {
  using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;
  if (a == b) return 0.0;
  double err = 0.0;
  double l1 = 0.0;
  const double r = Rule::integrate(f, a, b, opt.max_depth, opt.rel_tol, &err, &l1);
  if (!std::isfinite(r)) {
    throw QuadratureError("Gauss-Kronrod: non-finite result", a, b, err);
  }
  const double budget = std::max(opt.abs_tol, 1e3 * opt.rel_tol * l1);
  if (err > budget) {
    throw QuadratureError("Gauss-Kronrod: error estimate " + std::to_string(err) +
                              " exceeds budget",
                          a, b, err);
  }
  return r;
}

template <class F>
double gauss_kronrod_piecewise(F&& f, double a, double b, std::span<const double> breaks,
                               KronrodOptions opt = {}) {
  std::vector<double> pts{a};
  for (double p : breaks) {
    if (p > a && p < b) pts.push_back(p);
  }
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    total += gauss_kronrod(f, pts[i], pts[i + 1], opt);
  }
  return total;
}

// Fixed 8-node Gauss-Legendre; exact to machine precision on short cells of
// smooth integrands.
template <class F>
double gauss_legendre(F&& f, double a, double b) {
  if (a == b) return 0.0;
  return boost::math::quadrature::gauss<double, 8>::integrate(f, a, b);
}

}  // namespace refracted::quad
