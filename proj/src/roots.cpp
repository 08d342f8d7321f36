#include "refracted/roots.hpp"

#include <cmath>
#include <stdexcept>

#include "refracted/errors.hpp"

namespace refracted {

namespace {

constexpr int kMaxDoublings = 200;
constexpr double kRelTol = 1e-13;

// Minimiser of the convex g(t) = psi(t) - tilt t on [0, inf), located by
// bisection on the sign of g'.
double convex_argmin(const LevyModel& m, double tilt) {
  auto slope = [&](double t) { return m.laplace_exponent_derivative(t) - tilt; };
  if (slope(0.0) >= 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  int n = 0;
  while (slope(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++n > kMaxDoublings) {
      throw ConvergenceError("largest_root: Laplace exponent has no minimiser (psi' stays negative)");
    }
  }
  while (hi - lo > 1e-15 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (slope(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double largest_root(const LevyModel& m, double tilt, double q) {
  if (!(q > 0.0)) throw std::domain_error("largest_root: q must be positive");
  auto g = [&](double t) { return m.laplace_exponent(t) - tilt * t - q; };

  const double start = convex_argmin(m, tilt);
  double lo = start;  // g(lo) <= -q < 0
  double hi = std::max(2.0 * start, 1.0);
  int n = 0;
  while (g(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++n > kMaxDoublings) {
      throw ConvergenceError("largest_root: no bracket after 200 doublings");
    }
  }
  while (hi - lo > kRelTol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (g(mid) < 0.0 ? lo : hi) = mid;
  }

  // Safeguarded Newton polish: keep the iterate only if it stays inside the
  // bracket and lowers the residual.
  double t = 0.5 * (lo + hi);
  double r = std::abs(g(t));
  for (int i = 0; i < 4 && r > 0.0; ++i) {
    const double d = m.laplace_exponent_derivative(t) - tilt;
    if (!(d > 0.0)) break;
    const double next = t - g(t) / d;
    if (!(next >= lo && next <= hi)) break;
    const double rn = std::abs(g(next));
    if (rn >= r) break;
    t = next;
    r = rn;
  }
  return t;
}

double phi_root(const LevyModel& model, double q) { return largest_root(model, 0.0, q); }

double varphi_root(const LevyModel& model, double delta, double q) {
  if (!(delta > 0.0)) throw std::domain_error("varphi_root: delta must be positive");
  return largest_root(model, delta, q);
}

RootPair root_pair(const LevyModel& model, double delta, double q) {
  RootPair rp{};
  rp.q = q;
  rp.phi = phi_root(model, q);
  rp.varphi = varphi_root(model, delta, q);
  rp.residual_phi = std::abs(model.laplace_exponent(rp.phi) - q);
  rp.residual_varphi = std::abs(model.laplace_exponent(rp.varphi) - delta * rp.varphi - q);
  return rp;
}

}  // namespace refracted
