#include "refracted/scale.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Core>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <unsupported/Eigen/Polynomials>

#include "refracted/errors.hpp"
#include "refracted/laplace_inversion.hpp"
#include "refracted/quadrature.hpp"
#include "refracted/roots.hpp"

namespace refracted {

namespace {

using cplx = std::complex<double>;
using Poly = std::vector<double>;  // ascending coefficients

// e^{-r x_max} < 1e-14
constexpr double kDecayNats = 14.0 * 2.302585092994046;
constexpr double kRepeatedRootGap = 1e-6;

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  }
  return r;
}

void poly_add(Poly& a, const Poly& b, double scale) {
  if (a.size() < b.size()) a.resize(b.size(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i) a[i] += scale * b[i];
}

// Value and derivative of a real polynomial at a complex point.
std::pair<cplx, cplx> poly_eval(const Poly& p, cplx s) {
  cplx v = 0.0;
  cplx d = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) {
    d = d * s + v;
    v = v * s + *it;
  }
  return {v, d};
}

// Numerator of psi(s) - tilt s - q written over prod (rho_i + s).
Poly rational_numerator(const LevyModel& m, double tilt, double q) {
  Poly base{-q, m.gamma_eff() - tilt, 0.5 * m.sigma() * m.sigma()};
  while (base.size() > 1 && base.back() == 0.0) base.pop_back();
  const auto* hx = std::get_if<HyperExpJumps>(&m.jumps());
  if (!hx || hx->empty()) return base;

  Poly den{1.0};
  for (const auto& c : *hx) den = poly_mul(den, Poly{c.exp_rate, 1.0});
  Poly num = poly_mul(base, den);
  for (std::size_t i = 0; i < hx->size(); ++i) {
    Poly term{0.0, (*hx)[i].rate};  // lambda_i s
    for (std::size_t j = 0; j < hx->size(); ++j) {
      if (j != i) term = poly_mul(term, Poly{(*hx)[j].exp_rate, 1.0});
    }
    poly_add(num, term, -1.0);
  }
  while (num.size() > 1 && std::abs(num.back()) == 0.0) num.pop_back();
  return num;
}

}  // namespace

const char* to_string(ProcessTag tag) { return tag == ProcessTag::X ? "X" : "Y"; }

const char* to_string(ScaleBackend backend) {
  return backend == ScaleBackend::ClosedForm ? "closed-form" : "laplace-inversion";
}

struct ScaleEvaluator::InversionCache {
  double step;
  std::vector<double> values;
  boost::math::interpolators::cardinal_cubic_b_spline<double> spline;
};

ScaleEvaluator::ScaleEvaluator(const LevyModel& model, double q, double tilt, ScaleOptions opt)
    : model_(model), q_(q), tilt_(tilt) {
  if (!(q > 0.0)) throw std::domain_error("build_scale: q must be positive");
  if (!(tilt >= 0.0)) throw std::domain_error("build_scale: tilt must be nonnegative");

  lead_ = largest_root(model_, tilt_, q_);
  const double slope = model_.laplace_exponent_derivative(lead_) - tilt_;
  if (!(slope > 0.0)) throw ConvergenceError("build_scale: psi' vanishes at the leading root");
  dom_coef_ = 1.0 / slope;
  if (const auto d = model_.drift_d()) w0_ = 1.0 / (*d - tilt_);
  x_max_ = std::max(kDecayNats / lead_, opt.x_reach);

  if (model_.is_rational() && !opt.force_inversion && build_closed_form()) {
    backend_ = ScaleBackend::ClosedForm;
    return;
  }
  backend_ = ScaleBackend::LaplaceInversion;
  build_inversion(opt);
}

bool ScaleEvaluator::build_closed_form() {
  const Poly num = rational_numerator(model_, tilt_, q_);
  if (num.size() < 2) throw ValidationError("build_scale: degenerate Laplace exponent");
  if (num.size() == 2) {
    poles_ = {cplx(-num[0] / num[1], 0.0)};
  } else {
    Eigen::VectorXd coeffs(num.size());
    for (std::size_t i = 0; i < num.size(); ++i) coeffs[static_cast<Eigen::Index>(i)] = num[i];
    Eigen::PolynomialSolver<double, Eigen::Dynamic> solver;
    solver.compute(coeffs);
    const auto& rts = solver.roots();
    poles_.assign(rts.data(), rts.data() + rts.size());
  }
  for (auto& s : poles_) {
    for (int i = 0; i < 3; ++i) {
      const auto [v, d] = poly_eval(num, s);
      if (std::abs(d) == 0.0) break;
      s -= v / d;
    }
    if (std::abs(s.imag()) < 1e-14 * std::max(1.0, std::abs(s))) s = cplx(s.real(), 0.0);
  }

  dominant_ = 0;
  for (std::size_t j = 1; j < poles_.size(); ++j) {
    if (poles_[j].real() > poles_[dominant_].real()) dominant_ = j;
  }
  const double mismatch = std::abs(poles_[dominant_] - lead_) / std::max(1.0, lead_);
  if (mismatch > 1e-8) {
    warnings_.push_back("closed-form: polynomial root disagrees with bracketed root by " +
                        std::to_string(mismatch));
  }
  poles_[dominant_] = cplx(lead_, 0.0);

  for (std::size_t i = 0; i < poles_.size(); ++i) {
    for (std::size_t j = i + 1; j < poles_.size(); ++j) {
      const double scale = std::max(1.0, std::abs(poles_[i]));
      if (std::abs(poles_[i] - poles_[j]) < kRepeatedRootGap * scale) {
        warnings_.push_back(
            "closed-form: near-repeated roots, falling back to Laplace inversion");
        poles_.clear();
        return false;
      }
    }
  }
  residues_.resize(poles_.size());
  for (std::size_t j = 0; j < poles_.size(); ++j) {
    residues_[j] = 1.0 / (model_.laplace_exponent_derivative(poles_[j]) - tilt_);
  }
  residues_[dominant_] = cplx(dom_coef_, 0.0);
  return true;
}

double ScaleEvaluator::invert_remainder(double x, int order) const {
  const EulerInversion inv(order);
  // Transform of R = W - B e^{r x}; analytic at s = r, so near r the value is
  // taken as the mean over a small circle.
  auto raw = [&](cplx s) {
    return 1.0 / (model_.laplace_exponent(s) - tilt_ * s - q_) - dom_coef_ / (s - lead_);
  };
  auto transform = [&](cplx s) -> cplx {
    if (std::abs(s - lead_) > 1e-3 * std::max(1.0, lead_)) return raw(s);
    const double radius = std::min(0.05 * std::max(1.0, lead_), 0.5 * lead_);
    cplx acc = 0.0;
    constexpr int n = 8;
    for (int k = 0; k < n; ++k) {
      acc += raw(s + radius * std::polar(1.0, 2.0 * M_PI * (k + 0.5) / n));
    }
    return acc / static_cast<double>(n);
  };
  return inv(transform, x);
}

void ScaleEvaluator::build_inversion(const ScaleOptions& opt) {
  const int n = std::max(opt.cache_nodes, 16);
  const double step = x_max_ / (n - 1);
  std::vector<double> vals(static_cast<std::size_t>(n));
  vals[0] = w0_ - dom_coef_;
  for (int k = 1; k < n; ++k) vals[static_cast<std::size_t>(k)] = invert_remainder(k * step, opt.inversion_order);

  // Error estimate from a lower-order rerun on a handful of nodes.
  double err = 0.0;
  for (int k = n / 16; k < n; k += n / 8) {
    const double alt = invert_remainder(k * step, opt.inversion_order - 4);
    err = std::max(err, std::abs(alt - vals[static_cast<std::size_t>(k)]));
  }
  inversion_error_ = err;
  const double end_level = std::abs(vals.back());
  if (end_level > 1e-9 * std::max(1.0, dom_coef_)) {
    warnings_.push_back("laplace-inversion: remainder has not decayed at x_max (|R| = " +
                        std::to_string(end_level) + "); tail integrals truncate there");
  }

  boost::math::interpolators::cardinal_cubic_b_spline<double> spline(vals.begin(), vals.end(),
                                                                     0.0, step);
  cache_ = std::make_shared<const InversionCache>(
      InversionCache{step, std::move(vals), std::move(spline)});
}

double ScaleEvaluator::remainder(double x) const {
  if (x < 0.0) throw std::domain_error("remainder: x must be >= 0");
  if (backend_ == ScaleBackend::ClosedForm) {
    double r = 0.0;
    for (std::size_t j = 0; j < poles_.size(); ++j) {
      if (j != dominant_) r += (residues_[j] * std::exp(poles_[j] * x)).real();
    }
    return r;
  }
  if (x == 0.0) return cache_->values.front();
  if (x <= x_max_) return cache_->spline(x);
  return invert_remainder(x, 18);
}

double ScaleEvaluator::remainder_prime(double x) const {
  if (x < 0.0) throw std::domain_error("remainder_prime: x must be >= 0");
  if (backend_ == ScaleBackend::ClosedForm) {
    double r = 0.0;
    for (std::size_t j = 0; j < poles_.size(); ++j) {
      if (j != dominant_) r += (residues_[j] * poles_[j] * std::exp(poles_[j] * x)).real();
    }
    return r;
  }
  const double h = 1e-6 * std::max(1.0, x);
  if (x > h) return (remainder(x + h) - remainder(x - h)) / (2.0 * h);
  return (remainder(x + h) - remainder(x)) / h;
}

double ScaleEvaluator::W(double x) const {
  if (x < 0.0) return 0.0;
  if (x == 0.0) return w0_;
  return dom_coef_ * std::exp(lead_ * x) + remainder(x);
}

double ScaleEvaluator::W_prime(double x) const {
  if (!(x > 0.0)) throw std::domain_error("W_prime: x must be > 0");
  return dom_coef_ * lead_ * std::exp(lead_ * x) + remainder_prime(x);
}

double ScaleEvaluator::W_prime_right(double x) const {
  if (x < 0.0) throw std::domain_error("W_prime_right: x must be >= 0");
  return dom_coef_ * lead_ * std::exp(lead_ * x) + remainder_prime(x);
}

double ScaleEvaluator::remainder_tail(double kappa, double u, bool derivative) const {
  if (!(kappa > 0.0)) throw std::domain_error("remainder_tail: kappa must be > 0");
  if (u < 0.0) throw std::domain_error("remainder_tail: u must be >= 0");
  if (backend_ == ScaleBackend::ClosedForm) {
    double r = 0.0;
    for (std::size_t j = 0; j < poles_.size(); ++j) {
      if (j == dominant_) continue;
      const cplx c = derivative ? residues_[j] * poles_[j] : residues_[j];
      r += (c * std::exp(poles_[j] * u) / (kappa - poles_[j])).real();
    }
    return r;
  }
  // Integration by parts turns the R' version into one over R. The cached
  // range ends where R is negligible, so the integral stops at x_max.
  double base = 0.0;
  if (u < x_max_) {
    const double step = cache_->step;
    const double stop = std::min(x_max_, u + 40.0 / kappa);
    double a = u;
    for (auto k = static_cast<long>(u / step) + 1; a < stop; ++k) {
      const double next = std::min(stop, static_cast<double>(k) * step);
      if (next <= a) continue;
      base += quad::gauss_legendre(
          [&](double v) { return std::exp(-kappa * (v - u)) * cache_->spline(v); }, a, next);
      a = next;
    }
  }
  return derivative ? -remainder(u) + kappa * base : base;
}

double ScaleEvaluator::derivative_tail(double kappa, double u) const {
  if (!(kappa > lead_)) throw std::domain_error("derivative_tail: kappa must exceed the leading root");
  return dom_coef_ * lead_ * std::exp(lead_ * u) / (kappa - lead_) +
         remainder_tail(kappa, u, true);
}

LaplaceRoundtrip ScaleEvaluator::laplace_roundtrip(double s) const {
  if (!(s > lead_)) {
    throw std::domain_error("laplace_roundtrip: s must exceed the leading root");
  }
  const double top = x_max_;
  const double tail_mass = dom_coef_ * std::exp(-(s - lead_) * top) / (s - lead_);
  // The interpolated backend is smooth only to its spline and difference
  // accuracy, so it gets a looser quadrature target.
  const quad::KronrodOptions opt = backend_ == ScaleBackend::ClosedForm
                                       ? quad::KronrodOptions{1e-13, 1e-15, 25}
                                       : quad::KronrodOptions{1e-9, 1e-12, 15};

  LaplaceRoundtrip rt{};
  rt.numeric = quad::gauss_kronrod([&](double x) { return std::exp(-s * x) * W(x); }, 0.0, top,
                                   opt) +
               tail_mass;
  rt.measure_numeric =
      w0_ +
      quad::gauss_kronrod([&](double x) { return std::exp(-s * x) * W_prime(x); }, 0.0, top, opt) +
      lead_ * tail_mass;
  const double denom = model_.laplace_exponent(s) - tilt_ * s - q_;
  rt.analytic = 1.0 / denom;
  rt.measure_analytic = s / denom;
  return rt;
}

ScaleEvaluator build_scale(const LevyModel& model, double q, double tilt_delta, ScaleOptions opt) {
  return ScaleEvaluator(model, q, tilt_delta, opt);
}

}  // namespace refracted
