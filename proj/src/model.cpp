#include "refracted/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "refracted/errors.hpp"
#include "refracted/quadrature.hpp"

namespace refracted {

namespace {

using cplx = std::complex<double>;

constexpr double kAbsTol = 1e-12;
constexpr double kRelTol = 1e-10;

// int_a^b g(x) dx for a complex-valued g, real and imaginary parts separately.
// The interval is cut into pieces short enough that the oscillation of
// e^{-i Im(s) x} stays resolvable by a 15-point Kronrod pair.
template <class G>
cplx integrate_complex(G&& g, double a, double b, double im_freq) {
  if (b <= a) return {0.0, 0.0};
  const double period = im_freq > 0.0 ? 2.0 * M_PI / im_freq : b - a;
  const auto pieces =
      static_cast<int>(std::clamp(std::ceil((b - a) / (4.0 * period)), 1.0, 4000.0));
  const double h = (b - a) / pieces;
  quad::KronrodOptions opt{.rel_tol = kRelTol, .abs_tol = kAbsTol / pieces, .max_depth = 20};
  cplx total{0.0, 0.0};
  for (int i = 0; i < pieces; ++i) {
    const double lo = a + i * h;
    const double hi = i + 1 == pieces ? b : lo + h;
    const double re = quad::gauss_kronrod([&](double x) { return g(x).real(); }, lo, hi, opt);
    const double im =
        im_freq > 0.0 ? quad::gauss_kronrod([&](double x) { return g(x).imag(); }, lo, hi, opt)
                      : 0.0;
    total += cplx(re, im);
  }
  return total;
}

// Integral over [0, 1] of a real integrand that may be singular at 0.
template <class G>
double integrate_unit_singular(G&& g) {
  thread_local boost::math::quadrature::tanh_sinh<double> ts;
  double err = 0.0;
  const double r = ts.integrate(g, 0.0, 1.0, kRelTol, &err);
  if (!std::isfinite(r) || err > std::max(kAbsTol, 1e3 * kRelTol * std::abs(r))) {
    throw QuadratureError("Levy measure quadrature on (0, 1] did not converge", 0.0, 1.0, err);
  }
  return r;
}

// Upper integration limit past which e^{-Re(s) x} is negligible.
double effective_limit(const GeneralJumps& gj, cplx s, double from) {
  const double re = s.real();
  double top = gj.truncation;
  if (re > 0.0) top = std::min(top, from + 45.0 / re);
  return std::max(top, from);
}

// int_lo^hi tail(x) x^k e^{-s x} dx with k in {0, 1}.
cplx tail_transform(const GeneralJumps& gj, cplx s, int k, double lo) {
  const double hi = effective_limit(gj, s, lo);
  return integrate_complex(
      [&](double x) { return gj.tail(x) * (k == 1 ? x : 1.0) * std::exp(-s * x); }, lo, hi,
      std::abs(s.imag()));
}

// Same as tail_transform on [0, 1], with the integrand allowed to blow up at 0.
// `minus_one` subtracts 1 from the exponential (compensated small jumps).
cplx unit_transform(const GeneralJumps& gj, cplx s, int k, bool minus_one) {
  auto w = [&](double x) {
    const cplx e = std::exp(-s * x) - (minus_one ? 1.0 : 0.0);
    return gj.tail(x) * (k == 1 ? x : 1.0) * e;
  };
  if (std::abs(s.imag()) * 1.0 > 8.0 * M_PI) {
    // Oscillatory: hand the bulk to the chunked rule, keep a short singular head.
    const double head = std::min(1.0, 2.0 * M_PI / std::abs(s.imag()));
    thread_local boost::math::quadrature::tanh_sinh<double> ts;
    const double re = ts.integrate([&](double x) { return w(x).real(); }, 0.0, head, kRelTol);
    const double im = ts.integrate([&](double x) { return w(x).imag(); }, 0.0, head, kRelTol);
    return cplx(re, im) + integrate_complex(w, head, 1.0, std::abs(s.imag()));
  }
  const double re = integrate_unit_singular([&](double x) { return w(x).real(); });
  const double im =
      s.imag() != 0.0 ? integrate_unit_singular([&](double x) { return w(x).imag(); }) : 0.0;
  return {re, im};
}

cplx general_psi(const LevyModel& m, const GeneralJumps& gj, double tail_at_one, cplx s) {
  const double sig2 = m.sigma() * m.sigma();
  if (gj.finite_variation) {
    return 0.5 * sig2 * s * s + m.gamma_eff() * s - s * tail_transform(gj, s, 0, 0.0);
  }
  const cplx small = unit_transform(gj, s, 0, true);
  const cplx large = tail_transform(gj, s, 0, 1.0);
  return 0.5 * sig2 * s * s + (m.gamma() - tail_at_one) * s - s * (small + large);
}

cplx general_psi_prime(const LevyModel& m, const GeneralJumps& gj, double tail_at_one, cplx s) {
  const double sig2 = m.sigma() * m.sigma();
  if (gj.finite_variation) {
    return sig2 * s + m.gamma_eff() - tail_transform(gj, s, 0, 0.0) +
           s * tail_transform(gj, s, 1, 0.0);
  }
  const cplx i0 = unit_transform(gj, s, 0, true) + tail_transform(gj, s, 0, 1.0);
  const cplx i1 = unit_transform(gj, s, 1, false) + tail_transform(gj, s, 1, 1.0);
  return sig2 * s + (m.gamma() - tail_at_one) - i0 + s * i1;
}

}  // namespace

LevyModel::LevyModel(double sigma, double gamma, JumpSpec jumps)
    : sigma_(sigma), gamma_(gamma), jumps_(std::move(jumps)) {
  finish();
  // gamma_eff = gamma + int_(0,1) x Pi(dx)
  if (const auto* hx = std::get_if<HyperExpJumps>(&jumps_)) {
    double comp = 0.0;
    for (const auto& c : *hx) {
      comp += c.rate * (1.0 - std::exp(-c.exp_rate) * (1.0 + c.exp_rate)) / c.exp_rate;
    }
    gamma_eff_ = gamma_ + comp;
  } else if (std::holds_alternative<GeneralJumps>(jumps_)) {
    // int_(0,1) x Pi(dx) = int_0^1 tail - tail(1); without finite variation
    // only the tail(1) part can be folded into the linear coefficient.
    const auto& gj = std::get<GeneralJumps>(jumps_);
    gamma_eff_ = gj.finite_variation ? gamma_ + small_jump_mean_ - tail_at_one_
                                     : gamma_ - tail_at_one_;
  } else {
    gamma_eff_ = gamma_;
  }
}

LevyModel LevyModel::from_effective_drift(double sigma, double gamma_eff, JumpSpec jumps) {
  LevyModel m;
  m.sigma_ = sigma;
  m.jumps_ = std::move(jumps);
  m.finish();
  m.gamma_eff_ = gamma_eff;
  if (const auto* hx = std::get_if<HyperExpJumps>(&m.jumps_)) {
    double comp = 0.0;
    for (const auto& c : *hx) {
      comp += c.rate * (1.0 - std::exp(-c.exp_rate) * (1.0 + c.exp_rate)) / c.exp_rate;
    }
    m.gamma_ = gamma_eff - comp;
  } else if (const auto* gj = std::get_if<GeneralJumps>(&m.jumps_)) {
    if (!gj->finite_variation) {
      throw ValidationError("effective drift is undefined for infinite-variation jumps");
    }
    m.gamma_ = gamma_eff - m.small_jump_mean_ + m.tail_at_one_;
  } else {
    m.gamma_ = gamma_eff;
  }
  return m;
}

void LevyModel::finish() {
  if (const auto* gj = std::get_if<GeneralJumps>(&jumps_)) {
    if (!gj->tail) throw ValidationError("general jump family requires a tail function");
    tail_at_one_ = gj->truncation > 1.0 ? gj->tail(1.0) : 0.0;
    small_jump_mean_ = gj->finite_variation
                           ? integrate_unit_singular([&](double x) { return gj->tail(x); })
                           : std::numeric_limits<double>::infinity();
  }
}

bool LevyModel::bounded_variation() const {
  if (sigma_ > 0.0) return false;
  if (const auto* gj = std::get_if<GeneralJumps>(&jumps_)) return gj->finite_variation;
  return true;
}

std::optional<double> LevyModel::drift_d() const {
  if (!bounded_variation()) return std::nullopt;
  return gamma_eff_;
}

double LevyModel::laplace_exponent(double theta) const {
  if (!(theta >= 0.0)) throw std::domain_error("laplace_exponent: theta must be >= 0");
  if (theta == 0.0) return 0.0;
  const double base = 0.5 * sigma_ * sigma_ * theta * theta + gamma_eff_ * theta;
  if (const auto* hx = std::get_if<HyperExpJumps>(&jumps_)) {
    double jumps = 0.0;
    for (const auto& c : *hx) jumps += c.rate * theta / (c.exp_rate + theta);
    return base - jumps;
  }
  if (const auto* gj = std::get_if<GeneralJumps>(&jumps_)) {
    return general_psi(*this, *gj, tail_at_one_, cplx(theta, 0.0)).real();
  }
  return base;
}

double LevyModel::laplace_exponent_derivative(double theta) const {
  if (!(theta >= 0.0)) throw std::domain_error("laplace_exponent_derivative: theta must be >= 0");
  const double base = sigma_ * sigma_ * theta + gamma_eff_;
  if (const auto* hx = std::get_if<HyperExpJumps>(&jumps_)) {
    double jumps = 0.0;
    for (const auto& c : *hx) {
      const double den = c.exp_rate + theta;
      jumps += c.rate * c.exp_rate / (den * den);
    }
    return base - jumps;
  }
  if (const auto* gj = std::get_if<GeneralJumps>(&jumps_)) {
    return general_psi_prime(*this, *gj, tail_at_one_, cplx(theta, 0.0)).real();
  }
  return base;
}

std::complex<double> LevyModel::laplace_exponent(std::complex<double> s) const {
  if (const auto* gj = std::get_if<GeneralJumps>(&jumps_)) {
    if (s.real() < 0.0) {
      throw std::domain_error("laplace_exponent: general jump family needs Re(s) >= 0");
    }
    return general_psi(*this, *gj, tail_at_one_, s);
  }
  cplx r = 0.5 * sigma_ * sigma_ * s * s + gamma_eff_ * s;
  if (const auto* hx = std::get_if<HyperExpJumps>(&jumps_)) {
    for (const auto& c : *hx) r -= c.rate * s / (c.exp_rate + s);
  }
  return r;
}

std::complex<double> LevyModel::laplace_exponent_derivative(std::complex<double> s) const {
  if (const auto* gj = std::get_if<GeneralJumps>(&jumps_)) {
    if (s.real() < 0.0) {
      throw std::domain_error("laplace_exponent_derivative: general jump family needs Re(s) >= 0");
    }
    return general_psi_prime(*this, *gj, tail_at_one_, s);
  }
  cplx r = sigma_ * sigma_ * s + gamma_eff_;
  if (const auto* hx = std::get_if<HyperExpJumps>(&jumps_)) {
    for (const auto& c : *hx) {
      const cplx den = c.exp_rate + s;
      r -= c.rate * c.exp_rate / (den * den);
    }
  }
  return r;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violations[i];
  }
  return os.str();
}

ValidationReport validate(const LevyModel& model, const RefractionParams& params) {
  ValidationReport rep;
  auto& v = rep.violations;
  if (!std::isfinite(model.sigma()) || model.sigma() < 0.0) v.emplace_back("σ must be >= 0");
  if (!std::isfinite(model.gamma_eff())) v.emplace_back("γ must be finite");
  if (!(params.delta > 0.0) || !std::isfinite(params.delta)) v.emplace_back("δ must be positive");
  if (!std::isfinite(params.b)) v.emplace_back("b must be finite");

  if (const auto* hx = std::get_if<HyperExpJumps>(&model.jumps())) {
    for (std::size_t i = 0; i < hx->size(); ++i) {
      const auto& c = (*hx)[i];
      if (!(c.rate > 0.0) || !std::isfinite(c.rate)) {
        v.push_back("jump component " + std::to_string(i) + ": lambda must be positive");
      }
      if (!(c.exp_rate > 0.0) || !std::isfinite(c.exp_rate)) {
        v.push_back("jump component " + std::to_string(i) +
                    ": rho must be positive (Levy measure must live on (0, inf))");
      }
    }
  } else if (const auto* gj = std::get_if<GeneralJumps>(&model.jumps())) {
    // A tail function must be nonnegative and nonincreasing.
    double prev = std::numeric_limits<double>::infinity();
    bool bad = false;
    for (int k = -12; k <= 6 && !bad; ++k) {
      for (double m : {1.0, 2.0, 5.0}) {
        const double x = m * std::pow(10.0, k);
        if (x > gj->truncation) break;
        const double t = gj->tail(x);
        if (!(t >= 0.0) || t > prev * (1.0 + 1e-12)) {
          bad = true;
          break;
        }
        prev = t;
      }
    }
    if (bad) v.emplace_back("Levy tail must be nonnegative and nonincreasing on (0, inf)");
    // x^2 Pi(dx) integrable near 0  <=>  x * tail(x) integrable near 0;
    // finite variation additionally needs tail(x) integrable near 0.
    auto near_zero = [&](double w_pow) {
      auto f = [&](double x) { return std::pow(x, w_pow) * gj->tail(x); };
      const double a = quad::gauss_kronrod(f, 1e-9, 1e-6, {.rel_tol = 1e-8, .abs_tol = 1e-14});
      const double b = quad::gauss_kronrod(f, 1e-6, 1e-3, {.rel_tol = 1e-8, .abs_tol = 1e-14});
      return std::isfinite(a) && (a <= 0.99 * b || a < 1e-300);
    };
    if (!bad) {
      try {
        if (!near_zero(1.0)) v.emplace_back("Levy measure is not integrable against x^2 near 0");
        if (gj->finite_variation && !near_zero(0.0)) {
          v.emplace_back("declared finite variation but int_0 x Pi(dx) diverges");
        }
      } catch (const NumericalError&) {
        v.emplace_back("Levy measure is not integrable near 0");
      }
    }
  }

  if (const auto d = model.drift_d(); d && params.delta > 0.0 && !(*d > params.delta)) {
    std::ostringstream os;
    os << "bounded variation requires d > δ (d = " << *d << ", δ = " << params.delta << ")";
    v.push_back(os.str());
  }
  return rep;
}

void require_valid(const LevyModel& model, const RefractionParams& params) {
  const auto rep = validate(model, params);
  if (!rep.ok()) throw ValidationError(rep.summary());
}

}  // namespace refracted
