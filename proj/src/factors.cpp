#include "refracted/factors.hpp"

#include <cmath>
#include <stdexcept>

#include "refracted/errors.hpp"
#include "refracted/quadrature.hpp"

namespace refracted {

// Tabulates g(u) = int_u^inf e^{-kappa (v - u)} R(v) dv on [0, top] by the
// backward recursion g(u_i) = int_{u_i}^{u_{i+1}} ... + e^{-kappa h} g(u_{i+1}).
// Lookups between nodes reuse the same cell rule, so the table adds no
// interpolation error.
class FactorSet::TailTable {
 public:
  TailTable(const ScaleEvaluator& scale, double kappa, int nodes)
      : scale_(scale), kappa_(kappa), top_(scale.x_max()), vals_(static_cast<std::size_t>(nodes)) {
    step_ = top_ / (nodes - 1);
    vals_.back() = scale_.remainder_tail(kappa_, top_, false);
    for (int i = nodes - 2; i >= 0; --i) {
      const double u = i * step_;
      vals_[static_cast<std::size_t>(i)] =
          cell(u, u + step_) + std::exp(-kappa_ * step_) * vals_[static_cast<std::size_t>(i) + 1];
    }
  }

  double operator()(double u) const {
    if (u >= top_) return scale_.remainder_tail(kappa_, u, false);
    const auto i = static_cast<std::size_t>(u / step_);
    const double next = static_cast<double>(i + 1) * step_;
    return cell(u, next) + std::exp(-kappa_ * (next - u)) * vals_[i + 1];
  }

 private:
  double cell(double a, double b) const {
    return quad::gauss_legendre(
        [&](double v) { return std::exp(-kappa_ * (v - a)) * scale_.remainder(v); }, a, b);
  }

  const ScaleEvaluator& scale_;
  double kappa_;
  double top_;
  double step_ = 0.0;
  std::vector<double> vals_;
};

FactorSet::FactorSet(const LevyModel& model, double delta, double q, FactorOptions opt)
    : model_(model), delta_(delta), q_(q) {
  if (!(delta > 0.0)) throw std::domain_error("FactorSet: delta must be positive");
  if (!(q > 0.0)) throw std::domain_error("FactorSet: q must be positive");
  scale_x_ = std::make_shared<const ScaleEvaluator>(model_, q_, 0.0, opt.scale);
  scale_y_ = std::make_shared<const ScaleEvaluator>(model_, q_, delta_, opt.scale);
  phi_ = scale_x_->leading_root();
  varphi_ = scale_y_->leading_root() * (1.0 + opt.varphi_perturbation);
  kq_pos_ = q_ * (varphi_ - phi_) / (varphi_ * delta_);
  if (scale_x_->backend() == ScaleBackend::LaplaceInversion) {
    tab_rx_ = std::make_shared<const TailTable>(*scale_x_, varphi_, opt.table_nodes);
  }
  if (scale_y_->backend() == ScaleBackend::LaplaceInversion) {
    tab_ry_ = std::make_shared<const TailTable>(*scale_y_, phi_, opt.table_nodes);
  }
}

double FactorSet::tail_rx(double u) const {
  return tab_rx_ ? (*tab_rx_)(u) : scale_x_->remainder_tail(varphi_, u, false);
}

double FactorSet::tail_rx_prime(double u) const {
  // Integration by parts: int e^{-k(v-u)} R'(v) dv = -R(u) + k int e^{-k(v-u)} R(v) dv.
  return -scale_x_->remainder(u) + varphi_ * tail_rx(u);
}

double FactorSet::tail_ry(double u) const {
  return tab_ry_ ? (*tab_ry_)(u) : scale_y_->remainder_tail(phi_, u, false);
}

WienerHopfTransforms FactorSet::wh_transforms(double s) const {
  if (!(s > 0.0)) throw std::domain_error("wh_transforms: s must be positive");
  auto near = [](double a, double b) { return std::abs(a - b) <= 1e-7 * std::max(1.0, b); };
  WienerHopfTransforms t{};
  t.sup_x = phi_ / (phi_ + s);
  t.sup_y = varphi_ / (varphi_ + s);
  const double psi = model_.laplace_exponent(s);
  t.inf_x = near(s, phi_) ? q_ / (phi_ * model_.laplace_exponent_derivative(phi_))
                          : (q_ / phi_) * (phi_ - s) / (q_ - psi);
  t.inf_y = near(s, varphi_)
                ? q_ / (varphi_ * (model_.laplace_exponent_derivative(varphi_) - delta_))
                : (q_ / varphi_) * (varphi_ - s) / (q_ - psi + delta_ * s);
  return t;
}

double FactorSet::F1(double x) const {
  if (x < 0.0) throw std::domain_error("F1: x must be >= 0");
  return (varphi_ - phi_) / phi_ * std::exp(-varphi_ * x);
}

double FactorSet::F1_prime(double x) const {
  if (!(x > 0.0)) throw std::domain_error("F1_prime: x must be > 0");
  return -varphi_ * F1(x);
}

double FactorSet::F2(double x) const {
  if (x > 0.0) throw std::domain_error("F2: x must be <= 0");
  const double u = -x;
  return delta_ * varphi_ / phi_ * ((varphi_ - phi_) * tail_rx(u) - scale_x_->remainder(u));
}

double FactorSet::F2_prime_limit(double x) const {
  if (x > 0.0) throw std::domain_error("F2_prime: x must be <= 0");
  const double u = -x;
  return delta_ * varphi_ / phi_ *
         (scale_x_->remainder_prime(u) - (varphi_ - phi_) * tail_rx_prime(u));
}

double FactorSet::F2_prime(double x) const {
  if (!(x < 0.0)) throw std::domain_error("F2_prime: x must be < 0");
  return F2_prime_limit(x);
}

double FactorSet::f_aux(double x) const {
  if (x > 0.0) throw std::domain_error("f_aux: x must be <= 0");
  const double u = -x;
  return scale_y_->remainder(u) + (varphi_ - phi_) * tail_ry(u) +
         (varphi_ - phi_) / (delta_ * phi_) * std::exp(phi_ * u);
}

double FactorSet::Kq_density(double x) const {
  if (x >= 0.0) return kq_pos_ * std::exp(-phi_ * x);
  const double u = -x;
  // The growing parts of c e^{-Phi x} and (q Phi / varphi) f(x) cancel exactly.
  const double v =
      -q_ * phi_ / varphi_ * (scale_y_->remainder(u) + (varphi_ - phi_) * tail_ry(u));
  if (v >= 0.0) return v;
  if (v >= -1e-10) return 0.0;
  throw ConsistencyError("Kq_density: negative value " + std::to_string(v) + " at x = " +
                         std::to_string(x));
}

InfLawCheck FactorSet::inf_law_check(double s, ProcessTag tag) const {
  if (!(s > 0.0)) throw std::domain_error("inf_law_check: s must be positive");
  const ScaleEvaluator& sc = tag == ProcessTag::X ? *scale_x_ : *scale_y_;
  const double r = sc.leading_root();
  const WienerHopfTransforms t = wh_transforms(s);

  // (q/r) W(dx) - q W(x) dx; the e^{r x} parts cancel, leaving (q/r)(R' - r R).
  InfLawCheck c{};
  c.atom = q_ / r * sc.value_at_zero();
  const double body = quad::gauss_kronrod(
      [&](double x) {
        return std::exp(-s * x) * (q_ / r) * (sc.remainder_prime(x) - r * sc.remainder(x));
      },
      0.0, std::numeric_limits<double>::infinity(),
      sc.backend() == ScaleBackend::ClosedForm ? quad::KronrodOptions{1e-12, 1e-14, 25}
                                               : quad::KronrodOptions{1e-9, 1e-12, 15});
  c.numeric = c.atom + body;
  c.analytic = tag == ProcessTag::X ? t.inf_x : t.inf_y;
  return c;
}

}  // namespace refracted
