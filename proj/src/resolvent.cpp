#include "refracted/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include "refracted/errors.hpp"
#include "refracted/quadrature.hpp"

namespace refracted {

const char* to_string(Route r) {
  switch (r) {
    case Route::Scale: return "scale";
    case Route::WienerHopf: return "wiener-hopf";
    case Route::Both: return "both";
  }
  return "?";
}

ResolventSolver::ResolventSolver(const ResolventQuery& query, ResolventOptions opt)
    : query_(query), opt_(opt) {
  require_valid(query_.model, query_.params);
  if (!(query_.q > 0.0)) throw ValidationError("q must be positive");
  if (!std::isfinite(query_.x)) throw ValidationError("x must be finite");
  const double xi = query_.x - query_.params.b;
  opt_.factors.scale.x_reach = std::max(opt_.factors.scale.x_reach, 2.0 * std::abs(xi));
  fs_ = std::make_shared<const FactorSet>(query_.model, query_.params.delta, query_.q,
                                          opt_.factors);
  phi_ = fs_->scale_x().leading_root();
  varphi_ = fs_->scale_y().leading_root();

  double conv = 0.0;
  if (xi > 0.0) {
    const auto& wy = fs_->scale_y();
    conv = quad::adaptive_simpson(
        [&](double w) { return std::exp(phi_ * (xi - w)) * wy.W(w); }, 0.0, xi,
        {1e-14 * std::exp(varphi_ * xi), opt_.max_depth});
  }
  growth_ = std::exp(phi_ * xi) + query_.params.delta * phi_ * conv;
}

double ResolventSolver::clip(double v, double y) const {
  if (v >= 0.0) return v;
  if (v >= -1e-10) return 0.0;
  throw ConsistencyError("resolvent density negative (" + std::to_string(v) + ") at y = " +
                         std::to_string(y));
}

namespace {

// y < b formula. With W = B e^{Phi v} + R the three growing contributions
//   -q W(x - y),  -delta q int WW(w) W'(x - y - w) dw,  q (varphi - Phi)/Phi H C
// have dominant parts that cancel exactly, so only the remainder pieces are
// integrated: H is replaced by the R'-tail and W' by R' inside the convolution.
double scale_below(const FactorSet& fs, double q, double delta, double phi, double varphi,
                   double growth, double x, double b, double y, quad::SimpsonOptions sopt) {
  const auto& wx = fs.scale_x();
  const auto& wy = fs.scale_y();
  const double xi = x - b;
  double conv = 0.0;
  if (xi > 0.0) {
    conv = quad::adaptive_simpson(
        [&](double w) { return wy.W(w) * wx.remainder_prime(x - y - w); }, 0.0, xi, sopt);
  }
  const double direct = x > y ? -q * wx.remainder(x - y)
                              : q * wx.dominant_coefficient() * std::exp(phi * (x - y));
  const double tail = wx.remainder_tail(varphi, b - y, true);
  return -delta * q * conv + direct + q * (varphi - phi) / phi * tail * growth;
}

}  // namespace

double ResolventSolver::density_scale(double y) const {
  const double b = query_.params.b;
  const double x = query_.x;
  const double q = query_.q;
  const double delta = query_.params.delta;
  if (y >= b) {
    const double eta = y - b;
    double v = q * (varphi_ - phi_) / (delta * phi_) * std::exp(-varphi_ * eta) * growth_;
    if (x > y) v -= q * fs_->scale_y().W(x - y);
    return clip(v, y);
  }
  return clip(scale_below(*fs_, q, delta, phi_, varphi_, growth_, x, b, y,
                          {opt_.abs_tol, opt_.max_depth}),
              y);
}

double ResolventSolver::density_scale_below_threshold() const {
  const double b = query_.params.b;
  return scale_below(*fs_, query_.q, query_.params.delta, phi_, varphi_, growth_, query_.x, b, b,
                     {opt_.abs_tol, opt_.max_depth});
}

double ResolventSolver::density_wh(double y) const {
  const FactorSet& fs = *fs_;
  const double b = query_.params.b;
  const double x = query_.x;
  const double a = y - x;
  const quad::SimpsonOptions sopt{opt_.abs_tol, opt_.max_depth};
  const double zero[] = {0.0};
  double v;
  if (y >= b) {
    const double vp = fs.varphi();
    auto g = [&](double z) { return -vp * fs.F1(a - z) * fs.Kq_density(z); };
    v = (fs.F1(0.0) + 1.0) * fs.Kq_density(a) + quad::simpson_piecewise(g, b - x, a, zero, sopt);
  } else {
    auto g = [&](double z) { return fs.F2_prime_limit(a - z) * fs.Kq_density(z); };
    v = (fs.F2(0.0) + 1.0) * fs.Kq_density(a) - quad::simpson_piecewise(g, a, b - x, zero, sopt);
  }
  return clip(v, y);
}

std::vector<double> uniform_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw ValidationError("grid needs lo <= hi and step > 0");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + static_cast<double>(i) * step;
  return g;
}

double density_mass(const ResolventSolver& solver, double lo, double hi) {
  const bool use_scale = solver.query().route != Route::WienerHopf;
  auto d = [&](double y) { return use_scale ? solver.density_scale(y) : solver.density_wh(y); };
  const double breaks[] = {solver.query().params.b, solver.query().x};
  const FactorSet& fs = solver.factors();
  const bool closed = fs.scale_x().backend() == ScaleBackend::ClosedForm &&
                      fs.scale_y().backend() == ScaleBackend::ClosedForm;
  // Inverted scale functions carry ~1e-10 noise that a tight target would chase.
  return quad::gauss_kronrod_piecewise(d, lo, hi, breaks,
                                       closed ? quad::KronrodOptions{1e-10, 1e-12, 15}
                                              : quad::KronrodOptions{1e-8, 1e-9, 10});
}

DensityGrid density_grid(const ResolventSolver& solver, std::span<const double> y_values,
                         int threads) {
  const auto n = y_values.size();
  if (n == 0) throw ValidationError("density grid needs at least one y value");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(y_values[i] > y_values[i - 1])) throw ValidationError("y grid must be strictly increasing");
  }
  const Route route = solver.query().route;
  const bool do_scale = route != Route::WienerHopf;
  const bool do_wh = route != Route::Scale;

  DensityGrid g;
  g.x = solver.query().x;
  g.route = route;
  g.y.assign(y_values.begin(), y_values.end());
  if (do_scale) g.scale.assign(n, 0.0);
  if (do_wh) g.wh.assign(n, 0.0);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (do_scale) g.scale[i] = solver.density_scale(g.y[i]);
      if (do_wh) g.wh[i] = solver.density_wh(g.y[i]);
    }
  };
  const auto nt = static_cast<std::size_t>(std::clamp(threads, 1, 64));
  if (nt == 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(nt);
    const std::size_t chunk = (n + nt - 1) / nt;
    for (std::size_t t = 0; t < nt; ++t) {
      pool.emplace_back([&, t] {
        try {
          work(std::min(n, t * chunk), std::min(n, (t + 1) * chunk));
        } catch (...) {
          errs[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errs) {
      if (e) std::rethrow_exception(e);
    }
  }

  if (do_scale && do_wh) {
    g.gap.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      g.gap[i] = std::abs(g.scale[i] - g.wh[i]);
      g.route_gap = std::max(g.route_gap, g.gap[i]);
    }
  }
  const double b = solver.query().params.b;
  for (std::size_t i = 0; i < n; ++i) {
    if (g.y[i] == b) g.threshold_rows.push_back(i);
  }
  if (do_scale) {
    g.threshold_jump = solver.density_scale(b) - solver.density_scale_below_threshold();
  }

  const std::vector<double>& d = do_scale ? g.scale : g.wh;
  double mass = n > 1 ? density_mass(solver, g.y.front(), g.y.back()) : 0.0;
  if (g.y.back() > std::max(g.x, b)) mass += d.back() / solver.factors().varphi();
  const std::size_t k = std::max<std::size_t>(1, n / 10);
  if (k < n && d.front() > 0.0 && d[k] > 0.0) {
    const double slope = (std::log(d[k]) - std::log(d.front())) / (g.y[k] - g.y.front());
    if (slope > 0.0) mass += d.front() / slope;
  }
  g.mass = mass;
  g.normalization_defect = std::abs(mass - 1.0);
  return g;
}

}  // namespace refracted
