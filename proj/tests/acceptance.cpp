// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <thread>

#include "refracted/config.hpp"
#include "refracted/factors.hpp"
#include "refracted/mc.hpp"
#include "refracted/quadrature.hpp"
#include "refracted/resolvent.hpp"
#include "refracted/roots.hpp"

using namespace refracted;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const quad::KronrodOptions kTight{1e-13, 1e-15, 25};
const double kQ = 1.0;

int failures = 0;

void report(int id, bool ok, const std::string& what) {
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

struct Preset {
  ModelConfig cfg;
  FactorSet fs;
  explicit Preset(ModelConfig c) : cfg(std::move(c)), fs(cfg.model, cfg.params.delta, kQ) {}
};

double grid_defect = 0.0;

void grids(const std::vector<Preset>& presets) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto ys = uniform_grid(-6.0, 6.0, 0.05);
  double gap = 0.0;
  for (const Preset& p : presets) {
    for (double x : {-2.0, -1.0, 0.0, p.cfg.params.b, 0.5, 1.0, 2.0}) {
      const ResolventSolver s({p.cfg.model, p.cfg.params, kQ, x, Route::Both});
      const DensityGrid g = density_grid(s, ys);
      gap = std::max(gap, g.route_gap);
      grid_defect = std::max(grid_defect, g.normalization_defect);
    }
  }
  const double secs = seconds_since(t0);
  report(1, gap <= 1e-6 && secs <= 60.0,
         fmt("route agreement, max gap %.3g (<= 1e-6), %.2f s (<= 60 s)", gap, secs));
}

void normalization() {
  report(3, grid_defect <= 1e-3, fmt("normalization, max defect %.3g (<= 1e-3)", grid_defect));
}

void spot(const Preset& bm) {
  const ResolventSolver s({bm.cfg.model, bm.cfg.params, kQ, -1.0, Route::Both});
  const double a = s.density_scale(1.0), b = s.density_wh(1.0);
  const bool ok = std::abs(a - 0.057394) <= 1e-4 && std::abs(b - 0.057394) <= 1e-4;
  report(2, ok, fmt("spot value std-bm x=-1 y=1, scale %.10f, wiener-hopf %.10f (0.057394 +/- 1e-4)", a, b));
}

void roundtrips(const std::vector<Preset>& presets) {
  double worst = 0.0;
  for (const Preset& p : presets) {
    for (const ScaleEvaluator* w : {&p.fs.scale_x(), &p.fs.scale_y()}) {
      const double r = w->leading_root();
      for (int i = 0; i < 20; ++i) {
        const double s = (r + 0.1) * std::pow((r + 10.0) / (r + 0.1), i / 19.0);
        const LaplaceRoundtrip t = w->laplace_roundtrip(s);
        worst = std::max(worst, std::abs(t.numeric - t.analytic) / std::abs(t.analytic));
        worst = std::max(worst, std::abs(t.measure_numeric - t.measure_analytic) / std::abs(t.measure_analytic));
      }
    }
  }
  const double w0_bm = presets[0].fs.scale_x().W(0.0);
  const double w0_cl = presets[1].fs.scale_x().W(0.0);
  report(4, worst <= 1e-8 && w0_bm == 0.0 && w0_cl == 0.5,
         fmt("scale transforms, worst relative error %.3g (<= 1e-8); W(0) std-bm %.17g, cl-exp %.17g", worst,
             w0_bm, w0_cl));
}

void moment(const Preset& bm) {
  const ScaleEvaluator& w = bm.fs.scale_x();
  const double gap = bm.fs.varphi() - bm.fs.phi();
  const double v = quad::gauss_kronrod(
      [&](double u) {
        return std::exp(-gap * u) * (w.dominant_coefficient() * bm.fs.phi() + std::exp(-bm.fs.phi() * u) * w.remainder_prime(u));
      },
      0.0, kInf, kTight);
  report(5, std::abs(v - 2.0) <= 1e-8, fmt("exponential moment of W' on std-bm %.12f (2 +/- 1e-8)", v));
}

void convolution(const std::vector<Preset>& presets) {
  double worst = 0.0;
  for (const Preset& p : presets) {
    const FactorSet& fs = p.fs;
    for (double x : {-0.5, -1.0, -2.0}) {
      const double lhs = quad::gauss_kronrod(
          [&](double z) { return std::exp(-fs.varphi() * (x - z)) * fs.f_aux(z); }, x, 0.0, kTight);
      const double rhs = quad::gauss_kronrod(
          [&](double z) { return std::exp(-fs.phi() * (x - z)) * fs.scale_y().W(-z); }, x, 0.0, kTight);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  report(6, worst <= 1e-8, fmt("f against the tilted scale convolution, worst %.3g (<= 1e-8)", worst));
}

void transforms(const std::vector<Preset>& presets) {
  double w1 = 0.0, w2 = 0.0;
  for (const Preset& p : presets) {
    const FactorSet& fs = p.fs;
    for (double s : {0.1, 0.3, 0.5, 0.8, 1.2, 1.7, 2.5, 3.5, 5.0, 8.0}) {
      const WienerHopfTransforms t = fs.wh_transforms(s);
      const double f1 = quad::gauss_kronrod([&](double x) { return std::exp(-s * x) * fs.F1(x); }, 0.0, kInf, kTight);
      const double f2 = quad::gauss_kronrod([&](double u) { return std::exp(-s * u) * fs.F2(-u); }, 0.0, kInf, kTight);
      w1 = std::max(w1, std::abs(f1 - (t.sup_y / t.sup_x - 1.0) / s));
      w2 = std::max(w2, std::abs(f2 - (t.inf_x / t.inf_y - 1.0) / s));
    }
  }
  report(7, w1 <= 1e-9 && w2 <= 1e-6, fmt("F1 transform worst %.3g (<= 1e-9), F2 transform worst %.3g (<= 1e-6)", w1, w2));
}

void kq_mass(const std::vector<Preset>& presets) {
  double worst = 0.0;
  for (const Preset& p : presets) {
    const FactorSet& fs = p.fs;
    const double neg = quad::gauss_kronrod([&](double u) { return fs.Kq_density(-u); }, 0.0, kInf, kTight);
    worst = std::max(worst, std::abs(neg + fs.Kq_density(0.0) / fs.phi() - 1.0));
  }
  report(8, worst <= 1e-6, fmt("K_q mass, worst deviation %.3g (<= 1e-6)", worst));
}

void monte_carlo(const std::vector<Preset>& presets) {
  const auto t0 = std::chrono::steady_clock::now();
  SimConfig cfg;
  cfg.step_h = 1e-3;
  cfg.n_paths = 200000;
  cfg.seed = 20240101;
  cfg.bin_width = 0.1;
  cfg.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  double within[2]{};
  for (std::size_t k = 0; k < presets.size(); ++k) {
    const Preset& p = presets[k];
    const auto v = sample_terminal(p.cfg.model, p.cfg.params, 0.0, kQ, cfg);
    const EmpiricalDensity e = histogram(v, cfg.bin_width);
    const ResolventSolver s({p.cfg.model, p.cfg.params, kQ, 0.0, Route::Scale});
    within[k] = compare_to_density(e, s).within_4;
  }
  const double secs = seconds_since(t0);
  report(9, within[0] >= 0.95 && within[1] >= 0.95 && secs <= 300.0,
         fmt("Monte Carlo bins within 4 SE: std-bm %.3f, cl-exp %.3f (>= 0.95), %.1f s (<= 300 s)", within[0],
             within[1], secs));
}

void roots() {
  std::mt19937_64 gen(424242);
  std::uniform_real_distribution<double> lq(std::log(1e-2), std::log(1e2));
  std::uniform_real_distribution<double> frac(0.01, 0.99);
  const ModelConfig models[] = {preset_std_bm(), preset_cl_exp()};
  int bad = 0;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const ModelConfig& m = models[i % 2];
    const double q = std::exp(lq(gen));
    // Bounded-variation draws need delta < d = 2.
    const double delta = frac(gen) * 2.0;
    const RootPair rp = root_pair(m.model, delta, q);
    const double res = std::max(rp.residual_phi, rp.residual_varphi) / std::max(1.0, q);
    worst = std::max(worst, res);
    if (!(rp.varphi > rp.phi) || res > 1e-12) ++bad;
  }
  report(10, bad == 0, fmt("roots on 1000 draws: %.0f violations, worst scaled residual %.3g (<= 1e-12)", bad, worst));
}

}  // namespace

int main() {
  std::vector<Preset> presets;
  presets.emplace_back(preset_std_bm());
  presets.emplace_back(preset_cl_exp());
  grids(presets);
  spot(presets[0]);
  normalization();
  roundtrips(presets);
  moment(presets[0]);
  convolution(presets);
  transforms(presets);
  kq_mass(presets);
  monte_carlo(presets);
  roots();
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
