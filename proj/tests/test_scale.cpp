#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "refracted/scale.hpp"

using namespace refracted;

namespace {

LevyModel std_bm() { return LevyModel(std::sqrt(2.0), 0.0, NoJumps{}); }
LevyModel cl_exp() { return LevyModel::from_effective_drift(0.0, 2.0, HyperExpJumps{{1.0, 1.0}}); }

ScaleOptions inverted() {
  ScaleOptions o;
  o.force_inversion = true;
  return o;
}

}  // namespace

TEST_CASE("std-bm scale function is sinh") {
  const ScaleEvaluator w(std_bm(), 1.0, 0.0);
  CHECK(w.backend() == ScaleBackend::ClosedForm);
  CHECK(w.process_tag() == ProcessTag::X);
  CHECK(w.W(-3.0) == 0.0);
  CHECK(w.W(0.0) == 0.0);
  CHECK(w.W(1.0) == doctest::Approx(std::sinh(1.0)).epsilon(1e-14));
  CHECK(w.W(1.0) == doctest::Approx(1.175201).epsilon(1e-6));
  CHECK(w.W_prime(1.0) == doctest::Approx(std::cosh(1.0)).epsilon(1e-14));
  CHECK(w.W_prime(0.5) == doctest::Approx(1.127626).epsilon(1e-6));
  CHECK(w.W(12.0) == doctest::Approx(std::sinh(12.0)).epsilon(1e-14));
  CHECK_THROWS_AS(w.W_prime(0.0), std::domain_error);
  CHECK(w.W_prime_right(0.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("std-bm tilted scale function") {
  const ScaleEvaluator w(std_bm(), 1.0, 0.5);
  CHECK(w.process_tag() == ProcessTag::Y);
  CHECK(w.leading_root() == doctest::Approx(oracle::std_varphi()).epsilon(1e-14));
  for (double x : {0.1, 1.0, 3.0, 7.5}) {
    CHECK(w.W(x) == doctest::Approx(oracle::std_tilted_W(x)).epsilon(1e-13));
  }
  // Frozen from the residue oracle; the rounded (e^a - e^b)/2.061553 gives 1.5238.
  CHECK(w.W(1.0) == doctest::Approx(1.5237945903772971).epsilon(1e-13));
}

TEST_CASE("cl-exp scale functions against their residue expansions") {
  const ScaleEvaluator wx(cl_exp(), 1.0, 0.0);
  const ScaleEvaluator wy(cl_exp(), 1.0, 0.5);
  CHECK(wx.W(0.0) == 0.5);
  CHECK(wx.value_at_zero() == 0.5);
  CHECK(wy.W(0.0) == doctest::Approx(1.0 / 1.5).epsilon(1e-15));
  for (double x : {0.0, 0.2, 1.0, 4.0, 10.0}) {
    CHECK(wx.W(x) == doctest::Approx(oracle::cl_W(x)).epsilon(1e-13));
    CHECK(wy.W(x) == doctest::Approx(oracle::cl_tilted_W(x)).epsilon(1e-13));
  }
}

TEST_CASE("transform examples") {
  const ScaleEvaluator w(std_bm(), 1.0, 0.0);
  const LaplaceRoundtrip a = w.laplace_roundtrip(2.0);
  CHECK(a.analytic == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(std::abs(a.numeric - 1.0 / 3.0) <= 1e-8);
  const LaplaceRoundtrip b = w.laplace_roundtrip(1.5);
  CHECK(b.analytic == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(std::abs(b.numeric - 0.8) <= 1e-8);
  const ScaleEvaluator c(cl_exp(), 1.0, 0.0);
  const LaplaceRoundtrip m = c.laplace_roundtrip(3.0);
  CHECK(m.measure_analytic == doctest::Approx(3.0 / 4.25).epsilon(1e-14));
  CHECK(std::abs(m.measure_numeric - 3.0 / 4.25) <= 1e-7);
  CHECK_THROWS_AS(w.laplace_roundtrip(0.5), std::domain_error);
}

TEST_CASE("round trips at 20 log-spaced points") {
  for (const LevyModel& m : {std_bm(), cl_exp()}) {
    for (double tilt : {0.0, 0.5}) {
      for (bool inv : {false, true}) {
        const ScaleEvaluator w(m, 1.0, tilt, inv ? inverted() : ScaleOptions{});
        const double tol = inv ? 1e-5 : 1e-8;
        const double r = w.leading_root();
        for (int i = 0; i < 20; ++i) {
          const double s = (r + 0.1) * std::pow((r + 10.0) / (r + 0.1), i / 19.0);
          const LaplaceRoundtrip t = w.laplace_roundtrip(s);
          CHECK(std::abs(t.numeric - t.analytic) <= tol * std::abs(t.analytic));
          CHECK(std::abs(t.measure_numeric - t.measure_analytic) <= tol * std::abs(t.measure_analytic));
        }
      }
    }
  }
}

TEST_CASE("inversion backend reproduces the closed form") {
  for (double tilt : {0.0, 0.5}) {
    const ScaleEvaluator exact(cl_exp(), 1.0, tilt);
    const ScaleEvaluator inv(cl_exp(), 1.0, tilt, inverted());
    CHECK(inv.backend() == ScaleBackend::LaplaceInversion);
    CHECK(inv.inversion_error_estimate() < 1e-8);
    CHECK(inv.W(0.0) == exact.W(0.0));
    for (double x : {0.01, 0.3, 1.0, 2.7, 9.0, 30.0}) {
      CHECK(std::abs(inv.W(x) - exact.W(x)) <= 1e-9 * exact.W(x));
      CHECK(std::abs(inv.W_prime(x) - exact.W_prime(x)) <= 1e-6 * exact.W_prime(x));
    }
  }
}

TEST_CASE("general jump measure takes the inversion backend") {
  GeneralJumps gj;
  gj.tail = [](double x) { return std::exp(-x); };
  ScaleOptions o;
  o.cache_nodes = 512;
  const ScaleEvaluator w(LevyModel::from_effective_drift(0.0, 2.0, gj), 1.0, 0.0, o);
  CHECK(w.backend() == ScaleBackend::LaplaceInversion);
  CHECK(w.W(0.0) == 0.5);
  for (double x : {0.5, 2.0, 6.0}) CHECK(w.W(x) == doctest::Approx(oracle::cl_W(x)).epsilon(1e-8));
}

TEST_CASE("W increases and W' is nonnegative") {
  for (const LevyModel& m : {std_bm(), cl_exp()}) {
    for (double tilt : {0.0, 0.5}) {
      const ScaleEvaluator w(m, 1.0, tilt);
      double prev = w.W(0.0);
      for (int i = 1; i <= 1000; ++i) {
        const double x = 0.02 * i;
        const double v = w.W(x);
        CHECK(v > prev);
        CHECK(w.W_prime(x) >= 0.0);
        CHECK(std::exp(-w.leading_root() * x) * v <= w.dominant_coefficient() + w.W(0.0) + 1.0);
        prev = v;
      }
    }
  }
}

TEST_CASE("tilt zero through build_scale") {
  const LevyModel m = cl_exp();
  const ScaleEvaluator a(m, 1.0, 0.0);
  const ScaleEvaluator b = build_scale(m, 1.0, 0.0);
  for (int i = 0; i <= 100; ++i) {
    const double x = 0.1 * i;
    CHECK(std::abs(a.W(x) - b.W(x)) <= 1e-12 * std::max(1.0, a.W(x)));
  }
}

TEST_CASE("remainder decomposition") {
  const ScaleEvaluator w(std_bm(), 1.0, 0.0);
  // sinh(x) = e^x/2 - e^{-x}/2.
  CHECK(w.dominant_coefficient() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(w.remainder(2.0) == doctest::Approx(-0.5 * std::exp(-2.0)).epsilon(1e-13));
  CHECK(w.remainder_prime(2.0) == doctest::Approx(0.5 * std::exp(-2.0)).epsilon(1e-13));
  // int_u^inf e^{-k(v-u)} (-e^{-v}/2) dv = -e^{-u} / (2 (k + 1)).
  CHECK(w.remainder_tail(3.0, 1.0, false) ==
        doctest::Approx(-std::exp(-1.0) / 8.0).epsilon(1e-12));
  // int_u^inf e^{-k(v-u)} cosh(v) dv for k > 1.
  const double k = 3.0, u = 0.7;
  const double ref = 0.5 * (std::exp(u) / (k - 1.0) + std::exp(-u) / (k + 1.0));
  CHECK(w.derivative_tail(k, u) == doctest::Approx(ref).epsilon(1e-12));
}
