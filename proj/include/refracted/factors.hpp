#pragma once

#include <memory>
#include <vector>

#include "refracted/model.hpp"
#include "refracted/scale.hpp"

namespace refracted {

// Laplace transforms of the extrema of X and Y at an independent exponential
// time: E[e^{-s sup X}], E[e^{s inf X}], and the same pair for Y.
struct WienerHopfTransforms {
  double sup_x;
  double inf_x;
  double sup_y;
  double inf_y;
};

// Numeric transform of the law of -inf X (or -inf Y) against the analytic
// expression; `atom` is the mass at 0.
struct InfLawCheck {
  double numeric;
  double analytic;
  double atom;
};

struct FactorOptions {
  ScaleOptions scale;
  // Tail integrals of the inversion backend are tabulated on this many nodes.
  int table_nodes = 4096;
  // Relative perturbation applied to varphi inside the factor formulas only.
  // Used by the verify self-test to show the route comparison is sensitive.
  double varphi_perturbation = 0.0;
};

// Factors of the Wiener-Hopf route for given (X, delta, q).
//
// All functions of a negative argument are evaluated through the decaying
// remainders R_X, R_Y of the scale functions (W = B e^{r x} + R), which avoids
// the cancellation of growing exponentials in the literal expressions.
class FactorSet {
 public:
  FactorSet(const LevyModel& model, double delta, double q, FactorOptions opt = {});

  double q() const { return q_; }
  double delta() const { return delta_; }
  double phi() const { return phi_; }
  double varphi() const { return varphi_; }
  const ScaleEvaluator& scale_x() const { return *scale_x_; }
  const ScaleEvaluator& scale_y() const { return *scale_y_; }
  const LevyModel& model() const { return model_; }

  WienerHopfTransforms wh_transforms(double s) const;

  double F1(double x) const;
  double F1_prime(double x) const;
  double F2(double x) const;
  // x < 0. F2_prime_limit also accepts 0 and returns the left limit there.
  double F2_prime(double x) const;
  double F2_prime_limit(double x) const;
  double f_aux(double x) const;
  double Kq_density(double x) const;

  InfLawCheck inf_law_check(double s, ProcessTag tag) const;

  // int_u^inf e^{-varphi (v - u)} R_X(v) dv and the same with R_X'.
  double tail_rx(double u) const;
  double tail_rx_prime(double u) const;
  // int_u^inf e^{-Phi (v - u)} R_Y(v) dv.
  double tail_ry(double u) const;

 private:
  class TailTable;

  LevyModel model_;
  double delta_;
  double q_;
  double phi_;
  double varphi_;
  double kq_pos_;  // K_q density at 0+
  std::shared_ptr<const ScaleEvaluator> scale_x_;
  std::shared_ptr<const ScaleEvaluator> scale_y_;
  std::shared_ptr<const TailTable> tab_rx_;
  std::shared_ptr<const TailTable> tab_ry_;
};

}  // namespace refracted
