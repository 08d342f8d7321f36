#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "refracted/factors.hpp"
#include "refracted/model.hpp"

namespace refracted {

enum class Route { Scale, WienerHopf, Both };

const char* to_string(Route r);

struct ResolventQuery {
  LevyModel model;
  RefractionParams params;
  double q;
  double x;
  Route route = Route::Both;
};

struct ResolventOptions {
  FactorOptions factors;
  double abs_tol = 1e-9;
  int max_depth = 40;
  // Worker threads for grid evaluation; results do not depend on the count.
  int threads = 1;
};

// Density of U at an exponential time e(q) started from x:
//   y -> q E_x[int_0^inf e^{-qt} 1{U_t in dy} dt] / dy.
// Both routes are right-continuous in y (y = b uses the y >= b branch, and
// terms in W(x - y) vanish at y = x).
class ResolventSolver {
 public:
  explicit ResolventSolver(const ResolventQuery& query, ResolventOptions opt = {});

  const ResolventQuery& query() const { return query_; }
  const FactorSet& factors() const { return *fs_; }

  // Scale-function formulas.
  double density_scale(double y) const;
  // Convolution of the Wiener-Hopf factors with the K_q density.
  double density_wh(double y) const;
  // Left limit y -> b- of the scale route (formula for y < b evaluated at b).
  double density_scale_below_threshold() const;

 private:
  double clip(double v, double y) const;

  ResolventQuery query_;
  ResolventOptions opt_;
  std::shared_ptr<const FactorSet> fs_;
  // Exact root values for the scale route (FactorSet may carry a perturbed varphi).
  double phi_;
  double varphi_;
  double growth_;  // e^{Phi (x-b)} + delta Phi int_0^{x-b} e^{Phi (x-b-w)} WW(w) dw
};

struct DensityGrid {
  double x;
  Route route;
  std::vector<double> y;
  std::vector<double> scale;  // empty unless route includes Scale
  std::vector<double> wh;     // empty unless route includes WienerHopf
  std::vector<double> gap;    // |scale - wh| when both routes ran
  double route_gap = 0.0;
  double normalization_defect = 0.0;
  double mass = 0.0;
  // Right- minus left-limit of the density at y = b.
  double threshold_jump = 0.0;
  std::vector<std::size_t> threshold_rows;
};

// Evaluates the requested routes on an ascending y grid and fills the
// diagnostics. Mass is the integral of the density over the grid span plus
// exponential tails: rate varphi on the right, fitted slope on the left.
DensityGrid density_grid(const ResolventSolver& solver, std::span<const double> y_values,
                         int threads = 1);

// Probability mass of the exact density on [lo, hi].
double density_mass(const ResolventSolver& solver, double lo, double hi);

std::vector<double> uniform_grid(double lo, double hi, double step);

}  // namespace refracted
