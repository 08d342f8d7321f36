#pragma once

#include "refracted/model.hpp"

namespace refracted {

struct RootPair {
  double q;
  double phi;     // largest root of psi(t) = q
  double varphi;  // largest root of psi(t) - delta t = q
  double residual_phi;
  double residual_varphi;
};

// Largest nonnegative root of psi(t) - tilt * t = q, q > 0. Searches to the
// right of the minimiser of the convex map; relative tolerance 1e-13.
double largest_root(const LevyModel& model, double tilt, double q);

double phi_root(const LevyModel& model, double q);
double varphi_root(const LevyModel& model, double delta, double q);

RootPair root_pair(const LevyModel& model, double delta, double q);

}  // namespace refracted
