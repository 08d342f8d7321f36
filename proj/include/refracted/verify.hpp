#pragma once

#include <string>
#include <vector>

#include "refracted/model.hpp"

namespace refracted {

struct VerifyCheck {
  std::string name;
  std::string anchor;  // which identity or formula the check exercises
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool passed() const;
};

struct VerifyOptions {
  double q = 1.0;
  // Starting points for the route comparison; b is always appended.
  std::vector<double> xs{-2.0, -1.0, 0.0, 0.5, 1.0, 2.0};
  double y_half_width = 6.0;  // grid is b +/- this
  double y_step = 0.05;
  // Relative error injected into varphi on the Wiener-Hopf side only.
  double varphi_perturbation = 0.0;
};

// Runs every identity check in a fixed order. A check that throws is recorded
// as failed with the error text; the remaining checks still run.
VerifyReport verify(const LevyModel& model, const RefractionParams& params,
                    const VerifyOptions& opt = {});

}  // namespace refracted
