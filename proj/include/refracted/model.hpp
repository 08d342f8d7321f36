#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace refracted {

// Process with no jumps: Brownian motion with drift (or pure drift).
struct NoJumps {};

// One exponential component of a hyperexponential jump law: jumps of X occur
// at `rate` and have Exp(`exp_rate`) magnitude (they are subtracted).
struct HyperExpComponent {
  double rate;
  double exp_rate;
};

using HyperExpJumps = std::vector<HyperExpComponent>;

// Arbitrary Levy measure on (0, inf) given through its tail x -> Pi((x, inf)).
// `finite_variation` declares int_(0,1) x Pi(dx) < inf. Beyond `truncation`
// the tail is treated as zero.
struct GeneralJumps {
  std::function<double(double)> tail;
  bool finite_variation = true;
  double truncation = 50.0;
};

using JumpSpec = std::variant<NoJumps, HyperExpJumps, GeneralJumps>;

// Spectrally negative Levy process given by its triplet. The linear
// coefficient is stored in compensated-away form (`gamma_eff`) so that for
// finite-variation jumps
//   psi(t) = sigma^2 t^2 / 2 + gamma_eff t - int (1 - e^{-t x}) Pi(dx).
// Immutable after construction.
class LevyModel {
 public:
  // `gamma` in the usual convention where jumps in (0, 1) are compensated.
  LevyModel(double sigma, double gamma, JumpSpec jumps);

  // Linear coefficient already net of compensation (equals the drift d for
  // bounded-variation models).
  static LevyModel from_effective_drift(double sigma, double gamma_eff, JumpSpec jumps);

  double sigma() const { return sigma_; }
  double gamma() const { return gamma_; }
  double gamma_eff() const { return gamma_eff_; }
  const JumpSpec& jumps() const { return jumps_; }

  bool has_jumps() const { return !std::holds_alternative<NoJumps>(jumps_); }
  bool is_hyperexponential() const { return std::holds_alternative<HyperExpJumps>(jumps_); }
  // psi is a rational function (no jumps or hyperexponential jumps).
  bool is_rational() const { return !std::holds_alternative<GeneralJumps>(jumps_); }
  bool bounded_variation() const;

  // Laplace exponent psi(theta), theta >= 0. Exactly 0 at theta = 0.
  double laplace_exponent(double theta) const;
  double laplace_exponent_derivative(double theta) const;
  // Analytic extension to Re(s) >= 0 (all of C minus poles for rational psi).
  std::complex<double> laplace_exponent(std::complex<double> s) const;
  std::complex<double> laplace_exponent_derivative(std::complex<double> s) const;

  // d = gamma + int_(0,1) x Pi(dx) when X has bounded variation.
  std::optional<double> drift_d() const;

 private:
  LevyModel() = default;
  void finish();

  double sigma_ = 0.0;
  double gamma_ = 0.0;
  double gamma_eff_ = 0.0;
  JumpSpec jumps_ = NoJumps{};
  // Pi((1, inf)) and int_0^1 Pi((x, inf)) dx for the general family.
  double tail_at_one_ = 0.0;
  double small_jump_mean_ = 0.0;
};

struct RefractionParams {
  double delta;
  double b;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

ValidationReport validate(const LevyModel& model, const RefractionParams& params);

// Throws ValidationError carrying the report summary when invalid.
void require_valid(const LevyModel& model, const RefractionParams& params);

}  // namespace refracted
