#pragma once

#include <complex>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "refracted/model.hpp"

namespace refracted {

enum class ProcessTag { X, Y };
enum class ScaleBackend { ClosedForm, LaplaceInversion };

const char* to_string(ProcessTag tag);
const char* to_string(ScaleBackend backend);

struct ScaleOptions {
  // Cached range is at least this long (beyond the decay rule below).
  double x_reach = 0.0;
  int cache_nodes = 4096;
  int inversion_order = 18;
  // Skip the partial-fraction backend even when psi is rational.
  bool force_inversion = false;
};

// Both sides of the transform identities for one abscissa s:
//   int_0^inf e^{-sx} W(x) dx        = 1 / (psi(s) - tilt s - q)
//   W(0) + int_0^inf e^{-sx} W'(x) dx = s / (psi(s) - tilt s - q)
struct LaplaceRoundtrip {
  double numeric;
  double analytic;
  double measure_numeric;
  double measure_analytic;
};

// q-scale function of X_t - tilt * t (tilt = 0 gives W^(q) of X, tilt = delta
// gives the scale function of the fully refracted process Y).
//
// Internally W(x) = B e^{r x} + R(x) where r is the leading root and
// B = 1 / (psi'(r) - tilt). The remainder R stays bounded, which is what the
// factor and resolvent code integrates against on long ranges.
class ScaleEvaluator {
 public:
  ScaleEvaluator(const LevyModel& model, double q, double tilt, ScaleOptions opt = {});

  ProcessTag process_tag() const { return tilt_ == 0.0 ? ProcessTag::X : ProcessTag::Y; }
  ScaleBackend backend() const { return backend_; }
  double q() const { return q_; }
  double tilt() const { return tilt_; }
  double leading_root() const { return lead_; }
  double dominant_coefficient() const { return dom_coef_; }
  double x_max() const { return x_max_; }
  // W(0) = lim_{x -> 0+} W(x): 1/(d - tilt) for bounded variation, else 0.
  double value_at_zero() const { return w0_; }

  // Zero on (-inf, 0), value_at_zero() at 0.
  double W(double x) const;
  // Density of W(dx) on (0, inf); x <= 0 is a domain error.
  double W_prime(double x) const;
  // Same on [0, inf), with the right derivative at 0.
  double W_prime_right(double x) const;

  // R = W - B e^{r x} on [0, inf). R' at 0 is the right derivative.
  double remainder(double x) const;
  double remainder_prime(double x) const;
  // int_u^inf e^{-kappa (v - u)} R(v) dv, or with R' when `derivative`.
  // Requires kappa > 0.
  double remainder_tail(double kappa, double u, bool derivative) const;
  // int_u^inf e^{-kappa (v - u)} W'(v) dv for kappa > leading_root().
  double derivative_tail(double kappa, double u) const;

  // Requires s > leading_root().
  LaplaceRoundtrip laplace_roundtrip(double s) const;

  // Partial-fraction data of the closed-form backend (empty otherwise).
  std::span<const std::complex<double>> poles() const { return poles_; }
  std::span<const std::complex<double>> residues() const { return residues_; }

  const std::vector<std::string>& warnings() const { return warnings_; }
  // Max deviation between two inversion orders on sample nodes (0 for the
  // closed-form backend).
  double inversion_error_estimate() const { return inversion_error_; }

 private:
  struct InversionCache;

  bool build_closed_form();
  void build_inversion(const ScaleOptions& opt);
  double invert_remainder(double x, int order) const;

  LevyModel model_;
  double q_;
  double tilt_;
  ScaleBackend backend_ = ScaleBackend::ClosedForm;
  double lead_ = 0.0;
  double dom_coef_ = 0.0;
  double w0_ = 0.0;
  double x_max_ = 0.0;

  std::vector<std::complex<double>> poles_;
  std::vector<std::complex<double>> residues_;
  std::size_t dominant_ = 0;

  std::shared_ptr<const InversionCache> cache_;
  double inversion_error_ = 0.0;
  std::vector<std::string> warnings_;
};

// tilt_delta = 0 builds W^(q) of X, tilt_delta = delta the one of Y.
ScaleEvaluator build_scale(const LevyModel& model, double q, double tilt_delta,
                           ScaleOptions opt = {});

}  // namespace refracted
