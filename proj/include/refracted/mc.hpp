#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "refracted/model.hpp"

namespace refracted {

class ResolventSolver;
struct DensityGrid;

// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

// Counter-based stream keyed by (seed, path index): draw k of path i is a pure
// function of (seed, i, k), so any parallel schedule gives the same numbers.
class PathStream {
 public:
  PathStream(std::uint64_t seed, std::uint64_t path);

  std::uint32_t next_u32();
  // Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  double normal();
  double exponential(double rate) { return -std::log(uniform()) / rate; }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t path_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int used_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct SimConfig {
  double step_h = 1e-3;
  std::size_t n_paths = 10000;
  std::uint64_t seed = 1;
  double bin_width = 0.1;
  int threads = 1;
};

// Euler scheme for U_t = X_t - delta int_0^t 1{U_s > b} ds with the indicator
// at the left end of each step. Compound Poisson jumps of the hyperexponential
// family are sampled exactly (times and sizes); the last step is shortened to
// land on T. Throws CapabilityError for general Levy measures.
double simulate_path(const LevyModel& model, const RefractionParams& params, double x, double T,
                     const SimConfig& cfg, PathStream& stream);

// Terminal values U_{e(q)} with e(q) ~ Exp(q) drawn first on each path's stream.
std::vector<double> sample_terminal(const LevyModel& model, const RefractionParams& params,
                                    double x, double q, const SimConfig& cfg);

struct EmpiricalDensity {
  std::vector<double> edges;  // size bins + 1
  std::vector<std::size_t> counts;
  std::vector<double> density;
  std::vector<double> std_error;  // of the density estimate
  std::size_t n = 0;

  std::size_t bins() const { return counts.size(); }
};

// Bins aligned to multiples of bin_width spanning all samples.
EmpiricalDensity histogram(std::span<const double> samples, double bin_width);

struct ZReport {
  std::vector<double> analytic_mass;
  std::vector<double> z;
  double max_abs_z = 0.0;
  double within_2 = 0.0;
  double within_3 = 0.0;
  double within_4 = 0.0;
};

// z = (count/n - p) / sqrt(p (1 - p) / n) per bin with p the analytic bin mass.
ZReport compare_to_density(const EmpiricalDensity& emp, std::span<const double> bin_mass);
// Bin masses integrated from the exact density.
ZReport compare_to_density(const EmpiricalDensity& emp, const ResolventSolver& solver);
// Bin masses by trapezoid rule on a tabulated density (zero outside the grid).
ZReport compare_to_density(const EmpiricalDensity& emp, const DensityGrid& grid);

}  // namespace refracted
