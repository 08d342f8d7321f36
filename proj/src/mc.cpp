#include "refracted/mc.hpp"

#include <algorithm>
#include <exception>
#include <limits>
#include <thread>

#include "refracted/errors.hpp"
#include "refracted/resolvent.hpp"

namespace refracted {

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                        std::array<std::uint32_t, 2> k) {
  constexpr std::uint64_t m0 = 0xD2511F53u;
  constexpr std::uint64_t m1 = 0xCD9E8D57u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = m0 * c[0];
    const std::uint64_t p1 = m1 * c[2];
    c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
         static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
    k[0] += 0x9E3779B9u;
    k[1] += 0xBB67AE85u;
  }
  return c;
}

PathStream::PathStream(std::uint64_t seed, std::uint64_t path)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      path_(path) {}

std::uint32_t PathStream::next_u32() {
  if (used_ == 4) {
    buf_ = philox4x32({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                       static_cast<std::uint32_t>(path_), static_cast<std::uint32_t>(path_ >> 32)},
                      key_);
    ++block_;
    used_ = 0;
  }
  return buf_[static_cast<std::size_t>(used_++)];
}

double PathStream::uniform() {
  const std::uint64_t hi = next_u32() >> 5;  // 27 bits
  const std::uint64_t lo = next_u32() >> 6;  // 26 bits
  return (static_cast<double>((hi << 26) | lo) + 0.5) * 0x1p-53;
}

double PathStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double a = 2.0 * M_PI * uniform();
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

namespace {

class Simulator {
 public:
  Simulator(const LevyModel& model, const RefractionParams& params, const SimConfig& cfg)
      : sigma_(model.sigma()), drift_(model.gamma_eff()), delta_(params.delta), b_(params.b),
        h_(cfg.step_h) {
    if (std::holds_alternative<GeneralJumps>(model.jumps())) {
      throw CapabilityError("simulation supports only no jumps or hyperexponential jumps");
    }
    if (!(h_ > 0.0)) throw ValidationError("step h must be positive");
    if (const auto* hx = std::get_if<HyperExpJumps>(&model.jumps())) {
      for (const auto& c : *hx) {
        total_rate_ += c.rate;
        cum_.push_back(total_rate_);
        exp_rate_.push_back(c.exp_rate);
      }
    }
  }

  double run(double x, double T, PathStream& rng) const {
    double u = x;
    double next_jump = total_rate_ > 0.0 ? rng.exponential(total_rate_)
                                         : std::numeric_limits<double>::infinity();
    const auto full = static_cast<std::uint64_t>(std::floor(T / h_));
    for (std::uint64_t i = 0; i <= full; ++i) {
      const double t0 = static_cast<double>(i) * h_;
      const double t1 = i == full ? T : t0 + h_;
      const double dt = t1 - t0;
      if (!(dt > 0.0)) break;
      const double rate = u > b_ ? drift_ - delta_ : drift_;
      u += rate * dt;
      if (sigma_ > 0.0) u += sigma_ * std::sqrt(dt) * rng.normal();
      while (next_jump <= t1) {
        u -= jump_size(rng);
        next_jump += rng.exponential(total_rate_);
      }
    }
    return u;
  }

 private:
  double jump_size(PathStream& rng) const {
    std::size_t j = 0;
    if (cum_.size() > 1) {
      const double pick = rng.uniform() * total_rate_;
      while (j + 1 < cum_.size() && pick > cum_[j]) ++j;
    }
    return rng.exponential(exp_rate_[j]);
  }

  double sigma_;
  double drift_;
  double delta_;
  double b_;
  double h_;
  double total_rate_ = 0.0;
  std::vector<double> cum_;
  std::vector<double> exp_rate_;
};

}  // namespace

double simulate_path(const LevyModel& model, const RefractionParams& params, double x, double T,
                     const SimConfig& cfg, PathStream& stream) {
  if (!(T > 0.0)) throw ValidationError("horizon T must be positive");
  return Simulator(model, params, cfg).run(x, T, stream);
}

std::vector<double> sample_terminal(const LevyModel& model, const RefractionParams& params,
                                    double x, double q, const SimConfig& cfg) {
  if (!(q > 0.0)) throw ValidationError("q must be positive");
  const Simulator sim(model, params, cfg);
  const std::size_t n = cfg.n_paths;
  std::vector<double> out(n);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      PathStream rng(cfg.seed, i);
      const double T = rng.exponential(q);
      out[i] = sim.run(x, T, rng);
    }
  };
  const auto nt = static_cast<std::size_t>(std::clamp(cfg.threads, 1, 256));
  if (nt == 1) {
    work(0, n);
    return out;
  }
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
  return out;
}

EmpiricalDensity histogram(std::span<const double> samples, double bin_width) {
  if (!(bin_width > 0.0)) throw ValidationError("bin width must be positive");
  if (samples.empty()) throw ValidationError("histogram needs samples");
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  if (!std::isfinite(*mn) || !std::isfinite(*mx)) throw NumericalError("non-finite sample");
  const double lo_idx = std::floor(*mn / bin_width);
  const auto bins = static_cast<std::size_t>(std::floor(*mx / bin_width) - lo_idx) + 1;

  EmpiricalDensity e;
  e.n = samples.size();
  e.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) e.edges[i] = (lo_idx + static_cast<double>(i)) * bin_width;
  e.counts.assign(bins, 0);
  for (double v : samples) {
    auto i = static_cast<std::ptrdiff_t>(std::floor(v / bin_width) - lo_idx);
    i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(bins) - 1);
    ++e.counts[static_cast<std::size_t>(i)];
  }
  const double n = static_cast<double>(e.n);
  e.density.resize(bins);
  e.std_error.resize(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    const double p = static_cast<double>(e.counts[i]) / n;
    e.density[i] = p / bin_width;
    e.std_error[i] = std::sqrt(p * (1.0 - p) / n) / bin_width;
  }
  return e;
}

ZReport compare_to_density(const EmpiricalDensity& emp, std::span<const double> bin_mass) {
  if (bin_mass.size() != emp.bins()) throw ValidationError("bin mass count does not match histogram");
  ZReport r;
  r.analytic_mass.assign(bin_mass.begin(), bin_mass.end());
  r.z.resize(emp.bins());
  const double n = static_cast<double>(emp.n);
  std::size_t w2 = 0, w3 = 0, w4 = 0;
  for (std::size_t i = 0; i < emp.bins(); ++i) {
    const double p = std::clamp(bin_mass[i], 0.0, 1.0);
    const double diff = static_cast<double>(emp.counts[i]) / n - p;
    const double se = std::sqrt(p * (1.0 - p) / n);
    double z = 0.0;
    if (se > 0.0) {
      z = diff / se;
    } else if (diff != 0.0) {
      z = std::copysign(std::numeric_limits<double>::infinity(), diff);
    }
    r.z[i] = z;
    const double a = std::abs(z);
    r.max_abs_z = std::max(r.max_abs_z, a);
    w2 += a <= 2.0;
    w3 += a <= 3.0;
    w4 += a <= 4.0;
  }
  const double nb = static_cast<double>(emp.bins());
  r.within_2 = static_cast<double>(w2) / nb;
  r.within_3 = static_cast<double>(w3) / nb;
  r.within_4 = static_cast<double>(w4) / nb;
  return r;
}

ZReport compare_to_density(const EmpiricalDensity& emp, const ResolventSolver& solver) {
  std::vector<double> mass(emp.bins());
  for (std::size_t i = 0; i < emp.bins(); ++i) {
    mass[i] = density_mass(solver, emp.edges[i], emp.edges[i + 1]);
  }
  return compare_to_density(emp, mass);
}

ZReport compare_to_density(const EmpiricalDensity& emp, const DensityGrid& grid) {
  const std::vector<double>& d = grid.scale.empty() ? grid.wh : grid.scale;
  const std::vector<double>& y = grid.y;
  auto at = [&](double t) {
    if (t < y.front() || t > y.back()) return 0.0;
    const auto it = std::upper_bound(y.begin(), y.end(), t);
    if (it == y.end()) return d.back();
    const auto j = static_cast<std::size_t>(it - y.begin());
    const double w = (t - y[j - 1]) / (y[j] - y[j - 1]);
    return (1.0 - w) * d[j - 1] + w * d[j];
  };
  std::vector<double> mass(emp.bins());
  for (std::size_t i = 0; i < emp.bins(); ++i) {
    const double lo = emp.edges[i];
    const double hi = emp.edges[i + 1];
    // Trapezoid over the bin edges and every grid node inside the bin.
    std::vector<double> pts{lo};
    for (double t : y) {
      if (t > lo && t < hi) pts.push_back(t);
    }
    pts.push_back(hi);
    double m = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
      m += 0.5 * (pts[k + 1] - pts[k]) * (at(pts[k]) + at(pts[k + 1]));
    }
    mass[i] = m;
  }
  return compare_to_density(emp, mass);
}

}  // namespace refracted
