#include "refracted/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "refracted/config.hpp"
#include "refracted/errors.hpp"
#include "refracted/factors.hpp"
#include "refracted/mc.hpp"
#include "refracted/resolvent.hpp"
#include "refracted/roots.hpp"
#include "refracted/verify.hpp"

namespace refracted {

namespace {

using nlohmann::ordered_json;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Common {
  std::string model;
  double q = 1.0;
  std::string out;
  std::string format = "csv";
  std::uint64_t seed = 1;
};

void add_common(CLI::App* app, Common& c, const std::string& default_format) {
  c.format = default_format;
  app->add_option("--model", c.model, "model file or preset name (std-bm, cl-exp)")->required();
  app->add_option("--q", c.q, "killing rate of the exponential time")->capture_default_str();
  app->add_option("--out", c.out, "output path (default stdout)");
  app->add_option("--format", c.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app->add_option("--seed", c.seed, "random seed")->capture_default_str();
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw ValidationError("cannot write '" + c.out + "'");
  f << text;
}

ModelConfig load_valid(const Common& c) {
  ModelConfig cfg = load_model_config(c.model);
  require_valid(cfg.model, cfg.params);
  if (!(c.q > 0.0)) throw ValidationError("q must be positive");
  return cfg;
}

std::string cell(bool ok, double v) { return ok ? num(v) : std::string(); }

int cmd_roots(const Common& c) {
  const ModelConfig cfg = load_valid(c);
  const RootPair rp = root_pair(cfg.model, cfg.params.delta, c.q);
  ordered_json j;
  j["q"] = rp.q;
  j["phi"] = rp.phi;
  j["varphi"] = rp.varphi;
  j["residuals"] = {{"phi", rp.residual_phi}, {"varphi", rp.residual_varphi}};
  emit(c, j.dump(2) + "\n");
  return kExitOk;
}

struct GridArgs {
  double lo;
  double hi;
  double step;
};

int cmd_scale(const Common& c, const GridArgs& g) {
  const ModelConfig cfg = load_valid(c);
  const ScaleEvaluator wx(cfg.model, c.q, 0.0);
  const ScaleEvaluator wy(cfg.model, c.q, cfg.params.delta);
  const std::vector<double> xs = uniform_grid(g.lo, g.hi, g.step);
  if (c.format == "json") {
    ordered_json j;
    for (const auto* s : {&wx, &wy}) {
      ordered_json e;
      e["backend"] = to_string(s->backend());
      e["leading_root"] = s->leading_root();
      e["value_at_zero"] = s->value_at_zero();
      e["warnings"] = s->warnings();
      j[s == &wx ? "X" : "Y"] = e;
    }
    ordered_json rows = ordered_json::array();
    for (double x : xs) {
      ordered_json r{{"x", x}, {"W", wx.W(x)}, {"WW", wy.W(x)}};
      r["W_prime"] = x > 0.0 ? ordered_json(wx.W_prime(x)) : ordered_json(nullptr);
      r["WW_prime"] = x > 0.0 ? ordered_json(wy.W_prime(x)) : ordered_json(nullptr);
      rows.push_back(r);
    }
    j["rows"] = rows;
    emit(c, j.dump(2) + "\n");
    return kExitOk;
  }
  std::ostringstream os;
  os << "x,W,W_prime,backend,q,process_tag\n";
  for (const auto* s : {&wx, &wy}) {
    const std::string tail = std::string(",") + to_string(s->backend()) + ',' + num(c.q) + ',' +
                             (s == &wx ? "X" : "Y") + '\n';
    for (double x : xs) {
      os << num(x) << ',' << num(s->W(x)) << ',' << cell(x > 0.0, x > 0.0 ? s->W_prime(x) : 0.0)
         << tail;
    }
  }
  emit(c, os.str());
  return kExitOk;
}

int cmd_factors(const Common& c, const GridArgs& g) {
  const ModelConfig cfg = load_valid(c);
  const FactorSet fs(cfg.model, cfg.params.delta, c.q);
  std::ostringstream os;
  os << "x,F1,F1_prime,F2,F2_prime,f,Kq_density\n";
  for (double x : uniform_grid(g.lo, g.hi, g.step)) {
    os << num(x) << ',' << cell(x >= 0.0, x >= 0.0 ? fs.F1(x) : 0.0) << ','
       << cell(x > 0.0, x > 0.0 ? fs.F1_prime(x) : 0.0) << ','
       << cell(x <= 0.0, x <= 0.0 ? fs.F2(x) : 0.0) << ','
       << cell(x < 0.0, x < 0.0 ? fs.F2_prime(x) : 0.0) << ','
       << cell(x < 0.0, x < 0.0 ? fs.f_aux(x) : 0.0) << ',' << num(fs.Kq_density(x)) << '\n';
  }
  emit(c, os.str());
  return kExitOk;
}

Route parse_route(const std::string& s) {
  if (s == "scale") return Route::Scale;
  if (s == "wh") return Route::WienerHopf;
  return Route::Both;
}

struct ResolventArgs {
  double x = 0.0;
  GridArgs y{-6.0, 6.0, 0.05};
  std::string route = "both";
  int threads = 1;
  bool timings = false;
};

int cmd_resolvent(const Common& c, const ResolventArgs& a) {
  const ModelConfig cfg = load_valid(c);
  const auto t0 = std::chrono::steady_clock::now();
  const ResolventSolver solver({cfg.model, cfg.params, c.q, a.x, parse_route(a.route)});
  const auto t1 = std::chrono::steady_clock::now();
  const DensityGrid g = density_grid(solver, uniform_grid(a.y.lo, a.y.hi, a.y.step), a.threads);
  const auto t2 = std::chrono::steady_clock::now();
  for (std::size_t row : g.threshold_rows) {
    std::cerr << "note: row " << row << " sits on the threshold y = b; evaluated with the y >= b formula\n";
  }

  const bool has_s = !g.scale.empty();
  const bool has_w = !g.wh.empty();
  if (c.format == "json") {
    ordered_json sum;
    sum["x"] = g.x;
    sum["route"] = to_string(g.route);
    sum["route_gap"] = has_s && has_w ? ordered_json(g.route_gap) : ordered_json(nullptr);
    sum["normalization_defect"] = g.normalization_defect;
    sum["mass"] = g.mass;
    sum["threshold_jump"] = has_s ? ordered_json(g.threshold_jump) : ordered_json(nullptr);
    sum["threshold_rows"] = g.threshold_rows;
    if (a.timings) {
      sum["timings"] = {{"setup_s", std::chrono::duration<double>(t1 - t0).count()},
                      {"grid_s", std::chrono::duration<double>(t2 - t1).count()}};
    }
    ordered_json j;
    j["summary"] = sum;
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < g.y.size(); ++i) {
      ordered_json r{{"y", g.y[i]}};
      r["density_scale"] = has_s ? ordered_json(g.scale[i]) : ordered_json(nullptr);
      r["density_wh"] = has_w ? ordered_json(g.wh[i]) : ordered_json(nullptr);
      r["gap"] = has_s && has_w ? ordered_json(g.gap[i]) : ordered_json(nullptr);
      rows.push_back(r);
    }
    j["rows"] = rows;
    emit(c, j.dump(2) + "\n");
    return kExitOk;
  }
  std::ostringstream os;
  os << "y,density_scale,density_wh,gap\n";
  for (std::size_t i = 0; i < g.y.size(); ++i) {
    os << num(g.y[i]) << ',' << (has_s ? num(g.scale[i]) : "") << ','
       << (has_w ? num(g.wh[i]) : "") << ',' << (has_s && has_w ? num(g.gap[i]) : "") << '\n';
  }
  emit(c, os.str());
  return kExitOk;
}

// Reads the CSV written by `resolvent` (either density column).
DensityGrid read_grid_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open grid file '" + path + "'");
  std::string line;
  std::getline(in, line);
  if (line.rfind("y,density_scale,density_wh", 0) != 0) {
    throw ValidationError(path + ":1: expected header y,density_scale,density_wh,gap");
  }
  DensityGrid g{};
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string tok; std::getline(ss, tok, ',');) f.push_back(tok);
    while (f.size() < 3) f.emplace_back();
    try {
      g.y.push_back(std::stod(f[0]));
      g.scale.push_back(std::stod(!f[1].empty() ? f[1] : f[2]));
    } catch (const std::exception&) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": malformed row");
    }
  }
  if (g.y.size() < 2) throw ValidationError(path + ": grid needs at least two rows");
  return g;
}

struct SimulateArgs {
  double x = 0.0;
  double h = 1e-3;
  std::size_t n = 100000;
  double bin_width = 0.1;
  int threads = 1;
  std::string grid;
  bool compare = false;
  std::string report;
};

int cmd_simulate(const Common& c, const SimulateArgs& a) {
  const ModelConfig cfg = load_valid(c);
  const SimConfig sc{a.h, a.n, c.seed, a.bin_width, a.threads};
  const std::vector<double> samples = sample_terminal(cfg.model, cfg.params, a.x, c.q, sc);
  const EmpiricalDensity emp = histogram(samples, a.bin_width);

  std::optional<ZReport> z;
  if (!a.grid.empty()) {
    z = compare_to_density(emp, read_grid_csv(a.grid));
  } else if (a.compare) {
    const ResolventSolver solver({cfg.model, cfg.params, c.q, a.x, Route::Scale});
    z = compare_to_density(emp, solver);
  }

  ordered_json rep;
  if (z) {
    rep["bins"] = emp.bins();
    rep["max_abs_z"] = z->max_abs_z;
    rep["within_2"] = z->within_2;
    rep["within_3"] = z->within_3;
    rep["within_4"] = z->within_4;
  }

  if (c.format == "json") {
    ordered_json j;
    j["n_paths"] = emp.n;
    j["step_h"] = a.h;
    j["seed"] = c.seed;
    j["edges"] = emp.edges;
    j["counts"] = emp.counts;
    j["density"] = emp.density;
    j["std_error"] = emp.std_error;
    if (z) {
      j["analytic_mass"] = z->analytic_mass;
      j["z"] = z->z;
      j["report"] = rep;
    }
    emit(c, j.dump(2) + "\n");
  } else {
    std::ostringstream os;
    os << "bin_lo,bin_hi,count,density,std_error" << (z ? ",analytic_mass,z" : "") << '\n';
    for (std::size_t i = 0; i < emp.bins(); ++i) {
      os << num(emp.edges[i]) << ',' << num(emp.edges[i + 1]) << ',' << emp.counts[i] << ','
         << num(emp.density[i]) << ',' << num(emp.std_error[i]);
      if (z) os << ',' << num(z->analytic_mass[i]) << ',' << num(z->z[i]);
      os << '\n';
    }
    emit(c, os.str());
  }
  if (z && !a.report.empty()) {
    std::ofstream f(a.report, std::ios::binary);
    if (!f) throw ValidationError("cannot write '" + a.report + "'");
    f << rep.dump(2) << '\n';
  }
  return kExitOk;
}

int cmd_verify(const Common& c, double perturb) {
  const ModelConfig cfg = load_valid(c);
  VerifyOptions vo;
  vo.q = c.q;
  vo.varphi_perturbation = perturb;
  const VerifyReport rep = verify(cfg.model, cfg.params, vo);
  if (c.format == "json") {
    ordered_json j;
    j["model"] = cfg.name;
    j["passed"] = rep.passed();
    ordered_json arr = ordered_json::array();
    for (const auto& ch : rep.checks) {
      arr.push_back({{"name", ch.name},
                     {"anchor", ch.anchor},
                     {"measured", std::isfinite(ch.measured) ? ordered_json(ch.measured)
                                                             : ordered_json(nullptr)},
                     {"tolerance", ch.tolerance},
                     {"passed", ch.passed},
                     {"detail", ch.detail}});
    }
    j["checks"] = arr;
    emit(c, j.dump(2) + "\n");
  } else {
    std::ostringstream os;
    for (const auto& ch : rep.checks) {
      char line[160];
      std::snprintf(line, sizeof line, "%-4s %-34s measured %-12.4g tol %-8.2g ",
                    ch.passed ? "PASS" : "FAIL", ch.name.c_str(), ch.measured, ch.tolerance);
      os << line << ch.anchor;
      if (!ch.detail.empty()) os << " [" << ch.detail << "]";
      os << '\n';
    }
    os << (rep.passed() ? "verify: all checks passed\n" : "verify: FAILED\n");
    emit(c, os.str());
  }
  return rep.passed() ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Resolvent density of a refracted spectrally negative Levy process"};
  app.require_subcommand(1);

  Common c_roots, c_scale, c_factors, c_res, c_sim, c_ver;
  auto* roots = app.add_subcommand("roots", "largest roots Phi(q) and varphi(q) as JSON");
  add_common(roots, c_roots, "json");

  GridArgs g_scale{0.0, 5.0, 0.1};
  auto* scale = app.add_subcommand("scale", "tabulate W and the tilted scale function");
  add_common(scale, c_scale, "csv");
  scale->add_option("--x-min", g_scale.lo)->capture_default_str();
  scale->add_option("--x-max", g_scale.hi)->capture_default_str();
  scale->add_option("--step", g_scale.step)->capture_default_str();

  GridArgs g_fac{-5.0, 5.0, 0.1};
  auto* factors = app.add_subcommand("factors", "tabulate F1, F2, f and the K_q density");
  add_common(factors, c_factors, "csv");
  factors->add_option("--x-min", g_fac.lo)->capture_default_str();
  factors->add_option("--x-max", g_fac.hi)->capture_default_str();
  factors->add_option("--step", g_fac.step)->capture_default_str();

  ResolventArgs ra;
  auto* res = app.add_subcommand("resolvent", "resolvent density on a y grid by both routes");
  add_common(res, c_res, "csv");
  res->add_option("--x", ra.x, "starting point")->required();
  res->add_option("--y-min", ra.y.lo)->capture_default_str();
  res->add_option("--y-max", ra.y.hi)->capture_default_str();
  res->add_option("--y-step", ra.y.step)->capture_default_str();
  res->add_option("--route", ra.route)
      ->check(CLI::IsMember({"scale", "wh", "both"}))
      ->capture_default_str();
  res->add_option("--threads", ra.threads)->capture_default_str();
  res->add_flag("--timings", ra.timings, "include wall-clock timings in JSON output");

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo law of U at an exponential time");
  add_common(sim, c_sim, "csv");
  sim->add_option("--x", sa.x, "starting point")->required();
  sim->add_option("--step-h", sa.h, "Euler step")->capture_default_str();
  sim->add_option("--n", sa.n, "number of paths")->capture_default_str();
  sim->add_option("--bin-width", sa.bin_width)->capture_default_str();
  sim->add_option("--threads", sa.threads)->capture_default_str();
  sim->add_option("--grid", sa.grid, "resolvent CSV to compare against");
  sim->add_flag("--compare", sa.compare, "compare against exact bin masses");
  sim->add_option("--report", sa.report, "write the z-score report as JSON here");

  double perturb = 0.0;
  auto* ver = app.add_subcommand("verify", "run every identity check");
  add_common(ver, c_ver, "csv");
  ver->add_option("--perturb-varphi", perturb,
                  "relative error injected into varphi on the Wiener-Hopf side");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*roots) return cmd_roots(c_roots);
    if (*scale) return cmd_scale(c_scale, g_scale);
    if (*factors) return cmd_factors(c_factors, g_fac);
    if (*res) return cmd_resolvent(c_res, ra);
    if (*sim) return cmd_simulate(c_sim, sa);
    if (*ver) return cmd_verify(c_ver, perturb);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const CapabilityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace refracted
