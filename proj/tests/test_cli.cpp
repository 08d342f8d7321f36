#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("refracted_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Result run(const std::string& args) {
  const fs::path out = scratch() / "stdout", err = scratch() / "stderr";
  const std::string cmd = std::string(CLI_BINARY) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int st = std::system(cmd.c_str());
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, slurp(out), slurp(err)};
}

std::string preset(const std::string& name) { return std::string(PRESET_DIR) + "/" + name + ".json"; }

std::string write_model(const std::string& text) {
  const fs::path p = scratch() / "model.json";
  std::ofstream(p) << text;
  return p.string();
}

}  // namespace

TEST_CASE("roots prints the root pair") {
  const Result r = run("roots --q 1 --model " + preset("std-bm"));
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["q"].get<double>() == 1.0);
  CHECK(j["phi"].get<double>() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(j["varphi"].get<double>() == doctest::Approx(1.280776406404415).epsilon(1e-13));
  CHECK(j["residuals"]["phi"].get<double>() <= 1e-12);
  CHECK(j["residuals"]["varphi"].get<double>() <= 1e-12);
}

TEST_CASE("validation failures exit 1") {
  const std::string bad = write_model(R"({"sigma": 1.4, "gamma": 0, "jumps": "none", "delta": -0.5, "b": 0})");
  const Result r = run("resolvent --x 0 --model " + bad);
  CHECK(r.code == 1);
  CHECK(r.err.find("δ must be positive") != std::string::npos);
  const std::string slow = write_model(R"({"sigma": 0, "drift": 2, "jumps": [{"lambda": 1, "rho": 1}], "delta": 3, "b": 0})");
  CHECK(run("roots --model " + slow).code == 1);
  const std::string broken = write_model("{\"sigma\": 1,\n\"gamma\": 0, \"jumps\": \"none\", \"delta\": 0.5, \"b\": 0, \"x\": 1}");
  const Result s = run("roots --model " + broken);
  CHECK(s.code == 1);
  CHECK(s.err.find(":2") != std::string::npos);
  CHECK(run("roots --model /nonexistent.json").code == 1);
}

TEST_CASE("usage errors exit 64") {
  CHECK(run("roots --model std-bm --bogus").code == 64);
  CHECK(run("resolvent --model std-bm").code == 64);
  CHECK(run("nosuchcommand").code == 64);
  CHECK(run("resolvent --model std-bm --x 0 --route sideways").code == 64);
}

TEST_CASE("simulate emits a histogram") {
  const Result r = run("simulate --model cl-exp --x 0 --n 500 --step-h 0.01 --seed 3");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("bin_lo,bin_hi,count,density,std_error", 0) == 0);
}

TEST_CASE("resolvent csv uses full precision and marks the threshold") {
  const Result r = run("resolvent --model std-bm --x -1 --y-min 0 --y-max 1 --y-step 0.5");
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "y,density_scale,density_wh,gap");
  std::getline(in, line);
  std::getline(in, line);
  std::getline(in, line);
  CHECK(line.rfind("1,0.0573934060759", 0) == 0);
  CHECK(r.err.find("threshold") != std::string::npos);
}

TEST_CASE("resolvent json summary") {
  const Result r = run("resolvent --model cl-exp --x 1 --format json --timings");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["summary"]["route_gap"].get<double>() <= 1e-6);
  CHECK(j["summary"]["normalization_defect"].get<double>() <= 1e-3);
  CHECK(j["summary"].contains("timings"));
}

TEST_CASE("scale and factors tables") {
  const Result s = run("scale --model std-bm --x-min 0 --x-max 1 --step 0.5");
  REQUIRE(s.code == 0);
  CHECK(s.out.rfind("x,W,W_prime,backend,q,process_tag\n", 0) == 0);
  CHECK(s.out.find("1,1.1752011936438014,1.54308063481524") != std::string::npos);
  CHECK(s.out.find(",closed-form,1,Y\n") != std::string::npos);
  const Result f = run("factors --model std-bm --x-min -1 --x-max 1 --step 1");
  REQUIRE(f.code == 0);
  CHECK(f.out.rfind("x,F1,F1_prime,F2,F2_prime,f,Kq_density\n", 0) == 0);
  // Out-of-domain cells stay empty: F1 and F1' at x = -1.
  CHECK(f.out.find("\n-1,,,") != std::string::npos);
}

TEST_CASE("identical inputs give identical bytes") {
  const fs::path a = scratch() / "a.csv", b = scratch() / "b.csv";
  REQUIRE(run("resolvent --model cl-exp --x 0.5 --threads 2 --out " + a.string()).code == 0);
  REQUIRE(run("resolvent --model cl-exp --x 0.5 --out " + b.string()).code == 0);
  CHECK(slurp(a) == slurp(b));
  const fs::path c = scratch() / "c.csv", d = scratch() / "d.csv";
  REQUIRE(run("simulate --model std-bm --x 0 --n 2000 --step-h 0.01 --seed 8 --out " + c.string()).code == 0);
  REQUIRE(run("simulate --model std-bm --x 0 --n 2000 --step-h 0.01 --seed 8 --threads 2 --out " + d.string()).code == 0);
  CHECK(slurp(c) == slurp(d));
}

TEST_CASE("verify passes on the presets and catches a corrupted root") {
  const Result a = run("verify --model std-bm");
  CHECK(a.code == 0);
  const Result b = run("verify --model " + preset("cl-exp") + " --format json");
  CHECK(b.code == 0);
  const auto j = nlohmann::json::parse(b.out);
  bool saw_w0 = false;
  for (const auto& c : j["checks"]) {
    if (c["name"] == "W at zero") {
      saw_w0 = true;
      CHECK(c["passed"].get<bool>());
      CHECK(c["detail"].get<std::string>().find("W(0)=0.5") != std::string::npos);
    }
  }
  CHECK(saw_w0);
  const Result p = run("verify --model std-bm --perturb-varphi 1e-3 --format json");
  CHECK(p.code == 3);
  const auto k = nlohmann::json::parse(p.out);
  for (const auto& c : k["checks"]) {
    if (c["name"] == "route agreement") CHECK_FALSE(c["passed"].get<bool>());
  }
}
