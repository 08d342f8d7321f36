#include <cmath>
#include <string>

#include "doctest.h"
#include "refracted/config.hpp"
#include "refracted/errors.hpp"

using namespace refracted;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_model_config(text, "m.json");
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("presets") {
  const ModelConfig a = preset_std_bm();
  CHECK(a.model.sigma() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK_FALSE(a.model.has_jumps());
  CHECK(a.params.delta == 0.5);
  CHECK(a.params.b == 0.0);
  const ModelConfig b = preset_cl_exp();
  CHECK(b.model.is_hyperexponential());
  CHECK(*b.model.drift_d() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(b.model.laplace_exponent(1.0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(load_model_config("std-bm").model.laplace_exponent(2.0) == doctest::Approx(4.0));
  CHECK(load_model_config("cl-exp").params.delta == 0.5);
}

TEST_CASE("parsing a hyperexponential model") {
  const ModelConfig c = parse_model_config(R"({
    "sigma": 0.5, "gamma": 1.5,
    "jumps": [{"lambda": 1, "rho": 2}, {"lambda": 0.5, "rho": 4}],
    "delta": 0.25, "b": -1
  })");
  CHECK(c.model.sigma() == 0.5);
  CHECK(c.model.gamma() == 1.5);
  CHECK(std::get<HyperExpJumps>(c.model.jumps()).size() == 2);
  CHECK(c.params.b == -1.0);
}

TEST_CASE("drift replaces gamma") {
  const ModelConfig c =
      parse_model_config(R"({"sigma": 0, "drift": 2, "jumps": [{"lambda": 1, "rho": 1}], "delta": 0.5, "b": 0})");
  CHECK(c.model.gamma_eff() == 2.0);
}

TEST_CASE("schema diagnostics name the field and line") {
  const std::string unknown = error_of("{\n  \"sigma\": 1,\n  \"gamma\": 0,\n  \"jumps\": \"none\",\n  \"delta\": 0.5,\n  \"b\": 0,\n  \"colour\": 3\n}");
  CHECK(unknown.find("m.json:7") != std::string::npos);
  CHECK(unknown.find("colour") != std::string::npos);
  CHECK(error_of(R"({"sigma": 1, "gamma": 0, "jumps": "none", "b": 0})").find("delta") != std::string::npos);
  CHECK(error_of(R"({"sigma": 1, "gamma": 0, "drift": 1, "jumps": "none", "delta": 0.5, "b": 0})")
            .find("gamma") != std::string::npos);
  CHECK(error_of(R"({"sigma": "x", "gamma": 0, "jumps": "none", "delta": 0.5, "b": 0})").find("sigma") !=
        std::string::npos);
  CHECK(error_of(R"({"sigma": 1, "gamma": 0, "jumps": [{"lambda": 1}], "delta": 0.5, "b": 0})").find("rho") !=
        std::string::npos);
  CHECK(error_of(R"({"sigma": 1, "gamma": 0, "jumps": "some", "delta": 0.5, "b": 0})").find("jumps") !=
        std::string::npos);
  CHECK_FALSE(error_of("{ not json").empty());
  CHECK_THROWS_AS(load_model_config("/nonexistent/model.json"), ValidationError);
}

TEST_CASE("refraction constraints are left to validation") {
  const ModelConfig c = parse_model_config(R"({"sigma": 1, "gamma": 0, "jumps": "none", "delta": -1, "b": 0})");
  CHECK(c.params.delta == -1.0);
}
