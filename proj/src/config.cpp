#include "refracted/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "refracted/errors.hpp"

namespace refracted {

namespace {

using nlohmann::json;

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Line of the first occurrence of "key" in the raw text (0 when absent).
std::size_t line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find('"' + key + '"');
  return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

class Reader {
 public:
  Reader(const std::string& text, std::string origin) : text_(text), origin_(std::move(origin)) {}

  [[noreturn]] void fail(const std::string& field, const std::string& msg) const {
    std::ostringstream os;
    os << origin_;
    if (const auto line = line_of_key(text_, field)) os << ":" << line;
    os << ": field '" << field << "': " << msg;
    throw ValidationError(os.str());
  }

  double number(const json& obj, const std::string& field, const std::string& path) const {
    const json& v = obj.at(field);
    if (!v.is_number()) fail(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(path, "must be finite");
    return d;
  }

 private:
  const std::string& text_;
  std::string origin_;
};

}  // namespace

ModelConfig parse_model_config(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(origin + ":" + std::to_string(line_of_offset(text, e.byte)) +
                          ": malformed JSON: " + e.what());
  }
  const Reader rd(text, origin);
  if (!doc.is_object()) throw ValidationError(origin + ":1: top level must be an object");

  static const std::set<std::string> known{"name", "sigma", "gamma", "drift", "jumps", "delta", "b"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) rd.fail(key, "unknown field");
  }
  for (const char* required : {"sigma", "jumps", "delta", "b"}) {
    if (!doc.contains(required)) {
      throw ValidationError(origin + ": missing field '" + required + "'");
    }
  }
  const bool has_gamma = doc.contains("gamma");
  const bool has_drift = doc.contains("drift");
  if (has_gamma == has_drift) {
    throw ValidationError(origin + ": exactly one of 'gamma' or 'drift' is required");
  }

  const double sigma = rd.number(doc, "sigma", "sigma");
  if (sigma < 0.0) rd.fail("sigma", "σ must be >= 0");

  JumpSpec jumps = NoJumps{};
  const json& j = doc.at("jumps");
  if (j.is_string()) {
    if (j.get<std::string>() != "none") rd.fail("jumps", "expected \"none\" or a list");
  } else if (j.is_array()) {
    HyperExpJumps comps;
    for (std::size_t i = 0; i < j.size(); ++i) {
      const json& c = j[i];
      const std::string path = "jumps[" + std::to_string(i) + "]";
      if (!c.is_object() || !c.contains("lambda") || !c.contains("rho") || c.size() != 2) {
        rd.fail("jumps", path + " must be an object with exactly 'lambda' and 'rho'");
      }
      const double lambda = rd.number(c, "lambda", path + ".lambda");
      const double rho = rd.number(c, "rho", path + ".rho");
      if (!(lambda > 0.0)) rd.fail("lambda", path + ".lambda must be positive");
      if (!(rho > 0.0)) rd.fail("rho", path + ".rho must be positive");
      comps.push_back({lambda, rho});
    }
    if (!comps.empty()) jumps = std::move(comps);
  } else {
    rd.fail("jumps", "expected \"none\" or a list");
  }

  ModelConfig cfg{
      doc.contains("name") && doc["name"].is_string() ? doc["name"].get<std::string>() : origin,
      has_gamma ? LevyModel(sigma, rd.number(doc, "gamma", "gamma"), jumps)
                : LevyModel::from_effective_drift(sigma, rd.number(doc, "drift", "drift"), jumps),
      {rd.number(doc, "delta", "delta"), rd.number(doc, "b", "b")}};
  return cfg;
}

ModelConfig preset_std_bm() {
  return {"std-bm", LevyModel(std::sqrt(2.0), 0.0, NoJumps{}), {0.5, 0.0}};
}

ModelConfig preset_cl_exp() {
  return {"cl-exp", LevyModel::from_effective_drift(0.0, 2.0, HyperExpJumps{{1.0, 1.0}}),
          {0.5, 0.0}};
}

ModelConfig load_model_config(const std::string& spec) {
  if (spec == "std-bm") return preset_std_bm();
  if (spec == "cl-exp") return preset_cl_exp();
  std::ifstream in(spec);
  if (!in) throw ValidationError("cannot open model file '" + spec + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model_config(ss.str(), spec);
}

}  // namespace refracted
