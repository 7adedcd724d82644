#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsdt/errors.hpp"
#include "nsdt/fields.hpp"
#include "nsdt/metric.hpp"

namespace nsdt {

using Json = nlohmann::ordered_json;

// Term list form of a polynomial: [{"coeff":"num/den","exps":[i,j,k,l]},...].
inline Json polynomial_to_json(const Polynomial& p) {
  Json arr = Json::array();
  for (const auto& [exps, coeff] : p.terms()) {
    Json term;
    term["coeff"] = rational_to_string(coeff);
    term["exps"] = {exps[0], exps[1], exps[2], exps[3]};
    arr.push_back(term);
  }
  return arr;
}

inline Polynomial polynomial_from_json(const Json& j) {
  if (!j.is_array()) throw SpecParseError("polynomial must be an array of terms");
  Polynomial p;
  for (const auto& term : j) {
    if (!term.contains("coeff") || !term.contains("exps"))
      throw SpecParseError("polynomial term needs 'coeff' and 'exps'");
    const Json& e = term["exps"];
    if (!e.is_array() || e.size() != 4) throw SpecParseError("'exps' must have 4 entries");
    Exponents exps{};
    for (size_t i = 0; i < 4; ++i) {
      if (!e[i].is_number_unsigned()) throw SpecParseError("'exps' entries must be non-negative integers");
      exps[i] = e[i].get<unsigned>();
    }
    p.add_term(parse_rational(term["coeff"].get<std::string>()), exps);
  }
  return p;
}

struct MetricSpec {
  std::string name;
  NeutralMetric metric;
};

inline MetricSpec metric_spec_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("backend"))
    throw SpecParseError("metric spec must be an object with a 'backend' key");
  MetricSpec spec;
  spec.name = j.value("name", std::string("unnamed"));
  std::string backend = j["backend"].get<std::string>();
  if (backend == "special-form") {
    for (const char* key : {"p", "q", "r"})
      if (!j.contains(key)) throw SpecParseError(std::string("special-form spec needs '") + key + "'");
    spec.metric = NeutralMetric::special_form(ScalarField(polynomial_from_json(j["p"])),
                                              ScalarField(polynomial_from_json(j["q"])),
                                              ScalarField(polynomial_from_json(j["r"])));
  } else if (backend == "product-sphere") {
    spec.metric = NeutralMetric::product_sphere(j.value("chart_margin", 1e-6));
  } else if (backend == "generic") {
    if (!j.contains("g")) throw SpecParseError("generic spec needs 'g'");
    const Json& g = j["g"];
    if (!g.is_array() || g.size() != 4) throw SpecParseError("'g' must be a 4x4 array");
    FieldMat4 gm;
    for (size_t i = 0; i < 4; ++i) {
      if (!g[i].is_array() || g[i].size() != 4) throw SpecParseError("'g' must be a 4x4 array");
      for (size_t k = 0; k < 4; ++k) gm[i][k] = ScalarField(polynomial_from_json(g[i][k]));
    }
    spec.metric = NeutralMetric::generic(gm);
  } else {
    throw SpecParseError("unknown backend '" + backend + "'");
  }
  return spec;
}

inline Json metric_spec_to_json(const MetricSpec& spec) {
  Json j;
  j["name"] = spec.name;
  switch (spec.metric.backend()) {
    case MetricBackend::SpecialForm: {
      j["backend"] = "special-form";
      const FieldMat4& g = spec.metric.g();
      j["p"] = polynomial_to_json(g[0][0].poly());
      j["q"] = polynomial_to_json(g[1][1].poly());
      j["r"] = polynomial_to_json(g[0][1].poly());
      break;
    }
    case MetricBackend::ProductSphere:
      j["backend"] = "product-sphere";
      break;
    case MetricBackend::Generic: {
      j["backend"] = "generic";
      Json rows = Json::array();
      for (size_t i = 0; i < 4; ++i) {
        Json row = Json::array();
        for (size_t k = 0; k < 4; ++k) row.push_back(polynomial_to_json(spec.metric.g()[i][k].poly()));
        rows.push_back(row);
      }
      j["g"] = rows;
      break;
    }
  }
  return j;
}

inline MetricSpec load_metric_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecParseError("cannot open spec file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw SpecParseError(std::string("malformed JSON: ") + e.what());
  }
  return metric_spec_from_json(j);
}

inline void save_metric_spec(const MetricSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SpecParseError("cannot open output file: " + path);
  out << metric_spec_to_json(spec).dump(2) << "\n";
}

// Residual summary in a deterministic format: exact zeros are reported
// symbolically, numeric residuals with fixed precision.
inline std::string residual_string(bool exact, double value) {
  if (exact) return "exact-zero";
  std::ostringstream os;
  os.precision(6);
  os << std::scientific << value;
  return os.str();
}

}  // namespace nsdt
