#pragma once

// JSON scenario files: a bipartite state plus the four local measurements.
//
//   {
//     "dims": [3, 3],
//     "state": {"kind": "product_mixture",
//               "components": [{"weight": 0.5, "left": [1, 0, 0], "right": [1, 0, 0]}, ...]}
//            | {"kind": "density_matrix", "matrix": [[...], ...]},
//     "observables": {
//       "a":       {"kind": "spin1", "angle": 0.0},
//       "a_prime": {"kind": "observable", "matrix": [[1, 0], [0, -1]]},
//       "b":       {"kind": "povm", "null_value": 0,
//                   "outcomes": [{"value": 1, "matrix": ...}, ...]},
//       "b_prime": ...
//     }
//   }
//
// Complex entries are written [re, im]; plain numbers are read as real.

#include <array>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "chsh/correlations.hpp"

namespace chsh {

/// Malformed input: bad JSON, missing fields, wrong types (CLI exit code 1).
class ScenarioParseError : public Error {
 public:
  using Error::Error;
};

struct Spin1Spec {
  double angle;
};

struct ObservableSpec {
  Operator matrix;
};

struct PovmSpec {
  Povm povm;
};

using MeasurementSpec = std::variant<Spin1Spec, ObservableSpec, PovmSpec>;

struct Scenario {
  std::array<Eigen::Index, 2> dims{};
  std::variant<ProductMixture, Operator> state;
  std::array<MeasurementSpec, 4> observables;  // a, a', b, b'

  bool has_product_mixture() const { return std::holds_alternative<ProductMixture>(state); }
  const ProductMixture& mixture() const;

  DensityMatrix density() const;
  ChshSettings settings() const;

  /// Checks every state and measurement invariant; throws ValidationError
  /// with the offending field path.
  void validate() const;
};

inline constexpr std::array<const char*, 4> kSettingKeys{"a", "a_prime", "b", "b_prime"};

/// Parses and validates. ScenarioParseError for structural problems,
/// ValidationError for numerical ones; messages carry the field path.
Scenario parse_scenario(const nlohmann::json& j);
Scenario parse_scenario_text(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

nlohmann::json to_json(const Scenario& s);

/// Reads [re, im] or a plain real.
Complex complex_from_json(const nlohmann::json& j, const std::string& where);
nlohmann::json complex_to_json(const Complex& z);
Operator matrix_from_json(const nlohmann::json& j, const std::string& where);
nlohmann::json matrix_to_json(const Operator& m);

/// The paper's spin-1 counterexample at angles (0, pi/2, pi/4, -pi/4).
Scenario paper_scenario();

}  // namespace chsh
