#include "chsh/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace chsh {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& where, const std::string& what) {
  throw ScenarioParseError(where + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) parse_fail(where, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) parse_fail(where, std::string("missing field \"") + key + "\"");
  return *it;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) parse_fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) parse_fail(where, "number is not finite");
  return v;
}

Ket ket_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) parse_fail(where, "expected a non-empty list of amplitudes");
  Ket v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = complex_from_json(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

json ket_to_json(const Ket& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
  return out;
}

// Re-throws a ValidationError with the field path prepended.
template <typename F>
auto at_path(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const DimensionMismatch& e) {
    throw DimensionMismatch(where + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

PureState pure_from_json(const json& j, const std::string& where) {
  Ket v = ket_from_json(j, where);
  return at_path(where, [&] { return PureState(std::move(v)); });
}

ProductMixture mixture_from_json(const json& j, const std::string& where) {
  const json& comps = field(j, "components", where);
  if (!comps.is_array() || comps.empty()) parse_fail(where + ".components", "expected a non-empty list");
  ProductMixture m;
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const std::string at = where + ".components[" + std::to_string(k) + "]";
    m.components.push_back({number(field(comps[k], "weight", at), at + ".weight"),
                            pure_from_json(field(comps[k], "left", at), at + ".left"),
                            pure_from_json(field(comps[k], "right", at), at + ".right")});
  }
  return m;
}

MeasurementSpec measurement_from_json(const json& j, const std::string& where) {
  const json& kind = field(j, "kind", where);
  if (!kind.is_string()) parse_fail(where + ".kind", "expected a string");
  const auto k = kind.get<std::string>();
  if (k == "spin1") return Spin1Spec{number(field(j, "angle", where), where + ".angle")};
  if (k == "observable") return ObservableSpec{matrix_from_json(field(j, "matrix", where), where + ".matrix")};
  if (k == "povm") {
    PovmSpec spec;
    if (j.contains("null_value")) spec.povm.null_value = number(j["null_value"], where + ".null_value");
    const json& outs = field(j, "outcomes", where);
    if (!outs.is_array() || outs.empty()) parse_fail(where + ".outcomes", "expected a non-empty list");
    for (std::size_t i = 0; i < outs.size(); ++i) {
      const std::string at = where + ".outcomes[" + std::to_string(i) + "]";
      spec.povm.outcomes.push_back({number(field(outs[i], "value", at), at + ".value"),
                                    matrix_from_json(field(outs[i], "matrix", at), at + ".matrix")});
    }
    return spec;
  }
  parse_fail(where + ".kind", "unknown measurement kind \"" + k + "\" (spin1, observable, povm)");
}

json measurement_to_json(const MeasurementSpec& m) {
  return std::visit(
      [](const auto& spec) -> json {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, Spin1Spec>) {
          return {{"kind", "spin1"}, {"angle", spec.angle}};
        } else if constexpr (std::is_same_v<T, ObservableSpec>) {
          return {{"kind", "observable"}, {"matrix", matrix_to_json(spec.matrix)}};
        } else {
          json outs = json::array();
          for (const auto& o : spec.povm.outcomes)
            outs.push_back({{"value", o.value}, {"matrix", matrix_to_json(o.effect)}});
          return {{"kind", "povm"}, {"null_value", spec.povm.null_value}, {"outcomes", outs}};
        }
      },
      m);
}

Povm to_povm(const MeasurementSpec& m) {
  return std::visit(
      [](const auto& spec) -> Povm {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, Spin1Spec>) {
          return povm_from_observable(spin1_observable(spec.angle));
        } else if constexpr (std::is_same_v<T, ObservableSpec>) {
          return povm_from_observable(spec.matrix);
        } else {
          return spec.povm;
        }
      },
      m);
}

}  // namespace

Complex complex_from_json(const json& j, const std::string& where) {
  if (j.is_number()) return {number(j, where), 0.0};
  if (j.is_array() && j.size() == 2)
    return {number(j[0], where + "[0]"), number(j[1], where + "[1]")};
  parse_fail(where, "expected a number or a [re, im] pair");
}

json complex_to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

Operator matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) parse_fail(where, "expected a non-empty list of rows");
  const std::size_t n = j.size();
  Operator m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const std::string row = where + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != n)
      parse_fail(row, "expected a row of " + std::to_string(n) + " entries (matrix must be square)");
    for (std::size_t c = 0; c < n; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          complex_from_json(j[r][c], row + "[" + std::to_string(c) + "]");
  }
  return m;
}

json matrix_to_json(const Operator& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    out.push_back(std::move(row));
  }
  return out;
}

const ProductMixture& Scenario::mixture() const {
  if (!has_product_mixture())
    throw ValidationError("state: a product-mixture decomposition is required, but the scenario gives a raw density matrix");
  return std::get<ProductMixture>(state);
}

DensityMatrix Scenario::density() const {
  if (has_product_mixture()) return at_path("state", [&] { return density_from_mixture(mixture()); });
  return at_path("state.matrix", [&] { return DensityMatrix(std::get<Operator>(state)); });
}

ChshSettings Scenario::settings() const {
  std::array<Povm, 4> p;
  for (std::size_t k = 0; k < 4; ++k)
    p[k] = at_path(std::string("observables.") + kSettingKeys[k], [&] { return to_povm(observables[k]); });
  return {std::move(p[0]), std::move(p[1]), std::move(p[2]), std::move(p[3])};
}

void Scenario::validate() const {
  if (dims[0] < 1 || dims[1] < 1) throw ValidationError("dims: both dimensions must be positive");
  const auto rho = density();
  if (rho.dim() != dims[0] * dims[1])
    throw DimensionMismatch("state: dimension " + std::to_string(rho.dim()) + " does not match dims " +
                            std::to_string(dims[0]) + " x " + std::to_string(dims[1]));
  if (has_product_mixture() && (mixture().left_dim() != dims[0] || mixture().right_dim() != dims[1]))
    throw DimensionMismatch("state.components: local dimensions do not match dims");
  const auto s = settings();
  const std::array<const Povm*, 4> povms{&s.a, &s.a_prime, &s.b, &s.b_prime};
  for (std::size_t k = 0; k < 4; ++k) {
    const std::string where = std::string("observables.") + kSettingKeys[k];
    require_valid_povm(*povms[k], where);
    const Eigen::Index expect = k < 2 ? dims[0] : dims[1];
    if (povms[k]->dim() != expect)
      throw DimensionMismatch(where + ": acts on dimension " + std::to_string(povms[k]->dim()) +
                              ", expected " + std::to_string(expect));
  }
}

Scenario parse_scenario(const json& j) {
  if (!j.is_object()) parse_fail("<root>", "expected an object");
  Scenario s;
  const json& dims = field(j, "dims", "<root>");
  if (!dims.is_array() || dims.size() != 2 || !dims[0].is_number_integer() || !dims[1].is_number_integer())
    parse_fail("dims", "expected [d1, d2] with integer entries");
  s.dims = {dims[0].get<Eigen::Index>(), dims[1].get<Eigen::Index>()};

  const json& state = field(j, "state", "<root>");
  const json& kind = field(state, "kind", "state");
  if (!kind.is_string()) parse_fail("state.kind", "expected a string");
  if (kind == "product_mixture") {
    s.state = mixture_from_json(state, "state");
  } else if (kind == "density_matrix") {
    s.state = matrix_from_json(field(state, "matrix", "state"), "state.matrix");
  } else {
    parse_fail("state.kind", "unknown state kind \"" + kind.get<std::string>() +
                                 "\" (product_mixture, density_matrix)");
  }

  const json& obs = field(j, "observables", "<root>");
  for (std::size_t k = 0; k < 4; ++k)
    s.observables[k] = measurement_from_json(field(obs, kSettingKeys[k], "observables"),
                                             std::string("observables.") + kSettingKeys[k]);
  s.validate();
  return s;
}

Scenario parse_scenario_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioParseError(std::string("invalid JSON: ") + e.what());
  }
  return parse_scenario(j);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioParseError("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

json to_json(const Scenario& s) {
  json out;
  out["dims"] = {s.dims[0], s.dims[1]};
  if (s.has_product_mixture()) {
    json comps = json::array();
    for (const auto& c : s.mixture().components)
      comps.push_back({{"weight", c.weight},
                       {"left", ket_to_json(c.left.amplitudes())},
                       {"right", ket_to_json(c.right.amplitudes())}});
    out["state"] = {{"kind", "product_mixture"}, {"components", comps}};
  } else {
    out["state"] = {{"kind", "density_matrix"}, {"matrix", matrix_to_json(std::get<Operator>(s.state))}};
  }
  json obs = json::object();
  for (std::size_t k = 0; k < 4; ++k) obs[kSettingKeys[k]] = measurement_to_json(s.observables[k]);
  out["observables"] = obs;
  return out;
}

Scenario paper_scenario() {
  Scenario s;
  s.dims = {3, 3};
  s.state = paper_counterexample_state();
  s.observables = {Spin1Spec{0.0}, Spin1Spec{M_PI / 2}, Spin1Spec{M_PI / 4}, Spin1Spec{-M_PI / 4}};
  return s;
}

}  // namespace chsh
