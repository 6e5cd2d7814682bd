#include "chsh/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "CLI11.hpp"

namespace chsh::cli {

using nlohmann::json;

namespace {

json array4(const std::array<double, 4>& v) { return json::array({v[0], v[1], v[2], v[3]}); }

json pair_names() {
  json out = json::array();
  for (Pair p : kPairs) out.push_back(std::string(pair_name(p)));
  return out;
}

json angles_json(const Angles& a) {
  return {{"alpha", a[0]}, {"alpha_prime", a[1]}, {"beta", a[2]}, {"beta_prime", a[3]}};
}

json distribution_json(const JointDistribution& jd) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < jd.table.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < jd.table.cols(); ++j) row.push_back(jd.table(i, j));
    rows.push_back(std::move(row));
  }
  return {{"values_a", jd.values_a}, {"values_b", jd.values_b}, {"table", rows}};
}

struct LhvCrossCheck {
  std::array<double, 4> pair_deviation{};
  double max_deviation = 0.0;
  RvChshCheck unconditioned{};
  std::optional<double> conditioned;
  std::string degenerate_pair;
};

LhvCrossCheck cross_check(const LhvModel& model, const DensityMatrix& rho, const ChshSettings& s) {
  LhvCrossCheck out;
  for (Pair p : kPairs) {
    const auto k = static_cast<std::size_t>(p);
    const auto quantum = joint_distribution(rho, s.left(p), s.right(p));
    const auto classical = lhv_pair_distribution(model, p);
    out.pair_deviation[k] = max_abs(quantum.table - classical.table);
    out.max_deviation = std::max(out.max_deviation, out.pair_deviation[k]);
  }
  out.unconditioned = chsh_check_rvs(model);
  try {
    out.conditioned = rv_conditioned_chsh(model);
  } catch (const DegeneratePostSelection& e) {
    out.degenerate_pair = e.pair();
  }
  return out;
}

json monte_carlo_json(const LhvModel& model, const MonteCarloOptions& mc) {
  const auto counts = sample(model, mc.seed, mc.samples);
  json tables = json::array();
  double s = 0.0, s_cond = 0.0;
  bool cond_defined = true;
  for (Pair p : kPairs) {
    const auto k = static_cast<std::size_t>(p);
    json rows = json::array();
    for (Eigen::Index i = 0; i < counts.counts[k].rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < counts.counts[k].cols(); ++j) row.push_back(counts.counts[k](i, j));
      rows.push_back(std::move(row));
    }
    tables.push_back({{"pair", std::string(pair_name(p))},
                      {"values_left", counts.values_left[k]},
                      {"values_right", counts.values_right[k]},
                      {"counts", rows}});
    const auto jd = counts.empirical(p);
    s += chsh_sign(p) * expectation(jd);
    if (cond_defined) {
      try {
        s_cond += chsh_sign(p) * conditional_expectation(jd);
      } catch (const DegeneratePostSelection&) {
        cond_defined = false;
      }
    }
  }
  return {{"samples", mc.samples},
          {"seed", mc.seed},
          {"generator", "mt19937_64"},
          {"tables", tables},
          {"empirical_s", s},
          {"empirical_s_conditioned", cond_defined ? json(s_cond) : json(nullptr)}};
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json chsh_report_json(const ChshReport& r) {
  json out = {{"pairs", pair_names()},
              {"s", r.s},
              {"correlations", array4(r.correlations)},
              {"pass_probabilities", array4(r.pass_probabilities)}};
  if (r.conditioned_defined) {
    out["s_conditioned"] = r.s_conditioned;
    out["conditioned_correlations"] = array4(r.conditioned_correlations);
  }
  return out;
}

json reproduce_paper_report() {
  const Scenario scenario = paper_scenario();
  const auto rho = scenario.density();
  const auto settings = scenario.settings();
  const auto report = conditioned_chsh_value(rho, settings);
  const auto model = build_lhv_for_product_mixture(scenario.mixture(), settings);
  const auto lhv = cross_check(model, rho, settings);

  const double expected = 16.0 * std::sqrt(2.0) / 9.0;
  const bool headline = std::abs(report.s_conditioned - expected) <= kReproduceTol;
  const bool bounded = report.s <= 2.0;

  json out = chsh_report_json(report);
  out["command"] = "reproduce-paper";
  out["angles"] = angles_json({0.0, M_PI / 2, M_PI / 4, -M_PI / 4});
  out["expected_s_conditioned"] = expected;
  out["lhv_max_deviation"] = lhv.max_deviation;
  out["lhv_pair_deviations"] = array4(lhv.pair_deviation);
  out["lhv_s"] = lhv.unconditioned.s;
  out["lhv_bound_satisfied"] = lhv.unconditioned.bound_satisfied;
  out["lhv_s_conditioned"] = lhv.conditioned ? json(*lhv.conditioned) : json(nullptr);
  out["checks"] = {{"s_conditioned_matches", headline}, {"s_within_bound", bounded}};
  out["ok"] = headline && bounded;
  return out;
}

json chsh_command_report(const Scenario& s, bool conditioned) {
  const auto rho = s.density();
  const auto settings = s.settings();
  json out = chsh_report_json(conditioned ? conditioned_chsh_value(rho, settings) : chsh_value(rho, settings));
  out["command"] = "chsh";
  out["conditioned"] = conditioned;
  return out;
}

json lhv_verify_report(const Scenario& s, std::optional<MonteCarloOptions> mc) {
  const ProductMixture& mixture = s.mixture();
  const auto rho = s.density();
  const auto settings = s.settings();
  const auto quantum = chsh_value(rho, settings);
  const auto model = build_lhv_for_product_mixture(mixture, settings);
  const auto lhv = cross_check(model, rho, settings);

  json dists = json::array();
  for (Pair p : kPairs) dists.push_back(distribution_json(lhv_pair_distribution(model, p)));

  json out = {{"command", "lhv-verify"},
              {"pairs", pair_names()},
              {"atom_count", model.size()},
              {"lhv_max_deviation", lhv.max_deviation},
              {"lhv_pair_deviations", array4(lhv.pair_deviation)},
              {"lhv_distributions", dists},
              {"s", lhv.unconditioned.s},
              {"quantum_s", quantum.s},
              {"bound_satisfied", lhv.unconditioned.bound_satisfied},
              {"s_conditioned", lhv.conditioned ? json(*lhv.conditioned) : json(nullptr)}};
  if (!lhv.degenerate_pair.empty()) out["degenerate_pair"] = lhv.degenerate_pair;
  if (mc) out["monte_carlo"] = monte_carlo_json(model, *mc);
  return out;
}

json scan_report(const Scenario& s, const ScanConfig& cfg, ScanResult& result) {
  if (s.dims[0] != 3 || s.dims[1] != 3)
    throw DimensionMismatch("scan: the spin-1 family needs dims [3, 3]");
  result = grid_scan(s.density(), cfg);

  std::size_t degenerate = 0;
  double max_s = -std::numeric_limits<double>::infinity();
  for (const auto& row : result.grid_rows) {
    degenerate += row.degenerate ? 1 : 0;
    max_s = std::max(max_s, row.s);
  }
  json axes = json::array();
  for (std::size_t k = 0; k < 4; ++k) axes.push_back(cfg.axis(k).size());

  json out = {{"command", "scan"},
              {"step", cfg.step},
              {"refine", cfg.refine},
              {"grid_points_per_axis", axes},
              {"evaluations", result.evaluations},
              {"degenerate_cells", degenerate},
              {"max_s_over_grid", max_s},
              {"found", result.found}};
  if (result.found) {
    out["best_settings"] = angles_json(result.best_settings);
    out["best_value"] = result.best_value;
    out["at_best"] = chsh_report_json(conditioned_chsh_value(
        s.density(), spin1_settings(result.best_settings[0], result.best_settings[1],
                                    result.best_settings[2], result.best_settings[3])));
  } else {
    out["best_value"] = nullptr;
  }
  if (cfg.refine) {
    out["refine_shrink"] = cfg.refine_shrink;
    out["refine_iters"] = cfg.refine_iters;
  }
  return out;
}

void write_scan_csv(std::ostream& out, const ScanResult& result) {
  out << "alpha,alpha_prime,beta,beta_prime,s,s_conditioned,pass_ab,pass_abp,pass_apb,pass_apbp,degenerate\n";
  for (const auto& row : result.grid_rows) {
    for (double a : row.angles) out << format_double(a) << ',';
    out << format_double(row.s) << ',' << format_double(row.s_conditioned);
    for (double p : row.pass_probabilities) out << ',' << format_double(p);
    out << ',' << (row.degenerate ? 1 : 0) << '\n';
  }
}

double parse_angle(const std::string& text) {
  std::string t;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) t += static_cast<char>(std::tolower(c));
  const auto to_number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("not an angle: " + text);
    }
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument("not an angle: " + text);
    return v;
  };
  const auto pi_at = t.find("pi");
  if (pi_at == std::string::npos) return to_number(t);

  std::string coeff = t.substr(0, pi_at);
  std::string rest = t.substr(pi_at + 2);
  if (!coeff.empty() && coeff.back() == '*') coeff.pop_back();
  double c = 1.0;
  if (coeff == "-") c = -1.0;
  else if (coeff == "+" || coeff.empty()) c = 1.0;
  else c = to_number(coeff);
  double d = 1.0;
  if (!rest.empty()) {
    if (rest.front() != '/') throw std::invalid_argument("not an angle: " + text);
    d = to_number(rest.substr(1));
    if (d == 0.0) throw std::invalid_argument("division by zero in angle: " + text);
  }
  return c * M_PI / d;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bell-CHSH statistics, post-selection and local hidden variable models", "chshsel"};
  app.require_subcommand(1);

  auto* reproduce = app.add_subcommand("reproduce-paper", "Spin-1 product-mixture counterexample: S, conditioned S, LHV cross-check");

  std::string chsh_file;
  bool conditioned = false;
  auto* chsh_cmd = app.add_subcommand("chsh", "CHSH report for a scenario file");
  chsh_cmd->add_option("file", chsh_file, "Scenario JSON")->required();
  chsh_cmd->add_flag("--conditioned", conditioned, "Also report the post-selected correlations");

  std::string lhv_file;
  std::optional<std::uint64_t> mc_samples;
  std::uint64_t seed = 1;
  auto* lhv_cmd = app.add_subcommand("lhv-verify", "Build the LHV model for a product mixture and compare with quantum statistics");
  lhv_cmd->add_option("file", lhv_file, "Scenario JSON (product-mixture state)")->required();
  lhv_cmd->add_option("--mc-samples", mc_samples, "Monte Carlo draws from the LHV model");
  lhv_cmd->add_option("--seed", seed, "Seed for the Monte Carlo generator")->capture_default_str();

  std::string scan_file, step_text, csv_path = "scan_grid.csv";
  ScanConfig cfg;
  auto* scan_cmd = app.add_subcommand("scan", "Grid scan (+ pattern search) of the conditioned CHSH value over J(alpha) angles");
  scan_cmd->add_option("file", scan_file, "Scenario JSON (3 x 3 state)")->required();
  scan_cmd->add_option("--step", step_text, "Grid step in radians, e.g. 0.1 or pi/12")->required();
  scan_cmd->add_flag("--refine", cfg.refine, "Refine the best grid cell by coordinate pattern search");
  scan_cmd->add_option("--shrink", cfg.refine_shrink, "Step shrink factor in (0, 1)")->capture_default_str();
  scan_cmd->add_option("--iters", cfg.refine_iters, "Number of step shrinks before stopping")->capture_default_str();
  scan_cmd->add_option("--csv", csv_path, "Where to write the grid rows")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  if (*scan_cmd) {
    try {
      cfg.step = parse_angle(step_text);
    } catch (const std::invalid_argument& e) {
      err << "error: --step: " << e.what() << "\n" << scan_cmd->help();
      return kExitUsage;
    }
    if (!(cfg.step > 0.0)) {
      err << "error: --step must be positive\n" << scan_cmd->help();
      return kExitUsage;
    }
    if (!(cfg.refine_shrink > 0.0 && cfg.refine_shrink < 1.0) || cfg.refine_iters < 0) {
      err << "error: --shrink must lie in (0, 1) and --iters must be non-negative\n" << scan_cmd->help();
      return kExitUsage;
    }
  }

  try {
    if (*reproduce) {
      const json report = reproduce_paper_report();
      out << dump(report);
      return report["ok"].get<bool>() ? kExitOk : kExitCheckFailed;
    }
    if (*chsh_cmd) {
      out << dump(chsh_command_report(load_scenario(chsh_file), conditioned));
      return kExitOk;
    }
    if (*lhv_cmd) {
      std::optional<MonteCarloOptions> mc;
      if (mc_samples) {
        if (*mc_samples == 0) {
          err << "error: --mc-samples must be at least 1\n";
          return kExitUsage;
        }
        mc = MonteCarloOptions{*mc_samples, seed};
      }
      out << dump(lhv_verify_report(load_scenario(lhv_file), mc));
      return kExitOk;
    }
    if (*scan_cmd) {
      ScanResult result;
      json report = scan_report(load_scenario(scan_file), cfg, result);
      std::ofstream csv(csv_path);
      if (!csv) {
        err << "error: cannot write " << csv_path << "\n";
        return kExitUsage;
      }
      write_scan_csv(csv, result);
      report["csv"] = csv_path;
      out << dump(report);
      return kExitOk;
    }
  } catch (const ScenarioParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DegeneratePostSelection& e) {
    err << "degenerate post-selection: pair " << e.pair() << " has pass probability "
        << format_double(e.pass_probability()) << "\n";
    return kExitDegenerate;
  }
  return kExitUsage;
}

}  // namespace chsh::cli
