#pragma once

// Command-line front end. `run` is the whole program minus process plumbing,
// so tests can drive it in-process and capture both streams.
//
// Exit codes: 0 ok, 1 usage or parse error, 2 validation error,
// 3 degenerate post-selection, 4 reproduce-paper self-check failed.

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "chsh/lhv.hpp"
#include "chsh/scan.hpp"
#include "chsh/scenario.hpp"

namespace chsh::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitDegenerate = 3;
inline constexpr int kExitCheckFailed = 4;

inline constexpr double kReproduceTol = 1e-9;

nlohmann::json chsh_report_json(const ChshReport& r);

/// Headline reproduction on the built-in spin-1 counterexample.
nlohmann::json reproduce_paper_report();

nlohmann::json chsh_command_report(const Scenario& s, bool conditioned);

struct MonteCarloOptions {
  std::uint64_t samples;
  std::uint64_t seed;
};

nlohmann::json lhv_verify_report(const Scenario& s, std::optional<MonteCarloOptions> mc);

/// Scan summary; `rows` receives the grid for CSV export.
nlohmann::json scan_report(const Scenario& s, const ScanConfig& cfg, ScanResult& result);

void write_scan_csv(std::ostream& out, const ScanResult& result);

/// Parses "0.5", "pi", "pi/12", "-3*pi/4", "2pi/3".
double parse_angle(const std::string& text);

/// Serializes a report with a trailing newline.
std::string dump(const nlohmann::json& j);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace chsh::cli
