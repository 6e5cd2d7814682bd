#pragma once

// Search over the four J(alpha) measurement angles (alpha, alpha', beta, beta')
// for the largest conditioned CHSH value of a fixed state: a Cartesian grid
// scan followed by an optional coordinate-wise pattern search.

#include <array>
#include <optional>
#include <vector>

#include "chsh/correlations.hpp"

namespace chsh {

using Angles = std::array<double, 4>;  // alpha, alpha', beta, beta'

struct AngleRange {
  double lo;
  double hi;
};

struct ScanConfig {
  std::array<AngleRange, 4> ranges{{{-M_PI / 2, M_PI / 2},
                                    {-M_PI / 2, M_PI / 2},
                                    {-M_PI / 2, M_PI / 2},
                                    {-M_PI / 2, M_PI / 2}}};
  double step = M_PI / 12;
  bool refine = false;
  double refine_shrink = 0.5;
  int refine_iters = 20;

  /// Throws ValidationError on step <= 0, lo >= hi, shrink outside (0, 1) or iters < 0.
  void validate() const;

  /// Grid points along axis k: lo + i*step for i = 0 .. floor((hi-lo)/step).
  std::vector<double> axis(std::size_t k) const;
};

struct ScanRow {
  Angles angles;
  double s;
  double s_conditioned;  // NaN when degenerate
  std::array<double, 4> pass_probabilities;
  bool degenerate;
};

struct ScanResult {
  Angles best_settings{};
  double best_value = -std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
  std::vector<ScanRow> grid_rows;
  bool found = false;  // false when every cell was degenerate
  bool refined = false;
};

/// Conditioned and unconditioned CHSH at one angle tuple on the J(alpha) family.
/// Never throws DegeneratePostSelection; the row is flagged instead.
ScanRow evaluate_angles(const DensityMatrix& rho, const Angles& angles);

/// Evaluates every grid cell in lexicographic order. The best cell is the
/// first one (lexicographically smallest angles) attaining the maximum; with
/// cfg.refine set, a pattern search from the best cell follows.
ScanResult grid_scan(const DensityMatrix& rho, const ScanConfig& cfg);

struct RefineResult {
  Angles angles;
  double value;
  std::size_t evaluations;
  std::vector<double> history;  // accepted values, nondecreasing
};

/// Coordinate pattern search. Each sweep probes +step then -step on every
/// angle in order, accepting a probe that improves the current value by more
/// than 1e-12; a sweep with no acceptance shrinks the step by
/// cfg.refine_shrink. Stops after cfg.refine_iters shrinks. Probes outside
/// the configured ranges and degenerate probes never improve.
RefineResult refine(const DensityMatrix& rho, const Angles& start, const ScanConfig& cfg);

}  // namespace chsh
