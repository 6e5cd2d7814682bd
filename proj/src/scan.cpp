#include "chsh/scan.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace chsh {

namespace {

constexpr double kImprovementTol = 1e-12;
constexpr double kAxisSlack = 1e-9;  // absorbs rounding in (hi - lo) / step

ScanRow evaluate_settings(const DensityMatrix& rho, const ChshSettings& settings, const Angles& angles) {
  ScanRow row{angles, 0.0, std::numeric_limits<double>::quiet_NaN(), {}, false};
  try {
    const auto report = conditioned_chsh_value(rho, settings);
    row.s = report.s;
    row.s_conditioned = report.s_conditioned;
    row.pass_probabilities = report.pass_probabilities;
  } catch (const DegeneratePostSelection&) {
    const auto report = chsh_value(rho, settings);
    row.s = report.s;
    row.pass_probabilities = report.pass_probabilities;
    row.degenerate = true;
  }
  return row;
}

bool in_range(const ScanConfig& cfg, const Angles& angles) {
  for (std::size_t k = 0; k < 4; ++k)
    if (angles[k] < cfg.ranges[k].lo || angles[k] > cfg.ranges[k].hi) return false;
  return true;
}

}  // namespace

void ScanConfig::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) throw ValidationError("scan step must be positive");
  for (std::size_t k = 0; k < 4; ++k)
    if (!(ranges[k].lo < ranges[k].hi))
      throw ValidationError("angle range " + std::to_string(k) + " must satisfy lo < hi");
  if (!(refine_shrink > 0.0 && refine_shrink < 1.0))
    throw ValidationError("refine shrink factor must lie in (0, 1)");
  if (refine_iters < 0) throw ValidationError("refine iteration count must be non-negative");
}

std::vector<double> ScanConfig::axis(std::size_t k) const {
  const auto& r = ranges[k];
  const auto n = static_cast<std::size_t>(std::floor((r.hi - r.lo) / step + kAxisSlack)) + 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = r.lo + static_cast<double>(i) * step;
  return out;
}

ScanRow evaluate_angles(const DensityMatrix& rho, const Angles& angles) {
  return evaluate_settings(rho, spin1_settings(angles[0], angles[1], angles[2], angles[3]), angles);
}

ScanResult grid_scan(const DensityMatrix& rho, const ScanConfig& cfg) {
  cfg.validate();
  if (rho.dim() != 9) throw DimensionMismatch("the spin-1 scan needs a 3 x 3 state (dim 9)");

  std::array<std::vector<double>, 4> axes;
  std::array<std::vector<Povm>, 4> povms;
  for (std::size_t k = 0; k < 4; ++k) {
    axes[k] = cfg.axis(k);
    for (double angle : axes[k]) povms[k].push_back(povm_from_observable(spin1_observable(angle)));
  }

  ScanResult result;
  result.grid_rows.reserve(axes[0].size() * axes[1].size() * axes[2].size() * axes[3].size());
  for (std::size_t i0 = 0; i0 < axes[0].size(); ++i0)
    for (std::size_t i1 = 0; i1 < axes[1].size(); ++i1)
      for (std::size_t i2 = 0; i2 < axes[2].size(); ++i2)
        for (std::size_t i3 = 0; i3 < axes[3].size(); ++i3) {
          const Angles angles{axes[0][i0], axes[1][i1], axes[2][i2], axes[3][i3]};
          const ChshSettings settings{povms[0][i0], povms[1][i1], povms[2][i2], povms[3][i3]};
          auto row = evaluate_settings(rho, settings, angles);
          ++result.evaluations;
          // Strict comparison in lexicographic visiting order keeps the smallest tuple on ties.
          if (!row.degenerate && (!result.found || row.s_conditioned > result.best_value)) {
            result.best_value = row.s_conditioned;
            result.best_settings = angles;
            result.found = true;
          }
          result.grid_rows.push_back(std::move(row));
        }

  if (cfg.refine && result.found) {
    const auto refined = refine(rho, result.best_settings, cfg);
    result.evaluations += refined.evaluations;
    result.refined = true;
    if (refined.value > result.best_value) {
      result.best_value = refined.value;
      result.best_settings = refined.angles;
    }
  }
  return result;
}

RefineResult refine(const DensityMatrix& rho, const Angles& start, const ScanConfig& cfg) {
  cfg.validate();
  const auto first = evaluate_angles(rho, start);
  if (first.degenerate) throw DegeneratePostSelection("refine start", 0.0);

  RefineResult out{start, first.s_conditioned, 1, {first.s_conditioned}};
  double step = cfg.step;
  int shrinks = 0;
  while (shrinks < cfg.refine_iters) {
    bool improved = false;
    for (std::size_t k = 0; k < 4; ++k) {
      for (double dir : {1.0, -1.0}) {
        Angles probe = out.angles;
        probe[k] += dir * step;
        if (!in_range(cfg, probe)) continue;
        const auto row = evaluate_angles(rho, probe);
        ++out.evaluations;
        if (!row.degenerate && row.s_conditioned > out.value + kImprovementTol) {
          out.angles = probe;
          out.value = row.s_conditioned;
          out.history.push_back(out.value);
          improved = true;
          break;
        }
      }
    }
    if (!improved) {
      step *= cfg.refine_shrink;
      ++shrinks;
    }
  }
  return out;
}

}  // namespace chsh
