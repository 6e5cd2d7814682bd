#pragma once

// States and measurements: pure states, mixtures of product states, density
// matrices, POVMs, and the spin-1 observable family J(alpha) in the x-z plane.

#include <optional>
#include <string>
#include <vector>

#include "chsh/linalg.hpp"

namespace chsh {

inline constexpr double kStateTol = 1e-10;

/// Normalized state vector.
class PureState {
 public:
  /// Throws ValidationError unless | ||psi||^2 - 1 | <= tol.
  explicit PureState(Ket amplitudes, double tol = kStateTol);

  Eigen::Index dim() const { return amplitudes_.size(); }
  const Ket& amplitudes() const { return amplitudes_; }
  Operator projector() const { return chsh::projector(amplitudes_); }

 private:
  Ket amplitudes_;
};

struct MixtureComponent {
  double weight;
  PureState left;
  PureState right;
};

/// Convex combination of product pure states sum_k w_k |l_k><l_k| (x) |r_k><r_k|.
struct ProductMixture {
  std::vector<MixtureComponent> components;

  Eigen::Index left_dim() const;
  Eigen::Index right_dim() const;

  /// Throws ValidationError / DimensionMismatch on the first broken invariant.
  void validate(double tol = kStateTol) const;
};

class DensityMatrix {
 public:
  /// Checks Hermiticity, unit trace and positivity, each within `tol`.
  explicit DensityMatrix(Operator matrix, std::optional<ProductMixture> origin = std::nullopt,
                         double tol = kStateTol);

  Eigen::Index dim() const { return matrix_.rows(); }
  const Operator& matrix() const { return matrix_; }

  /// The product-mixture decomposition this state was built from, if any.
  const std::optional<ProductMixture>& origin() const { return origin_; }

 private:
  Operator matrix_;
  std::optional<ProductMixture> origin_;
};

struct PovmOutcome {
  double value;
  Operator effect;
};

/// Outcome-labelled POVM. Conditioning excludes outcomes equal to `null_value`.
struct Povm {
  std::vector<PovmOutcome> outcomes;
  double null_value = 0.0;

  Eigen::Index dim() const { return outcomes.empty() ? 0 : outcomes.front().effect.rows(); }
  std::size_t size() const { return outcomes.size(); }
  std::vector<double> values() const;
};

struct PovmViolation {
  enum class Kind { Empty, DimensionMismatch, NotHermitian, NotPositive, Incomplete, DuplicateValue, ValueOutOfRange };
  Kind kind;
  std::size_t outcome;  // index of the offending element, when meaningful
  double magnitude;     // min eigenvalue, completeness defect, ...
  std::string message;
};

/// All broken POVM invariants; an empty list means valid. Never throws.
std::vector<PovmViolation> validate_povm(const Povm& p, double tol = kStateTol);

/// Throws ValidationError listing every violation, prefixed by `label`.
void require_valid_povm(const Povm& p, const std::string& label = "povm", double tol = kStateTol);

/// J(alpha) = [[cos a, sin a/sqrt2, 0], [sin a/sqrt2, 0, sin a/sqrt2], [0, sin a/sqrt2, -cos a]].
Operator spin1_observable(double alpha);

/// Projective POVM from the grouped spectral decomposition of a Hermitian
/// observable; eigenvalues become outcome values and must lie in [-1, 1].
Povm povm_from_observable(const Operator& a, double group_tol = kGroupTol);

DensityMatrix density_from_mixture(const ProductMixture& m);

/// rho = 1/2 P[(1,0,0)(x)(1,0,0)] + 1/2 P[(1/2,1/sqrt2,1/2)(x)(1/2,1/sqrt2,1/2)].
ProductMixture paper_counterexample_state();

}  // namespace chsh
