#pragma once

// Quantum joint outcome distributions P(i,j) = Re tr[rho (A_i (x) B_j)], the
// product expectation, post-selected ("both outcomes non-null") expectations,
// and the CHSH combination E(ab) + E(ab') + E(a'b) - E(a'b').

#include <array>
#include <string_view>
#include <vector>

#include "chsh/model.hpp"

namespace chsh {

inline constexpr double kDegenerateEps = 1e-12;
inline constexpr double kNegativeProbabilityTol = 1e-12;
inline constexpr double kImaginaryResidueTol = 1e-10;

struct JointDistribution {
  std::vector<double> values_a;
  std::vector<double> values_b;
  Eigen::MatrixXd table;  // table(i, j) = P(a = values_a[i], b = values_b[j])
  double null_a = 0.0;
  double null_b = 0.0;

  Eigen::VectorXd marginal_a() const { return table.rowwise().sum(); }
  Eigen::VectorXd marginal_b() const { return table.colwise().sum().transpose(); }
};

/// Index into the four measurement pairs, in CHSH order.
enum class Pair { AB = 0, ABPrime = 1, APrimeB = 2, APrimeBPrime = 3 };

inline constexpr std::array<Pair, 4> kPairs{Pair::AB, Pair::ABPrime, Pair::APrimeB, Pair::APrimeBPrime};

/// CHSH sign of each pair: + + + -.
inline constexpr double chsh_sign(Pair p) { return p == Pair::APrimeBPrime ? -1.0 : 1.0; }

std::string_view pair_name(Pair p);

struct ChshSettings {
  Povm a, a_prime, b, b_prime;

  const Povm& left(Pair p) const;
  const Povm& right(Pair p) const;

  /// Checks each POVM and the per-side dimension agreement.
  void validate(double tol = kStateTol) const;
};

/// Settings built from J(alpha) on both sides.
ChshSettings spin1_settings(double alpha, double alpha_prime, double beta, double beta_prime);

struct ChshReport {
  std::array<double, 4> correlations{};
  std::array<double, 4> pass_probabilities{};
  std::array<double, 4> conditioned_correlations{};
  double s = 0.0;
  double s_conditioned = 0.0;
  bool conditioned_defined = false;
};

JointDistribution joint_distribution(const DensityMatrix& rho, const Povm& pa, const Povm& pb);

double expectation(const JointDistribution& jd);
double pass_probability(const JointDistribution& jd);

/// E(ab | a != null, b != null). Throws DegeneratePostSelection when the
/// pass probability is <= eps.
double conditional_expectation(const JointDistribution& jd, double eps = kDegenerateEps);

/// Correlations, pass probabilities and S. The conditioned fields are left
/// unset (conditioned_defined == false).
ChshReport chsh_value(const DensityMatrix& rho, const ChshSettings& s);

/// As chsh_value, plus the conditioned correlations and S_conditioned.
/// Throws DegeneratePostSelection naming the first degenerate pair.
ChshReport conditioned_chsh_value(const DensityMatrix& rho, const ChshSettings& s,
                                  double eps = kDegenerateEps);

}  // namespace chsh
