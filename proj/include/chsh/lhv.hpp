#pragma once

// Explicit local hidden variables model for a mixture of product states.
//
// The sample space enumerates tuples (k, i_a, i_a', j_b, j_b') where k indexes
// the mixture component and the four outcome indices are drawn independently
// from the local marginals of component k. Each random variable depends on one
// coordinate only, so the model is local by construction.

#include <array>
#include <cstdint>
#include <vector>

#include "chsh/correlations.hpp"

namespace chsh {

inline constexpr double kChshBoundTol = 1e-12;

/// Which of the four local experiments a random variable belongs to.
enum class Setting { A = 0, APrime = 1, B = 2, BPrime = 3 };

struct RandomVariable {
  std::vector<double> values;  // one per atom, each in [-1, 1]
  double null_value = 0.0;
};

struct Atom {
  std::size_t component;
  std::array<std::size_t, 4> outcome;  // indexed by Setting
};

struct LhvModel {
  std::vector<Atom> atoms;
  std::vector<double> prob;  // weight per atom, sums to 1
  std::array<RandomVariable, 4> variables;
  // Outcome values of each setting, by outcome index.
  std::array<std::vector<double>, 4> outcome_values;

  const RandomVariable& x(Setting s) const { return variables[static_cast<std::size_t>(s)]; }
  std::size_t size() const { return prob.size(); }

  /// Throws ValidationError if weights are negative or do not sum to 1, or a
  /// variable leaves [-1, 1] or has the wrong length.
  void validate(double tol = kChshBoundTol) const;
};

Setting left_setting(Pair p);
Setting right_setting(Pair p);

LhvModel build_lhv_for_product_mixture(const ProductMixture& m, const ChshSettings& s);

/// P(X = x_i, Y = y_j) by exact summation over atoms.
JointDistribution lhv_pair_distribution(const LhvModel& model, Pair pair);

/// E[XY] = sum_w P(w) X(w) Y(w).
double rv_expectation(const LhvModel& model, const RandomVariable& x, const RandomVariable& y);

/// E[XY | X != null_X, Y != null_Y] with the numerator restricted to passing atoms.
double rv_conditional_expectation(const LhvModel& model, const RandomVariable& x,
                                  const RandomVariable& y, double eps = kDegenerateEps);

struct RvChshCheck {
  double s;
  bool bound_satisfied;
};

RvChshCheck chsh_check_rvs(const LhvModel& model);

/// Conditioned CHSH combination computed inside the model (throws
/// DegeneratePostSelection naming the pair when a pass probability vanishes).
double rv_conditioned_chsh(const LhvModel& model, double eps = kDegenerateEps);

/// Empirical outcome counts from Monte Carlo draws; counts[p](i, j) counts
/// draws with X_left = outcome i and X_right = outcome j for pair p.
struct SampleCounts {
  std::uint64_t draws = 0;
  std::array<Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic>, 4> counts;
  std::array<std::vector<double>, 4> values_left, values_right;
  std::array<double, 4> null_left{}, null_right{};

  JointDistribution empirical(Pair p) const;
};

/// Draws n atoms i.i.d. from the model. The generator is std::mt19937_64
/// seeded with `seed`; each uniform is (next() >> 11) * 2^-53, mapped to an
/// atom by inverse CDF. Identical (model, seed, n) gives identical counts.
SampleCounts sample(const LhvModel& model, std::uint64_t seed, std::uint64_t n);

}  // namespace chsh
