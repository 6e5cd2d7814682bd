#include "chsh/correlations.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace chsh {

std::string_view pair_name(Pair p) {
  switch (p) {
    case Pair::AB: return "(a,b)";
    case Pair::ABPrime: return "(a,b')";
    case Pair::APrimeB: return "(a',b)";
    case Pair::APrimeBPrime: return "(a',b')";
  }
  return "?";
}

const Povm& ChshSettings::left(Pair p) const {
  return (p == Pair::AB || p == Pair::ABPrime) ? a : a_prime;
}

const Povm& ChshSettings::right(Pair p) const {
  return (p == Pair::AB || p == Pair::APrimeB) ? b : b_prime;
}

void ChshSettings::validate(double tol) const {
  require_valid_povm(a, "a", tol);
  require_valid_povm(a_prime, "a'", tol);
  require_valid_povm(b, "b", tol);
  require_valid_povm(b_prime, "b'", tol);
  if (a.dim() != a_prime.dim()) throw DimensionMismatch("a and a' act on different dimensions");
  if (b.dim() != b_prime.dim()) throw DimensionMismatch("b and b' act on different dimensions");
}

ChshSettings spin1_settings(double alpha, double alpha_prime, double beta, double beta_prime) {
  return {povm_from_observable(spin1_observable(alpha)),
          povm_from_observable(spin1_observable(alpha_prime)),
          povm_from_observable(spin1_observable(beta)),
          povm_from_observable(spin1_observable(beta_prime))};
}

JointDistribution joint_distribution(const DensityMatrix& rho, const Povm& pa, const Povm& pb) {
  if (pa.dim() * pb.dim() != rho.dim())
    throw DimensionMismatch("state dimension " + std::to_string(rho.dim()) +
                            " != " + std::to_string(pa.dim()) + " x " + std::to_string(pb.dim()));
  JointDistribution jd{pa.values(), pb.values(),
                       Eigen::MatrixXd::Zero(pa.size(), pb.size()), pa.null_value, pb.null_value};
  // tr(rho M) = sum_{kl} rho(k,l) M(l,k)
  const Operator& r = rho.matrix();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    for (std::size_t j = 0; j < pb.size(); ++j) {
      const Operator effect = tensor(pa.outcomes[i].effect, pb.outcomes[j].effect);
      const Complex tr = r.cwiseProduct(effect.transpose()).sum();
      if (std::abs(tr.imag()) > kImaginaryResidueTol)
        throw ValidationError("joint probability has imaginary residue " + std::to_string(tr.imag()));
      if (tr.real() < -kNegativeProbabilityTol)
        throw ValidationError("joint probability is negative (" + std::to_string(tr.real()) + ")");
      jd.table(i, j) = std::max(tr.real(), 0.0);
    }
  }
  const double total = jd.table.sum();
  if (std::abs(total - 1.0) > kStateTol)
    throw ValidationError("joint distribution sums to " + std::to_string(total));
  return jd;
}

double expectation(const JointDistribution& jd) {
  double e = 0.0;
  for (Eigen::Index i = 0; i < jd.table.rows(); ++i)
    for (Eigen::Index j = 0; j < jd.table.cols(); ++j)
      e += jd.values_a[i] * jd.values_b[j] * jd.table(i, j);
  return e;
}

double pass_probability(const JointDistribution& jd) {
  double p = 0.0;
  for (Eigen::Index i = 0; i < jd.table.rows(); ++i) {
    if (jd.values_a[i] == jd.null_a) continue;
    for (Eigen::Index j = 0; j < jd.table.cols(); ++j)
      if (jd.values_b[j] != jd.null_b) p += jd.table(i, j);
  }
  return p;
}

namespace {

double conditional_expectation_for(const JointDistribution& jd, double eps, std::string_view pair) {
  const double pass = pass_probability(jd);
  if (pass <= eps) throw DegeneratePostSelection(std::string(pair), pass);
  // Numerator restricted to passing outcomes, so a non-zero null value stays correct.
  double e = 0.0;
  for (Eigen::Index i = 0; i < jd.table.rows(); ++i) {
    if (jd.values_a[i] == jd.null_a) continue;
    for (Eigen::Index j = 0; j < jd.table.cols(); ++j)
      if (jd.values_b[j] != jd.null_b) e += jd.values_a[i] * jd.values_b[j] * jd.table(i, j);
  }
  return e / pass;
}

}  // namespace

double conditional_expectation(const JointDistribution& jd, double eps) {
  return conditional_expectation_for(jd, eps, "(a,b)");
}

ChshReport chsh_value(const DensityMatrix& rho, const ChshSettings& s) {
  if (s.a.dim() != s.a_prime.dim() || s.b.dim() != s.b_prime.dim())
    throw DimensionMismatch("settings on one side act on different dimensions");
  ChshReport report;
  for (Pair p : kPairs) {
    const auto jd = joint_distribution(rho, s.left(p), s.right(p));
    const auto k = static_cast<std::size_t>(p);
    report.correlations[k] = expectation(jd);
    report.pass_probabilities[k] = pass_probability(jd);
    report.s += chsh_sign(p) * report.correlations[k];
  }
  return report;
}

ChshReport conditioned_chsh_value(const DensityMatrix& rho, const ChshSettings& s, double eps) {
  if (s.a.dim() != s.a_prime.dim() || s.b.dim() != s.b_prime.dim())
    throw DimensionMismatch("settings on one side act on different dimensions");
  ChshReport report;
  for (Pair p : kPairs) {
    const auto jd = joint_distribution(rho, s.left(p), s.right(p));
    const auto k = static_cast<std::size_t>(p);
    report.correlations[k] = expectation(jd);
    report.pass_probabilities[k] = pass_probability(jd);
    report.conditioned_correlations[k] = conditional_expectation_for(jd, eps, pair_name(p));
    report.s += chsh_sign(p) * report.correlations[k];
    report.s_conditioned += chsh_sign(p) * report.conditioned_correlations[k];
  }
  report.conditioned_defined = true;
  return report;
}

}  // namespace chsh
