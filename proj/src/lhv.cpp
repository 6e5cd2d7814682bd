#include "chsh/lhv.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>
#include <random>
#include <string>

namespace chsh {

namespace {

std::vector<double> local_distribution(const PureState& psi, const Povm& p) {
  std::vector<double> out;
  out.reserve(p.size());
  for (const auto& o : p.outcomes) {
    const Complex v = psi.amplitudes().dot(o.effect * psi.amplitudes());  // <psi|E|psi>
    if (v.real() < -kNegativeProbabilityTol)
      throw ValidationError("local outcome probability is negative (" + std::to_string(v.real()) + ")");
    out.push_back(std::max(v.real(), 0.0));
  }
  return out;
}

std::size_t idx(Setting s) { return static_cast<std::size_t>(s); }

}  // namespace

Setting left_setting(Pair p) {
  return (p == Pair::AB || p == Pair::ABPrime) ? Setting::A : Setting::APrime;
}

Setting right_setting(Pair p) {
  return (p == Pair::AB || p == Pair::APrimeB) ? Setting::B : Setting::BPrime;
}

void LhvModel::validate(double tol) const {
  double total = 0.0;
  for (double w : prob) {
    if (!(w >= 0.0)) throw ValidationError("sample space has a negative atom weight");
    total += w;
  }
  if (std::abs(total - 1.0) > tol)
    throw ValidationError("sample space weights sum to " + std::to_string(total));
  for (const auto& x : variables) {
    if (x.values.size() != prob.size())
      throw DimensionMismatch("random variable length differs from atom count");
    for (double v : x.values)
      if (!(v >= -1.0 && v <= 1.0)) throw OutcomeOutOfRange("random variable value outside [-1, 1]");
  }
}

LhvModel build_lhv_for_product_mixture(const ProductMixture& m, const ChshSettings& s) {
  m.validate();
  if (s.a.dim() != m.left_dim() || s.a_prime.dim() != m.left_dim())
    throw DimensionMismatch("left settings do not act on the left factor (dim " +
                            std::to_string(m.left_dim()) + ")");
  if (s.b.dim() != m.right_dim() || s.b_prime.dim() != m.right_dim())
    throw DimensionMismatch("right settings do not act on the right factor (dim " +
                            std::to_string(m.right_dim()) + ")");

  const std::array<const Povm*, 4> povms{&s.a, &s.a_prime, &s.b, &s.b_prime};
  LhvModel model;
  for (std::size_t v = 0; v < 4; ++v) {
    model.outcome_values[v] = povms[v]->values();
    model.variables[v].null_value = povms[v]->null_value;
  }

  const std::size_t na = s.a.size(), nap = s.a_prime.size(), nb = s.b.size(), nbp = s.b_prime.size();
  const std::size_t n = m.components.size() * na * nap * nb * nbp;
  model.atoms.reserve(n);
  model.prob.reserve(n);
  for (auto& x : model.variables) x.values.reserve(n);

  for (std::size_t k = 0; k < m.components.size(); ++k) {
    const auto& c = m.components[k];
    const auto pa = local_distribution(c.left, s.a);
    const auto pap = local_distribution(c.left, s.a_prime);
    const auto qb = local_distribution(c.right, s.b);
    const auto qbp = local_distribution(c.right, s.b_prime);
    for (std::size_t ia = 0; ia < na; ++ia)
      for (std::size_t iap = 0; iap < nap; ++iap)
        for (std::size_t jb = 0; jb < nb; ++jb)
          for (std::size_t jbp = 0; jbp < nbp; ++jbp) {
            const Atom atom{k, {ia, iap, jb, jbp}};
            model.atoms.push_back(atom);
            model.prob.push_back(c.weight * pa[ia] * pap[iap] * qb[jb] * qbp[jbp]);
            for (std::size_t v = 0; v < 4; ++v)
              model.variables[v].values.push_back(model.outcome_values[v][atom.outcome[v]]);
          }
  }
  return model;
}

JointDistribution lhv_pair_distribution(const LhvModel& model, Pair pair) {
  const std::size_t l = idx(left_setting(pair)), r = idx(right_setting(pair));
  JointDistribution jd{model.outcome_values[l], model.outcome_values[r],
                       Eigen::MatrixXd::Zero(model.outcome_values[l].size(), model.outcome_values[r].size()),
                       model.variables[l].null_value, model.variables[r].null_value};
  for (std::size_t w = 0; w < model.size(); ++w)
    jd.table(model.atoms[w].outcome[l], model.atoms[w].outcome[r]) += model.prob[w];
  return jd;
}

double rv_expectation(const LhvModel& model, const RandomVariable& x, const RandomVariable& y) {
  double e = 0.0;
  for (std::size_t w = 0; w < model.size(); ++w) e += model.prob[w] * x.values[w] * y.values[w];
  return e;
}

double rv_conditional_expectation(const LhvModel& model, const RandomVariable& x,
                                  const RandomVariable& y, double eps) {
  double num = 0.0, pass = 0.0;
  for (std::size_t w = 0; w < model.size(); ++w) {
    if (x.values[w] == x.null_value || y.values[w] == y.null_value) continue;
    num += model.prob[w] * x.values[w] * y.values[w];
    pass += model.prob[w];
  }
  if (pass <= eps) throw DegeneratePostSelection("(X,Y)", pass);
  return num / pass;
}

RvChshCheck chsh_check_rvs(const LhvModel& model) {
  double s = 0.0;
  for (Pair p : kPairs)
    s += chsh_sign(p) * rv_expectation(model, model.x(left_setting(p)), model.x(right_setting(p)));
  return {s, s <= 2.0 + kChshBoundTol};
}

double rv_conditioned_chsh(const LhvModel& model, double eps) {
  double s = 0.0;
  for (Pair p : kPairs) {
    try {
      s += chsh_sign(p) *
           rv_conditional_expectation(model, model.x(left_setting(p)), model.x(right_setting(p)), eps);
    } catch (const DegeneratePostSelection& e) {
      throw DegeneratePostSelection(std::string(pair_name(p)), e.pass_probability());
    }
  }
  return s;
}

JointDistribution SampleCounts::empirical(Pair p) const {
  const auto k = static_cast<std::size_t>(p);
  JointDistribution jd{values_left[k], values_right[k], counts[k].cast<double>(), null_left[k], null_right[k]};
  if (draws > 0) jd.table /= static_cast<double>(draws);
  return jd;
}

SampleCounts sample(const LhvModel& model, std::uint64_t seed, std::uint64_t n) {
  if (n == 0) throw ValidationError("sample count must be at least 1");
  if (model.size() == 0) throw ValidationError("cannot sample from an empty model");

  std::vector<double> cdf(model.size());
  std::partial_sum(model.prob.begin(), model.prob.end(), cdf.begin());
  const double total = cdf.back();

  SampleCounts out;
  out.draws = n;
  for (Pair p : kPairs) {
    const auto k = static_cast<std::size_t>(p);
    const std::size_t l = idx(left_setting(p)), r = idx(right_setting(p));
    out.values_left[k] = model.outcome_values[l];
    out.values_right[k] = model.outcome_values[r];
    out.null_left[k] = model.variables[l].null_value;
    out.null_right[k] = model.variables[r].null_value;
    out.counts[k].setZero(out.values_left[k].size(), out.values_right[k].size());
  }

  std::mt19937_64 rng(seed);
  for (std::uint64_t draw = 0; draw < n; ++draw) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    // Skip trailing zero-weight atoms when u lands on the last boundary.
    if (it == cdf.end()) it = std::prev(cdf.end());
    while (model.prob[static_cast<std::size_t>(it - cdf.begin())] == 0.0 && it != cdf.begin()) --it;
    const Atom& atom = model.atoms[static_cast<std::size_t>(it - cdf.begin())];
    for (Pair p : kPairs) {
      const auto k = static_cast<std::size_t>(p);
      ++out.counts[k](atom.outcome[idx(left_setting(p))], atom.outcome[idx(right_setting(p))]);
    }
  }
  return out;
}

}  // namespace chsh
