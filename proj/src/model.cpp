#include "chsh/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace chsh {

namespace {

std::string join_messages(const std::string& label, const std::vector<PovmViolation>& v) {
  std::ostringstream os;
  os << label << ": ";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "; " : "") << v[i].message;
  return os.str();
}

}  // namespace

PureState::PureState(Ket amplitudes, double tol) : amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() == 0) throw ValidationError("pure state has no amplitudes");
  if (!amplitudes_.allFinite()) throw ValidationError("pure state has non-finite amplitudes");
  const double norm2 = amplitudes_.squaredNorm();
  if (std::abs(norm2 - 1.0) > tol)
    throw ValidationError("pure state is not normalized (norm^2 = " + std::to_string(norm2) + ")");
}

Eigen::Index ProductMixture::left_dim() const {
  return components.empty() ? 0 : components.front().left.dim();
}

Eigen::Index ProductMixture::right_dim() const {
  return components.empty() ? 0 : components.front().right.dim();
}

void ProductMixture::validate(double tol) const {
  if (components.empty()) throw ValidationError("product mixture has no components");
  double total = 0.0;
  for (std::size_t k = 0; k < components.size(); ++k) {
    const auto& c = components[k];
    if (!(c.weight > 0.0) || !std::isfinite(c.weight))
      throw ValidationError("component " + std::to_string(k) + " has non-positive weight");
    if (c.left.dim() != left_dim() || c.right.dim() != right_dim())
      throw DimensionMismatch("component " + std::to_string(k) +
                              " has local dimensions differing from component 0");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > tol)
    throw ValidationError("mixture weights sum to " + std::to_string(total) + ", not 1");
}

DensityMatrix::DensityMatrix(Operator matrix, std::optional<ProductMixture> origin, double tol)
    : matrix_(std::move(matrix)), origin_(std::move(origin)) {
  if (matrix_.rows() == 0 || matrix_.rows() != matrix_.cols())
    throw ValidationError("density matrix must be square and non-empty");
  if (!matrix_.allFinite()) throw ValidationError("density matrix has non-finite entries");
  require_hermitian(matrix_, tol);
  const Complex tr = matrix_.trace();
  if (std::abs(tr - Complex(1.0)) > tol)
    throw ValidationError("density matrix trace is " + std::to_string(tr.real()) + ", not 1");
  const double lowest = min_eigenvalue(matrix_);
  if (lowest < -tol)
    throw ValidationError("density matrix is not positive (min eigenvalue " +
                          std::to_string(lowest) + ")");
  if (origin_ && origin_->left_dim() * origin_->right_dim() != dim())
    throw DimensionMismatch("density matrix dimension disagrees with its mixture origin");
}

std::vector<double> Povm::values() const {
  std::vector<double> out;
  out.reserve(outcomes.size());
  for (const auto& o : outcomes) out.push_back(o.value);
  return out;
}

std::vector<PovmViolation> validate_povm(const Povm& p, double tol) {
  using K = PovmViolation::Kind;
  std::vector<PovmViolation> out;
  if (p.outcomes.empty()) {
    out.push_back({K::Empty, 0, 0.0, "POVM has no outcomes"});
    return out;
  }
  const Eigen::Index d = p.dim();
  bool shapes_ok = true;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& o = p.outcomes[i];
    const std::string tag = "element " + std::to_string(i) + " (value " + std::to_string(o.value) + ")";
    if (o.effect.rows() != d || o.effect.cols() != d || d == 0) {
      out.push_back({K::DimensionMismatch, i, 0.0, tag + " has wrong shape"});
      shapes_ok = false;
      continue;
    }
    if (!std::isfinite(o.value) || o.value < -1.0 || o.value > 1.0)
      out.push_back({K::ValueOutOfRange, i, o.value, tag + " has value outside [-1, 1]"});
    if (!o.effect.allFinite()) {
      out.push_back({K::NotHermitian, i, 0.0, tag + " has non-finite entries"});
      shapes_ok = false;
      continue;
    }
    if (!is_hermitian(o.effect, tol)) {
      out.push_back({K::NotHermitian, i, max_abs(o.effect - o.effect.adjoint()), tag + " is not Hermitian"});
      continue;
    }
    const double lowest = min_eigenvalue(o.effect);
    if (lowest < -tol)
      out.push_back({K::NotPositive, i, lowest,
                     tag + " is not positive (min eigenvalue " + std::to_string(lowest) + ")"});
    for (std::size_t j = 0; j < i; ++j)
      if (p.outcomes[j].value == o.value)
        out.push_back({K::DuplicateValue, i, o.value,
                       tag + " duplicates the value of element " + std::to_string(j)});
  }
  if (shapes_ok) {
    Operator sum = Operator::Zero(d, d);
    for (const auto& o : p.outcomes) sum += o.effect;
    const double defect = max_abs(sum - Operator::Identity(d, d));
    if (defect > tol)
      out.push_back({K::Incomplete, 0, defect,
                     "effects do not sum to the identity (defect " + std::to_string(defect) + ")"});
  }
  return out;
}

void require_valid_povm(const Povm& p, const std::string& label, double tol) {
  const auto v = validate_povm(p, tol);
  if (!v.empty()) throw ValidationError(join_messages(label, v));
}

Operator spin1_observable(double alpha) {
  const double c = std::cos(alpha);
  const double s = std::sin(alpha) / std::sqrt(2.0);
  Operator j(3, 3);
  j << c, s, 0.0,
       s, 0.0, s,
       0.0, s, -c;
  return j;
}

Povm povm_from_observable(const Operator& a, double group_tol) {
  const auto spectrum = hermitian_eigendecomposition(a, group_tol);
  Povm p;
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    double v = spectrum.eigenvalues[k];
    if (v > 1.0 + group_tol || v < -1.0 - group_tol)
      throw OutcomeOutOfRange("eigenvalue " + std::to_string(v) + " lies outside [-1, 1]");
    v = std::clamp(v, -1.0, 1.0);
    // Eigensolver noise on a zero eigenvalue must not defeat exact null-outcome matching.
    if (std::abs(v) <= group_tol) v = 0.0;
    p.outcomes.push_back({v, spectrum.projectors[k]});
  }
  return p;
}

DensityMatrix density_from_mixture(const ProductMixture& m) {
  m.validate();
  const Eigen::Index d = m.left_dim() * m.right_dim();
  Operator rho = Operator::Zero(d, d);
  for (const auto& c : m.components) rho += c.weight * tensor(c.left.projector(), c.right.projector());
  return DensityMatrix(std::move(rho), m);
}

ProductMixture paper_counterexample_state() {
  Ket up(3), tilted(3);
  up << 1.0, 0.0, 0.0;
  tilted << 0.5, 1.0 / std::sqrt(2.0), 0.5;
  ProductMixture m;
  m.components.push_back({0.5, PureState(up), PureState(up)});
  m.components.push_back({0.5, PureState(tilted), PureState(tilted)});
  return m;
}

}  // namespace chsh
