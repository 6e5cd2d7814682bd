#pragma once

// Small dense complex linear algebra on top of Eigen: Kronecker products,
// Hermitian spectral decompositions grouped by eigenvalue, positivity tests.
// Everything is templated on the real scalar; `Operator` is the double
// instantiation used throughout the rest of the library.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "chsh/errors.hpp"

namespace chsh {

template <typename Real>
using OperatorT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using KetT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;
using Operator = OperatorT<double>;
using Ket = KetT<double>;

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kGroupTol = 1e-9;

template <typename Real>
struct SpectralDecompositionT {
  std::vector<Real> eigenvalues;  // distinct, descending
  std::vector<OperatorT<Real>> projectors;

  std::size_t size() const { return eigenvalues.size(); }

  OperatorT<Real> reconstruct() const {
    const Eigen::Index d = projectors.empty() ? 0 : projectors.front().rows();
    OperatorT<Real> out = OperatorT<Real>::Zero(d, d);
    for (std::size_t k = 0; k < size(); ++k) out += eigenvalues[k] * projectors[k];
    return out;
  }
};

using SpectralDecomposition = SpectralDecompositionT<double>;

/// Largest absolute entry; the norm used by every tolerance in the library.
template <typename Derived>
typename Derived::RealScalar max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? typename Derived::RealScalar(0) : m.cwiseAbs().maxCoeff();
}

/// Kronecker product with (i1*d2 + i2, j1*d2 + j2) <- A(i1,j1) * B(i2,j2).
template <typename DA, typename DB>
Eigen::Matrix<typename DA::Scalar, Eigen::Dynamic, Eigen::Dynamic> tensor(
    const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  const Eigen::Index r2 = b.rows(), c2 = b.cols();
  Eigen::Matrix<typename DA::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * r2,
                                                                        a.cols() * c2);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * r2, j * c2, r2, c2) = a(i, j) * b;
  return out;
}

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& a,
                  typename Derived::RealScalar tol = kHermitianTol) {
  return a.rows() == a.cols() && max_abs(a - a.adjoint()) <= tol;
}

template <typename Derived>
void require_hermitian(const Eigen::MatrixBase<Derived>& a,
                       typename Derived::RealScalar tol = kHermitianTol) {
  if (a.rows() != a.cols())
    throw NotHermitian("operator is not square (" + std::to_string(a.rows()) + "x" +
                       std::to_string(a.cols()) + ")");
  if (!is_hermitian(a, tol))
    throw NotHermitian("operator deviates from its adjoint by " +
                       std::to_string(max_abs(a - a.adjoint())));
}

/// Rank-one projector |psi><psi|.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> projector(
    const Eigen::MatrixBase<Derived>& psi) {
  return psi * psi.adjoint();
}

/// Spectral decomposition of a Hermitian operator. Eigenvalues closer than
/// `group_tol` to their sorted neighbour are merged into one eigenspace whose
/// eigenvalue is the mean of the members. Output is in descending order.
template <typename Derived>
SpectralDecompositionT<typename Derived::RealScalar> hermitian_eigendecomposition(
    const Eigen::MatrixBase<Derived>& a,
    typename Derived::RealScalar group_tol = typename Derived::RealScalar(kGroupTol)) {
  using Real = typename Derived::RealScalar;
  require_hermitian(a);

  // Symmetrize so that sub-tolerance anti-Hermitian noise never reaches the solver.
  const OperatorT<Real> h = (a + a.adjoint()) / Real(2);
  Eigen::SelfAdjointEigenSolver<OperatorT<Real>> solver(h);
  if (solver.info() != Eigen::Success) throw Error("Hermitian eigensolver failed to converge");

  const auto& values = solver.eigenvalues();  // ascending
  const auto& vectors = solver.eigenvectors();
  const Eigen::Index n = values.size();

  SpectralDecompositionT<Real> out;
  Eigen::Index hi = n - 1;
  while (hi >= 0) {
    Eigen::Index lo = hi;
    while (lo > 0 && values(lo) - values(lo - 1) <= group_tol) --lo;
    const Eigen::Index count = hi - lo + 1;
    const auto block = vectors.middleCols(lo, count);
    out.eigenvalues.push_back(values.segment(lo, count).mean());
    out.projectors.push_back(block * block.adjoint());
    hi = lo - 1;
  }
  return out;
}

template <typename Derived>
typename Derived::RealScalar min_eigenvalue(const Eigen::MatrixBase<Derived>& a) {
  using Real = typename Derived::RealScalar;
  require_hermitian(a);
  if (a.rows() == 0) return Real(0);
  const OperatorT<Real> h = (a + a.adjoint()) / Real(2);
  Eigen::SelfAdjointEigenSolver<OperatorT<Real>> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

template <typename Derived>
bool is_positive_semidefinite(const Eigen::MatrixBase<Derived>& a,
                              typename Derived::RealScalar tol = kHermitianTol) {
  return min_eigenvalue(a) >= -tol;
}

}  // namespace chsh
