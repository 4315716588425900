#pragma once

// Dense symmetric kernels for small information matrices. Everything here is
// value-in/value-out and templated on the scalar type; the rest of the library
// instantiates it with double.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mmphi/errors.hpp"

namespace mmphi {

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Mat = MatrixX<double>;
using Vec = VectorX<double>;

/// Pivot threshold of factorize_spd, relative to the largest diagonal entry.
inline constexpr double kSpdTolerance = 1e-12;

/// Copy of `m` with the lower triangle mirrored onto the upper one.
template <class Derived>
MatrixX<typename Derived::Scalar> symmetrize(const Eigen::MatrixBase<Derived>& m) {
  MatrixX<typename Derived::Scalar> out = m.template selfadjointView<Eigen::Lower>();
  return out;
}

/// Cholesky factorization of a symmetric positive definite matrix.
///
/// Construction fails with NotPositiveDefinite if any pivot (squared diagonal of
/// the Cholesky factor) falls at or below `rel_tol` times the largest diagonal
/// entry. Only the lower triangle of the input is read.
template <class Scalar>
class SpdFactorization {
 public:
  SpdFactorization() = default;

  template <class Derived>
  explicit SpdFactorization(const Eigen::MatrixBase<Derived>& m,
                            Scalar rel_tol = Scalar(kSpdTolerance)) {
    if (m.rows() != m.cols() || m.rows() < 1) {
      throw InvalidArgument("factorize_spd: matrix must be square with dim >= 1");
    }
    const Scalar max_diag = m.diagonal().maxCoeff();
    llt_.compute(m);
    const auto l = llt_.matrixLLT();
    min_pivot_ = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      min_pivot_ = std::min(min_pivot_, Scalar(l(i, i) * l(i, i)));
    }
    if (llt_.info() != Eigen::Success || !(max_diag > Scalar(0)) ||
        !(min_pivot_ > rel_tol * max_diag)) {
      throw NotPositiveDefinite("matrix is not positive definite (smallest pivot " +
                                std::to_string(static_cast<double>(min_pivot_)) + ")");
    }
  }

  Eigen::Index dim() const { return llt_.matrixLLT().rows(); }
  Scalar min_pivot() const { return min_pivot_; }

  template <class Rhs>
  MatrixX<Scalar> solve(const Eigen::MatrixBase<Rhs>& b) const {
    return llt_.solve(b);
  }

  MatrixX<Scalar> inverse() const {
    MatrixX<Scalar> inv = llt_.solve(MatrixX<Scalar>::Identity(dim(), dim()));
    return Scalar(0.5) * (inv + inv.transpose());
  }

  Scalar log_determinant() const {
    return Scalar(2) * llt_.matrixLLT().diagonal().array().log().sum();
  }

  /// Lower Cholesky factor L with m = L L^T.
  MatrixX<Scalar> lower() const { return llt_.matrixL(); }

 private:
  Eigen::LLT<MatrixX<Scalar>> llt_;
  Scalar min_pivot_ = Scalar(0);
};

template <class Derived>
SpdFactorization<typename Derived::Scalar> factorize_spd(
    const Eigen::MatrixBase<Derived>& m,
    typename Derived::Scalar rel_tol = typename Derived::Scalar(kSpdTolerance)) {
  return SpdFactorization<typename Derived::Scalar>(m, rel_tol);
}

/// Symmetric eigendecomposition m = V diag(values) V^T.
template <class Scalar>
struct SymmetricEigen {
  VectorX<Scalar> values;
  MatrixX<Scalar> vectors;

  template <class Derived>
  explicit SymmetricEigen(const Eigen::MatrixBase<Derived>& m) {
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(symmetrize(m));
    values = es.eigenvalues();
    vectors = es.eigenvectors();
  }

  /// V diag(values^p) V^T. Requires positive eigenvalues for non-integer p.
  MatrixX<Scalar> power(Scalar p) const {
    VectorX<Scalar> vp(values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      if (!(values[i] > Scalar(0)) && std::floor(p) != p) {
        throw NotPositiveDefinite("non-integer matrix power of a matrix with a non-positive eigenvalue");
      }
      vp[i] = std::pow(values[i], p);
    }
    return vectors * vp.asDiagonal() * vectors.transpose();
  }
};

inline bool is_integer_power(double p) { return std::floor(p) == p && p < 64.0; }

/// m^p for non-negative integer p by repeated squaring.
template <class Derived>
MatrixX<typename Derived::Scalar> integer_power(const Eigen::MatrixBase<Derived>& m, int p) {
  using Scalar = typename Derived::Scalar;
  MatrixX<Scalar> result = MatrixX<Scalar>::Identity(m.rows(), m.cols());
  MatrixX<Scalar> base = m;
  while (p > 0) {
    if (p & 1) result = result * base;
    p >>= 1;
    if (p > 0) base = base * base;
  }
  return result;
}

/// tr(m^p) for p >= 0. Integer exponents use repeated multiplication, the rest
/// the eigenvalues of m (all of which must then be positive).
template <class Derived>
typename Derived::Scalar trace_power(const Eigen::MatrixBase<Derived>& m,
                                     typename Derived::Scalar p) {
  using Scalar = typename Derived::Scalar;
  if (!(p >= Scalar(0))) throw InvalidArgument("trace_power: p must be >= 0");
  if (is_integer_power(static_cast<double>(p))) {
    const int ip = static_cast<int>(p);
    if (ip == 0) return Scalar(m.rows());
    if (ip == 1) return m.trace();
    return integer_power(m, ip).trace();
  }
  const SymmetricEigen<Scalar> eig(m);
  Scalar acc = 0;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    if (!(eig.values[i] > Scalar(0))) {
      throw NotPositiveDefinite("trace_power: non-integer power needs positive eigenvalues");
    }
    acc += std::pow(eig.values[i], p);
  }
  return acc;
}

}  // namespace mmphi
