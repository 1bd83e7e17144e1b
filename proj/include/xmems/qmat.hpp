#pragma once

// Dense complex linear algebra used throughout the library: Hermitian
// matrices, Kronecker products, partial traces, eigendecomposition and
// numerical rank.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace xmems {

using Index = Eigen::Index;
using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Raised when an iterative factorization fails to converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tolerance on |M - M^dagger| (relative to max(1, max|M_ij|)) accepted on
/// ingest; anything within it is symmetrized away.
inline constexpr double kHermitianTolerance = 1e-12;

/// Default relative threshold for numerical_rank.
inline constexpr double kDefaultRankTolerance = 1e-6;

/// Dense complex Hermitian matrix. Hermiticity holds exactly: the stored
/// matrix is always (M + M^dagger) / 2 of whatever was ingested.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;

  explicit HermitianMatrix(const CMatrix& m) : m_(m) {
    if (m.rows() != m.cols()) {
      throw std::invalid_argument("HermitianMatrix: matrix is not square (" +
                                  std::to_string(m.rows()) + "x" +
                                  std::to_string(m.cols()) + ")");
    }
    if (!m.allFinite()) {
      throw std::invalid_argument("HermitianMatrix: non-finite entries");
    }
    const double scale = std::max(1.0, m.size() ? m.cwiseAbs().maxCoeff() : 0.0);
    const double dev = m.size() ? (m - m.adjoint()).cwiseAbs().maxCoeff() : 0.0;
    if (dev > kHermitianTolerance * scale) {
      throw std::invalid_argument("HermitianMatrix: deviation from Hermiticity " +
                                  std::to_string(dev) + " exceeds tolerance");
    }
    m_ = (m + m.adjoint()) / 2.0;
  }

  explicit HermitianMatrix(const RMatrix& m) : HermitianMatrix(CMatrix(m.cast<cplx>())) {}

  static HermitianMatrix identity(Index d) { return HermitianMatrix(CMatrix(CMatrix::Identity(d, d))); }
  static HermitianMatrix zero(Index d) { return HermitianMatrix(CMatrix(CMatrix::Zero(d, d))); }
  static HermitianMatrix diagonal(const RVector& v) {
    return HermitianMatrix(CMatrix(v.cast<cplx>().asDiagonal()));
  }
  /// |v><v|
  static HermitianMatrix projector(const CVector& v) {
    return HermitianMatrix(CMatrix(v * v.adjoint()));
  }

  Index dim() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }
  cplx operator()(Index i, Index j) const { return m_(i, j); }
  double trace() const { return m_.trace().real(); }
  /// tr(rho^2)
  double purity() const { return (m_ * m_).trace().real(); }

  HermitianMatrix transpose() const { return HermitianMatrix(CMatrix(m_.transpose())); }

  friend HermitianMatrix operator+(const HermitianMatrix& a, const HermitianMatrix& b) {
    return HermitianMatrix(CMatrix(a.m_ + b.m_));
  }
  friend HermitianMatrix operator-(const HermitianMatrix& a, const HermitianMatrix& b) {
    return HermitianMatrix(CMatrix(a.m_ - b.m_));
  }
  friend HermitianMatrix operator*(double s, const HermitianMatrix& a) {
    return HermitianMatrix(CMatrix(s * a.m_));
  }

 private:
  CMatrix m_;
};

/// U H U^dagger
inline HermitianMatrix conjugate_by(const CMatrix& u, const HermitianMatrix& h) {
  return HermitianMatrix(CMatrix(u * h.matrix() * u.adjoint()));
}

/// Kronecker product; entry [(i*rB + k), (j*cB + l)] = A[i,j] * B[k,l].
inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline HermitianMatrix kron(const HermitianMatrix& a, const HermitianMatrix& b) {
  return HermitianMatrix(kron(a.matrix(), b.matrix()));
}

enum class TracedFactor { first, second };

/// Partial trace of an operator on H_A (x) H_B. Tracing the first factor
/// leaves a dimB-dimensional matrix, tracing the second leaves dimA.
inline HermitianMatrix partial_trace(const HermitianMatrix& m, Index dim_a, Index dim_b,
                                     TracedFactor which) {
  if (dim_a <= 0 || dim_b <= 0 || m.dim() != dim_a * dim_b) {
    throw std::invalid_argument("partial_trace: dimension " + std::to_string(m.dim()) +
                                " does not factor as " + std::to_string(dim_a) + "x" +
                                std::to_string(dim_b));
  }
  const CMatrix& x = m.matrix();
  if (which == TracedFactor::first) {
    CMatrix out = CMatrix::Zero(dim_b, dim_b);
    for (Index i = 0; i < dim_a; ++i) out += x.block(i * dim_b, i * dim_b, dim_b, dim_b);
    return HermitianMatrix(out);
  }
  CMatrix out(dim_a, dim_a);
  for (Index i = 0; i < dim_a; ++i) {
    for (Index j = 0; j < dim_a; ++j) {
      out(i, j) = x.block(i * dim_b, j * dim_b, dim_b, dim_b).trace();
    }
  }
  return HermitianMatrix(out);
}

/// Eigenvalues sorted descending with matching eigenvector columns.
struct Eigensystem {
  RVector values;
  CMatrix vectors;
};

/// Hermitian eigendecomposition, M = Q diag(values) Q^dagger. Ties keep the
/// (reversed) order produced by the underlying tridiagonal QR.
inline Eigensystem eig_hermitian(const HermitianMatrix& m) {
  if (m.dim() == 0) return {};
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m.matrix());
  if (es.info() != Eigen::Success) {
    throw NumericalError("eig_hermitian: eigensolver did not converge");
  }
  const Index d = m.dim();
  Eigensystem out{RVector(d), CMatrix(d, d)};
  for (Index k = 0; k < d; ++k) {
    out.values(k) = es.eigenvalues()(d - 1 - k);
    out.vectors.col(k) = es.eigenvectors().col(d - 1 - k);
  }
  return out;
}

/// Eigenvalues only, descending.
inline RVector eigenvalues(const HermitianMatrix& m) {
  if (m.dim() == 0) return {};
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m.matrix(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigenvalues: eigensolver did not converge");
  }
  return es.eigenvalues().reverse();
}

inline RVector eigenvalues(const RMatrix& sym) {
  if (sym.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<RMatrix> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigenvalues: eigensolver did not converge");
  }
  return es.eigenvalues().reverse();
}

inline double min_eigenvalue(const HermitianMatrix& m) {
  return m.dim() ? eigenvalues(m).minCoeff() : 0.0;
}

inline double min_eigenvalue(const RMatrix& sym) {
  return sym.rows() ? eigenvalues(sym).minCoeff() : 0.0;
}

/// Count of eigenvalues with |lambda| > tau * max(|lambda|_max, 1).
inline Index numerical_rank(const RVector& spectrum, double tau = kDefaultRankTolerance) {
  if (!(tau > 0)) throw std::invalid_argument("numerical_rank: tau must be positive");
  if (spectrum.size() == 0) return 0;
  const double cut = tau * std::max(spectrum.cwiseAbs().maxCoeff(), 1.0);
  return static_cast<Index>((spectrum.array().abs() > cut).count());
}

inline Index numerical_rank(const HermitianMatrix& m, double tau = kDefaultRankTolerance) {
  return numerical_rank(eigenvalues(m), tau);
}

inline Index numerical_rank(const RMatrix& sym, double tau = kDefaultRankTolerance) {
  return numerical_rank(eigenvalues(sym), tau);
}

inline bool is_power_of_two(Index d) { return d > 0 && (d & (d - 1)) == 0; }

/// Frobenius norm of a difference, the residual measure used in reports.
inline double frobenius_distance(const HermitianMatrix& a, const HermitianMatrix& b) {
  return (a.matrix() - b.matrix()).norm();
}

}  // namespace xmems
