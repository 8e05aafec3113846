#pragma once

#include <Eigen/Dense>

#include "swiss/random.hpp"

namespace swiss {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Largest absolute entry; 0 for an empty matrix.
double max_abs(const Matrix& m);

/// Dense d×d matrix whose storage is exactly symmetric.
///
/// Construction symmetrizes the input as (M + Mᵀ)/2, so every product that
/// is symmetric in exact arithmetic can be funnelled through here to stop
/// rounding asymmetry from accumulating.
class SymmetricMatrix {
 public:
  explicit SymmetricMatrix(const Matrix& m);

  static SymmetricMatrix identity(Eigen::Index d);
  static SymmetricMatrix diagonal(const Vector& diag);

  Eigen::Index dim() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  double max_abs() const { return swiss::max_abs(m_); }

 private:
  Matrix m_;
};

/// Eigenpairs of a symmetric matrix: eigenvalues sorted descending, columns
/// of `eigenvectors` orthonormal with their largest-magnitude component
/// positive.
struct SpectralDecomposition {
  Vector eigenvalues;
  Matrix eigenvectors;

  Matrix reconstruct() const;
};

/// Lower-triangular factor with strictly positive diagonal.
class LowerTriangular {
 public:
  explicit LowerTriangular(Matrix l);

  Eigen::Index dim() const noexcept { return l_.rows(); }
  const Matrix& matrix() const noexcept { return l_; }

  /// Solves L x = b.
  Vector solve_lower(const Vector& b) const;
  /// Solves Lᵀ x = b.
  Vector solve_upper(const Vector& b) const;
  Matrix inverse() const;

 private:
  Matrix l_;
};

inline constexpr int kDefaultJacobiSweeps = 100;
inline constexpr double kSpdRelativeTolerance = 1e-12;

/// Cyclic Jacobi eigendecomposition with threshold sweeps. Deterministic for
/// fixed input. Throws DecompositionFailureError after `max_sweeps`.
SpectralDecomposition eigh(const SymmetricMatrix& v,
                           int max_sweeps = kDefaultJacobiSweeps);

/// Symmetric positive-definite square root U diag(√λ) Uᵀ.
///
/// Eigenvalues at or below rel_tol·λ_max are rejected with
/// NotPositiveDefiniteError; nothing is clamped.
SymmetricMatrix spsq(const SymmetricMatrix& v,
                     double rel_tol = kSpdRelativeTolerance);

struct SymmetricRoot {
  SymmetricMatrix root;
  SymmetricMatrix inverse_root;
};

/// spsq together with its inverse, from a single eigendecomposition.
SymmetricRoot spsq_with_inverse(const SymmetricMatrix& v,
                                double rel_tol = kSpdRelativeTolerance);

LowerTriangular cholesky(const SymmetricMatrix& v,
                         double rel_tol = kSpdRelativeTolerance);

SymmetricMatrix spd_inverse(const SymmetricMatrix& v);

/// Solves V x = b for SPD V through its Cholesky factor.
Vector spd_solve(const SymmetricMatrix& v, const Vector& b);

/// Wishart draw W(df, scale) by the Bartlett decomposition.
///
/// Draw order per row i of the Bartlett factor: the i sub-diagonal normals,
/// then the chi-square with df − i degrees of freedom on the diagonal.
SymmetricMatrix sample_wishart(double df, const SymmetricMatrix& scale,
                               RngStream& rng);

/// Inverse-Wishart draw W⁻¹(df, scale): a Wishart draw with scale⁻¹, inverted.
SymmetricMatrix sample_inverse_wishart(double df, const SymmetricMatrix& scale,
                                       RngStream& rng);

}  // namespace swiss
