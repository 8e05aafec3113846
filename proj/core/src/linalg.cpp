#include "swiss/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "swiss/error.hpp"

namespace swiss {

double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

SymmetricMatrix::SymmetricMatrix(const Matrix& m) {
  if (m.rows() != m.cols())
    throw InvalidArgumentError("symmetric matrix must be square, got " +
                               std::to_string(m.rows()) + "x" +
                               std::to_string(m.cols()));
  if (m.rows() < 1)
    throw InvalidArgumentError("symmetric matrix must have dim >= 1");
  if (!m.allFinite())
    throw DataError("symmetric matrix has non-finite entries");
  m_ = 0.5 * (m + m.transpose());
}

SymmetricMatrix SymmetricMatrix::identity(Eigen::Index d) {
  return SymmetricMatrix(Matrix::Identity(d, d));
}

SymmetricMatrix SymmetricMatrix::diagonal(const Vector& diag) {
  return SymmetricMatrix(Matrix(diag.asDiagonal()));
}

Matrix SpectralDecomposition::reconstruct() const {
  return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
}

LowerTriangular::LowerTriangular(Matrix l) : l_(std::move(l)) {
  if (l_.rows() != l_.cols() || l_.rows() < 1)
    throw InvalidArgumentError("lower-triangular factor must be square");
  for (Eigen::Index i = 0; i < l_.rows(); ++i) {
    if (!(l_(i, i) > 0.0))
      throw InvalidArgumentError("lower-triangular factor needs a positive diagonal");
    for (Eigen::Index j = i + 1; j < l_.cols(); ++j) l_(i, j) = 0.0;
  }
}

Vector LowerTriangular::solve_lower(const Vector& b) const {
  const Eigen::Index d = dim();
  Vector x(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    double s = b(i);
    for (Eigen::Index k = 0; k < i; ++k) s -= l_(i, k) * x(k);
    x(i) = s / l_(i, i);
  }
  return x;
}

Vector LowerTriangular::solve_upper(const Vector& b) const {
  const Eigen::Index d = dim();
  Vector x(d);
  for (Eigen::Index i = d - 1; i >= 0; --i) {
    double s = b(i);
    for (Eigen::Index k = i + 1; k < d; ++k) s -= l_(k, i) * x(k);
    x(i) = s / l_(i, i);
  }
  return x;
}

Matrix LowerTriangular::inverse() const {
  const Eigen::Index d = dim();
  Matrix inv = Matrix::Zero(d, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    inv(c, c) = 1.0 / l_(c, c);
    for (Eigen::Index i = c + 1; i < d; ++i) {
      double s = 0.0;
      for (Eigen::Index k = c; k < i; ++k) s -= l_(i, k) * inv(k, c);
      inv(i, c) = s / l_(i, i);
    }
  }
  return inv;
}

namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (Eigen::Index q = 1; q < a.cols(); ++q)
    for (Eigen::Index p = 0; p < q; ++p) s += a(p, q) * a(p, q);
  return std::sqrt(2.0 * s);
}

// Applies the rotation J with J(p,p)=J(q,q)=c, J(p,q)=s, J(q,p)=−s as
// A ← Jᵀ A J and U ← U J.
void rotate(Matrix& a, Matrix& u, Eigen::Index p, Eigen::Index q, double c,
            double s) {
  const Eigen::Index n = a.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double akp = a(k, p);
    const double akq = a(k, q);
    a(k, p) = c * akp - s * akq;
    a(k, q) = s * akp + c * akq;
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    const double apk = a(p, k);
    const double aqk = a(q, k);
    a(p, k) = c * apk - s * aqk;
    a(q, k) = s * apk + c * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double ukp = u(k, p);
    const double ukq = u(k, q);
    u(k, p) = c * ukp - s * ukq;
    u(k, q) = s * ukp + c * ukq;
  }
}

SpectralDecomposition sort_and_fix_signs(const Matrix& a, const Matrix& u) {
  const Eigen::Index n = a.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });

  SpectralDecomposition out{Vector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.eigenvalues(k) = a(src, src);
    Vector col = u.col(src);
    // Near-ties resolved towards the lowest index.
    const double biggest = col.cwiseAbs().maxCoeff();
    Eigen::Index pivot = 0;
    while (std::abs(col(pivot)) < biggest - 1e-10) ++pivot;
    if (col(pivot) < 0.0) col = -col;
    out.eigenvectors.col(k) = col;
  }
  return out;
}

}  // namespace

SpectralDecomposition eigh(const SymmetricMatrix& v, int max_sweeps) {
  const Eigen::Index n = v.dim();
  Matrix a = v.matrix();
  Matrix u = Matrix::Identity(n, n);

  const double scale = a.norm();
  const double tol = 1e-15 * scale;
  double off = off_diagonal_norm(a);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (off <= tol) return sort_and_fix_signs(a, u);

    // Early sweeps only rotate large elements; later sweeps rotate all.
    const double threshold = sweep < 3 ? 0.2 * off / static_cast<double>(n * n) : 0.0;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        const double g = 100.0 * std::abs(apq);
        if (sweep > 3 && std::abs(a(p, p)) + g == std::abs(a(p, p)) &&
            std::abs(a(q, q)) + g == std::abs(a(q, q))) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        if (std::abs(apq) <= threshold || apq == 0.0) continue;

        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        rotate(a, u, p, q, c, t * c);
      }
    }
    off = off_diagonal_norm(a);
  }
  if (off <= tol) return sort_and_fix_signs(a, u);
  throw DecompositionFailureError(max_sweeps, off);
}

namespace {

// Returns the eigendecomposition after checking every eigenvalue clears
// rel_tol·λ_max.
SpectralDecomposition checked_spd_eigh(const SymmetricMatrix& v,
                                       double rel_tol, const char* where) {
  SpectralDecomposition eig = eigh(v);
  const Eigen::Index n = eig.eigenvalues.size();
  const double lmax = eig.eigenvalues(0);
  const double lmin = eig.eigenvalues(n - 1);
  if (!(lmax > 0.0) || !(lmin > rel_tol * lmax))
    throw NotPositiveDefiniteError(where, lmin);
  return eig;
}

}  // namespace

SymmetricMatrix spsq(const SymmetricMatrix& v, double rel_tol) {
  const SpectralDecomposition eig = checked_spd_eigh(v, rel_tol, "spsq");
  const Matrix& u = eig.eigenvectors;
  return SymmetricMatrix(u * eig.eigenvalues.cwiseSqrt().asDiagonal() *
                         u.transpose());
}

SymmetricRoot spsq_with_inverse(const SymmetricMatrix& v, double rel_tol) {
  const SpectralDecomposition eig = checked_spd_eigh(v, rel_tol, "spsq");
  const Matrix& u = eig.eigenvectors;
  const Vector roots = eig.eigenvalues.cwiseSqrt();
  return SymmetricRoot{
      SymmetricMatrix(u * roots.asDiagonal() * u.transpose()),
      SymmetricMatrix(u * roots.cwiseInverse().asDiagonal() * u.transpose())};
}

LowerTriangular cholesky(const SymmetricMatrix& v, double rel_tol) {
  const Eigen::Index n = v.dim();
  const Matrix& a = v.matrix();
  const double diag_max = a.diagonal().maxCoeff();
  if (!(diag_max > 0.0))
    throw NotPositiveDefiniteError("cholesky", diag_max);

  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > rel_tol * diag_max))
      throw NotPositiveDefiniteError("cholesky", pivot);
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return LowerTriangular(std::move(l));
}

SymmetricMatrix spd_inverse(const SymmetricMatrix& v) {
  const Matrix linv = cholesky(v).inverse();
  return SymmetricMatrix(linv.transpose() * linv);
}

Vector spd_solve(const SymmetricMatrix& v, const Vector& b) {
  if (b.size() != v.dim())
    throw InvalidArgumentError("spd_solve: dimension mismatch");
  const LowerTriangular l = cholesky(v);
  return l.solve_upper(l.solve_lower(b));
}

SymmetricMatrix sample_wishart(double df, const SymmetricMatrix& scale,
                               RngStream& rng) {
  const Eigen::Index d = scale.dim();
  if (!(df > static_cast<double>(d) - 1.0))
    throw InvalidArgumentError("wishart: df = " + std::to_string(df) +
                               " must exceed d - 1 = " + std::to_string(d - 1));
  const LowerTriangular l = cholesky(scale);

  Matrix bartlett = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) bartlett(i, j) = rng.normal();
    bartlett(i, i) = std::sqrt(rng.chi_squared(df - static_cast<double>(i)));
  }
  const Matrix la = l.matrix() * bartlett;
  return SymmetricMatrix(la * la.transpose());
}

SymmetricMatrix sample_inverse_wishart(double df, const SymmetricMatrix& scale,
                                       RngStream& rng) {
  const Eigen::Index d = scale.dim();
  if (!(df > static_cast<double>(d) - 1.0))
    throw InvalidArgumentError("inverse wishart: df = " + std::to_string(df) +
                               " must exceed d - 1 = " + std::to_string(d - 1));
  return spd_inverse(sample_wishart(df, spd_inverse(scale), rng));
}

}  // namespace swiss
