#include "nestlab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "nestlab/errors.hpp"

namespace nestlab {

void ToleranceConfig::validate() const {
  if (!(eq_tol > 0) || !(rank_floor > 0) || !(psd_tol > 0) ||
      (rank_tol && !(*rank_tol > 0))) {
    throw PreconditionError("tolerances must be strictly positive");
  }
}

double ToleranceConfig::rank_threshold(double sigma_max, Index dim) const {
  const double rel = rank_tol ? *rank_tol
                              : static_cast<double>(std::max<Index>(dim, 1)) *
                                    std::numeric_limits<double>::epsilon();
  return std::max(rel * sigma_max, rank_floor);
}

LeftSvd left_svd(const CMatrix& x) {
  Eigen::JacobiSVD<CMatrix> svd(x, Eigen::ComputeThinU);
  LeftSvd out{svd.singularValues(), svd.matrixU()};
  if (!out.values.allFinite() || !out.u.allFinite()) throw NumericalError("left_svd: non-finite decomposition");
  return out;
}

double op_norm(const CMatrix& x) {
  if (x.size() == 0) return 0.0;
  if (x.rows() == 1 || x.cols() == 1) return x.norm();
  Eigen::JacobiSVD<CMatrix> svd(x);
  return svd.singularValues()(0);
}

double fro_norm(const CMatrix& x) { return x.norm(); }

bool all_finite(const CMatrix& x) { return x.allFinite(); }

void require_finite(const CMatrix& x, const char* what) {
  if (!x.allFinite()) throw PreconditionError(std::string(what) + ": non-finite entries");
}

void require_square(const CMatrix& x, const char* what) {
  if (x.rows() != x.cols() || x.rows() < 1) {
    throw PreconditionError(std::string(what) + ": expected a non-empty square matrix, got " +
                            std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
  }
}

bool is_hermitian(const CMatrix& x, const ToleranceConfig& tol) {
  if (x.rows() != x.cols()) return false;
  return (x - x.adjoint()).norm() <= tol.eq_tol * std::max(1.0, x.norm());
}

bool is_projection(const CMatrix& p, const ToleranceConfig& tol) {
  if (p.rows() != p.cols() || !p.allFinite()) return false;
  const double scale = std::max(1.0, p.norm());
  return (p - p.adjoint()).norm() <= tol.eq_tol * scale &&
         (p * p - p).norm() <= tol.eq_tol * scale;
}

bool approx_equal(const CMatrix& a, const CMatrix& b, const ToleranceConfig& tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return (a - b).norm() <= tol.eq_tol * std::max({1.0, a.norm(), b.norm()});
}

CMatrix hermitian_part(const CMatrix& x) { return (x + x.adjoint()) / 2.0; }

void normalize_column_phases(CMatrix& basis) {
  for (Index j = 0; j < basis.cols(); ++j) {
    Index best = 0;
    double best_abs = -1.0;
    for (Index i = 0; i < basis.rows(); ++i) {
      // Strict comparison with a small margin keeps the choice stable when
      // two entries have (numerically) equal modulus.
      const double a = std::abs(basis(i, j));
      if (a > best_abs * (1.0 + 1e-8) + 1e-14) {
        best_abs = a;
        best = i;
      }
    }
    if (best_abs > 0) {
      const Complex phase = std::conj(basis(best, j)) / std::abs(basis(best, j));
      basis.col(j) *= phase;
      basis(best, j) = std::abs(basis(best, j));
    }
  }
}

HermitianEig hermitian_eig(const CMatrix& x, const ToleranceConfig& tol) {
  require_square(x, "hermitian_eig");
  require_finite(x, "hermitian_eig");
  if (!is_hermitian(x, tol)) throw PreconditionError("hermitian_eig: matrix is not hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(x));
  if (es.info() != Eigen::Success) throw NumericalError("hermitian_eig: eigensolver failed");
  HermitianEig out{es.eigenvalues(), es.eigenvectors()};
  normalize_column_phases(out.vectors);
  return out;
}

CMatrix range_basis(const CMatrix& columns, const ToleranceConfig& tol) {
  const Index n = columns.rows();
  if (columns.cols() == 0 || n == 0) return CMatrix(n, 0);
  require_finite(columns, "range_basis");
  const auto svd = left_svd(columns);
  const auto& s = svd.values;
  const double thr = tol.rank_threshold(s(0), std::max(n, columns.cols()));
  Index rank = 0;
  while (rank < s.size() && s(rank) > thr) ++rank;
  CMatrix basis = svd.u.leftCols(rank);
  normalize_column_phases(basis);
  return basis;
}

CMatrix null_space(const CMatrix& a, const ToleranceConfig& tol) {
  const Index r = a.cols();
  if (a.rows() == 0) return CMatrix::Identity(r, r);
  const CMatrix row_space = range_basis(a.adjoint(), tol);
  const Index rank = row_space.cols();
  if (rank == 0) return CMatrix::Identity(r, r);
  if (rank == r) return CMatrix(r, 0);
  Eigen::HouseholderQR<CMatrix> qr(row_space);
  CMatrix q = qr.householderQ();
  CMatrix kernel = q.rightCols(r - rank);
  // Re-orthogonalize against the row space once; Householder Q is already
  // orthonormal, this only removes roundoff leakage.
  kernel -= row_space * (row_space.adjoint() * kernel);
  Eigen::HouseholderQR<CMatrix> qr2(kernel);
  kernel = CMatrix(qr2.householderQ()).leftCols(r - rank);
  return kernel;
}

CMatrix projection_range(const CMatrix& p) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(p));
  const auto& ev = es.eigenvalues();
  std::vector<Index> keep;
  for (Index i = ev.size() - 1; i >= 0; --i) {
    if (ev(i) > 0.5) keep.push_back(i);
  }
  CMatrix basis(p.rows(), static_cast<Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) basis.col(static_cast<Index>(k)) = es.eigenvectors().col(keep[k]);
  normalize_column_phases(basis);
  return basis;
}

CMatrix range_projection(std::span<const CVector> vectors, Index dim, const ToleranceConfig& tol) {
  CMatrix cols(dim, static_cast<Index>(vectors.size()));
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    if (vectors[k].size() != dim) {
      throw PreconditionError("range_projection: vector " + std::to_string(k) + " has dimension " +
                              std::to_string(vectors[k].size()) + ", expected " + std::to_string(dim));
    }
    cols.col(static_cast<Index>(k)) = vectors[k];
  }
  return range_projection(cols, tol);
}

CMatrix range_projection(const CMatrix& columns, const ToleranceConfig& tol) {
  const CMatrix b = range_basis(columns, tol);
  CMatrix p = b * b.adjoint();
  return hermitian_part(p);
}

CMatrix cholesky_upper(const CMatrix& x, const ToleranceConfig& tol) {
  require_square(x, "cholesky_upper");
  const auto eig = hermitian_eig(x, tol);
  const double scale = std::max(std::abs(eig.values(0)), std::abs(eig.values(eig.values.size() - 1)));
  if (!(eig.values(0) > tol.psd_tol * scale)) {
    throw PreconditionError("cholesky_upper: matrix is not positive definite (smallest eigenvalue " +
                            std::to_string(eig.values(0)) + ")");
  }
  Eigen::LLT<CMatrix> llt(hermitian_part(x));
  if (llt.info() != Eigen::Success) throw NumericalError("cholesky_upper: factorization failed");
  CMatrix u = llt.matrixU();
  for (Index i = 0; i < u.rows(); ++i) {
    u(i, i) = Complex(u(i, i).real(), 0.0);
    for (Index j = 0; j < i; ++j) u(i, j) = 0.0;
  }
  return u;
}

CVector vec(const CMatrix& x) { return Eigen::Map<const CVector>(x.data(), x.size()); }

CMatrix unvec(const Eigen::Ref<const CVector>& v, Index n) {
  CMatrix out(n, n);
  Eigen::Map<CVector>(out.data(), n * n) = v;
  return out;
}

CMatrix matrix_unit(Index n, Index row, Index col) {
  CMatrix e = CMatrix::Zero(n, n);
  e(row, col) = 1.0;
  return e;
}

CMatrix coordinate_projection(Index n, std::span<const Index> indices) {
  CMatrix p = CMatrix::Zero(n, n);
  for (Index i : indices) {
    if (i < 0 || i >= n) throw PreconditionError("coordinate index out of range: " + std::to_string(i));
    p(i, i) = 1.0;
  }
  return p;
}

CMatrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) {
      const double re = g(rng);
      const double im = g(rng);
      m(i, j) = Complex(re, im);
    }
  return m;
}

CVector gaussian_vector(Index n, Rng& rng) { return gaussian_matrix(n, 1, rng).col(0); }

CMatrix random_unitary(Index n, Rng& rng) {
  Eigen::HouseholderQR<CMatrix> qr(gaussian_matrix(n, n, rng));
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    const Complex d = r(j, j);
    if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

CMatrix random_hermitian(Index n, Rng& rng) { return hermitian_part(gaussian_matrix(n, n, rng)); }

}  // namespace nestlab
