#pragma once

// Dense complex linear algebra substrate. Every equality, rank and positivity
// decision in the library goes through a ToleranceConfig.

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace nestlab {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;
using Rng = std::mt19937_64;

struct ToleranceConfig {
  /// Relative tolerance for matrix equality and membership.
  double eq_tol = 1e-9;
  /// Relative singular-value threshold. When unset, dim * eps * sigma_max.
  std::optional<double> rank_tol;
  /// Absolute floor applied to every rank threshold.
  double rank_floor = 1e-12;
  /// Relative eigenvalue floor for positive definiteness.
  double psd_tol = 1e-10;

  /// Throws PreconditionError unless every tolerance is strictly positive.
  void validate() const;

  /// Singular values at or below this are treated as zero.
  double rank_threshold(double sigma_max, Index dim) const;
};

struct HermitianEig {
  RVector values;   // ascending
  CMatrix vectors;  // unitary, columns are eigenvectors
};

HermitianEig hermitian_eig(const CMatrix& x, const ToleranceConfig& tol = {});

/// Orthogonal projection onto the span of the given columns.
CMatrix range_projection(std::span<const CVector> vectors, Index dim,
                         const ToleranceConfig& tol = {});
CMatrix range_projection(const CMatrix& columns, const ToleranceConfig& tol = {});

/// Upper triangular U with positive real diagonal and U^* U = x.
CMatrix cholesky_upper(const CMatrix& x, const ToleranceConfig& tol = {});

// ---------------------------------------------------------------------------
// Helpers shared by the other modules.

struct LeftSvd {
  RVector values;  // descending
  CMatrix u;       // thin left singular vectors
};

/// Thin SVD (values and left vectors), one-sided Jacobi. Eigen's divide and
/// conquer SVD returns wrong left vectors for some complex inputs.
LeftSvd left_svd(const CMatrix& x);

/// Orthonormal basis of the column span (rank by singular values).
CMatrix range_basis(const CMatrix& columns, const ToleranceConfig& tol = {});

/// Orthonormal basis of ker(a) (rank by singular values).
CMatrix null_space(const CMatrix& a, const ToleranceConfig& tol = {});

/// Orthonormal basis for the range of a hermitian idempotent.
CMatrix projection_range(const CMatrix& p);

double op_norm(const CMatrix& x);
double fro_norm(const CMatrix& x);

bool all_finite(const CMatrix& x);
void require_finite(const CMatrix& x, const char* what);
void require_square(const CMatrix& x, const char* what);
bool is_hermitian(const CMatrix& x, const ToleranceConfig& tol = {});
bool is_projection(const CMatrix& p, const ToleranceConfig& tol = {});
bool approx_equal(const CMatrix& a, const CMatrix& b, const ToleranceConfig& tol = {});

/// Hermitian part (x + x^*)/2.
CMatrix hermitian_part(const CMatrix& x);

/// Multiplies each column by a phase so that its largest-modulus entry is real
/// and positive. Makes spectral bases reproducible.
void normalize_column_phases(CMatrix& basis);

/// Column-major vectorization and its inverse.
CVector vec(const CMatrix& x);
CMatrix unvec(const Eigen::Ref<const CVector>& v, Index n);

CMatrix matrix_unit(Index n, Index row, Index col);
CMatrix coordinate_projection(Index n, std::span<const Index> indices);

CMatrix gaussian_matrix(Index rows, Index cols, Rng& rng);
CVector gaussian_vector(Index n, Rng& rng);
CMatrix random_unitary(Index n, Rng& rng);
CMatrix random_hermitian(Index n, Rng& rng);

}  // namespace nestlab
