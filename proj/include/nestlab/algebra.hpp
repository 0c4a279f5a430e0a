#pragma once

// Subalgebras of finite-dimensional von Neumann algebras M_{n_1} + ... + M_{n_k},
// represented by Frobenius-orthonormal span bases.

#include <cstdint>
#include <span>
#include <vector>

#include "nestlab/numerics.hpp"

namespace nestlab {

/// Linear subspace of n x n matrices. Columns of `coords` are vectorized,
/// Frobenius-orthonormal matrices.
class SpanBasis {
 public:
  explicit SpanBasis(Index n = 1);

  Index matrix_dim() const { return n_; }
  Index size() const { return coords_.cols(); }
  const CMatrix& coords() const { return coords_; }
  CMatrix element(Index k) const;
  std::vector<CMatrix> elements() const;

  /// Frobenius distance from x to the span.
  double residual(const CMatrix& x) const;
  /// Coefficients of the orthogonal projection of x onto the span.
  CVector coefficients(const CMatrix& x) const;
  CMatrix combine(const Eigen::Ref<const CVector>& coeffs) const;

  /// Adds the directions of `candidates` (matrices) not already spanned.
  /// Returns the number of new basis elements.
  Index extend(std::span<const CMatrix> candidates, const ToleranceConfig& tol);
  Index extend_coords(const CMatrix& candidate_coords, const ToleranceConfig& tol);

  static SpanBasis from_coords(Index n, CMatrix orthonormal_coords);

 private:
  Index n_;
  CMatrix coords_;
};

/// Span equality/inclusion at eq_tol (relative to unit basis elements).
bool span_includes(const SpanBasis& big, const SpanBasis& small, const ToleranceConfig& tol = {});
bool span_equal(const SpanBasis& a, const SpanBasis& b, const ToleranceConfig& tol = {});
SpanBasis span_intersection(const SpanBasis& a, const SpanBasis& b, const ToleranceConfig& tol = {});

/// The ambient von Neumann algebra, block diagonal with full blocks:
/// M_{n_1} + ... + M_{n_k} acting on C^{n_1 + ... + n_k}.
class AmbientAlgebra {
 public:
  explicit AmbientAlgebra(std::vector<Index> block_dims);
  static AmbientAlgebra full(Index n) { return AmbientAlgebra({n}); }

  Index dim() const { return dim_; }
  const std::vector<Index>& block_dims() const { return block_dims_; }
  Index block_count() const { return static_cast<Index>(block_dims_.size()); }
  Index block_offset(Index block) const { return offsets_[static_cast<std::size_t>(block)]; }
  bool is_factor() const { return block_dims_.size() == 1; }

  /// Matrix units inside the diagonal blocks.
  const SpanBasis& basis() const { return basis_; }
  /// Frobenius norm of the off-block part.
  double residual(const CMatrix& x) const;
  bool contains(const CMatrix& x, const ToleranceConfig& tol = {}) const;

  /// Identity of block i; these span the center (and the commutant).
  CMatrix central_projection(Index block) const;
  std::vector<CMatrix> central_projections() const;

  bool operator==(const AmbientAlgebra& other) const { return block_dims_ == other.block_dims_; }

 private:
  std::vector<Index> block_dims_;
  std::vector<Index> offsets_;
  Index dim_ = 0;
  SpanBasis basis_;
};

/// A unital subalgebra of an ambient algebra.
class MatrixAlgebra {
 public:
  /// Wraps a span that is already known to be a unital algebra. Closure under
  /// multiplication is spot-checked on seeded random pairs.
  static MatrixAlgebra from_span(AmbientAlgebra ambient, std::vector<CMatrix> generators,
                                 SpanBasis basis, const ToleranceConfig& tol = {});

  const AmbientAlgebra& ambient() const { return ambient_; }
  Index dim() const { return ambient_.dim(); }
  Index dimension() const { return basis_.size(); }
  const std::vector<CMatrix>& generators() const { return generators_; }
  const SpanBasis& basis() const { return basis_; }
  CMatrix element(Index k) const { return basis_.element(k); }
  std::vector<CMatrix> elements() const { return basis_.elements(); }

  /// A random element sum_k c_k b_k with complex Gaussian coefficients.
  CMatrix random_element(Rng& rng) const;

 private:
  MatrixAlgebra(AmbientAlgebra ambient, std::vector<CMatrix> generators, SpanBasis basis)
      : ambient_(std::move(ambient)), generators_(std::move(generators)), basis_(std::move(basis)) {}

  AmbientAlgebra ambient_;
  std::vector<CMatrix> generators_;
  SpanBasis basis_;
};

/// Smallest unital subalgebra of `ambient` containing the generators.
MatrixAlgebra close_algebra(std::span<const CMatrix> generators, const AmbientAlgebra& ambient,
                            const ToleranceConfig& tol = {});
/// Smallest unital subalgebra containing `a` and `extra`.
MatrixAlgebra extend_algebra(const MatrixAlgebra& a, std::span<const CMatrix> extra,
                             const ToleranceConfig& tol = {});

struct Membership {
  bool member = false;
  double residual = 0.0;
};

Membership contains(const MatrixAlgebra& a, const CMatrix& x, const ToleranceConfig& tol = {});

/// {x in M_n : xs = sx for all s}. The result lives in the full ambient M_n.
MatrixAlgebra commutant(std::span<const CMatrix> s, Index n, const ToleranceConfig& tol = {});

struct CentralDecomposition {
  /// Ranks of the minimal central projections, in the order of U's columns.
  std::vector<Index> blocks;
  /// For each summand, k with M z_i isomorphic to M_k (so dim(M z_i) = k^2).
  std::vector<Index> summand_ranks;
  std::vector<CMatrix> central_projections;
  /// Unitary; U^* m U is block diagonal with the `blocks` sizes.
  CMatrix unitary;
  bool is_factor = false;
};

/// Decomposes a *-closed algebra equal to its double commutant.
CentralDecomposition central_decomposition(const MatrixAlgebra& m, std::uint64_t seed = 0,
                                           const ToleranceConfig& tol = {});

struct Compression {
  MatrixAlgebra algebra;
  /// n x r isometry onto ran(p - q); the corner algebra is V^* A V.
  CMatrix isometry;
};

/// Corner algebra (p - q) A (p - q) on ran(p - q), for invariant q <= p.
Compression compress(const MatrixAlgebra& a, const CMatrix& p, const CMatrix& q,
                     const ToleranceConfig& tol = {});

/// max_a ||(1 - p) a p|| / max(1, ||a||) over the basis of `a`.
double invariance_defect(const MatrixAlgebra& a, const CMatrix& p);

/// Span of the adjoints of the basis.
SpanBasis adjoint_span(const SpanBasis& s);
MatrixAlgebra adjoint_algebra(const MatrixAlgebra& a, const ToleranceConfig& tol = {});
bool is_star_closed(const MatrixAlgebra& a, const ToleranceConfig& tol = {});
/// A intersect A^*, the largest *-subalgebra of A.
MatrixAlgebra self_adjoint_part(const MatrixAlgebra& a, const ToleranceConfig& tol = {});
/// u^* A u, with the ambient unchanged (u should normalize the ambient).
MatrixAlgebra conjugate(const MatrixAlgebra& a, const CMatrix& u, const ToleranceConfig& tol = {});
/// Every product of basis elements lies in the span (exhaustive; O(d^2)).
bool is_closed_under_products(const MatrixAlgebra& a, const ToleranceConfig& tol = {});

}  // namespace nestlab
