#pragma once

// Invariant projection lattices Lat_M(A) and their classification.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nestlab/algebra.hpp"
#include "nestlab/numerics.hpp"

namespace nestlab {

/// An orthogonal projection with its (integer) rank.
class Projection {
 public:
  /// Validates P^2 = P = P^* and that the trace is within eq_tol of an integer.
  static Projection from_matrix(const CMatrix& m, const ToleranceConfig& tol = {});
  /// Projection onto the span of the columns.
  static Projection onto(const CMatrix& columns, const ToleranceConfig& tol = {});
  static Projection zero(Index n);
  static Projection identity(Index n);
  static Projection coordinate(Index n, std::span<const Index> indices);

  const CMatrix& matrix() const { return m_; }
  Index rank() const { return rank_; }
  Index dim() const { return m_.rows(); }
  Projection complement() const;
  /// Orthonormal basis of the range.
  CMatrix range() const { return projection_range(m_); }

 private:
  Projection(CMatrix m, Index rank) : m_(std::move(m)), rank_(rank) {}
  CMatrix m_;
  Index rank_ = 0;
};

/// p <= q, i.e. pq = p.
bool leq(const Projection& p, const Projection& q, const ToleranceConfig& tol = {});
bool same_projection(const Projection& p, const Projection& q, const ToleranceConfig& tol = {});
double commutator_norm(const Projection& p, const Projection& q);

/// Empty join is 0, empty meet is I (dimension taken from `dim`).
Projection join(std::span<const Projection> ps, Index dim, const ToleranceConfig& tol = {});
Projection meet(std::span<const Projection> ps, Index dim, const ToleranceConfig& tol = {});

enum class LatticeClass { Nest, CslNotNest, NonCsl };
std::string to_string(LatticeClass c);

struct ProjectionLattice {
  Index dim = 0;
  /// Ascending by rank; always contains 0 and I.
  std::vector<Projection> elements;
  LatticeClass classification = LatticeClass::Nest;
  /// Two invariant projections that do not commute (present iff NonCsl).
  std::optional<std::pair<Projection, Projection>> witness;
  bool complete = false;

  /// Index of an element equal to p at eq_tol, if any.
  std::optional<std::size_t> find(const Projection& p, const ToleranceConfig& tol = {}) const;
};

struct InvariantCheck {
  bool invariant = false;
  double defect = 0.0;
};

InvariantCheck invariant_check(const Projection& p, const MatrixAlgebra& a, const ToleranceConfig& tol = {});

struct LatOptions {
  std::uint64_t seed = 0;
  /// Number of random vectors whose cyclic subspaces are sampled.
  int budget = 64;
};

/// Computes Lat_M(A). Throws IndeterminateError (NON_CSL_SUSPECTED) when the
/// join/meet closure outgrows its cap or a commutator falls in the ambiguous
/// band (eq_tol, 10 eq_tol].
ProjectionLattice compute_lat(const MatrixAlgebra& a, const LatOptions& options = {},
                              const ToleranceConfig& tol = {});

/// Classifies a finite set of pairwise commuting projections already closed
/// under join and meet.
LatticeClass classify_commuting(std::span<const Projection> elements, const ToleranceConfig& tol = {});

struct Atom {
  Projection atom;
  Projection p;
  Projection p_minus;
};

std::vector<Atom> atoms(const ProjectionLattice& lattice, const ToleranceConfig& tol = {});

struct CompressedLattice {
  ProjectionLattice lattice;
  /// n x rank(q - p) isometry onto ran(q - p).
  CMatrix isometry;
};

/// {s : p + s in L} on the range of q - p, for p < q in L.
CompressedLattice lattice_compress(const ProjectionLattice& lattice, const Projection& p, const Projection& q,
                                   const ToleranceConfig& tol = {});

}  // namespace nestlab
