#pragma once

// Alg_M(E), reflexive hulls, and the masa criterion.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nestlab/algebra.hpp"
#include "nestlab/lattice.hpp"

namespace nestlab {

/// {x in M : (1 - p) x p = 0 for every p in E}.
MatrixAlgebra alg_of(std::span<const Projection> lattice, const AmbientAlgebra& ambient,
                     const ToleranceConfig& tol = {});

struct HullResult {
  ProjectionLattice lattice;
  /// Empty when the lattice is NON_CSL (the enumeration cannot reach it).
  std::optional<MatrixAlgebra> hull;
};

HullResult reflexive_hull(const MatrixAlgebra& a, const LatOptions& options = {},
                          const ToleranceConfig& tol = {});

enum class ReflexivityStatus { Reflexive, NotReflexive, NotApplicable };
std::string to_string(ReflexivityStatus s);

struct ReflexivityResult {
  ReflexivityStatus status = ReflexivityStatus::NotApplicable;
  /// dim(hull) - dim(A); zero when reflexive or not applicable.
  Index extra_dim = 0;
  HullResult hull;
};

ReflexivityResult is_reflexive(const MatrixAlgebra& a, const LatOptions& options = {},
                               const ToleranceConfig& tol = {});

struct MasaResult {
  bool contains_masa = false;
  /// n pairwise orthogonal rank-one projections in A, summing to I.
  std::optional<std::vector<CMatrix>> masa_basis;
  /// Dimension of the self-adjoint part A & A^*.
  Index self_adjoint_dim = 0;
};

/// Looks for a maximal abelian self-adjoint subalgebra of M_n inside A & A^*.
/// A *-algebra contains a masa iff it is multiplicity free, which holds iff a
/// generic hermitian element has simple spectrum; its eigenprojections then
/// span a masa.
MasaResult masa_check(const MatrixAlgebra& a, std::uint64_t seed = 0, const ToleranceConfig& tol = {});

}  // namespace nestlab
