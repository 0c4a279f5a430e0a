#pragma once

// Canonical form of a pair of projections (two-subspace theory).

#include "nestlab/lattice.hpp"
#include "nestlab/numerics.hpp"

namespace nestlab {

/// With W = U^*, the ambient space splits along the columns of W as
///   E&F + E&F' + E'&F + E'&F' + K + K
/// and, in those coordinates,
///   P = 1 + 1 + 0 + 0 + [1 0; 0 0],   Q = 1 + 0 + 1 + 0 + [x^2 xy; xy y^2].
struct HalmosDecomposition {
  Projection corner_ef;
  Projection corner_ef_perp;
  Projection corner_eperp_f;
  Projection corner_eperp_fperp;
  /// Dimension of one copy of K.
  Index generic_dim = 0;
  /// Maps the ambient space onto the ordered direct sum.
  CMatrix unitary;
  /// Positive diagonal contractions, x^2 descending, x^2 + y^2 = 1.
  CMatrix x;
  CMatrix y;

  /// Block forms of P and Q in the canonical coordinates.
  CMatrix canonical_p() const;
  CMatrix canonical_q() const;
  /// Column offset of the first copy of K in the canonical coordinates.
  Index generic_offset() const;
};

HalmosDecomposition halmos_decompose(const Projection& p, const Projection& q, const ToleranceConfig& tol = {});

/// ||PQ - QP|| <= eq_tol; agrees with halmos_decompose(P, Q).generic_dim == 0.
bool commutes_iff_no_generic(const Projection& p, const Projection& q, const ToleranceConfig& tol = {});

}  // namespace nestlab
