#include "nestlab/reflexivity.hpp"

#include <algorithm>
#include <cmath>

#include "nestlab/errors.hpp"

namespace nestlab {

MatrixAlgebra alg_of(std::span<const Projection> lattice, const AmbientAlgebra& ambient, const ToleranceConfig& tol) {
  tol.validate();
  const Index n = ambient.dim();
  for (std::size_t k = 0; k < lattice.size(); ++k) {
    const auto& p = lattice[k];
    if (p.dim() != n) throw PreconditionError("alg_of: projection " + std::to_string(k) + " has the wrong dimension");
    if (!ambient.contains(p.matrix(), tol)) {
      throw PreconditionError("alg_of: projection " + std::to_string(k) + " lies outside the ambient");
    }
  }
  const CMatrix& ambient_coords = ambient.basis().coords();
  // Candidates have unit Frobenius norm, so a corner below eq_tol is the
  // membership test of contains(): lattice elements computed numerically are
  // not exact to roundoff.
  ToleranceConfig kernel_tol = tol;
  kernel_tol.rank_floor = std::max(tol.rank_floor, tol.eq_tol);
  // Coefficients (w.r.t. the ambient basis) of the surviving subspace.
  CMatrix coeffs = CMatrix::Identity(ambient_coords.cols(), ambient_coords.cols());
  for (const auto& p : lattice) {
    if (p.rank() == 0 || p.rank() == n || coeffs.cols() == 0) continue;
    const CMatrix range = p.range();
    const CMatrix co_range = p.complement().range();
    const CMatrix current = ambient_coords * coeffs;
    CMatrix constraint(range.cols() * co_range.cols(), coeffs.cols());
    for (Index j = 0; j < coeffs.cols(); ++j) {
      const CMatrix x = unvec(current.col(j), n);
      const CMatrix corner = co_range.adjoint() * x * range;
      constraint.col(j) = vec(corner);
    }
    coeffs = coeffs * null_space(constraint, kernel_tol);
  }
  CMatrix coords = ambient_coords * coeffs;
  if (coords.cols() > 0) {
    Eigen::HouseholderQR<CMatrix> qr(coords);
    coords = CMatrix(qr.householderQ()).leftCols(coeffs.cols());
  }
  return MatrixAlgebra::from_span(ambient, {}, SpanBasis::from_coords(n, std::move(coords)), tol);
}

HullResult reflexive_hull(const MatrixAlgebra& a, const LatOptions& options, const ToleranceConfig& tol) {
  HullResult out{compute_lat(a, options, tol), std::nullopt};
  if (out.lattice.classification == LatticeClass::NonCsl) return out;
  out.hull = alg_of(out.lattice.elements, a.ambient(), tol);
  if (!span_includes(out.hull->basis(), a.basis(), tol)) {
    throw NumericalError("reflexive_hull: hull does not contain the algebra");
  }
  return out;
}

std::string to_string(ReflexivityStatus s) {
  switch (s) {
    case ReflexivityStatus::Reflexive:
      return "REFLEXIVE";
    case ReflexivityStatus::NotReflexive:
      return "NOT_REFLEXIVE";
    case ReflexivityStatus::NotApplicable:
      return "NOT_APPLICABLE";
  }
  return "UNKNOWN";
}

ReflexivityResult is_reflexive(const MatrixAlgebra& a, const LatOptions& options, const ToleranceConfig& tol) {
  ReflexivityResult out;
  out.hull = reflexive_hull(a, options, tol);
  if (!out.hull.hull) return out;
  out.extra_dim = out.hull.hull->dimension() - a.dimension();
  out.status = out.extra_dim == 0 && span_equal(out.hull.hull->basis(), a.basis(), tol)
                   ? ReflexivityStatus::Reflexive
                   : ReflexivityStatus::NotReflexive;
  return out;
}

MasaResult masa_check(const MatrixAlgebra& a, std::uint64_t seed, const ToleranceConfig& tol) {
  tol.validate();
  const Index n = a.dim();
  const MatrixAlgebra d = self_adjoint_part(a, tol);
  MasaResult out;
  out.self_adjoint_dim = d.dimension();
  if (d.dimension() < n) return out;

  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix h = CMatrix::Zero(n, n);
  for (Index k = 0; k < d.dimension(); ++k) {
    const CMatrix e = d.element(k);
    const double re = g(rng);
    const double im = g(rng);
    h += re * (e + e.adjoint()) + im * Complex(0.0, 1.0) * (e - e.adjoint());
  }
  const auto eig = hermitian_eig(h, tol);
  const double gap = tol.eq_tol * std::max(1.0, op_norm(h));
  for (Index i = 1; i < n; ++i) {
    if (eig.values(i) - eig.values(i - 1) <= gap) return out;
  }
  std::vector<CMatrix> family;
  for (Index i = 0; i < n; ++i) {
    CMatrix e = eig.vectors.col(i) * eig.vectors.col(i).adjoint();
    if (!contains(d, e, tol).member) return out;
    family.push_back(std::move(e));
  }
  out.contains_masa = true;
  out.masa_basis = std::move(family);
  return out;
}

}  // namespace nestlab
