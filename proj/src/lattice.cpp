#include "nestlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "nestlab/errors.hpp"

namespace nestlab {

namespace {

void require_same_dim(const Projection& p, Index n, const char* what) {
  if (p.dim() != n) {
    throw PreconditionError(std::string(what) + ": projection dimension " + std::to_string(p.dim()) +
                            " differs from " + std::to_string(n));
  }
}

/// Orthonormal basis of span{b v : b in basis}, computed without forming the
/// basis matrices: b v = sum_j v_j * (column j of b).
CMatrix cyclic_basis(const CMatrix& coords, Index n, const CVector& v, const ToleranceConfig& tol) {
  CMatrix images = CMatrix::Zero(n, coords.cols());
  for (Index j = 0; j < n; ++j) {
    if (v(j) != Complex(0.0)) images += v(j) * coords.middleRows(j * n, n);
  }
  if (images.cols() == 0) return CMatrix(n, 0);
  const auto svd = left_svd(images);
  const auto& s = svd.values;
  if (s.size() == 0 || s(0) <= tol.rank_floor) return CMatrix(n, 0);
  // Approximate eigenvectors leave residue at roundoff scale in the images;
  // anything below eq_tol relative is treated as numerical noise.
  const double thr = std::max(tol.rank_threshold(s(0), n), tol.eq_tol * s(0));
  Index rank = 0;
  while (rank < s.size() && s(rank) > thr) ++rank;
  return svd.u.leftCols(rank);
}

struct Collector {
  Index n;
  const ToleranceConfig& tol;
  std::vector<Projection> items;

  bool add(const Projection& p) {
    for (const auto& q : items)
      if (same_projection(p, q, tol)) return false;
    items.push_back(p);
    return true;
  }
};

/// Eigenvectors of b, plus sums and differences of eigenvectors whose
/// eigenvalues cluster (where the eigenspace basis is arbitrary).
std::vector<CVector> spectral_candidates(const CMatrix& b, const ToleranceConfig& tol) {
  std::vector<CVector> out;
  Eigen::ComplexEigenSolver<CMatrix> es(b);
  if (es.info() != Eigen::Success) return out;
  const auto& ev = es.eigenvalues();
  const Index n = b.rows();
  for (Index i = 0; i < n; ++i) out.push_back(es.eigenvectors().col(i));
  const double radius = std::sqrt(tol.eq_tol) * std::max(1.0, b.norm());
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      if (std::abs(ev(i) - ev(j)) > radius) continue;
      out.push_back(es.eigenvectors().col(i) + es.eigenvectors().col(j));
      out.push_back(es.eigenvectors().col(i) - es.eigenvectors().col(j));
    }
  return out;
}

bool diag_before(const Projection& a, const Projection& b) {
  if (a.rank() != b.rank()) return a.rank() < b.rank();
  for (Index i = 0; i < a.dim(); ++i) {
    const double x = a.matrix()(i, i).real();
    const double y = b.matrix()(i, i).real();
    if (std::abs(x - y) > 1e-6) return x > y;
  }
  return false;
}

void sort_elements(std::vector<Projection>& els) { std::stable_sort(els.begin(), els.end(), diag_before); }

}  // namespace

// ---------------------------------------------------------------------------
// Projection

Projection Projection::from_matrix(const CMatrix& m, const ToleranceConfig& tol) {
  require_square(m, "Projection");
  require_finite(m, "Projection");
  if (!is_projection(m, tol)) throw PreconditionError("Projection: matrix is not a hermitian idempotent");
  const double tr = m.trace().real();
  const double rounded = std::round(tr);
  if (std::abs(tr - rounded) > tol.eq_tol * std::max(1.0, static_cast<double>(m.rows()))) {
    throw PreconditionError("Projection: trace is not an integer");
  }
  return Projection(hermitian_part(m), static_cast<Index>(rounded));
}

Projection Projection::onto(const CMatrix& columns, const ToleranceConfig& tol) {
  const CMatrix b = range_basis(columns, tol);
  return Projection(hermitian_part(b * b.adjoint()), b.cols());
}

Projection Projection::zero(Index n) { return Projection(CMatrix::Zero(n, n), 0); }

Projection Projection::identity(Index n) { return Projection(CMatrix::Identity(n, n), n); }

Projection Projection::coordinate(Index n, std::span<const Index> indices) {
  const CMatrix p = coordinate_projection(n, indices);
  return Projection(p, static_cast<Index>(std::llround(p.trace().real())));
}

Projection Projection::complement() const {
  return Projection(CMatrix::Identity(dim(), dim()) - m_, dim() - rank_);
}

bool leq(const Projection& p, const Projection& q, const ToleranceConfig& tol) {
  if (p.rank() > q.rank()) return false;
  return (p.matrix() * q.matrix() - p.matrix()).norm() <= tol.eq_tol * std::max(1.0, p.matrix().norm());
}

bool same_projection(const Projection& p, const Projection& q, const ToleranceConfig& tol) {
  return p.dim() == q.dim() && p.rank() == q.rank() &&
         (p.matrix() - q.matrix()).norm() <= tol.eq_tol * std::max(1.0, p.matrix().norm());
}

double commutator_norm(const Projection& p, const Projection& q) {
  return op_norm(p.matrix() * q.matrix() - q.matrix() * p.matrix());
}

Projection join(std::span<const Projection> ps, Index dim, const ToleranceConfig& tol) {
  Index cols = 0;
  for (const auto& p : ps) {
    require_same_dim(p, dim, "join");
    cols += p.rank();
  }
  if (cols == 0) return Projection::zero(dim);
  CMatrix ranges(dim, cols);
  Index c = 0;
  for (const auto& p : ps) {
    if (p.rank() == 0) continue;
    const CMatrix r = p.range();
    ranges.middleCols(c, r.cols()) = r;
    c += r.cols();
  }
  return Projection::onto(ranges.leftCols(c), tol);
}

Projection meet(std::span<const Projection> ps, Index dim, const ToleranceConfig& tol) {
  for (const auto& p : ps) require_same_dim(p, dim, "meet");
  if (ps.empty()) return Projection::identity(dim);
  // ran(p1) & ... & ran(pk) = ker of the stacked complements.
  CMatrix stacked(dim * static_cast<Index>(ps.size()), dim);
  for (std::size_t k = 0; k < ps.size(); ++k) {
    stacked.middleRows(static_cast<Index>(k) * dim, dim) = CMatrix::Identity(dim, dim) - ps[k].matrix();
  }
  const CMatrix kernel = null_space(stacked, tol);
  if (kernel.cols() == 0) return Projection::zero(dim);
  return Projection::onto(kernel, tol);
}

std::string to_string(LatticeClass c) {
  switch (c) {
    case LatticeClass::Nest:
      return "NEST";
    case LatticeClass::CslNotNest:
      return "CSL_NOT_NEST";
    case LatticeClass::NonCsl:
      return "NON_CSL";
  }
  return "UNKNOWN";
}

std::optional<std::size_t> ProjectionLattice::find(const Projection& p, const ToleranceConfig& tol) const {
  for (std::size_t i = 0; i < elements.size(); ++i)
    if (same_projection(elements[i], p, tol)) return i;
  return std::nullopt;
}

InvariantCheck invariant_check(const Projection& p, const MatrixAlgebra& a, const ToleranceConfig& tol) {
  require_same_dim(p, a.dim(), "invariant_check");
  const double defect = invariance_defect(a, p.matrix());
  return {defect <= tol.eq_tol && a.ambient().contains(p.matrix(), tol), defect};
}

LatticeClass classify_commuting(std::span<const Projection> elements, const ToleranceConfig& tol) {
  for (std::size_t i = 0; i < elements.size(); ++i)
    for (std::size_t j = i + 1; j < elements.size(); ++j) {
      if (!leq(elements[i], elements[j], tol) && !leq(elements[j], elements[i], tol)) {
        return LatticeClass::CslNotNest;
      }
    }
  return LatticeClass::Nest;
}

ProjectionLattice compute_lat(const MatrixAlgebra& a, const LatOptions& options, const ToleranceConfig& tol) {
  tol.validate();
  if (options.budget < 0) throw PreconditionError("compute_lat: budget must be non-negative");
  const Index n = a.dim();
  const auto& ambient = a.ambient();

  // p lies in M iff it commutes with M' = span of the block identities, so
  // Lat_M(A) is the full invariant lattice of the algebra generated by A and M'.
  const auto centrals = ambient.central_projections();
  const MatrixAlgebra b = ambient.is_factor() ? a : extend_algebra(a, centrals, tol);
  const SpanBasis b_star = adjoint_span(b.basis());

  Rng rng(options.seed);
  std::vector<CVector> for_b;
  std::vector<CVector> for_b_star;
  for (Index i = 0; i < n; ++i) {
    CVector e = CVector::Zero(n);
    e(i) = 1.0;
    for_b.push_back(e);
    for_b_star.push_back(e);
  }
  for (int round = 0; round < 2; ++round) {
    const CMatrix x = b.random_element(rng);
    for (auto& v : spectral_candidates(x, tol)) for_b.push_back(std::move(v));
    for (auto& v : spectral_candidates(x.adjoint(), tol)) for_b_star.push_back(std::move(v));
  }
  for (int k = 0; k < options.budget; ++k) {
    for_b.push_back(gaussian_vector(n, rng));
    for_b_star.push_back(gaussian_vector(n, rng));
  }

  Collector found{n, tol, {}};
  found.add(Projection::zero(n));
  found.add(Projection::identity(n));
  auto consider = [&](const Projection& p) {
    if (p.rank() == 0 || p.rank() == n) return;
    if (!invariant_check(p, a, tol).invariant) return;
    found.add(p);
  };
  for (const auto& v : for_b) {
    const CMatrix w = cyclic_basis(b.basis().coords(), n, v, tol);
    consider(Projection::onto(w, tol));
  }
  for (const auto& v : for_b_star) {
    // A subspace invariant under B^* has a B-invariant orthocomplement.
    const CMatrix w = cyclic_basis(b_star.coords(), n, v, tol);
    consider(Projection::onto(w, tol).complement());
  }

  ProjectionLattice out;
  out.dim = n;

  // Verified witness: the most non-commuting pair.
  double worst = 0.0;
  std::pair<std::size_t, std::size_t> worst_pair{0, 0};
  for (std::size_t i = 0; i < found.items.size(); ++i)
    for (std::size_t j = i + 1; j < found.items.size(); ++j) {
      const double c = commutator_norm(found.items[i], found.items[j]);
      if (c > worst) {
        worst = c;
        worst_pair = {i, j};
      }
    }
  if (worst > 10.0 * tol.eq_tol) {
    out.classification = LatticeClass::NonCsl;
    out.witness = std::make_pair(found.items[worst_pair.first], found.items[worst_pair.second]);
    out.elements = found.items;
    sort_elements(out.elements);
    out.complete = false;
    return out;
  }
  if (worst > tol.eq_tol) {
    throw IndeterminateError("NON_CSL_SUSPECTED: invariant projections commute only to " + std::to_string(worst));
  }

  // Breadth-first join/meet closure.
  const std::size_t cap = std::size_t{1} << std::min<Index>(n, 20);
  for (bool grew = true; grew;) {
    grew = false;
    const std::size_t count = found.items.size();
    for (std::size_t i = 0; i < count; ++i)
      for (std::size_t j = i + 1; j < count; ++j) {
        const auto& p = found.items[i];
        const auto& q = found.items[j];
        if (leq(p, q, tol) || leq(q, p, tol)) continue;
        const Projection pair[2] = {p, q};
        grew |= found.add(join(pair, n, tol));
        grew |= found.add(meet(pair, n, tol));
        if (found.items.size() > cap) {
          throw IndeterminateError("NON_CSL_SUSPECTED: lattice closure exceeded " + std::to_string(cap) + " elements");
        }
      }
  }
  for (std::size_t i = 0; i < found.items.size(); ++i)
    for (std::size_t j = i + 1; j < found.items.size(); ++j) {
      if (commutator_norm(found.items[i], found.items[j]) > tol.eq_tol) {
        throw IndeterminateError("NON_CSL_SUSPECTED: closure produced non-commuting projections");
      }
    }

  out.elements = std::move(found.items);
  sort_elements(out.elements);
  out.classification = classify_commuting(out.elements, tol);
  out.complete = true;
  return out;
}

std::vector<Atom> atoms(const ProjectionLattice& lattice, const ToleranceConfig& tol) {
  if (lattice.classification == LatticeClass::NonCsl) throw PreconditionError("atoms: lattice is not commutative");
  if (!lattice.complete) throw PreconditionError("atoms: lattice is incomplete");
  std::vector<Atom> out;
  for (const auto& p : lattice.elements) {
    if (p.rank() == 0) continue;
    std::vector<Projection> below;
    for (const auto& e : lattice.elements) {
      if (e.rank() < p.rank() && leq(e, p, tol)) below.push_back(e);
    }
    Projection p_minus = join(below, lattice.dim, tol);
    if (p_minus.rank() == p.rank()) continue;
    Projection r = Projection::from_matrix(p.matrix() - p_minus.matrix(), tol);
    out.push_back({std::move(r), p, std::move(p_minus)});
  }
  return out;
}

CompressedLattice lattice_compress(const ProjectionLattice& lattice, const Projection& p, const Projection& q,
                                   const ToleranceConfig& tol) {
  if (lattice.classification == LatticeClass::NonCsl) throw PreconditionError("lattice_compress: lattice is not commutative");
  if (!lattice.find(p, tol) || !lattice.find(q, tol)) throw PreconditionError("lattice_compress: p and q must belong to the lattice");
  if (!leq(p, q, tol) || p.rank() == q.rank()) throw PreconditionError("lattice_compress: requires p < q");
  const CMatrix r = q.matrix() - p.matrix();
  const CMatrix v = projection_range(r);

  CompressedLattice out;
  out.isometry = v;
  out.lattice.dim = v.cols();
  for (const auto& e : lattice.elements) {
    if (!leq(p, e, tol) || !leq(e, q, tol)) continue;
    const CMatrix s = v.adjoint() * (e.matrix() - p.matrix()) * v;
    out.lattice.elements.push_back(Projection::from_matrix(hermitian_part(s), tol));
  }
  sort_elements(out.lattice.elements);
  out.lattice.classification = classify_commuting(out.lattice.elements, tol);
  out.lattice.complete = lattice.complete;
  return out;
}

}  // namespace nestlab
