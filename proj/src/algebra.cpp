#include "nestlab/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "nestlab/errors.hpp"

namespace nestlab {

namespace {

constexpr std::uint64_t kClosureCheckSeed = 0x6e6573746c6162ULL;

void require_dim(const CMatrix& x, Index n, const char* what) {
  if (x.rows() != n || x.cols() != n) {
    throw PreconditionError(std::string(what) + ": expected " + std::to_string(n) + "x" +
                            std::to_string(n) + " matrix, got " + std::to_string(x.rows()) + "x" +
                            std::to_string(x.cols()));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// SpanBasis

SpanBasis::SpanBasis(Index n) : n_(n), coords_(n * n, 0) {}

SpanBasis SpanBasis::from_coords(Index n, CMatrix orthonormal_coords) {
  SpanBasis s(n);
  s.coords_ = std::move(orthonormal_coords);
  return s;
}

CMatrix SpanBasis::element(Index k) const { return unvec(coords_.col(k), n_); }

std::vector<CMatrix> SpanBasis::elements() const {
  std::vector<CMatrix> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (Index k = 0; k < size(); ++k) out.push_back(element(k));
  return out;
}

double SpanBasis::residual(const CMatrix& x) const {
  const CVector v = vec(x);
  if (size() == 0) return v.norm();
  return (v - coords_ * (coords_.adjoint() * v)).norm();
}

CVector SpanBasis::coefficients(const CMatrix& x) const { return coords_.adjoint() * vec(x); }

CMatrix SpanBasis::combine(const Eigen::Ref<const CVector>& coeffs) const {
  return unvec(coords_ * coeffs, n_);
}

Index SpanBasis::extend(std::span<const CMatrix> candidates, const ToleranceConfig& tol) {
  CMatrix c(n_ * n_, static_cast<Index>(candidates.size()));
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    require_dim(candidates[k], n_, "SpanBasis::extend");
    c.col(static_cast<Index>(k)) = vec(candidates[k]);
  }
  return extend_coords(c, tol);
}

Index SpanBasis::extend_coords(const CMatrix& candidate_coords, const ToleranceConfig& tol) {
  if (candidate_coords.cols() == 0) return 0;
  CMatrix rem = candidate_coords;
  // Columns at roundoff level relative to the batch (e.g. products that
  // vanish exactly) are dropped rather than normalized into noise.
  const double floor = tol.rank_threshold(rem.colwise().norm().maxCoeff(), n_ * n_);
  for (Index j = 0; j < rem.cols(); ++j) {
    const double nrm = rem.col(j).norm();
    if (nrm > floor) {
      rem.col(j) /= nrm;
    } else {
      rem.col(j).setZero();
    }
  }
  // Two passes of classical Gram-Schmidt against the existing basis.
  for (int pass = 0; pass < 2 && size() > 0; ++pass) rem -= coords_ * (coords_.adjoint() * rem);

  const auto svd = left_svd(rem);
  const auto& s = svd.values;
  // Candidates were unit-normalized, so the threshold is relative to 1.
  const double thr = tol.rank_threshold(1.0, n_ * n_);
  Index added = 0;
  while (added < s.size() && s(added) > thr) ++added;
  if (added == 0) return 0;
  CMatrix fresh = svd.u.leftCols(added);
  if (size() > 0) fresh -= coords_ * (coords_.adjoint() * fresh);
  Eigen::HouseholderQR<CMatrix> qr(fresh);
  fresh = CMatrix(qr.householderQ()).leftCols(added);
  CMatrix next(coords_.rows(), size() + added);
  next << coords_, fresh;
  coords_ = std::move(next);
  return added;
}

bool span_includes(const SpanBasis& big, const SpanBasis& small, const ToleranceConfig& tol) {
  if (big.matrix_dim() != small.matrix_dim()) return false;
  for (Index k = 0; k < small.size(); ++k) {
    if (big.residual(small.element(k)) > tol.eq_tol) return false;
  }
  return true;
}

bool span_equal(const SpanBasis& a, const SpanBasis& b, const ToleranceConfig& tol) {
  return a.size() == b.size() && span_includes(a, b, tol) && span_includes(b, a, tol);
}

SpanBasis span_intersection(const SpanBasis& a, const SpanBasis& b, const ToleranceConfig& tol) {
  if (a.matrix_dim() != b.matrix_dim()) throw PreconditionError("span_intersection: dimension mismatch");
  const Index n = a.matrix_dim();
  if (a.size() == 0 || b.size() == 0) return SpanBasis(n);
  const CMatrix& qa = a.coords();
  const CMatrix& qb = b.coords();
  const CMatrix outside = qa - qb * (qb.adjoint() * qa);
  const CMatrix kernel = null_space(outside, tol);
  CMatrix coords = qa * kernel;
  if (coords.cols() > 0) {
    Eigen::HouseholderQR<CMatrix> qr(coords);
    coords = CMatrix(qr.householderQ()).leftCols(kernel.cols());
  }
  return SpanBasis::from_coords(n, std::move(coords));
}

SpanBasis adjoint_span(const SpanBasis& s) {
  CMatrix coords(s.coords().rows(), s.size());
  for (Index k = 0; k < s.size(); ++k) coords.col(k) = vec(s.element(k).adjoint());
  return SpanBasis::from_coords(s.matrix_dim(), std::move(coords));
}

// ---------------------------------------------------------------------------
// AmbientAlgebra

AmbientAlgebra::AmbientAlgebra(std::vector<Index> block_dims) : block_dims_(std::move(block_dims)) {
  if (block_dims_.empty()) throw PreconditionError("ambient algebra needs at least one block");
  for (Index d : block_dims_) {
    if (d < 1) throw PreconditionError("ambient block dimensions must be positive");
    offsets_.push_back(dim_);
    dim_ += d;
  }
  Index count = 0;
  for (Index d : block_dims_) count += d * d;
  CMatrix coords = CMatrix::Zero(dim_ * dim_, count);
  Index col = 0;
  for (std::size_t b = 0; b < block_dims_.size(); ++b) {
    const Index o = offsets_[b];
    for (Index j = 0; j < block_dims_[b]; ++j)
      for (Index i = 0; i < block_dims_[b]; ++i) coords((o + j) * dim_ + (o + i), col++) = 1.0;
  }
  basis_ = SpanBasis::from_coords(dim_, std::move(coords));
}

double AmbientAlgebra::residual(const CMatrix& x) const {
  require_dim(x, dim_, "AmbientAlgebra");
  // Summed directly: subtracting block norms from the total cancels badly.
  double off = 0.0;
  for (std::size_t b = 0; b < block_dims_.size(); ++b) {
    const Index o = offsets_[b];
    const Index d = block_dims_[b];
    off += x.middleRows(o, d).leftCols(o).squaredNorm();
    off += x.middleRows(o, d).rightCols(dim_ - o - d).squaredNorm();
  }
  return std::sqrt(off);
}

bool AmbientAlgebra::contains(const CMatrix& x, const ToleranceConfig& tol) const {
  return residual(x) <= tol.eq_tol * std::max(1.0, x.norm());
}

CMatrix AmbientAlgebra::central_projection(Index block) const {
  CMatrix z = CMatrix::Zero(dim_, dim_);
  const auto b = static_cast<std::size_t>(block);
  z.block(offsets_[b], offsets_[b], block_dims_[b], block_dims_[b]).setIdentity();
  return z;
}

std::vector<CMatrix> AmbientAlgebra::central_projections() const {
  std::vector<CMatrix> out;
  for (Index b = 0; b < block_count(); ++b) out.push_back(central_projection(b));
  return out;
}

// ---------------------------------------------------------------------------
// MatrixAlgebra

MatrixAlgebra MatrixAlgebra::from_span(AmbientAlgebra ambient, std::vector<CMatrix> generators,
                                       SpanBasis basis, const ToleranceConfig& tol) {
  const Index n = ambient.dim();
  if (basis.matrix_dim() != n) throw PreconditionError("algebra basis dimension differs from ambient");
  if (basis.residual(CMatrix::Identity(n, n)) > tol.eq_tol * std::sqrt(static_cast<double>(n))) {
    throw NumericalError("algebra span does not contain the identity");
  }
  for (Index k = 0; k < basis.size(); ++k) {
    if (!ambient.contains(basis.element(k), tol)) throw PreconditionError("algebra element outside the ambient");
  }
  MatrixAlgebra a(std::move(ambient), std::move(generators), std::move(basis));
  Rng rng(kClosureCheckSeed);
  for (int trial = 0; trial < 3 && a.dimension() > 1; ++trial) {
    const CMatrix x = a.random_element(rng);
    const CMatrix y = a.random_element(rng);
    const CMatrix xy = x * y;
    if (a.basis_.residual(xy) > tol.eq_tol * std::max(1.0, x.norm() * y.norm())) {
      throw NumericalError("span is not closed under multiplication");
    }
  }
  return a;
}

CMatrix MatrixAlgebra::random_element(Rng& rng) const {
  return basis_.combine(gaussian_vector(dimension(), rng));
}

MatrixAlgebra close_algebra(std::span<const CMatrix> generators, const AmbientAlgebra& ambient,
                            const ToleranceConfig& tol) {
  tol.validate();
  const Index n = ambient.dim();
  for (std::size_t k = 0; k < generators.size(); ++k) {
    require_dim(generators[k], n, "close_algebra");
    require_finite(generators[k], "close_algebra");
    if (!ambient.contains(generators[k], tol)) {
      throw PreconditionError("close_algebra: generator " + std::to_string(k) + " lies outside the ambient");
    }
  }
  SpanBasis span(n);
  const CMatrix identity = CMatrix::Identity(n, n);
  span.extend(std::span<const CMatrix>(&identity, 1), tol);
  span.extend(generators, tol);

  // Words of length k+1 are words of length k times a generator, so only the
  // directions added in the previous round need to be multiplied.
  Index frontier_begin = 0;
  const Index max_rounds = n * n + 1;
  for (Index round = 0;; ++round) {
    if (round > max_rounds) throw NumericalError("close_algebra: closure did not stabilize");
    const Index frontier_end = span.size();
    std::vector<CMatrix> products;
    products.reserve(static_cast<std::size_t>((frontier_end - frontier_begin)) * generators.size());
    for (Index k = frontier_begin; k < frontier_end; ++k) {
      const CMatrix w = span.element(k);
      for (const auto& g : generators) products.push_back(w * g);
    }
    if (span.extend(products, tol) == 0) break;
    if (span.size() > n * n) throw NumericalError("close_algebra: span exceeds n^2");
    frontier_begin = frontier_end;
  }
  return MatrixAlgebra::from_span(ambient, {generators.begin(), generators.end()}, std::move(span), tol);
}

MatrixAlgebra extend_algebra(const MatrixAlgebra& a, std::span<const CMatrix> extra,
                             const ToleranceConfig& tol) {
  const bool inside = std::all_of(extra.begin(), extra.end(),
                                  [&](const CMatrix& x) { return contains(a, x, tol).member; });
  if (inside) return a;
  std::vector<CMatrix> gens = a.generators().empty() ? a.elements() : a.generators();
  gens.insert(gens.end(), extra.begin(), extra.end());
  return close_algebra(gens, a.ambient(), tol);
}

Membership contains(const MatrixAlgebra& a, const CMatrix& x, const ToleranceConfig& tol) {
  require_dim(x, a.dim(), "contains");
  const double r = a.basis().residual(x);
  return {r <= tol.eq_tol * std::max(1.0, x.norm()), r};
}

MatrixAlgebra commutant(std::span<const CMatrix> s, Index n, const ToleranceConfig& tol) {
  tol.validate();
  for (const auto& x : s) require_dim(x, n, "commutant");
  CMatrix basis = CMatrix::Identity(n * n, n * n);

  auto restrict = [&](const CMatrix& op) {
    CMatrix constraint(n * n, basis.cols());
    for (Index k = 0; k < basis.cols(); ++k) {
      const CMatrix x = unvec(basis.col(k), n);
      constraint.col(k) = vec(x * op - op * x);
    }
    const CMatrix kernel = null_space(constraint, tol);
    basis = basis * kernel;
  };

  if (!s.empty()) {
    // A random combination usually cuts the search space down to the final
    // answer in one step; the individual constraints then only confirm it.
    Rng rng(kClosureCheckSeed ^ static_cast<std::uint64_t>(n));
    CMatrix combo = CMatrix::Zero(n, n);
    for (const auto& x : s) combo += gaussian_vector(1, rng)(0) * x;
    restrict(combo);
    for (const auto& x : s) {
      if (basis.cols() == 0) break;
      restrict(x);
    }
  }
  if (basis.cols() > 0) {
    Eigen::HouseholderQR<CMatrix> qr(basis);
    basis = CMatrix(qr.householderQ()).leftCols(basis.cols());
  }
  return MatrixAlgebra::from_span(AmbientAlgebra::full(n), {s.begin(), s.end()},
                                  SpanBasis::from_coords(n, std::move(basis)), tol);
}

MatrixAlgebra adjoint_algebra(const MatrixAlgebra& a, const ToleranceConfig& tol) {
  std::vector<CMatrix> gens;
  for (const auto& g : a.generators()) gens.push_back(g.adjoint());
  return MatrixAlgebra::from_span(a.ambient(), std::move(gens), adjoint_span(a.basis()), tol);
}

bool is_star_closed(const MatrixAlgebra& a, const ToleranceConfig& tol) {
  return span_includes(a.basis(), adjoint_span(a.basis()), tol);
}

MatrixAlgebra self_adjoint_part(const MatrixAlgebra& a, const ToleranceConfig& tol) {
  SpanBasis d = span_intersection(a.basis(), adjoint_span(a.basis()), tol);
  return MatrixAlgebra::from_span(a.ambient(), {}, std::move(d), tol);
}

MatrixAlgebra conjugate(const MatrixAlgebra& a, const CMatrix& u, const ToleranceConfig& tol) {
  require_dim(u, a.dim(), "conjugate");
  SpanBasis span(a.dim());
  std::vector<CMatrix> conj;
  for (const auto& b : a.elements()) conj.push_back(u.adjoint() * b * u);
  span.extend(conj, tol);
  if (span.size() != a.dimension()) throw NumericalError("conjugate: dimension changed under conjugation");
  std::vector<CMatrix> gens;
  for (const auto& g : a.generators()) gens.push_back(u.adjoint() * g * u);
  return MatrixAlgebra::from_span(a.ambient(), std::move(gens), std::move(span), tol);
}

bool is_closed_under_products(const MatrixAlgebra& a, const ToleranceConfig& tol) {
  const auto el = a.elements();
  for (const auto& x : el)
    for (const auto& y : el) {
      if (a.basis().residual(x * y) > tol.eq_tol) return false;
    }
  return true;
}

double invariance_defect(const MatrixAlgebra& a, const CMatrix& p) {
  require_dim(p, a.dim(), "invariance_defect");
  const CMatrix range = projection_range(p);
  const Index n = a.dim();
  if (range.cols() == 0 || range.cols() == n) return 0.0;
  const CMatrix co_range = projection_range(CMatrix::Identity(n, n) - p);
  // Hilbert-Schmidt norm of a -> p^perp a p over the orthonormal basis; it
  // does not depend on which orthonormal basis of the span is used.
  double sum = 0.0;
  for (Index k = 0; k < a.dimension(); ++k) {
    sum += (co_range.adjoint() * a.element(k) * range).squaredNorm();
  }
  return std::sqrt(sum);
}

CentralDecomposition central_decomposition(const MatrixAlgebra& m, std::uint64_t seed,
                                           const ToleranceConfig& tol) {
  tol.validate();
  const Index n = m.dim();
  if (!is_star_closed(m, tol)) throw PreconditionError("central_decomposition: algebra is not *-closed");
  const auto elements = m.elements();
  const MatrixAlgebra comm = commutant(elements, n, tol);
  const MatrixAlgebra bicomm = commutant(comm.elements(), n, tol);
  if (!span_equal(bicomm.basis(), m.basis(), tol)) {
    throw PreconditionError("central_decomposition: algebra differs from its double commutant");
  }
  const SpanBasis center = span_intersection(m.basis(), comm.basis(), tol);

  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix h = CMatrix::Zero(n, n);
  for (Index k = 0; k < center.size(); ++k) {
    const CMatrix z = center.element(k);
    h += g(rng) * (z + z.adjoint());
  }
  const auto eig = hermitian_eig(h, tol);
  const double gap = tol.eq_tol * std::max(1.0, op_norm(h));

  CentralDecomposition out;
  out.unitary = CMatrix(n, n);
  Index col = 0;
  Index start = 0;
  while (start < n) {
    Index end = start + 1;
    while (end < n && eig.values(end) - eig.values(end - 1) <= gap) ++end;
    const CMatrix v = eig.vectors.middleCols(start, end - start);
    const CMatrix z = v * v.adjoint();
    SpanBasis corner(n);
    std::vector<CMatrix> cut;
    for (const auto& b : elements) cut.push_back(b * z);
    corner.extend(cut, tol);
    out.blocks.push_back(end - start);
    out.summand_ranks.push_back(static_cast<Index>(std::llround(std::sqrt(static_cast<double>(corner.size())))));
    out.central_projections.push_back(z);
    out.unitary.middleCols(col, end - start) = v;
    col += end - start;
    start = end;
  }
  out.is_factor = out.blocks.size() == 1;
  return out;
}

Compression compress(const MatrixAlgebra& a, const CMatrix& p, const CMatrix& q, const ToleranceConfig& tol) {
  tol.validate();
  const Index n = a.dim();
  require_dim(p, n, "compress");
  require_dim(q, n, "compress");
  if (!is_projection(p, tol) || !is_projection(q, tol)) throw PreconditionError("compress: p and q must be projections");
  const auto& amb = a.ambient();
  if (!amb.contains(p, tol) || !amb.contains(q, tol)) throw PreconditionError("compress: p and q must lie in the ambient");
  if (invariance_defect(a, p) > tol.eq_tol) throw PreconditionError("compress: p is not invariant");
  if (invariance_defect(a, q) > tol.eq_tol) throw PreconditionError("compress: q is not invariant");
  if ((p * q - q).norm() > tol.eq_tol * std::max(1.0, q.norm())) throw PreconditionError("compress: q is not below p");
  const CMatrix r = p - q;

  // Range basis chosen block by block so that the corner of the ambient is
  // again a standard direct sum of full matrix blocks.
  std::vector<CMatrix> pieces;
  std::vector<Index> dims;
  Index total = 0;
  for (Index b = 0; b < amb.block_count(); ++b) {
    const Index o = amb.block_offset(b);
    const Index d = amb.block_dims()[static_cast<std::size_t>(b)];
    const CMatrix local = projection_range(r.block(o, o, d, d));
    if (local.cols() == 0) continue;
    CMatrix embedded = CMatrix::Zero(n, local.cols());
    embedded.middleRows(o, d) = local;
    pieces.push_back(embedded);
    dims.push_back(local.cols());
    total += local.cols();
  }
  if (total == 0) throw PreconditionError("compress: p - q is zero");
  CMatrix v(n, total);
  Index col = 0;
  for (const auto& piece : pieces) {
    v.middleCols(col, piece.cols()) = piece;
    col += piece.cols();
  }

  AmbientAlgebra corner_ambient(dims);
  SpanBasis span(total);
  std::vector<CMatrix> corner;
  for (const auto& b : a.elements()) corner.push_back(v.adjoint() * b * v);
  span.extend(corner, tol);
  std::vector<CMatrix> gens;
  for (const auto& g : a.generators()) gens.push_back(v.adjoint() * g * v);
  MatrixAlgebra compressed = MatrixAlgebra::from_span(corner_ambient, std::move(gens), std::move(span), tol);
  return {std::move(compressed), std::move(v)};
}

}  // namespace nestlab
