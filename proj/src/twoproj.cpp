#include "nestlab/twoproj.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "nestlab/errors.hpp"

namespace nestlab {

namespace {

struct Split {
  std::vector<Index> high;      // eigenvalue ~ 1
  std::vector<Index> low;       // eigenvalue ~ 0
  std::vector<Index> interior;  // generic
};

// A direction a of ran P is generic exactly when (1 - P) Q a, of norm
// sqrt(c (1 - c)), is nonzero. The norm is measured directly: taking it from
// the eigenvalue c loses half the digits near c = 1. Using the same eq_tol cut
// as the commutator test keeps generic_dim == 0 and "P, Q commute" in agreement.
Split split_spectrum(const RVector& c, const RVector& off, const ToleranceConfig& tol) {
  Split s;
  for (Index i = 0; i < c.size(); ++i) {
    if (off(i) <= tol.eq_tol) {
      (c(i) > 0.5 ? s.high : s.low).push_back(i);
    } else {
      s.interior.push_back(i);
    }
  }
  return s;
}

CMatrix pick(const CMatrix& basis, const std::vector<Index>& cols) {
  CMatrix out(basis.rows(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Index>(k)) = basis.col(cols[k]);
  return out;
}

Projection projection_of(const CMatrix& cols, Index n) {
  if (cols.cols() == 0) return Projection::zero(n);
  return Projection::from_matrix(hermitian_part(cols * cols.adjoint()));
}

}  // namespace

Index HalmosDecomposition::generic_offset() const {
  return corner_ef.rank() + corner_ef_perp.rank() + corner_eperp_f.rank() + corner_eperp_fperp.rank();
}

CMatrix HalmosDecomposition::canonical_p() const {
  const Index n = unitary.rows();
  CMatrix p = CMatrix::Zero(n, n);
  const Index e = corner_ef.rank() + corner_ef_perp.rank();
  for (Index i = 0; i < e; ++i) p(i, i) = 1.0;
  const Index g = generic_offset();
  for (Index i = 0; i < generic_dim; ++i) p(g + i, g + i) = 1.0;
  return p;
}

CMatrix HalmosDecomposition::canonical_q() const {
  const Index n = unitary.rows();
  CMatrix q = CMatrix::Zero(n, n);
  Index o = 0;
  for (Index i = 0; i < corner_ef.rank(); ++i, ++o) q(o, o) = 1.0;
  o += corner_ef_perp.rank();
  for (Index i = 0; i < corner_eperp_f.rank(); ++i, ++o) q(o, o) = 1.0;
  const Index g = generic_offset();
  const Index k = generic_dim;
  q.block(g, g, k, k) = x * x;
  q.block(g, g + k, k, k) = x * y;
  q.block(g + k, g, k, k) = x * y;
  q.block(g + k, g + k, k, k) = y * y;
  return q;
}

HalmosDecomposition halmos_decompose(const Projection& p, const Projection& q, const ToleranceConfig& tol) {
  tol.validate();
  const Index n = p.dim();
  if (q.dim() != n) throw PreconditionError("halmos_decompose: dimension mismatch");

  const CMatrix vp = p.range();
  const CMatrix vp_perp = p.complement().range();
  const CMatrix& qm = q.matrix();

  RVector c_in = RVector::Zero(0);
  CMatrix w_in(n, 0);
  if (vp.cols() > 0) {
    const auto eig = hermitian_eig(hermitian_part(vp.adjoint() * qm * vp), tol);
    c_in = eig.values;
    w_in = vp * eig.vectors;
  }
  const CMatrix q_in = qm * w_in;
  const CMatrix partner = q_in - vp * (vp.adjoint() * q_in);  // (1 - P) Q a
  const RVector off = partner.colwise().norm().transpose();
  const Split in = split_spectrum(c_in, off, tol);
  const CMatrix ef = pick(w_in, in.high);
  const CMatrix ef_perp = pick(w_in, in.low);

  std::vector<Index> generic = in.interior;
  std::stable_sort(generic.begin(), generic.end(), [&](Index a, Index b) { return c_in(a) > c_in(b); });
  const Index k = static_cast<Index>(generic.size());
  RVector xs(k), ys(k);
  CMatrix first(n, k);
  CMatrix second(n, k);
  for (Index i = 0; i < k; ++i) {
    const Index j = generic[static_cast<std::size_t>(i)];
    const double c = std::clamp(c_in(j), 0.0, 1.0);
    // xy = off(j) is accurate; take the smaller of x, y from it.
    if (c >= 0.5) {
      ys(i) = std::min(off(j) / std::sqrt(c), 1.0);
      xs(i) = std::sqrt(1.0 - ys(i) * ys(i));
    } else {
      xs(i) = std::min(off(j) / std::sqrt(1.0 - c), 1.0);
      ys(i) = std::sqrt(1.0 - xs(i) * xs(i));
    }
    first.col(i) = w_in.col(j);
    second.col(i) = partner.col(j) / off(j);
  }
  if (k > 0) {
    // Polar factor: normalized partners are orthonormal only up to roundoff
    // divided by xy.
    const auto g = hermitian_eig(hermitian_part(second.adjoint() * second), tol);
    if (!(g.values(0) > 0.5)) throw NumericalError("halmos_decompose: partner vectors are degenerate");
    const RVector inv_sqrt = g.values.cwiseSqrt().cwiseInverse();
    second = second * g.vectors * inv_sqrt.cast<Complex>().asDiagonal() * g.vectors.adjoint();
  }

  // The rest of ran P^perp splits into the two remaining corners. Working in
  // the complement of the partners keeps the generic count of both sides equal.
  CMatrix rest = vp_perp;
  if (k > 0 && vp_perp.cols() > 0) rest = vp_perp * null_space(second.adjoint() * vp_perp, tol);
  if (rest.cols() + k != vp_perp.cols()) {
    throw NumericalError("halmos_decompose: generic parts of ran P and ran P^perp differ in dimension");
  }
  CMatrix eperp_f(n, 0), eperp_fperp(n, 0);
  if (rest.cols() > 0) {
    const auto eig = hermitian_eig(hermitian_part(rest.adjoint() * qm * rest), tol);
    const CMatrix w_out = rest * eig.vectors;
    std::vector<Index> high, low;
    for (Index i = 0; i < eig.values.size(); ++i) (eig.values(i) > 0.5 ? high : low).push_back(i);
    eperp_f = pick(w_out, high);
    eperp_fperp = pick(w_out, low);
  }
  HalmosDecomposition h{.corner_ef = projection_of(ef, n),
                        .corner_ef_perp = projection_of(ef_perp, n),
                        .corner_eperp_f = projection_of(eperp_f, n),
                        .corner_eperp_fperp = projection_of(eperp_fperp, n),
                        .generic_dim = k,
                        .unitary = CMatrix(),
                        .x = xs.cast<Complex>().asDiagonal(),
                        .y = ys.cast<Complex>().asDiagonal()};

  CMatrix w(n, n);
  w << ef, ef_perp, eperp_f, eperp_fperp, first, second;
  h.unitary = w.adjoint();

  const double scale = tol.eq_tol * std::max(1.0, std::sqrt(static_cast<double>(n)));
  if ((w.adjoint() * w - CMatrix::Identity(n, n)).norm() > scale) {
    throw NumericalError("halmos_decompose: assembled basis is not unitary");
  }
  if ((w * h.canonical_p() * w.adjoint() - p.matrix()).norm() > scale ||
      (w * h.canonical_q() * w.adjoint() - qm).norm() > scale) {
    throw NumericalError("halmos_decompose: reconstruction failed");
  }
  return h;
}

bool commutes_iff_no_generic(const Projection& p, const Projection& q, const ToleranceConfig& tol) {
  if (p.dim() != q.dim()) throw PreconditionError("commutes_iff_no_generic: dimension mismatch");
  return commutator_norm(p, q) <= tol.eq_tol;
}

}  // namespace nestlab
