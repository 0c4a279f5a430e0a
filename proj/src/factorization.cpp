#include "nestlab/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "nestlab/errors.hpp"
#include "nestlab/reflexivity.hpp"

namespace nestlab {

namespace {

void check_psd_input(const CMatrix& x, const AmbientAlgebra& ambient, const ToleranceConfig& tol, const char* what) {
  require_square(x, what);
  require_finite(x, what);
  if (x.rows() != ambient.dim()) throw PreconditionError(std::string(what) + ": dimension mismatch");
  if (!is_hermitian(x, tol)) throw PreconditionError(std::string(what) + ": X is not hermitian");
  if (!ambient.contains(x, tol)) throw PreconditionError(std::string(what) + ": X lies outside the ambient");
  const auto eig = hermitian_eig(x, tol);
  const double scale = std::max(std::abs(eig.values(0)), std::abs(eig.values(eig.values.size() - 1)));
  if (!(eig.values(0) > tol.psd_tol * scale)) throw PreconditionError(std::string(what) + ": X is not positive definite");
}

CMatrix upper_inverse(const CMatrix& s) {
  return s.triangularView<Eigen::Upper>().solve(CMatrix::Identity(s.rows(), s.cols()));
}

double relative_membership(double residual, const CMatrix& x) { return residual / std::max(1.0, x.norm()); }

}  // namespace

// ---------------------------------------------------------------------------
// Nest

Nest::Nest(std::vector<Projection> projections, AmbientAlgebra ambient, const ToleranceConfig& tol)
    : ambient_(std::move(ambient)), projections_(std::move(projections)) {
  tol.validate();
  const Index n = ambient_.dim();
  if (projections_.size() < 2) throw PreconditionError("Nest: needs at least 0 and I");
  for (std::size_t i = 0; i < projections_.size(); ++i) {
    const auto& p = projections_[i];
    if (p.dim() != n) throw PreconditionError("Nest: projection " + std::to_string(i) + " has the wrong dimension");
    if (!ambient_.contains(p.matrix(), tol)) {
      throw PreconditionError("Nest: projection " + std::to_string(i) + " lies outside the ambient");
    }
  }
  if (projections_.front().rank() != 0) throw PreconditionError("Nest: first projection must be 0");
  if (projections_.back().rank() != n) throw PreconditionError("Nest: last projection must be I");
  for (std::size_t i = 0; i + 1 < projections_.size(); ++i) {
    if (projections_[i].rank() >= projections_[i + 1].rank() || !leq(projections_[i], projections_[i + 1], tol)) {
      throw PreconditionError("Nest: projections " + std::to_string(i) + " and " + std::to_string(i + 1) +
                              " are not strictly ascending");
    }
  }

  adapted_ = CMatrix::Zero(n, n);
  Index col = 0;
  for (std::size_t i = 0; i + 1 < projections_.size(); ++i) {
    const CMatrix r = projections_[i + 1].matrix() - projections_[i].matrix();
    const Index expected = projections_[i + 1].rank() - projections_[i].rank();
    Index found = 0;
    for (Index b = 0; b < ambient_.block_count(); ++b) {
      const Index o = ambient_.block_offset(b);
      const Index d = ambient_.block_dims()[static_cast<std::size_t>(b)];
      CMatrix local = projection_range(r.block(o, o, d, d));
      if (local.cols() == 0) continue;
      if (col + local.cols() > n) throw NumericalError("Nest: atom ranks exceed the dimension");
      normalize_column_phases(local);
      adapted_.block(o, col, d, local.cols()) = local;
      for (Index k = 0; k < local.cols(); ++k) column_block_.push_back(b);
      col += local.cols();
      found += local.cols();
    }
    if (found != expected) throw NumericalError("Nest: atom rank does not match the rank difference");
    atom_dims_.push_back(expected);
  }
  if (col != n) throw NumericalError("Nest: atoms do not fill the space");
  if ((adapted_.adjoint() * adapted_ - CMatrix::Identity(n, n)).norm() > tol.eq_tol * std::max(1.0, std::sqrt(double(n)))) {
    throw NumericalError("Nest: adapted basis is not unitary");
  }
}

Nest Nest::complete(std::vector<Projection> projections, AmbientAlgebra ambient, const ToleranceConfig& tol) {
  const Index n = ambient.dim();
  for (const auto& p : projections) {
    if (p.dim() != n) throw PreconditionError("Nest: projection has the wrong dimension");
  }
  std::stable_sort(projections.begin(), projections.end(),
                   [](const Projection& a, const Projection& b) { return a.rank() < b.rank(); });
  std::vector<Projection> chain;
  chain.push_back(Projection::zero(n));
  for (auto& p : projections) {
    if (same_projection(p, chain.back(), tol)) continue;
    if (p.rank() == n) continue;
    chain.push_back(std::move(p));
  }
  chain.push_back(Projection::identity(n));
  return Nest(std::move(chain), std::move(ambient), tol);
}

Nest Nest::from_index_sets(const std::vector<std::vector<Index>>& sets, AmbientAlgebra ambient,
                           const ToleranceConfig& tol) {
  const Index n = ambient.dim();
  std::vector<Projection> ps;
  for (const auto& s : sets) {
    for (Index i : s) {
      if (i < 0 || i >= n) throw PreconditionError("Nest: index " + std::to_string(i) + " out of range");
    }
    ps.push_back(Projection::coordinate(n, s));
  }
  return complete(std::move(ps), std::move(ambient), tol);
}

double Nest::lower_part(const CMatrix& x) const {
  const CMatrix y = adapted_.adjoint() * x * adapted_;
  double sq = 0.0;
  Index ro = 0;
  for (std::size_t i = 0; i < atom_dims_.size(); ++i) {
    Index co = 0;
    for (std::size_t j = 0; j < i; ++j) {
      sq += y.block(ro, co, atom_dims_[i], atom_dims_[j]).squaredNorm();
      co += atom_dims_[j];
    }
    ro += atom_dims_[i];
  }
  const double off = ambient_.residual(x);
  return std::sqrt(sq + off * off);
}

// ---------------------------------------------------------------------------
// Nest-relative Cholesky

std::string to_string(FactorizationStatus s) { return s == FactorizationStatus::Factored ? "FACTORED" : "GAP"; }

CMatrix nest_cholesky_adapted(const CMatrix& x, const Nest& nest, const ToleranceConfig& tol) {
  tol.validate();
  check_psd_input(x, nest.ambient(), tol, "nest_cholesky");
  const Index n = nest.dim();
  const CMatrix& u = nest.adapted_basis();
  const auto& owner = nest.column_blocks();
  CMatrix s = CMatrix::Zero(n, n);
  // The adapted columns of one ambient block keep the nest order, so an
  // ordinary upper Cholesky of that block is block upper triangular for the
  // atoms. Blocks never couple.
  for (Index b = 0; b < nest.ambient().block_count(); ++b) {
    std::vector<Index> cols;
    for (Index c = 0; c < n; ++c) {
      if (owner[static_cast<std::size_t>(c)] == b) cols.push_back(c);
    }
    const Index m = static_cast<Index>(cols.size());
    if (m == 0) continue;
    CMatrix ub(n, m);
    for (Index k = 0; k < m; ++k) ub.col(k) = u.col(cols[static_cast<std::size_t>(k)]);
    const CMatrix sb = cholesky_upper(hermitian_part(ub.adjoint() * x * ub), tol);
    for (Index i = 0; i < m; ++i) {
      for (Index j = 0; j < m; ++j) s(cols[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]) = sb(i, j);
    }
  }
  return s;
}

FactorizationReport nest_cholesky(const CMatrix& x, const Nest& nest, const ToleranceConfig& tol) {
  const CMatrix sa = nest_cholesky_adapted(x, nest, tol);
  const CMatrix& u = nest.adapted_basis();
  // Columns of different ambient blocks never couple, so S' is upper triangular.
  const CMatrix sa_inv = upper_inverse(sa);
  const CMatrix s = u * sa * u.adjoint();
  const CMatrix s_inv = u * sa_inv * u.adjoint();

  FactorizationReport out;
  out.status = FactorizationStatus::Factored;
  out.residual = op_norm(s.adjoint() * s - x) / op_norm(x);
  out.factor_membership = relative_membership(nest.lower_part(s), s);
  out.inverse_membership = relative_membership(nest.lower_part(s_inv), s_inv);
  if (out.residual > tol.eq_tol) throw NumericalError("nest_cholesky: residual exceeds eq_tol");
  out.factor = s;
  return out;
}

// ---------------------------------------------------------------------------
// Triangularization and the factorization verdict

Triangularization triangularize(const MatrixAlgebra& a, const LatOptions& options, const ToleranceConfig& tol) {
  const ProjectionLattice lat = compute_lat(a, options, tol);
  if (lat.classification != LatticeClass::Nest) {
    throw PreconditionError("triangularize: lattice is " + to_string(lat.classification) + ", not a nest");
  }
  Nest nest(lat.elements, a.ambient(), tol);
  double worst = 0.0;
  for (Index k = 0; k < a.dimension(); ++k) {
    const CMatrix b = a.element(k);
    worst = std::max(worst, nest.lower_part(b) / std::max(b.norm(), std::numeric_limits<double>::min()));
  }
  CMatrix u = nest.adapted_basis();
  std::vector<Index> dims = nest.atom_dims();
  return Triangularization{std::move(u), std::move(nest), std::move(dims), worst};
}

namespace {

FactorizationVerdict verdict_in_factor(const MatrixAlgebra& a, const LatOptions& options, const ToleranceConfig& tol) {
  FactorizationVerdict out;
  ProjectionLattice lat = compute_lat(a, options, tol);
  const LatticeClass cls = lat.classification;
  out.lattice = std::move(lat);
  if (cls == LatticeClass::NonCsl) {
    out.reason = "lattice is NON_CSL";
    return out;
  }
  if (cls == LatticeClass::CslNotNest) {
    out.reason = "lattice is a CSL but not a nest";
    return out;
  }
  const MatrixAlgebra hull = alg_of(out.lattice->elements, a.ambient(), tol);
  if (hull.dimension() != a.dimension() || !span_equal(hull.basis(), a.basis(), tol)) {
    out.reason = "not reflexive: Alg Lat A is larger by " + std::to_string(hull.dimension() - a.dimension()) +
                 " dimension(s)";
    return out;
  }
  Nest nest(out.lattice->elements, a.ambient(), tol);
  double worst = 0.0;
  for (Index k = 0; k < a.dimension(); ++k) worst = std::max(worst, nest.lower_part(a.element(k)));
  CMatrix u = nest.adapted_basis();
  std::vector<Index> dims = nest.atom_dims();
  out.triangularization = Triangularization{std::move(u), std::move(nest), std::move(dims), worst};
  out.verdict = true;
  out.reason = "nest algebra";
  return out;
}

}  // namespace

FactorizationVerdict has_factorization_fd(const MatrixAlgebra& a, const LatOptions& options,
                                          const ToleranceConfig& tol) {
  tol.validate();
  const AmbientAlgebra& amb = a.ambient();
  if (amb.is_factor()) return verdict_in_factor(a, options, tol);

  FactorizationVerdict out;
  out.verdict = true;
  for (Index b = 0; b < amb.block_count(); ++b) {
    const CMatrix z = amb.central_projection(b);
    if (!contains(a, z, tol).member) {
      out.verdict = false;
      out.reason = "central projection of block " + std::to_string(b) + " is not in A";
      out.blocks.clear();
      return out;
    }
    const Compression c = compress(a, z, CMatrix::Zero(a.dim(), a.dim()), tol);
    FactorizationVerdict part = verdict_in_factor(c.algebra, options, tol);
    if (!part.verdict && out.verdict) {
      out.verdict = false;
      out.reason = "block " + std::to_string(b) + ": " + part.reason;
    }
    out.blocks.push_back(std::move(part));
  }
  if (out.verdict) out.reason = "direct sum of nest algebras";
  return out;
}

// ---------------------------------------------------------------------------
// Witnesses

std::string to_string(WitnessMode m) {
  switch (m) {
    case WitnessMode::Orthogonal:
      return "ORTHOGONAL";
    case WitnessMode::Commuting:
      return "COMMUTING";
    case WitnessMode::Generic:
      return "GENERIC";
  }
  return "UNKNOWN";
}

WitnessMode witness_mode_from_string(const std::string& s) {
  if (s == "ORTHOGONAL") return WitnessMode::Orthogonal;
  if (s == "COMMUTING") return WitnessMode::Commuting;
  if (s == "GENERIC") return WitnessMode::Generic;
  throw PreconditionError("unknown witness mode '" + s + "'");
}

namespace {

// Rank-one partial isometry t s^* with s in ran(src), t in ran(dst), both in
// the first ambient block where the two ranges meet.
CMatrix connecting_isometry(const CMatrix& src, const CMatrix& dst, const AmbientAlgebra& amb) {
  const Index n = amb.dim();
  for (Index b = 0; b < amb.block_count(); ++b) {
    const Index o = amb.block_offset(b);
    const Index d = amb.block_dims()[static_cast<std::size_t>(b)];
    CMatrix s = projection_range(src.block(o, o, d, d));
    CMatrix t = projection_range(dst.block(o, o, d, d));
    if (s.cols() == 0 || t.cols() == 0) continue;
    normalize_column_phases(s);
    normalize_column_phases(t);
    CMatrix v = CMatrix::Zero(n, n);
    v.block(o, o, d, d) = t.col(0) * s.col(0).adjoint();
    return v;
  }
  throw PreconditionError("witness_generator: no ambient block connects the two corners");
}

}  // namespace

Witness witness_generator(const Projection& p, const Projection& q, const AmbientAlgebra& ambient, WitnessMode mode,
                          double epsilon, double alpha, const ToleranceConfig& tol) {
  tol.validate();
  const Index n = ambient.dim();
  if (p.dim() != n || q.dim() != n) throw PreconditionError("witness_generator: dimension mismatch");
  if (!ambient.contains(p.matrix(), tol) || !ambient.contains(q.matrix(), tol)) {
    throw PreconditionError("witness_generator: p and q must lie in the ambient");
  }
  const CMatrix id = CMatrix::Identity(n, n);
  const CMatrix& pm = p.matrix();
  const CMatrix& qm = q.matrix();

  if (mode == WitnessMode::Generic) {
    if (!(alpha >= 1.0) || !std::isfinite(alpha)) throw PreconditionError("witness_generator: alpha must be >= 1");
    if (!ambient.is_factor()) throw PreconditionError("witness_generator: GENERIC mode needs a factor ambient");
    const HalmosDecomposition h = halmos_decompose(p, q, tol);
    if (h.generic_dim == 0) throw PreconditionError("witness_generator: p and q have no generic part");
    const Index g = h.generic_offset();
    const Index k = h.generic_dim;
    CMatrix zc = id;
    zc.block(g, g + k, k, k) = alpha * CMatrix::Identity(k, k);
    zc.block(g + k, g, k, k) = alpha * CMatrix::Identity(k, k);
    zc.block(g + k, g + k, k, k) = (alpha * alpha + 1.0) * CMatrix::Identity(k, k);
    CMatrix swap = CMatrix::Zero(n, n);
    swap.block(g, g + k, k, k) = CMatrix::Identity(k, k);
    swap.block(g + k, g, k, k) = CMatrix::Identity(k, k);
    const CMatrix w = h.unitary.adjoint();
    Witness out;
    out.z = hermitian_part(w * zc * w.adjoint());
    out.v = w * swap * w.adjoint();
    return out;
  }

  if (!(epsilon > 0.0 && epsilon < 0.5)) throw PreconditionError("witness_generator: epsilon must lie in (0, 1/2)");
  if (p.rank() == 0 || q.rank() == 0) throw PreconditionError("witness_generator: p and q must be nonzero");

  CMatrix src;
  CMatrix dst;
  bool orthogonal = false;
  if (mode == WitnessMode::Orthogonal) {
    if ((pm * qm).norm() > tol.eq_tol) throw PreconditionError("witness_generator: ORTHOGONAL needs pq = 0");
    src = pm;
    dst = qm;
    orthogonal = true;
  } else {
    if (commutator_norm(p, q) > tol.eq_tol) throw PreconditionError("witness_generator: COMMUTING needs pq = qp");
    src = hermitian_part(pm * (id - qm));
    dst = hermitian_part((id - pm) * qm);
    if (src.norm() <= tol.eq_tol || dst.norm() <= tol.eq_tol) {
      throw PreconditionError("witness_generator: p and q are comparable (pq^perp = 0 or p^perp q = 0)");
    }
    orthogonal = (pm * qm).norm() <= tol.eq_tol;
  }

  Witness out;
  out.v = connecting_isometry(src, dst, ambient);
  out.z = id + epsilon * (out.v + out.v.adjoint());
  const double znorm = op_norm(out.z);
  // Every a in Alg{p, q} has a corner of a^* a that the witness fills with
  // epsilon v; when p and q overlap that corner can move by at most a factor
  // 1 / (1 + epsilon).
  out.gap_lower_bound = orthogonal ? epsilon / znorm : epsilon / ((1.0 + epsilon) * znorm);
  return out;
}

// ---------------------------------------------------------------------------
// Gap estimator

double gap_objective(const CMatrix& x, const SpanBasis& basis, const CVector& coeffs, CVector* gradient) {
  const Index n = x.rows();
  const CMatrix a = basis.combine(coeffs);
  const CMatrix r = a.adjoint() * a - x;
  const double scale = x.squaredNorm();
  if (gradient) {
    const CMatrix ar = a * r;
    const Eigen::Map<const CVector> v(ar.data(), n * n);
    *gradient = (4.0 / scale) * (basis.coords().adjoint() * v);
  }
  return r.squaredNorm() / scale;
}

namespace {

struct StartResult {
  CVector coeffs;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

bool acceptable(const CMatrix& a, double ratio) {
  if (!all_finite(a)) return false;
  Eigen::JacobiSVD<CMatrix> svd(a);
  const RVector& s = svd.singularValues();
  if (s.size() == 0) return false;
  return s(s.size() - 1) >= ratio * s(0) && s(0) > 0.0;
}

double op_residual(const CMatrix& x, const CMatrix& a, double xnorm) { return op_norm(a.adjoint() * a - x) / xnorm; }

StartResult descend(const CMatrix& x, const SpanBasis& basis, CVector c, const GapOptions& options,
                    const ToleranceConfig& tol, double xnorm) {
  StartResult res;
  auto value = [&](const CVector& coeffs, CVector* g) {
    if (!acceptable(basis.combine(coeffs), options.singular_ratio)) return std::numeric_limits<double>::infinity();
    return gap_objective(x, basis, coeffs, g);
  };
  CVector g;
  double f = value(c, &g);
  if (!std::isfinite(f)) return res;
  const double target = 0.1 * tol.eq_tol;
  double step = 1.0;
  int it = 0;
  for (; it < options.max_iter; ++it) {
    if (it % 10 == 0 && op_residual(x, basis.combine(c), xnorm) <= target) break;
    const double gg = g.squaredNorm();
    if (gg <= 1e-300) break;
    double t = step;
    CVector trial;
    double ft = std::numeric_limits<double>::infinity();
    int tries = 0;
    for (; tries < 60; ++tries) {
      trial = c - t * g;
      ft = value(trial, nullptr);
      if (ft <= f - 1e-4 * t * gg) break;
      t *= 0.5;
    }
    if (tries == 60) break;
    CVector g_new;
    value(trial, &g_new);
    const CVector s = trial - c;
    const CVector y = g_new - g;
    const double sy = s.dot(y).real();
    // Barzilai-Borwein step for the next trial, bounded away from degenerate.
    step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-12, 1e12) : 2.0 * t;
    const double decrease = f - ft;
    c = std::move(trial);
    g = std::move(g_new);
    f = ft;
    if (decrease <= 1e-16 * std::max(f, 1e-300) && f < 1e-24) break;
  }
  res.coeffs = std::move(c);
  res.iterations = it;
  res.residual = op_residual(x, basis.combine(res.coeffs), xnorm);
  return res;
}

}  // namespace

FactorizationReport logmodularity_gap(const CMatrix& x, const MatrixAlgebra& a, const GapOptions& options,
                                      const ToleranceConfig& tol) {
  tol.validate();
  check_psd_input(x, a.ambient(), tol, "logmodularity_gap");
  if (options.starts < 1 || options.max_iter < 0) throw PreconditionError("logmodularity_gap: bad options");
  const Index n = a.dim();
  const SpanBasis& basis = a.basis();
  const double xnorm = op_norm(x);

  std::vector<CVector> starts;
  starts.push_back(basis.coefficients(std::sqrt(x.trace().real() / double(n)) * CMatrix::Identity(n, n)));
  starts.push_back(basis.coefficients(cholesky_upper(x, tol)));
  // When A is a nest algebra its nest Cholesky factor lies in A exactly.
  try {
    const ProjectionLattice lat = compute_lat(a, LatOptions{options.seed, 64}, tol);
    if (lat.classification == LatticeClass::Nest) {
      const Nest nest(lat.elements, a.ambient(), tol);
      const CMatrix s = *nest_cholesky(x, nest, tol).factor;
      if (contains(a, s, tol).member) starts.push_back(basis.coefficients(s));
    }
  } catch (const IndeterminateError&) {
  } catch (const NumericalError&) {
  }
  const double s0 = std::sqrt(x.trace().real() / double(n));
  for (int k = static_cast<int>(starts.size()); k < options.starts; ++k) {
    Rng rng(options.seed * 1000003ULL + static_cast<std::uint64_t>(k));
    CMatrix r = a.random_element(rng);
    const double rn = op_norm(r);
    if (rn > 0.0) r *= 0.5 / rn;
    starts.push_back(basis.coefficients(s0 * (CMatrix::Identity(n, n) + r)));
  }
  if (static_cast<int>(starts.size()) > options.starts) starts.resize(static_cast<std::size_t>(options.starts));

  FactorizationReport out;
  StartResult best;
  for (const auto& c0 : starts) {
    StartResult r = descend(x, basis, c0, options, tol, xnorm);
    out.trace.push_back(r.residual);
    out.iterations += r.iterations;
    if (r.residual < best.residual) best = std::move(r);
    if (best.residual <= 0.1 * tol.eq_tol) break;
  }
  if (!std::isfinite(best.residual)) {
    throw NumericalError("logmodularity_gap: every start was singular");
  }
  const CMatrix s = basis.combine(best.coeffs);
  const CMatrix s_inv = s.fullPivLu().inverse();
  out.residual = best.residual;
  out.factor_membership = relative_membership(contains(a, s, tol).residual, s);
  out.inverse_membership = relative_membership(contains(a, s_inv, tol).residual, s_inv);
  if (out.residual <= tol.eq_tol && out.factor_membership <= tol.eq_tol && out.inverse_membership <= tol.eq_tol) {
    out.status = FactorizationStatus::Factored;
    out.factor = s;
  } else {
    out.status = FactorizationStatus::Gap;
    out.gap = out.residual;
  }
  return out;
}

}  // namespace nestlab
