#include "doctest.h"
#include "nestlab/errors.hpp"
#include "support.hpp"

using namespace nestlab;
using namespace nestlab::testing;

namespace {

MatrixAlgebra t_n(Index n) {
  std::vector<Projection> prefixes;
  for (Index k = 1; k < n; ++k) prefixes.push_back(Projection::coordinate(n, range_indices(0, k)));
  return alg_of(prefixes, AmbientAlgebra::full(n));
}

MatrixAlgebra full(Index n) { return close_algebra(AmbientAlgebra::full(n).basis().elements(), AmbientAlgebra::full(n)); }

MatrixAlgebra equal_diagonal() {
  std::vector<CMatrix> g{matrix_unit(2, 0, 1)};
  return close_algebra(g, AmbientAlgebra::full(2));
}

}  // namespace

TEST_CASE("nest validation") {
  const auto amb = AmbientAlgebra::full(3);
  const auto e1 = Projection::coordinate(3, std::vector<Index>{0});
  const auto e2 = Projection::coordinate(3, std::vector<Index>{1});
  CHECK_THROWS_AS(Nest({e1, Projection::identity(3)}, amb), PreconditionError);
  CHECK_THROWS_AS(Nest({Projection::zero(3), e1, e2, Projection::identity(3)}, amb), PreconditionError);
  CHECK_THROWS_AS(Nest::from_index_sets({{0}, {1}}, amb), PreconditionError);
  CHECK_THROWS_AS(Nest::from_index_sets({{5}}, amb), PreconditionError);
  const auto n = Nest::from_index_sets({{0, 1}, {0}}, amb);
  CHECK(n.projections().size() == 4);
  CHECK(n.atom_dims() == std::vector<Index>{1, 1, 1});
  // Duplicates and the trivial projections are absorbed.
  const auto m = Nest::complete({e1, e1, Projection::identity(3), Projection::zero(3)}, amb);
  CHECK(m.projections().size() == 3);
  const CMatrix& u = n.adapted_basis();
  CHECK((u.adjoint() * u - CMatrix::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("nest_cholesky examples") {
  const auto amb2 = AmbientAlgebra::full(2);
  const auto nest = Nest::from_index_sets({{0}}, amb2);
  auto id = nest_cholesky(CMatrix::Identity(2, 2), nest);
  CHECK(id.status == FactorizationStatus::Factored);
  CHECK((*id.factor - CMatrix::Identity(2, 2)).norm() < 1e-15);

  auto r = nest_cholesky(mat({{2, 1}, {1, 2}}), nest);
  const CMatrix expected = mat({{std::sqrt(2.0), 1 / std::sqrt(2.0)}, {0, std::sqrt(1.5)}});
  CHECK((*r.factor - expected).norm() < 1e-14);
  CHECK(r.residual < 1e-15);

  Rng rng(5);
  const CMatrix v = random_unitary(6, rng);
  const auto e = nest_from_dims({2, 3, 1}, v);
  const Nest n6(e, AmbientAlgebra::full(6));
  const CMatrix x = random_pd(6, rng, 1e3);
  auto f = nest_cholesky(x, n6);
  CHECK(f.status == FactorizationStatus::Factored);
  CHECK(f.residual <= 1e-9);
  CHECK(alg_defect(*f.factor, e) < 1e-12);
  CHECK(alg_defect(f.factor->inverse(), e) < 1e-11);
  const auto a = alg_of(e, AmbientAlgebra::full(6));
  CHECK(contains(a, *f.factor).member);
  CHECK(contains(a, f.factor->inverse()).member);

  CHECK_THROWS_AS(nest_cholesky(mat({{1, 2}, {2, 1}}), nest), PreconditionError);
  CHECK_THROWS_AS(nest_cholesky(mat({{1, 1}, {0, 1}}), nest), PreconditionError);
}

TEST_CASE("nest_cholesky diagonal blocks factor the Schur complements") {
  Rng rng(8);
  for (int t = 0; t < 10; ++t) {
    const Index n = 3 + t % 6;
    const auto dims = random_composition(n, rng);
    const CMatrix v = random_unitary(n, rng);
    const Nest nest(nest_from_dims(dims, v), AmbientAlgebra::full(n));
    const CMatrix x = random_pd(n, rng, 1e4);
    const CMatrix s = nest_cholesky_adapted(x, nest);
    const CMatrix& u = nest.adapted_basis();
    const CMatrix y = u.adjoint() * x * u;
    Index o = 0;
    for (Index d : nest.atom_dims()) {
      // Schur complement of the leading o x o block, restricted to the atom.
      CMatrix schur = y.block(o, o, d, d);
      if (o > 0) {
        schur -= y.block(o, 0, d, o) * y.block(0, 0, o, o).inverse() * y.block(0, o, o, d);
      }
      const CMatrix sii = s.block(o, o, d, d);
      CHECK((sii.adjoint() * sii - schur).norm() <= 1e-9 * x.norm());
      o += d;
    }
  }
}

TEST_CASE("nest_cholesky in a direct-sum ambient") {
  AmbientAlgebra amb({2, 3});
  const auto nest = Nest::from_index_sets({{0}, {0, 1, 2}, {0, 1, 2, 3}}, amb);
  Rng rng(12);
  CMatrix x = CMatrix::Zero(5, 5);
  x.block(0, 0, 2, 2) = random_pd(2, rng, 10);
  x.block(2, 2, 3, 3) = random_pd(3, rng, 10);
  auto r = nest_cholesky(x, nest);
  CHECK(r.residual < 1e-12);
  CHECK(amb.residual(*r.factor) == 0.0);
  CHECK(r.factor_membership < 1e-12);
  CHECK(r.inverse_membership < 1e-12);
  CMatrix off = x;
  off(0, 4) = off(4, 0) = 0.1;
  CHECK_THROWS_AS(nest_cholesky(off, nest), PreconditionError);
}

TEST_CASE("compression preserves factorization") {
  Rng rng(14);
  for (int t = 0; t < 6; ++t) {
    const Index n = 4 + t % 3;
    const auto dims = random_composition(n, rng);
    if (dims.size() < 3) continue;
    const CMatrix v = random_unitary(n, rng);
    const auto e = nest_from_dims(dims, v);
    const auto a = alg_of(e, AmbientAlgebra::full(n));
    const auto c = compress(a, e[e.size() - 1].matrix(), e[1].matrix());
    const auto l = compute_lat(c.algebra);
    REQUIRE(l.classification == LatticeClass::Nest);
    const Nest cn(l.elements, c.algebra.ambient());
    const CMatrix x = random_pd(c.algebra.dim(), rng, 1e3);
    auto r = nest_cholesky(x, cn);
    CHECK(contains(c.algebra, *r.factor).member);
    CHECK(contains(c.algebra, r.factor->inverse()).member);
  }
}

TEST_CASE("triangularize examples") {
  auto t = triangularize(t_n(3));
  CHECK(t.atom_dims == std::vector<Index>{1, 1, 1});
  CHECK(t.max_lower_block < 1e-12);
  for (Index i = 0; i < 3; ++i) CHECK(std::abs(t.unitary(i, i)) == doctest::Approx(1.0));

  Rng rng(21);
  const CMatrix v = random_unitary(3, rng);
  std::vector<Projection> e{Projection::coordinate(3, std::vector<Index>{0, 1})};
  const auto conj = conjugate(alg_of(e, AmbientAlgebra::full(3)), v);
  auto r = triangularize(conj);
  CHECK(r.atom_dims == std::vector<Index>{2, 1});
  CHECK(r.max_lower_block < 1e-9);

  auto m = triangularize(full(4));
  CHECK(m.atom_dims == std::vector<Index>{4});

  std::vector<CMatrix> none;
  CHECK_THROWS_AS(triangularize(close_algebra(none, AmbientAlgebra::full(2))), PreconditionError);
}

TEST_CASE("has_factorization_fd examples") {
  for (Index n = 2; n <= 4; ++n) {
    auto t = has_factorization_fd(t_n(n));
    CHECK(t.verdict);
    REQUIRE(t.triangularization.has_value());
    CHECK(static_cast<Index>(t.triangularization->atom_dims.size()) == n);
    CHECK(has_factorization_fd(full(n)).verdict);
  }
  auto e = has_factorization_fd(equal_diagonal());
  CHECK(!e.verdict);
  CHECK(e.reason.find("reflexive") != std::string::npos);
  // The estimator agrees: diag(1, 2) is out of reach.
  auto g = logmodularity_gap(mat({{1, 0}, {0, 2}}), equal_diagonal());
  CHECK(g.status == FactorizationStatus::Gap);
  CHECK(*g.gap > 0.1);

  std::vector<CMatrix> none;
  auto s = has_factorization_fd(close_algebra(none, AmbientAlgebra::full(2)));
  CHECK(!s.verdict);

  // Diagonal algebra in M_2: CSL that is not a nest.
  std::vector<CMatrix> d{matrix_unit(2, 0, 0)};
  CHECK(!has_factorization_fd(close_algebra(d, AmbientAlgebra::full(2))).verdict);
}

TEST_CASE("has_factorization_fd on direct sums") {
  AmbientAlgebra amb({2, 2});
  std::vector<Projection> e{Projection::coordinate(4, std::vector<Index>{0})};
  auto v = has_factorization_fd(alg_of(e, amb));
  CHECK(v.verdict);
  REQUIRE(v.blocks.size() == 2);
  CHECK(v.blocks[0].triangularization->atom_dims == std::vector<Index>{1, 1});
  CHECK(v.blocks[1].triangularization->atom_dims == std::vector<Index>{2});

  // An algebra that ties the two blocks together misses the central projections.
  std::vector<CMatrix> tied{CMatrix::Identity(4, 4), matrix_unit(4, 0, 1) + matrix_unit(4, 2, 3)};
  auto w = has_factorization_fd(close_algebra(tied, amb));
  CHECK(!w.verdict);
  CHECK(w.reason.find("central") != std::string::npos);
}

TEST_CASE("has_factorization_fd is unitarily invariant") {
  Rng rng(47);
  for (int t = 0; t < 6; ++t) {
    const Index n = 2 + t % 4;
    const auto dims = random_composition(n, rng);
    const auto a = alg_of(nest_from_dims(dims, CMatrix::Identity(n, n)), AmbientAlgebra::full(n));
    const CMatrix u = random_unitary(n, rng);
    CHECK(has_factorization_fd(a).verdict == has_factorization_fd(conjugate(a, u)).verdict);
    const auto ed = conjugate(equal_diagonal(), random_unitary(2, rng));
    CHECK(!has_factorization_fd(ed).verdict);
  }
}

TEST_CASE("witness examples") {
  const auto amb2 = AmbientAlgebra::full(2);
  const auto p = Projection::coordinate(2, std::vector<Index>{0});
  const auto q = Projection::coordinate(2, std::vector<Index>{1});
  auto w = witness_generator(p, q, amb2, WitnessMode::Orthogonal, 0.25);
  CHECK((w.v - matrix_unit(2, 1, 0)).norm() < 1e-15);
  CHECK((w.z - mat({{1, 0.25}, {0.25, 1}})).norm() < 1e-15);
  CHECK(w.v.adjoint() * w.v == p.matrix());
  CHECK(w.v * w.v.adjoint() == q.matrix());
  const auto ez = hermitian_eig(w.z);
  CHECK(ez.values(0) == doctest::Approx(0.75));
  CHECK(ez.values(1) == doctest::Approx(1.25));
  CHECK(*w.gap_lower_bound == doctest::Approx(0.2));

  CHECK_THROWS_AS(witness_generator(p, p, amb2, WitnessMode::Orthogonal), PreconditionError);
  CHECK_THROWS_AS(witness_generator(p, p, amb2, WitnessMode::Commuting), PreconditionError);
  CHECK_THROWS_AS(witness_generator(p, p, amb2, WitnessMode::Generic), PreconditionError);
  CHECK_THROWS_AS(witness_generator(p, q, amb2, WitnessMode::Orthogonal, 0.5), PreconditionError);

  const auto amb4 = AmbientAlgebra::full(4);
  const auto p4 = Projection::coordinate(4, std::vector<Index>{0, 1});
  const auto q4 = Projection::coordinate(4, std::vector<Index>{0, 2});
  auto c = witness_generator(p4, q4, amb4, WitnessMode::Commuting, 0.25);
  CHECK((c.v - matrix_unit(4, 2, 1)).norm() < 1e-15);
  CHECK((c.z - (CMatrix::Identity(4, 4) + 0.25 * (matrix_unit(4, 2, 1) + matrix_unit(4, 1, 2)))).norm() < 1e-15);
  const CMatrix i4 = CMatrix::Identity(4, 4);
  // v = v p q^perp = p^perp q v
  CHECK((c.v - c.v * p4.matrix() * (i4 - q4.matrix())).norm() < 1e-15);
  CHECK((c.v - (i4 - p4.matrix()) * q4.matrix() * c.v).norm() < 1e-15);
  CHECK(*c.gap_lower_bound == doctest::Approx(0.16));

  // Orthogonal projections in different ambient blocks cannot be connected.
  AmbientAlgebra split({1, 1});
  CHECK_THROWS_AS(witness_generator(p, q, split, WitnessMode::Orthogonal), PreconditionError);

  CHECK(witness_mode_from_string("GENERIC") == WitnessMode::Generic);
  CHECK_THROWS_AS(witness_mode_from_string("generic"), PreconditionError);
}

TEST_CASE("generic witness follows the block pattern") {
  Rng rng(53);
  for (double alpha : {1.0, 2.0, 4.0, 8.0}) {
    const Index n = 6;
    const CMatrix v = random_unitary(n, rng);
    const CMatrix w = random_unitary(n, rng);
    const auto p = Projection::onto(v.leftCols(3));
    const auto q = Projection::onto(w.leftCols(3));
    const auto h = halmos_decompose(p, q);
    REQUIRE(h.generic_dim == 3);
    auto wt = witness_generator(p, q, AmbientAlgebra::full(n), WitnessMode::Generic, 0.25, alpha);
    CHECK(hermitian_eig(wt.z).values(0) > 0.0);
    const CMatrix zc = h.unitary * wt.z * h.unitary.adjoint();
    const Index k = h.generic_dim;
    const Index g = h.generic_offset();
    const CMatrix ik = CMatrix::Identity(k, k);
    CHECK((zc.block(g, g, k, k) - ik).norm() < 1e-12);
    CHECK((zc.block(g, g + k, k, k) - alpha * ik).norm() < 1e-12);
    CHECK((zc.block(g + k, g + k, k, k) - (alpha * alpha + 1) * ik).norm() < 1e-12 * alpha * alpha);
    CHECK((wt.v * wt.v - CMatrix::Identity(n, n)).norm() < 1e-12);
  }
  CHECK_THROWS_AS(witness_generator(Projection::coordinate(2, std::vector<Index>{0}),
                                    Projection::onto(mat({{1}, {1}})), AmbientAlgebra::full(2), WitnessMode::Generic,
                                    0.25, 0.5),
                  PreconditionError);
}

TEST_CASE("gap objective gradient matches finite differences") {
  Rng rng(59);
  for (int t = 0; t < 5; ++t) {
    const Index n = 2 + t % 3;
    const auto dims = random_composition(n, rng);
    const auto a = alg_of(nest_from_dims(dims, random_unitary(n, rng)), AmbientAlgebra::full(n));
    const CMatrix x = random_pd(n, rng, 10);
    const CVector c = gaussian_vector(a.dimension(), rng);
    CVector g;
    gap_objective(x, a.basis(), c, &g);
    const double h = 1e-6;
    for (Index k = 0; k < a.dimension(); ++k) {
      CVector cp = c, cm = c;
      cp(k) += h;
      cm(k) -= h;
      const double dre = (gap_objective(x, a.basis(), cp, nullptr) - gap_objective(x, a.basis(), cm, nullptr)) / (2 * h);
      cp = c;
      cm = c;
      cp(k) += Complex(0, h);
      cm(k) -= Complex(0, h);
      const double dim = (gap_objective(x, a.basis(), cp, nullptr) - gap_objective(x, a.basis(), cm, nullptr)) / (2 * h);
      CHECK(std::abs(g(k).real() - dre) <= 1e-6 * std::max(1.0, std::abs(dre)));
      CHECK(std::abs(g(k).imag() - dim) <= 1e-6 * std::max(1.0, std::abs(dim)));
    }
  }
}

TEST_CASE("logmodularity_gap examples") {
  auto i = logmodularity_gap(CMatrix::Identity(3, 3), t_n(3));
  CHECK(i.status == FactorizationStatus::Factored);
  auto e = logmodularity_gap(CMatrix::Identity(2, 2), equal_diagonal());
  CHECK(e.status == FactorizationStatus::Factored);
  CHECK((*e.factor - CMatrix::Identity(2, 2)).norm() < 1e-9);

  Rng rng(61);
  for (int t = 0; t < 4; ++t) {
    const Index n = 2 + t;
    const auto e2 = nest_from_dims(random_composition(n, rng), random_unitary(n, rng));
    const auto a = alg_of(e2, AmbientAlgebra::full(n));
    const CMatrix x = random_pd(n, rng, 100);
    auto r = logmodularity_gap(x, a);
    CHECK(r.status == FactorizationStatus::Factored);
    CHECK(r.residual <= 1e-9);
  }

  const auto p = Projection::coordinate(2, std::vector<Index>{0});
  const auto q = Projection::coordinate(2, std::vector<Index>{1});
  const auto w = witness_generator(p, q, AmbientAlgebra::full(2), WitnessMode::Orthogonal, 0.25);
  const std::vector<Projection> pq{p, q};
  auto g = logmodularity_gap(w.z, alg_of(pq, AmbientAlgebra::full(2)));
  CHECK(g.status == FactorizationStatus::Gap);
  CHECK(*g.gap == doctest::Approx(0.2).epsilon(1e-6));
  CHECK(g.trace.size() == 8);

  // Over the scalars the best a^* a is t I with t the midpoint of the
  // spectrum of Z.
  const auto line = Projection::onto(mat({{1}, {2}}));
  const auto sc = close_algebra(std::vector<CMatrix>{}, AmbientAlgebra::full(2));
  REQUIRE(sc.dimension() == 1);
  for (double alpha : {1.0, 2.0, 4.0}) {
    const auto z = witness_generator(p, line, AmbientAlgebra::full(2), WitnessMode::Generic, 0.25, alpha).z;
    const auto ev = hermitian_eig(z).values;
    const double exact = (ev(1) - ev(0)) / (2 * ev(1));
    auto r = logmodularity_gap(z, sc);
    CHECK(r.status == FactorizationStatus::Gap);
    CHECK(*r.gap == doctest::Approx(exact).epsilon(1e-6));
  }

  CHECK_THROWS_AS(logmodularity_gap(mat({{1, 2}, {2, 1}}), full(2)), PreconditionError);
}
