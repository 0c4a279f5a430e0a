#include "doctest.h"
#include "nestlab/errors.hpp"
#include "support.hpp"

using namespace nestlab;
using nestlab::testing::mat;

namespace {

// Span of all products of at most `depth` generators, plus I (the oracle for
// close_algebra on small inputs).
Index brute_product_span(const std::vector<CMatrix>& gens, Index n, int depth) {
  std::vector<CMatrix> level{CMatrix::Identity(n, n)};
  std::vector<CMatrix> all = level;
  for (int d = 0; d < depth; ++d) {
    std::vector<CMatrix> next;
    for (const auto& w : level)
      for (const auto& g : gens) next.push_back(w * g);
    all.insert(all.end(), next.begin(), next.end());
    level = std::move(next);
  }
  CMatrix coords(n * n, static_cast<Index>(all.size()));
  for (std::size_t k = 0; k < all.size(); ++k) coords.col(static_cast<Index>(k)) = vec(all[k]);
  return range_basis(coords).cols();
}

MatrixAlgebra t2() {
  std::vector<CMatrix> g{matrix_unit(2, 0, 0), matrix_unit(2, 0, 1)};
  return close_algebra(g, AmbientAlgebra::full(2));
}

}  // namespace

TEST_CASE("ambient algebra") {
  AmbientAlgebra m({2, 1});
  CHECK(m.dim() == 3);
  CHECK(m.basis().size() == 5);
  CHECK(!m.is_factor());
  CHECK(m.contains(CMatrix::Identity(3, 3)));
  CHECK(!m.contains(matrix_unit(3, 0, 2)));
  CHECK(m.residual(matrix_unit(3, 2, 0)) == doctest::Approx(1.0));
  CHECK((m.central_projection(1) - matrix_unit(3, 2, 2)).norm() == 0.0);
  for (const auto& b : m.basis().elements()) CHECK(m.basis().residual(b.adjoint()) < 1e-12);
  CHECK_THROWS_AS(AmbientAlgebra({2, 0}), PreconditionError);
}

TEST_CASE("close_algebra examples") {
  const auto amb = AmbientAlgebra::full(2);
  std::vector<CMatrix> none;
  CHECK(close_algebra(none, amb).dimension() == 1);
  std::vector<CMatrix> e12{matrix_unit(2, 0, 1)};
  CHECK(close_algebra(e12, amb).dimension() == 2);
  CHECK(t2().dimension() == 3);
  std::vector<CMatrix> outside{matrix_unit(3, 0, 2)};
  CHECK_THROWS_AS(close_algebra(outside, AmbientAlgebra({2, 1})), PreconditionError);
}

TEST_CASE("close_algebra agrees with the brute-force product span") {
  Rng rng(17);
  for (int t = 0; t < 12; ++t) {
    const Index n = 2 + t % 3;
    std::vector<CMatrix> gens;
    // Sparse random generators give algebras of intermediate dimension.
    for (int k = 0; k < 1 + t % 2; ++k) {
      CMatrix g = CMatrix::Zero(n, n);
      std::uniform_int_distribution<Index> idx(0, n - 1);
      for (int e = 0; e < 2; ++e) g(idx(rng), idx(rng)) = Complex(1.0 + e, 0.5 * e);
      gens.push_back(g);
    }
    const auto a = close_algebra(gens, AmbientAlgebra::full(n));
    CHECK(a.dimension() == brute_product_span(gens, n, static_cast<int>(n * n)));
    CHECK(is_closed_under_products(a));
    // Idempotent closure.
    const auto again = close_algebra(a.elements(), AmbientAlgebra::full(n));
    CHECK(again.dimension() == a.dimension());
  }
}

TEST_CASE("contains examples") {
  const auto a = t2();
  auto id = contains(a, CMatrix::Identity(2, 2));
  CHECK(id.member);
  CHECK(id.residual < 1e-12);
  auto low = contains(a, matrix_unit(2, 1, 0));
  CHECK(!low.member);
  CHECK(low.residual == doctest::Approx(1.0));
  CHECK(contains(a, matrix_unit(2, 0, 0)).member);
  CHECK_THROWS_AS(contains(a, CMatrix::Identity(3, 3)), PreconditionError);
}

TEST_CASE("commutant examples") {
  const auto full = AmbientAlgebra::full(3).basis().elements();
  CHECK(commutant(full, 3).dimension() == 1);
  std::vector<CMatrix> d{mat({{1, 0}, {0, 2}})};
  const auto c = commutant(d, 2);
  CHECK(c.dimension() == 2);
  CHECK(contains(c, matrix_unit(2, 1, 1)).member);
  std::vector<CMatrix> none;
  CHECK(commutant(none, 3).dimension() == 9);
}

TEST_CASE("double commutant of *-closed algebras") {
  Rng rng(23);
  for (int t = 0; t < 6; ++t) {
    const Index n = 2 + t % 3;
    const CMatrix h = random_hermitian(n, rng);
    CMatrix proj = coordinate_projection(n, std::vector<Index>{0});
    std::vector<CMatrix> gens{h * proj * h, proj};
    std::vector<CMatrix> sym = gens;
    for (const auto& g : gens) sym.push_back(g.adjoint());
    const auto a = close_algebra(sym, AmbientAlgebra::full(n));
    const auto once = commutant(a.elements(), n);
    const auto twice = commutant(once.elements(), n);
    CHECK(span_equal(twice.basis(), a.basis()));
  }
}

TEST_CASE("central decomposition") {
  const auto m3 = close_algebra(AmbientAlgebra::full(3).basis().elements(), AmbientAlgebra::full(3));
  auto c = central_decomposition(m3);
  CHECK(c.blocks == std::vector<Index>{3});
  CHECK(c.is_factor);

  std::vector<CMatrix> diag{matrix_unit(2, 0, 0)};
  auto d = central_decomposition(close_algebra(diag, AmbientAlgebra::full(2)));
  CHECK(d.blocks == std::vector<Index>{1, 1});
  CHECK(!d.is_factor);

  std::vector<CMatrix> gens{matrix_unit(3, 0, 1), matrix_unit(3, 1, 0), matrix_unit(3, 0, 0), matrix_unit(3, 2, 2)};
  auto s = central_decomposition(close_algebra(gens, AmbientAlgebra::full(3)));
  std::vector<Index> blocks = s.blocks;
  std::sort(blocks.begin(), blocks.end());
  CHECK(blocks == std::vector<Index>{1, 2});
  const CMatrix conj = s.unitary.adjoint() * gens[0] * s.unitary;
  // Block diagonal after conjugation.
  Index o = 0;
  double off = conj.norm() * conj.norm();
  for (Index b : s.blocks) {
    off -= conj.block(o, o, b, b).squaredNorm();
    o += b;
  }
  CHECK(off < 1e-18);

  CHECK_THROWS_AS(central_decomposition(t2()), PreconditionError);
}

TEST_CASE("compress examples") {
  const auto a = t2();
  const CMatrix i2 = CMatrix::Identity(2, 2);
  const auto same = compress(a, i2, CMatrix::Zero(2, 2));
  CHECK(same.algebra.dimension() == 3);

  const auto t3 = alg_of(std::vector<Projection>{Projection::coordinate(3, std::vector<Index>{0}),
                                                 Projection::coordinate(3, std::vector<Index>{0, 1})},
                         AmbientAlgebra::full(3));
  const auto mid = compress(t3, coordinate_projection(3, std::vector<Index>{0, 1}),
                            coordinate_projection(3, std::vector<Index>{0}));
  CHECK(mid.algebra.dim() == 1);
  CHECK(mid.algebra.dimension() == 1);
  CHECK(std::abs(mid.isometry(1, 0)) == doctest::Approx(1.0));

  const auto corner = compress(a, matrix_unit(2, 0, 0), CMatrix::Zero(2, 2));
  CHECK(corner.algebra.dim() == 1);

  CHECK_THROWS_AS(compress(a, matrix_unit(2, 1, 1), CMatrix::Zero(2, 2)), PreconditionError);
  CHECK_THROWS_AS(compress(a, matrix_unit(2, 0, 0), i2), PreconditionError);
}

TEST_CASE("compression is closed and unitary conjugation is equivariant") {
  Rng rng(29);
  for (int t = 0; t < 8; ++t) {
    const Index n = 3 + t % 3;
    const auto dims = nestlab::testing::random_composition(n, rng);
    const CMatrix v = random_unitary(n, rng);
    const auto nest = nestlab::testing::nest_from_dims(dims, v);
    const auto a = alg_of(nest, AmbientAlgebra::full(n));
    if (nest.size() >= 3) {
      const auto c = compress(a, nest.back().matrix(), nest[1].matrix());
      CHECK(is_closed_under_products(c.algebra));
    }
    const CMatrix u = random_unitary(n, rng);
    const auto conj = conjugate(a, u);
    SpanBasis expected(n);
    std::vector<CMatrix> moved;
    for (const auto& b : a.elements()) moved.push_back(u.adjoint() * b * u);
    expected.extend(moved, ToleranceConfig{});
    CHECK(span_equal(conj.basis(), expected));
  }
}

TEST_CASE("self-adjoint part and star closure") {
  const auto a = t2();
  CHECK(!is_star_closed(a));
  CHECK(self_adjoint_part(a).dimension() == 2);
  CHECK(adjoint_algebra(a).dimension() == 3);
  CHECK(contains(adjoint_algebra(a), matrix_unit(2, 1, 0)).member);
}
