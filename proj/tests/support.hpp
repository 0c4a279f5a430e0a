#pragma once

// Generators and independent oracles shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "nestlab/factorization.hpp"
#include "nestlab/reflexivity.hpp"

namespace nestlab::testing {

inline CMatrix mat(std::initializer_list<std::initializer_list<Complex>> rows) {
  const Index r = static_cast<Index>(rows.size());
  const Index c = static_cast<Index>(rows.begin()->size());
  CMatrix m(r, c);
  Index i = 0;
  for (const auto& row : rows) {
    Index j = 0;
    for (const auto& v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline std::vector<Index> range_indices(Index lo, Index hi) {
  std::vector<Index> v(static_cast<std::size_t>(hi - lo));
  std::iota(v.begin(), v.end(), lo);
  return v;
}

/// V^* diag(d) V with d log-uniform in [1, cond].
inline CMatrix random_pd(Index n, Rng& rng, double cond = 1e6) {
  std::uniform_real_distribution<double> u(0.0, std::log(cond));
  RVector d(n);
  for (Index i = 0; i < n; ++i) d(i) = std::exp(u(rng));
  const CMatrix v = random_unitary(n, rng);
  return hermitian_part(v.adjoint() * d.cast<Complex>().asDiagonal() * v);
}

/// Random composition of n into positive parts.
inline std::vector<Index> random_composition(Index n, Rng& rng, Index max_parts = 0) {
  std::vector<Index> parts;
  std::uniform_int_distribution<int> coin(0, 1);
  Index cur = 1;
  for (Index i = 1; i < n; ++i) {
    if (coin(rng)) {
      parts.push_back(cur);
      cur = 1;
    } else {
      ++cur;
    }
  }
  parts.push_back(cur);
  while (max_parts > 0 && static_cast<Index>(parts.size()) > max_parts) {
    parts[parts.size() - 2] += parts.back();
    parts.pop_back();
  }
  return parts;
}

/// Prefix projections of a composition, conjugated by v: v P_k v^*.
inline std::vector<Projection> nest_from_dims(const std::vector<Index>& dims, const CMatrix& v) {
  const Index n = v.rows();
  std::vector<Projection> out{Projection::zero(n)};
  Index acc = 0;
  for (Index d : dims) {
    acc += d;
    const CMatrix p = coordinate_projection(n, range_indices(0, acc));
    out.push_back(Projection::from_matrix(hermitian_part(v * p * v.adjoint())));
  }
  return out;
}

/// Largest ||(1 - p) x p||_F over the projections: the distance-like defect of
/// x from Alg(E), straight from the definition.
inline double alg_defect(const CMatrix& x, const std::vector<Projection>& e) {
  const Index n = x.rows();
  double worst = 0.0;
  for (const auto& p : e) {
    const CMatrix perp = CMatrix::Identity(n, n) - p.matrix();
    worst = std::max(worst, (perp * x * p.matrix()).norm());
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Preorder algebras: span{e_ij : i R j} for a reflexive transitive relation R.
// They contain the diagonal masa, and a coordinate subset S is invariant iff
// j in S and i R j imply i in S. Purely combinatorial, no linear algebra.

using Relation = std::vector<std::vector<bool>>;

inline Relation transitive_closure(Relation r) {
  const std::size_t n = r.size();
  for (std::size_t i = 0; i < n; ++i) r[i][i] = true;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (r[i][k] && r[k][j]) r[i][j] = true;
  return r;
}

inline Relation random_preorder(std::size_t n, double density, Rng& rng) {
  std::bernoulli_distribution b(density);
  Relation r(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && b(rng)) r[i][j] = true;
  return transitive_closure(r);
}

inline MatrixAlgebra preorder_algebra(const Relation& r) {
  const Index n = static_cast<Index>(r.size());
  std::vector<CMatrix> gens;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (r[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) gens.push_back(matrix_unit(n, i, j));
  return close_algebra(gens, AmbientAlgebra::full(n));
}

/// All invariant coordinate subsets, as bitmasks.
inline std::set<unsigned> brute_force_lattice(const Relation& r) {
  const std::size_t n = r.size();
  std::set<unsigned> out;
  for (unsigned s = 0; s < (1u << n); ++s) {
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i)
      for (std::size_t j = 0; j < n && ok; ++j)
        if (r[i][j] && ((s >> j) & 1u) && !((s >> i) & 1u)) ok = false;
    if (ok) out.insert(s);
  }
  return out;
}

inline Projection mask_projection(std::size_t n, unsigned s) {
  std::vector<Index> idx;
  for (std::size_t i = 0; i < n; ++i)
    if ((s >> i) & 1u) idx.push_back(static_cast<Index>(i));
  return Projection::coordinate(static_cast<Index>(n), idx);
}

/// The fixed 30-algebra corpus: T_n, diagonal, M_n for n = 2..5, a 2+2 block
/// pattern, and random preorders.
inline std::vector<Relation> oracle_corpus() {
  std::vector<Relation> corpus;
  for (std::size_t n = 2; n <= 5; ++n) {
    Relation t(n, std::vector<bool>(n, false)), d(n, std::vector<bool>(n, false)), f(n, std::vector<bool>(n, true));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) t[i][j] = true;
    for (std::size_t i = 0; i < n; ++i) d[i][i] = true;
    corpus.push_back(t);
    corpus.push_back(d);
    corpus.push_back(f);
  }
  Relation blocks(4, std::vector<bool>(4, false));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) blocks[i][j] = (i / 2 == j / 2) || (i < 2);
  corpus.push_back(blocks);
  Rng rng(20240611);
  std::uniform_int_distribution<int> dim(3, 5);
  std::uniform_real_distribution<double> dens(0.1, 0.45);
  while (corpus.size() < 30) corpus.push_back(random_preorder(static_cast<std::size_t>(dim(rng)), dens(rng), rng));
  return corpus;
}

}  // namespace nestlab::testing
