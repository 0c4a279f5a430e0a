// Python bindings. Matrices cross as complex numpy arrays; algebras are
// passed as generator lists plus the ambient block dimensions.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nestlab/cli.hpp"
#include "nestlab/errors.hpp"
#include "nestlab/factorization.hpp"
#include "nestlab/reflexivity.hpp"
#include "nestlab/twoproj.hpp"

namespace py = pybind11;
using namespace nestlab;

namespace {

AmbientAlgebra ambient_for(Index n, const std::optional<std::vector<Index>>& block_dims) {
  return block_dims ? AmbientAlgebra(*block_dims) : AmbientAlgebra::full(n);
}

ToleranceConfig tol_for(double eq_tol) {
  ToleranceConfig tol;
  tol.eq_tol = eq_tol;
  tol.validate();
  return tol;
}

MatrixAlgebra algebra(const std::vector<CMatrix>& generators, Index n,
                      const std::optional<std::vector<Index>>& block_dims, const ToleranceConfig& tol) {
  return close_algebra(generators, ambient_for(n, block_dims), tol);
}

std::vector<Projection> projections(const std::vector<CMatrix>& ms, const ToleranceConfig& tol) {
  std::vector<Projection> out;
  for (const auto& m : ms) out.push_back(Projection::from_matrix(m, tol));
  return out;
}

std::vector<CMatrix> matrices(const std::vector<Projection>& ps) {
  std::vector<CMatrix> out;
  for (const auto& p : ps) out.push_back(p.matrix());
  return out;
}

py::dict lattice_dict(const ProjectionLattice& l) {
  py::dict d;
  d["classification"] = to_string(l.classification);
  d["elements"] = matrices(l.elements);
  d["complete"] = l.complete;
  return d;
}

py::dict report_dict(const FactorizationReport& r) {
  py::dict d;
  d["status"] = to_string(r.status);
  d["factor"] = r.factor;
  d["residual"] = r.residual;
  d["gap"] = r.gap;
  d["factor_membership"] = r.factor_membership;
  d["inverse_membership"] = r.inverse_membership;
  d["trace"] = r.trace;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Invariant subspace lattices, nest algebras and factorization";
  m.attr("__version__") = cli::kVersion;

  static py::exception<Error> error(m, "Error");
  static py::exception<PreconditionError> precondition(m, "PreconditionError", error.ptr());
  static py::exception<IndeterminateError> indeterminate(m, "IndeterminateError", error.ptr());
  static py::exception<NumericalError> numerical(m, "NumericalError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const PreconditionError& e) {
      precondition(e.what());
    } catch (const IndeterminateError& e) {
      indeterminate(e.what());
    } catch (const NumericalError& e) {
      numerical(e.what());
    } catch (const Error& e) {
      error(e.what());
    }
  });

  m.def(
      "compute_lat",
      [](const std::vector<CMatrix>& generators, Index n, std::optional<std::vector<Index>> block_dims,
         std::uint64_t seed, int budget, double eq_tol) {
        const auto tol = tol_for(eq_tol);
        return lattice_dict(compute_lat(algebra(generators, n, block_dims, tol), LatOptions{seed, budget}, tol));
      },
      py::arg("generators"), py::arg("n"), py::arg("block_dims") = py::none(), py::arg("seed") = 0,
      py::arg("budget") = 64, py::arg("eq_tol") = 1e-9,
      "Lattice of invariant projections of the algebra generated by `generators`.");

  m.def(
      "algebra_basis",
      [](const std::vector<CMatrix>& generators, Index n, std::optional<std::vector<Index>> block_dims,
         double eq_tol) { return algebra(generators, n, block_dims, tol_for(eq_tol)).elements(); },
      py::arg("generators"), py::arg("n"), py::arg("block_dims") = py::none(), py::arg("eq_tol") = 1e-9,
      "Frobenius-orthonormal basis of the generated unital algebra.");

  m.def(
      "alg_of",
      [](const std::vector<CMatrix>& lattice, Index n, std::optional<std::vector<Index>> block_dims, double eq_tol) {
        const auto tol = tol_for(eq_tol);
        return alg_of(projections(lattice, tol), ambient_for(n, block_dims), tol).elements();
      },
      py::arg("projections"), py::arg("n"), py::arg("block_dims") = py::none(), py::arg("eq_tol") = 1e-9,
      "Basis of the algebra leaving every projection invariant.");

  m.def(
      "is_reflexive",
      [](const std::vector<CMatrix>& generators, Index n, std::optional<std::vector<Index>> block_dims,
         std::uint64_t seed, double eq_tol) {
        const auto tol = tol_for(eq_tol);
        const auto r = is_reflexive(algebra(generators, n, block_dims, tol), LatOptions{seed, 64}, tol);
        py::dict d;
        d["status"] = to_string(r.status);
        d["extra_dim"] = r.extra_dim;
        return d;
      },
      py::arg("generators"), py::arg("n"), py::arg("block_dims") = py::none(), py::arg("seed") = 0,
      py::arg("eq_tol") = 1e-9);

  m.def(
      "nest_cholesky",
      [](const CMatrix& x, const std::vector<CMatrix>& nest, std::optional<std::vector<Index>> block_dims,
         double eq_tol) {
        const auto tol = tol_for(eq_tol);
        const Nest ne = Nest::complete(projections(nest, tol), ambient_for(x.rows(), block_dims), tol);
        return report_dict(nest_cholesky(x, ne, tol));
      },
      py::arg("x"), py::arg("nest"), py::arg("block_dims") = py::none(), py::arg("eq_tol") = 1e-9,
      "S with S^* S = X and S, S^{-1} in the nest algebra.");

  m.def(
      "has_factorization",
      [](const std::vector<CMatrix>& generators, Index n, std::optional<std::vector<Index>> block_dims,
         std::uint64_t seed, double eq_tol) {
        const auto tol = tol_for(eq_tol);
        const auto v = has_factorization_fd(algebra(generators, n, block_dims, tol), LatOptions{seed, 64}, tol);
        return py::make_tuple(v.verdict, v.reason);
      },
      py::arg("generators"), py::arg("n"), py::arg("block_dims") = py::none(), py::arg("seed") = 0,
      py::arg("eq_tol") = 1e-9, "(verdict, reason)");

  m.def(
      "triangularize",
      [](const std::vector<CMatrix>& generators, Index n, std::uint64_t seed, double eq_tol) {
        const auto tol = tol_for(eq_tol);
        const auto t = triangularize(algebra(generators, n, std::nullopt, tol), LatOptions{seed, 64}, tol);
        py::dict d;
        d["unitary"] = t.unitary;
        d["atom_dims"] = t.atom_dims;
        d["max_lower_block"] = t.max_lower_block;
        return d;
      },
      py::arg("generators"), py::arg("n"), py::arg("seed") = 0, py::arg("eq_tol") = 1e-9);

  m.def(
      "halmos_decompose",
      [](const CMatrix& p, const CMatrix& q, double eq_tol) {
        const auto tol = tol_for(eq_tol);
        const auto h = halmos_decompose(Projection::from_matrix(p, tol), Projection::from_matrix(q, tol), tol);
        py::dict d;
        d["unitary"] = h.unitary;
        d["generic_dim"] = h.generic_dim;
        d["x"] = h.x;
        d["y"] = h.y;
        d["corner_ranks"] = std::vector<Index>{h.corner_ef.rank(), h.corner_ef_perp.rank(), h.corner_eperp_f.rank(),
                                               h.corner_eperp_fperp.rank()};
        d["canonical_p"] = h.canonical_p();
        d["canonical_q"] = h.canonical_q();
        return d;
      },
      py::arg("p"), py::arg("q"), py::arg("eq_tol") = 1e-9);

  m.def(
      "witness",
      [](const CMatrix& p, const CMatrix& q, const std::string& mode, double epsilon, double alpha,
         std::optional<std::vector<Index>> block_dims, double eq_tol) {
        const auto tol = tol_for(eq_tol);
        const auto w = witness_generator(Projection::from_matrix(p, tol), Projection::from_matrix(q, tol),
                                         ambient_for(p.rows(), block_dims), witness_mode_from_string(mode), epsilon,
                                         alpha, tol);
        py::dict d;
        d["z"] = w.z;
        d["v"] = w.v;
        d["gap_lower_bound"] = w.gap_lower_bound;
        return d;
      },
      py::arg("p"), py::arg("q"), py::arg("mode"), py::arg("epsilon") = 0.25, py::arg("alpha") = 1.0,
      py::arg("block_dims") = py::none(), py::arg("eq_tol") = 1e-9);

  m.def(
      "logmodularity_gap",
      [](const CMatrix& x, const std::vector<CMatrix>& generators, std::optional<std::vector<Index>> block_dims,
         std::uint64_t seed, int max_iter, int starts, double eq_tol) {
        const auto tol = tol_for(eq_tol);
        GapOptions opt;
        opt.seed = seed;
        opt.max_iter = max_iter;
        opt.starts = starts;
        return report_dict(logmodularity_gap(x, algebra(generators, x.rows(), block_dims, tol), opt, tol));
      },
      py::arg("x"), py::arg("generators"), py::arg("block_dims") = py::none(), py::arg("seed") = 0,
      py::arg("max_iter") = 500, py::arg("starts") = 8, py::arg("eq_tol") = 1e-9);

  m.def(
      "run",
      [](const std::string& problem_json, const std::string& task) {
        const auto out = cli::run(nlohmann::json::parse(problem_json), task);
        return py::make_tuple(out.exit_code, cli::dump_report(out.report), out.text);
      },
      py::arg("problem_json"), py::arg("task"),
      "Runs a CLI task on a problem given as JSON text: (exit_code, report_json, text).");
}
