#include "nestlab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "nestlab/errors.hpp"
#include "nestlab/factorization.hpp"
#include "nestlab/reflexivity.hpp"

namespace nestlab::cli {

using nlohmann::json;

namespace {

const std::vector<std::string> kTasks = {"lat",           "alg",    "hull",    "reflexive", "factorize", "gap",
                                         "triangularize", "halmos", "witness", "diagnose"};

std::string ptr(const std::string& base, const std::string& key) { return base + "/" + key; }
std::string ptr(const std::string& base, std::size_t i) { return base + "/" + std::to_string(i); }

double clean(double v) { return v == 0.0 ? 0.0 : v; }  // drops the sign of -0

json number_or_null(double v) { return std::isfinite(v) ? json(clean(v)) : json(nullptr); }

// ---------------------------------------------------------------------------
// Parsing

struct Problem {
  AmbientAlgebra ambient{std::vector<Index>{1}};
  std::map<std::string, CMatrix> matrices;
  json params = json::object();
  ToleranceConfig tol;
  std::uint64_t seed = 0;
  int budget = 64;
};

const json& require_key(const json& obj, const std::string& key, const std::string& pointer) {
  if (!obj.is_object()) throw ValidationError(pointer, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(ptr(pointer, key), "missing required field '" + key + "'");
  return *it;
}

std::int64_t as_int(const json& j, const std::string& pointer) {
  if (!j.is_number_integer()) throw ValidationError(pointer, "expected an integer");
  return j.get<std::int64_t>();
}

double as_number(const json& j, const std::string& pointer) {
  if (!j.is_number()) throw ValidationError(pointer, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError(pointer, "expected a finite number");
  return v;
}

std::string as_string(const json& j, const std::string& pointer) {
  if (!j.is_string()) throw ValidationError(pointer, "expected a string");
  return j.get<std::string>();
}

std::uint64_t parse_seed_env() {
  const char* env = std::getenv("NESTLAB_SEED");
  if (!env || !*env) return 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0') throw ValidationError("", "NESTLAB_SEED is not a non-negative integer");
  return v;
}

Problem parse_problem(const json& doc, const std::string& task, const Overrides& ov) {
  if (!doc.is_object()) throw ValidationError("", "problem must be a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    static const std::vector<std::string> known = {"version", "ambient", "matrices", "task", "params"};
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      throw ValidationError(ptr("", it.key()), "unknown field '" + it.key() + "'");
    }
  }
  const std::string version = as_string(require_key(doc, "version", ""), "/version");
  if (version != kFormatVersion) throw ValidationError("/version", "unsupported format version '" + version + "'");
  const std::string file_task = as_string(require_key(doc, "task", ""), "/task");
  if (std::find(kTasks.begin(), kTasks.end(), file_task) == kTasks.end()) {
    throw ValidationError("/task", "unknown task '" + file_task + "'");
  }
  if (file_task != task) {
    throw ValidationError("/task", "problem is for task '" + file_task + "', not '" + task + "'");
  }

  Problem p;
  const json& amb = require_key(doc, "ambient", "");
  const std::int64_t dim = as_int(require_key(amb, "dim", "/ambient"), "/ambient/dim");
  if (dim < 1 || dim > 64) throw ValidationError("/ambient/dim", "dim must lie in [1, 64]");
  std::vector<Index> blocks;
  if (amb.contains("block_dims")) {
    const json& bd = amb["block_dims"];
    if (!bd.is_array() || bd.empty()) throw ValidationError("/ambient/block_dims", "expected a non-empty array");
    Index total = 0;
    for (std::size_t i = 0; i < bd.size(); ++i) {
      const std::int64_t b = as_int(bd[i], ptr("/ambient/block_dims", i));
      if (b < 1) throw ValidationError(ptr("/ambient/block_dims", i), "block dimensions must be positive");
      blocks.push_back(b);
      total += b;
    }
    if (total != dim) throw ValidationError("/ambient/block_dims", "block dimensions do not sum to dim");
  } else {
    blocks.push_back(dim);
  }
  p.ambient = AmbientAlgebra(blocks);

  if (doc.contains("matrices")) {
    const json& ms = doc["matrices"];
    if (!ms.is_object()) throw ValidationError("/matrices", "expected an object of named matrices");
    for (auto it = ms.begin(); it != ms.end(); ++it) {
      const std::string where = ptr("/matrices", it.key());
      CMatrix m = matrix_from_json(it.value(), where);
      if (m.rows() != dim || m.cols() != dim) {
        throw ValidationError(where, "matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                                         ", ambient dim is " + std::to_string(dim));
      }
      p.matrices.emplace(it.key(), std::move(m));
    }
  }

  if (doc.contains("params")) {
    if (!doc["params"].is_object()) throw ValidationError("/params", "expected an object");
    p.params = doc["params"];
  }
  p.seed = parse_seed_env();
  if (p.params.contains("seed")) {
    const std::int64_t s = as_int(p.params["seed"], "/params/seed");
    if (s < 0) throw ValidationError("/params/seed", "seed must be non-negative");
    p.seed = static_cast<std::uint64_t>(s);
  }
  if (ov.seed) p.seed = *ov.seed;
  if (p.params.contains("budget")) {
    const std::int64_t b = as_int(p.params["budget"], "/params/budget");
    if (b < 0 || b > 100000) throw ValidationError("/params/budget", "budget must lie in [0, 100000]");
    p.budget = static_cast<int>(b);
  }
  if (ov.budget) p.budget = *ov.budget;
  if (p.params.contains("eq_tol")) p.tol.eq_tol = as_number(p.params["eq_tol"], "/params/eq_tol");
  if (ov.eq_tol) p.tol.eq_tol = *ov.eq_tol;
  if (!(p.tol.eq_tol > 0.0)) throw ValidationError("/params/eq_tol", "eq_tol must be positive");
  return p;
}

const CMatrix& named_matrix(const Problem& p, const json& name, const std::string& pointer) {
  const std::string key = as_string(name, pointer);
  auto it = p.matrices.find(key);
  if (it == p.matrices.end()) throw ValidationError(pointer, "undefined matrix '" + key + "'");
  return it->second;
}

const json& param(const Problem& p, const std::string& key) { return require_key(p.params, key, "/params"); }

Projection projection_param(const Problem& p, const std::string& key) {
  const std::string where = ptr("/params", key);
  const CMatrix& m = named_matrix(p, param(p, key), where);
  try {
    return Projection::from_matrix(m, p.tol);
  } catch (const PreconditionError& e) {
    throw ValidationError(where, e.what());
  }
}

// A list whose entries are matrix names or arrays of basis indices.
std::vector<Projection> projection_list(const Problem& p, const std::string& key) {
  const std::string where = ptr("/params", key);
  const json& list = param(p, key);
  if (!list.is_array()) throw ValidationError(where, "expected an array of matrix names or index sets");
  const Index n = p.ambient.dim();
  std::vector<Projection> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string at = ptr(where, i);
    if (list[i].is_string()) {
      try {
        out.push_back(Projection::from_matrix(named_matrix(p, list[i], at), p.tol));
      } catch (const PreconditionError& e) {
        throw ValidationError(at, e.what());
      }
    } else if (list[i].is_array()) {
      std::vector<Index> idx;
      for (std::size_t k = 0; k < list[i].size(); ++k) {
        const std::int64_t v = as_int(list[i][k], ptr(at, k));
        if (v < 0 || v >= n) throw ValidationError(ptr(at, k), "index out of range");
        if (std::find(idx.begin(), idx.end(), v) != idx.end()) throw ValidationError(ptr(at, k), "repeated index");
        idx.push_back(v);
      }
      out.push_back(Projection::coordinate(n, idx));
    } else {
      throw ValidationError(at, "expected a matrix name or an index set");
    }
  }
  return out;
}

// The algebra of a problem: either generated by named matrices or Alg of a
// list of projections.
MatrixAlgebra algebra_param(const Problem& p) {
  const bool has_gens = p.params.contains("generators");
  const bool has_lat = p.params.contains("lattice");
  if (has_gens == has_lat) {
    throw ValidationError("/params", "give exactly one of 'generators' or 'lattice'");
  }
  if (has_lat) return alg_of(projection_list(p, "lattice"), p.ambient, p.tol);
  const json& gens = p.params["generators"];
  if (!gens.is_array()) throw ValidationError("/params/generators", "expected an array of matrix names");
  std::vector<CMatrix> ms;
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const std::string at = ptr("/params/generators", i);
    const CMatrix& m = named_matrix(p, gens[i], at);
    if (!p.ambient.contains(m, p.tol)) throw ValidationError(at, "generator lies outside the ambient");
    ms.push_back(m);
  }
  return close_algebra(ms, p.ambient, p.tol);
}

int int_param(const Problem& p, const std::string& key, int fallback, int lo, int hi) {
  if (!p.params.contains(key)) return fallback;
  const std::int64_t v = as_int(p.params[key], ptr("/params", key));
  if (v < lo || v > hi) {
    throw ValidationError(ptr("/params", key), "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return static_cast<int>(v);
}

double number_param(const Problem& p, const std::string& key, double fallback) {
  return p.params.contains(key) ? as_number(p.params[key], ptr("/params", key)) : fallback;
}

// ---------------------------------------------------------------------------
// Serialization of results

json tolerance_json(const ToleranceConfig& t) {
  return {{"eq_tol", t.eq_tol},
          {"rank_tol", t.rank_tol ? json(*t.rank_tol) : json(nullptr)},
          {"rank_floor", t.rank_floor},
          {"psd_tol", t.psd_tol}};
}

json projection_json(const Projection& p) { return {{"rank", p.rank()}, {"matrix", matrix_to_json(p.matrix())}}; }

json algebra_json(const MatrixAlgebra& a) {
  json basis = json::array();
  for (const auto& b : a.elements()) basis.push_back(matrix_to_json(b));
  return {{"dimension", a.dimension()}, {"basis", basis}};
}

json lattice_json(const ProjectionLattice& l, const ToleranceConfig& tol) {
  json el = json::array();
  for (const auto& p : l.elements) el.push_back(projection_json(p));
  json out = {{"classification", to_string(l.classification)},
              {"complete", l.complete},
              {"size", l.elements.size()},
              {"elements", el},
              {"witness", nullptr}};
  if (l.witness) {
    out["witness"] = {{"p", projection_json(l.witness->first)},
                      {"q", projection_json(l.witness->second)},
                      {"commutator_norm", commutator_norm(l.witness->first, l.witness->second)}};
  } else {
    json at = json::array();
    for (const auto& a : atoms(l, tol)) at.push_back(projection_json(a.atom));
    out["atoms"] = at;
  }
  return out;
}

json report_json(const FactorizationReport& r) {
  json trace = json::array();
  for (double t : r.trace) trace.push_back(number_or_null(t));
  return {{"status", to_string(r.status)},
          {"factor", r.factor ? matrix_to_json(*r.factor) : json(nullptr)},
          {"residual", number_or_null(r.residual)},
          {"gap", r.gap ? number_or_null(*r.gap) : json(nullptr)},
          {"iterations", r.iterations},
          {"factor_membership", number_or_null(r.factor_membership)},
          {"inverse_membership", number_or_null(r.inverse_membership)},
          {"trace", trace}};
}

json triangularization_json(const Triangularization& t) {
  json nest = json::array();
  for (const auto& p : t.nest.projections()) nest.push_back(projection_json(p));
  return {{"unitary", matrix_to_json(t.unitary)},
          {"atom_dims", t.atom_dims},
          {"max_lower_block", t.max_lower_block},
          {"nest", nest}};
}

json verdict_json(const FactorizationVerdict& v, const ToleranceConfig& tol) {
  json out = {{"verdict", v.verdict}, {"reason", v.reason}};
  out["lattice"] = v.lattice ? lattice_json(*v.lattice, tol) : json(nullptr);
  out["triangularization"] = v.triangularization ? triangularization_json(*v.triangularization) : json(nullptr);
  json blocks = json::array();
  for (const auto& b : v.blocks) blocks.push_back(verdict_json(b, tol));
  out["blocks"] = blocks;
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// Tasks. Each returns the "result" object and appends to the text report.

using Task = std::function<json(const Problem&, std::string&)>;

json task_lat(const Problem& p, std::string& text) {
  const MatrixAlgebra a = algebra_param(p);
  const ProjectionLattice l = compute_lat(a, LatOptions{p.seed, p.budget}, p.tol);
  text += "algebra dimension " + std::to_string(a.dimension()) + "\n";
  text += "lattice " + to_string(l.classification) + " with " + std::to_string(l.elements.size()) + " elements\n";
  return {{"algebra_dimension", a.dimension()}, {"lattice", lattice_json(l, p.tol)}};
}

json task_alg(const Problem& p, std::string& text) {
  const MatrixAlgebra a = alg_of(projection_list(p, "lattice"), p.ambient, p.tol);
  text += "Alg dimension " + std::to_string(a.dimension()) + "\n";
  return {{"algebra", algebra_json(a)}};
}

json task_hull(const Problem& p, std::string& text) {
  const MatrixAlgebra a = algebra_param(p);
  const HullResult h = reflexive_hull(a, LatOptions{p.seed, p.budget}, p.tol);
  text += "lattice " + to_string(h.lattice.classification) + "\n";
  text += h.hull ? "hull dimension " + std::to_string(h.hull->dimension()) + "\n" : "hull not computed (NON_CSL)\n";
  return {{"algebra_dimension", a.dimension()},
          {"lattice", lattice_json(h.lattice, p.tol)},
          {"hull", h.hull ? algebra_json(*h.hull) : json(nullptr)}};
}

json task_reflexive(const Problem& p, std::string& text) {
  const MatrixAlgebra a = algebra_param(p);
  const ReflexivityResult r = is_reflexive(a, LatOptions{p.seed, p.budget}, p.tol);
  const MasaResult m = masa_check(a, p.seed, p.tol);
  text += to_string(r.status) + " (extra dimension " + std::to_string(r.extra_dim) + ")\n";
  text += std::string("contains a masa: ") + (m.contains_masa ? "yes" : "no") + "\n";
  json masa = json::array();
  if (m.masa_basis) {
    for (const auto& e : *m.masa_basis) masa.push_back(matrix_to_json(e));
  }
  return {{"status", to_string(r.status)},
          {"extra_dim", r.extra_dim},
          {"algebra_dimension", a.dimension()},
          {"hull_dimension", r.hull.hull ? json(r.hull.hull->dimension()) : json(nullptr)},
          {"lattice_classification", to_string(r.hull.lattice.classification)},
          {"contains_masa", m.contains_masa},
          {"self_adjoint_dim", m.self_adjoint_dim},
          {"masa_basis", m.masa_basis ? masa : json(nullptr)}};
}

json task_factorize(const Problem& p, std::string& text) {
  const CMatrix& x = named_matrix(p, param(p, "x"), "/params/x");
  const Nest nest = Nest::complete(projection_list(p, "nest"), p.ambient, p.tol);
  const FactorizationReport r = nest_cholesky(x, nest, p.tol);
  text += to_string(r.status) + ", residual " + fmt(r.residual) + "\n";
  json out = report_json(r);
  out["atom_dims"] = nest.atom_dims();
  out["adapted_basis"] = matrix_to_json(nest.adapted_basis());
  return out;
}

json task_gap(const Problem& p, std::string& text) {
  const CMatrix& x = named_matrix(p, param(p, "x"), "/params/x");
  const MatrixAlgebra a = algebra_param(p);
  GapOptions opt;
  opt.seed = p.seed;
  opt.max_iter = int_param(p, "max_iter", opt.max_iter, 0, 100000);
  opt.starts = int_param(p, "starts", opt.starts, 1, 1000);
  const FactorizationReport r = logmodularity_gap(x, a, opt, p.tol);
  text += to_string(r.status) + ", best residual " + fmt(r.residual) + "\n";
  return report_json(r);
}

json task_triangularize(const Problem& p, std::string& text) {
  const MatrixAlgebra a = algebra_param(p);
  const Triangularization t = triangularize(a, LatOptions{p.seed, p.budget}, p.tol);
  std::string dims;
  for (Index d : t.atom_dims) dims += (dims.empty() ? "" : ",") + std::to_string(d);
  text += "atom dims (" + dims + "), max lower block " + fmt(t.max_lower_block) + "\n";
  return triangularization_json(t);
}

json task_halmos(const Problem& p, std::string& text) {
  const Projection e = projection_param(p, "p");
  const Projection f = projection_param(p, "q");
  const HalmosDecomposition h = halmos_decompose(e, f, p.tol);
  json x2 = json::array();
  for (Index i = 0; i < h.generic_dim; ++i) x2.push_back(clean(std::norm(h.x(i, i))));
  text += "corner ranks " + std::to_string(h.corner_ef.rank()) + " " + std::to_string(h.corner_ef_perp.rank()) + " " +
          std::to_string(h.corner_eperp_f.rank()) + " " + std::to_string(h.corner_eperp_fperp.rank()) +
          ", generic dim " + std::to_string(h.generic_dim) + "\n";
  return {{"corner_ef", projection_json(h.corner_ef)},
          {"corner_ef_perp", projection_json(h.corner_ef_perp)},
          {"corner_eperp_f", projection_json(h.corner_eperp_f)},
          {"corner_eperp_fperp", projection_json(h.corner_eperp_fperp)},
          {"generic_dim", h.generic_dim},
          {"x_squared", x2},
          {"unitary", matrix_to_json(h.unitary)},
          {"commutes", commutes_iff_no_generic(e, f, p.tol)}};
}

json task_witness(const Problem& p, std::string& text) {
  const Projection e = projection_param(p, "p");
  const Projection f = projection_param(p, "q");
  WitnessMode mode;
  try {
    mode = witness_mode_from_string(as_string(param(p, "mode"), "/params/mode"));
  } catch (const PreconditionError& err) {
    throw ValidationError("/params/mode", err.what());
  }
  const double eps = number_param(p, "epsilon", 0.25);
  const double alpha = number_param(p, "alpha", 1.0);
  const Witness w = witness_generator(e, f, p.ambient, mode, eps, alpha, p.tol);
  json out = {{"mode", to_string(mode)},
              {"epsilon", eps},
              {"alpha", alpha},
              {"z", matrix_to_json(w.z)},
              {"v", matrix_to_json(w.v)},
              {"gap_lower_bound", w.gap_lower_bound ? json(*w.gap_lower_bound) : json(nullptr)},
              {"gap", nullptr}};
  text += "witness " + to_string(mode) + ", ||Z|| = " + fmt(op_norm(w.z)) + "\n";
  if (p.params.value("check_gap", false)) {
    const std::vector<Projection> pq{e, f};
    const MatrixAlgebra a = alg_of(pq, p.ambient, p.tol);
    GapOptions opt;
    opt.seed = p.seed;
    const FactorizationReport r = logmodularity_gap(w.z, a, opt, p.tol);
    out["gap"] = report_json(r);
    text += "gap estimator on Alg{p, q}: " + to_string(r.status) + ", " + fmt(r.residual) + "\n";
  }
  return out;
}

// Random PD element of the ambient: V^* D V blockwise, eigenvalues in [1, 10].
CMatrix sample_pd(const AmbientAlgebra& amb, Rng& rng) {
  const Index n = amb.dim();
  CMatrix x = CMatrix::Zero(n, n);
  std::uniform_real_distribution<double> u(1.0, 10.0);
  for (Index b = 0; b < amb.block_count(); ++b) {
    const Index o = amb.block_offset(b);
    const Index d = amb.block_dims()[static_cast<std::size_t>(b)];
    const CMatrix v = random_unitary(d, rng);
    RVector ev(d);
    for (Index i = 0; i < d; ++i) ev(i) = u(rng);
    x.block(o, o, d, d) = v.adjoint() * ev.cast<Complex>().asDiagonal() * v;
  }
  return hermitian_part(x);
}

json task_diagnose(const Problem& p, std::string& text) {
  const MatrixAlgebra a = algebra_param(p);
  const LatOptions lo{p.seed, p.budget};
  json out;
  out["algebra_dimension"] = a.dimension();
  out["ambient_is_factor"] = p.ambient.is_factor();

  const ProjectionLattice l = compute_lat(a, lo, p.tol);
  out["lattice"] = lattice_json(l, p.tol);
  const ReflexivityResult r = is_reflexive(a, lo, p.tol);
  out["reflexivity"] = {{"status", to_string(r.status)}, {"extra_dim", r.extra_dim}};
  const MasaResult m = masa_check(a, p.seed, p.tol);
  out["masa"] = {{"contains_masa", m.contains_masa}, {"self_adjoint_dim", m.self_adjoint_dim}};
  out["triangularization"] = nullptr;
  if (l.classification == LatticeClass::Nest) {
    out["triangularization"] = triangularization_json(triangularize(a, lo, p.tol));
  }
  const FactorizationVerdict v = has_factorization_fd(a, lo, p.tol);
  out["factorization"] = verdict_json(v, p.tol);

  // Sampled factorizations; a structural YES with a sampled GAP is flagged.
  const int samples = int_param(p, "samples", 3, 0, 100);
  Rng rng(p.seed);
  json sampled = json::array();
  bool disagreement = false;
  for (int k = 0; k < samples; ++k) {
    const CMatrix x = sample_pd(p.ambient, rng);
    GapOptions opt;
    opt.seed = p.seed + static_cast<std::uint64_t>(k);
    const FactorizationReport g = logmodularity_gap(x, a, opt, p.tol);
    sampled.push_back({{"status", to_string(g.status)}, {"residual", number_or_null(g.residual)}});
    if (v.verdict && g.status != FactorizationStatus::Factored) disagreement = true;
  }
  out["samples"] = sampled;
  out["needs_review"] = disagreement;

  std::string head;
  if (l.classification == LatticeClass::NonCsl) {
    head = "NON-CSL LATTICE";
  } else if (v.verdict) {
    head = p.ambient.is_factor() ? "NEST ALGEBRA" : "DIRECT SUM OF NEST ALGEBRAS";
  } else if (l.classification == LatticeClass::Nest) {
    head = "NEST LATTICE, NOT REFLEXIVE";
  } else {
    head = "CSL, NOT A NEST";
  }
  const std::string verdict_line = head + " (factorization: " + (v.verdict ? "YES" : "NO") + ")";
  out["verdict"] = verdict_line;
  text += verdict_line + "\n";
  text += "  lattice: " + to_string(l.classification) + ", " + std::to_string(l.elements.size()) + " elements\n";
  text += "  reflexivity: " + to_string(r.status) + "\n";
  text += std::string("  masa: ") + (m.contains_masa ? "yes" : "no") + "\n";
  text += "  reason: " + v.reason + "\n";
  if (disagreement) text += "  REVIEW: gap estimator disagrees with the structural verdict\n";
  return out;
}

const std::map<std::string, Task>& tasks() {
  static const std::map<std::string, Task> t = {
      {"lat", task_lat},         {"alg", task_alg},
      {"hull", task_hull},       {"reflexive", task_reflexive},
      {"factorize", task_factorize}, {"gap", task_gap},
      {"triangularize", task_triangularize}, {"halmos", task_halmos},
      {"witness", task_witness}, {"diagnose", task_diagnose}};
  return t;
}

json base_report(const std::string& task) {
  return {{"nestlab_version", kVersion}, {"format_version", kFormatVersion}, {"task", task}};
}

Outcome failure(json report, int code, const std::string& kind, const std::string& message,
                const std::string& pointer) {
  report["status"] = code == kIndeterminate ? "INDETERMINATE" : "ERROR";
  report["error"] = {{"kind", kind}, {"message", message}, {"pointer", pointer}};
  std::string text = "error (" + kind + ")";
  if (!pointer.empty()) text += " at " + pointer;
  text += ": " + message + "\n";
  return {code, std::move(report), std::move(text)};
}

}  // namespace

json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back({clean(m(i, j).real()), clean(m(i, j).imag())});
    rows.push_back(std::move(row));
  }
  return rows;
}

CMatrix matrix_from_json(const json& j, const std::string& pointer) {
  if (!j.is_array() || j.empty()) throw ValidationError(pointer, "expected a non-empty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) throw ValidationError(ptr(pointer, 0), "expected a non-empty row");
  const std::size_t cols = j[0].size();
  CMatrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string rp = ptr(pointer, r);
    if (!j[r].is_array() || j[r].size() != cols) throw ValidationError(rp, "rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c) {
      const std::string cp = ptr(rp, c);
      const json& e = j[r][c];
      if (!e.is_array() || e.size() != 2) throw ValidationError(cp, "entry must be a [re, im] pair");
      m(static_cast<Index>(r), static_cast<Index>(c)) = Complex(as_number(e[0], ptr(cp, 0)), as_number(e[1], ptr(cp, 1)));
    }
  }
  return m;
}

std::string dump_report(const json& report) { return report.dump(2) + "\n"; }

Outcome run(const json& problem, const std::string& task, const Overrides& overrides) {
  json report = base_report(task);
  if (tasks().count(task) == 0) return failure(report, kValidation, "validation", "unknown task '" + task + "'", "");
  try {
    const Problem p = parse_problem(problem, task, overrides);
    report["seed"] = p.seed;
    report["budget"] = p.budget;
    report["tolerance"] = tolerance_json(p.tol);
    std::string text;
    report["result"] = tasks().at(task)(p, text);
    report["status"] = "OK";
    return {kOk, std::move(report), std::move(text)};
  } catch (const ValidationError& e) {
    return failure(report, kValidation, "validation", e.what(), e.pointer());
  } catch (const PreconditionError& e) {
    return failure(report, kValidation, "precondition", e.what(), "/params");
  } catch (const IndeterminateError& e) {
    return failure(report, kIndeterminate, "indeterminate", e.what(), "");
  } catch (const NumericalError& e) {
    return failure(report, kNumerical, "numerical", e.what(), "");
  } catch (const Error& e) {
    return failure(report, kNumerical, "numerical", e.what(), "");
  } catch (const json::exception& e) {
    return failure(report, kValidation, "validation", e.what(), "");
  }
}

Outcome run_file(const std::string& path, const std::string& task, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) return failure(base_report(task), kValidation, "validation", "cannot open '" + path + "'", "");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    return failure(base_report(task), kValidation, "validation", std::string("malformed JSON: ") + e.what(), "");
  }
  return run(doc, task, overrides);
}

}  // namespace nestlab::cli
