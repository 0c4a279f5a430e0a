import json
from pathlib import Path

import numpy as np
import pytest

import nestlab

ROOT = Path(__file__).resolve().parents[2]
GOLDEN = ROOT / "tests" / "golden"


def unit(n, i, j):
    m = np.zeros((n, n), dtype=complex)
    m[i, j] = 1.0
    return m


def coord(n, idx):
    m = np.zeros((n, n), dtype=complex)
    for i in idx:
        m[i, i] = 1.0
    return m


def test_version():
    assert nestlab.__version__ == "0.1.0"


def test_lattice_of_t2():
    lat = nestlab.compute_lat([unit(2, 0, 0), unit(2, 0, 1)], 2)
    assert lat["classification"] == "NEST"
    assert [int(round(np.trace(p).real)) for p in lat["elements"]] == [0, 1, 2]


def test_scalars_are_not_csl():
    assert nestlab.compute_lat([], 2)["classification"] == "NON_CSL"


def test_alg_of_and_reflexivity():
    basis = nestlab.alg_of([coord(3, [0]), coord(3, [0, 1])], 3)
    assert len(basis) == 6
    gens = [unit(3, i, j) for i in range(3) for j in range(i, 3)]
    assert nestlab.is_reflexive(gens, 3)["status"] == "REFLEXIVE"
    assert nestlab.has_factorization(gens, 3)[0]


def test_nest_cholesky():
    x = np.array([[2, 1], [1, 2]], dtype=complex)
    r = nestlab.nest_cholesky(x, [coord(2, [0])])
    s = r["factor"]
    assert r["status"] == "FACTORED"
    assert abs(s[1, 0]) < 1e-12
    assert np.allclose(s.conj().T @ s, x, atol=1e-12)


def test_halmos_reconstructs():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
    b = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
    qa, _ = np.linalg.qr(a)
    qb, _ = np.linalg.qr(b)
    p, q = qa @ qa.conj().T, qb @ qb.conj().T
    h = nestlab.halmos_decompose(p, q)
    w = h["unitary"].conj().T
    assert h["generic_dim"] == 2
    assert np.allclose(w @ h["canonical_p"] @ w.conj().T, p, atol=1e-10)
    assert np.allclose(w @ h["canonical_q"] @ w.conj().T, q, atol=1e-10)


def test_witness_gap_is_at_least_the_bound():
    p, q = coord(2, [0]), coord(2, [1])
    w = nestlab.witness(p, q, "ORTHOGONAL", epsilon=0.25)
    g = nestlab.logmodularity_gap(w["z"], [p, q])
    assert g["status"] == "GAP"
    assert g["gap"] >= w["gap_lower_bound"] * (1 - 1e-12)
    assert g["gap"] == pytest.approx(0.2, rel=1e-6)


def test_errors_are_typed():
    with pytest.raises(nestlab.PreconditionError):
        nestlab.nest_cholesky(np.array([[1, 2], [2, 1]], dtype=complex), [coord(2, [0])])
    assert issubclass(nestlab.PreconditionError, nestlab.Error)


@pytest.mark.parametrize("path", sorted(GOLDEN.glob("*.problem.json")), ids=lambda p: p.name)
def test_run_matches_golden(path):
    problem = json.loads(path.read_text())
    stem = path.name[: -len(".problem.json")]
    task = "factorize" if stem.startswith("error_") else problem["task"]
    code, report = nestlab.run(problem, task)
    expected = json.loads((GOLDEN / f"{stem}.expected.json").read_text())
    assert report["status"] == expected["status"]
    assert code == (0 if expected["status"] == "OK" else 2)


def test_golden_problems_match_schema():
    jsonschema = pytest.importorskip("jsonschema")
    schema = json.loads((ROOT / "docs" / "problem.schema.json").read_text())
    for path in GOLDEN.glob("*.problem.json"):
        if path.name.startswith("error_"):
            continue
        jsonschema.validate(json.loads(path.read_text()), schema)
