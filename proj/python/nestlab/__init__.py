"""Invariant subspace lattices, nest algebras and factorization."""

import json

from ._core import (
    Error,
    IndeterminateError,
    NumericalError,
    PreconditionError,
    __version__,
    algebra_basis,
    alg_of,
    compute_lat,
    has_factorization,
    halmos_decompose,
    is_reflexive,
    logmodularity_gap,
    nest_cholesky,
    triangularize,
    witness,
)
from ._core import run as _run


def run(problem, task):
    """Run a CLI task on a problem dict. Returns (exit_code, report dict)."""
    code, report, _ = _run(json.dumps(problem), task)
    return code, json.loads(report)


__all__ = [
    "Error",
    "IndeterminateError",
    "NumericalError",
    "PreconditionError",
    "__version__",
    "algebra_basis",
    "alg_of",
    "compute_lat",
    "has_factorization",
    "halmos_decompose",
    "is_reflexive",
    "logmodularity_gap",
    "nest_cholesky",
    "run",
    "triangularize",
    "witness",
]
