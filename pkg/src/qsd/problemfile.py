"""JSON problem documents.

Layout::

    {"dim": p,
     "states": [{"prior": xi, "matrix": [[[re, im], ...], ...]}, ...],
     "povm": [[[[re, im], ...], ...], ...]}      # optional

Matrices are row-major with every entry a two-element ``[re, im]`` list.
Input that is not Hermitian to within ``1e-8`` is rejected, not repaired.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import ProblemFormatError
from .model import Ensemble, Povm, validate_ensemble, validate_povm

PARSE_HERMITICITY_TOL = 1e-8


def matrix_to_json(a) -> list:
    a = np.asarray(a, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def _parse_matrix(obj, dim: int, path: str) -> np.ndarray:
    if not isinstance(obj, list) or len(obj) != dim:
        raise ProblemFormatError(path, f"expected {dim} rows")
    out = np.empty((dim, dim), dtype=np.complex128)
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != dim:
            raise ProblemFormatError(f"{path}[{i}]", f"expected {dim} entries")
        for k, entry in enumerate(row):
            if (
                not isinstance(entry, list)
                or len(entry) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)
                or not all(math.isfinite(x) for x in entry)
            ):
                raise ProblemFormatError(f"{path}[{i}][{k}]", "expected a finite [re, im] pair")
            out[i, k] = complex(entry[0], entry[1])
    dev = float(np.max(np.abs(out - out.conj().T)))
    if dev > PARSE_HERMITICITY_TOL:
        raise ProblemFormatError(path, f"matrix is not Hermitian (deviation {dev:.3g})")
    return out


def parse_problem(doc: dict, *, require_povm: bool = False) -> tuple[Ensemble, Povm | None]:
    """Build and validate an ensemble (and optional POVM) from a decoded document."""
    if not isinstance(doc, dict):
        raise ProblemFormatError("", "document must be a JSON object")
    dim = doc.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ProblemFormatError("dim", "expected a positive integer")
    states_obj = doc.get("states")
    if not isinstance(states_obj, list) or not states_obj:
        raise ProblemFormatError("states", "expected a non-empty list")
    states, priors = [], []
    for j, s in enumerate(states_obj):
        if not isinstance(s, dict):
            raise ProblemFormatError(f"states[{j}]", "expected an object")
        prior = s.get("prior")
        if not isinstance(prior, (int, float)) or isinstance(prior, bool) or not math.isfinite(prior):
            raise ProblemFormatError(f"states[{j}].prior", "expected a finite number")
        priors.append(float(prior))
        states.append(_parse_matrix(s.get("matrix"), dim, f"states[{j}].matrix"))
    ensemble = Ensemble(states, priors)
    report = validate_ensemble(ensemble)
    if not report.ok:
        raise ProblemFormatError("states", "; ".join(report.violations))

    povm = None
    if "povm" in doc:
        povm = parse_povm(doc["povm"], dim, ensemble.size)
    elif require_povm:
        raise ProblemFormatError("povm", "missing")
    return ensemble, povm


def parse_povm(obj, dim: int, size: int | None = None) -> Povm:
    if not isinstance(obj, list) or not obj:
        raise ProblemFormatError("povm", "expected a non-empty list of matrices")
    if size is not None and len(obj) != size:
        raise ProblemFormatError("povm", f"expected {size} elements, got {len(obj)}")
    povm = Povm([_parse_matrix(el, dim, f"povm[{j}]") for j, el in enumerate(obj)])
    report = validate_povm(povm, dim)
    if not report.ok:
        raise ProblemFormatError("povm", "; ".join(report.violations))
    return povm


def load_problem(path, *, require_povm: bool = False) -> tuple[Ensemble, Povm | None]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ProblemFormatError("", f"cannot read {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError("", f"invalid JSON: {exc}") from exc
    return parse_problem(doc, require_povm=require_povm)


def problem_to_json(e: Ensemble, povm: Povm | None = None) -> dict:
    doc = {
        "dim": e.dim,
        "states": [
            {"prior": float(xi), "matrix": matrix_to_json(rho)}
            for xi, rho in zip(e.priors, e.states)
        ],
    }
    if povm is not None:
        doc["povm"] = [matrix_to_json(el) for el in povm.elements]
    return doc
