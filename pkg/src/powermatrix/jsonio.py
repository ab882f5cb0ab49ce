"""JSON interchange formats.

Complex numbers are ``[re, im]`` pairs.  Series::

    {"center": "zero", "leading_index": 1, "order": 3, "coeffs": [[1, 0], ...]}

Blocks::

    {"window": {"center": "zero", "lo": 1, "hi": 3}, "rows": [[[re, im], ...], ...]}

Infinitesimal blocks are stored as ``{"generator": <series>, "window": <window>}``
and their entries rebuilt on load.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .errors import MalformedInput, PowerMatrixError
from .loewner import LoewnerProblem
from .pmatrix import MatrixBlock, PowerMatrixBlock, Window
from .series import Center, FormalSeries, make_series
from .witt import InfMatrixBlock, infinitesimal_matrix

__all__ = [
    "complex_to_json",
    "complex_from_json",
    "series_to_json",
    "series_from_json",
    "window_to_json",
    "window_from_json",
    "matrix_to_json",
    "matrix_from_json",
    "inf_to_json",
    "inf_from_json",
    "problem_to_json",
    "problem_from_json",
    "loads",
]


def _fail(msg: str):
    raise MalformedInput(msg)


def complex_to_json(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def complex_from_json(v) -> complex:
    if isinstance(v, bool):
        _fail(f"not a number: {v!r}")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        return complex(v[0], v[1])
    _fail(f"expected [re, im], got {v!r}")


def _int(obj: dict, key: str) -> int:
    if key not in obj:
        _fail(f"missing key {key!r}")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(f"{key!r} must be an integer, got {v!r}")
    return v


def _real(v, what: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        _fail(f"{what} must be a finite number, got {v!r}")
    return float(v)


def _dict(v, what: str) -> dict:
    if not isinstance(v, dict):
        _fail(f"{what} must be an object")
    return v


def _center(v) -> Center:
    try:
        return Center.parse(v)
    except ValueError:
        _fail(f"unknown center {v!r}")


def series_to_json(f: FormalSeries) -> dict:
    return {
        "center": f.center.value,
        "leading_index": f.leading_index,
        "order": f.order,
        "coeffs": [complex_to_json(c) for c in f.coeffs],
    }


def series_from_json(obj: Any, default_center="zero") -> FormalSeries:
    obj = _dict(obj, "series")
    center = _center(obj.get("center", default_center))
    p = _int(obj, "leading_index")
    N = _int(obj, "order")
    raw = obj.get("coeffs")
    if not isinstance(raw, list):
        _fail("'coeffs' must be a list")
    coeffs = [complex_from_json(c) for c in raw]
    try:
        return make_series(center, p, coeffs, N)
    except PowerMatrixError as exc:
        # an inconsistent object is a formatting problem, not a domain error
        _fail(f"{type(exc).__name__}: {exc}")


def window_to_json(w: Window) -> dict:
    return {"center": w.center.value, "lo": w.lo, "hi": w.hi}


def window_from_json(obj: Any, default_center="zero") -> Window:
    obj = _dict(obj, "window")
    try:
        return Window(_center(obj.get("center", default_center)), _int(obj, "lo"), _int(obj, "hi"))
    except PowerMatrixError as exc:
        _fail(f"{type(exc).__name__}: {exc}")


def matrix_to_json(M: MatrixBlock) -> dict:
    out = {
        "window": window_to_json(M.window),
        "rows": [[complex_to_json(x) for x in row] for row in M.entries],
    }
    if isinstance(M, PowerMatrixBlock):
        out["source_p"] = M.source_p
    return out


def matrix_from_json(obj: Any, default_center="zero") -> MatrixBlock:
    obj = _dict(obj, "matrix")
    w = window_from_json(obj.get("window"), default_center)
    rows = obj.get("rows")
    if not isinstance(rows, list) or any(not isinstance(r, list) for r in rows):
        _fail("'rows' must be a list of lists")
    entries = np.array([[complex_from_json(x) for x in r] for r in rows], dtype=complex)
    if entries.shape != (w.size, w.size):
        _fail(f"rows have shape {entries.shape}, window needs {(w.size, w.size)}")
    if "source_p" in obj:
        return PowerMatrixBlock(w, entries, source_p=_int(obj, "source_p"))
    return MatrixBlock(w, entries)


def inf_to_json(A: InfMatrixBlock) -> dict:
    return {"generator": series_to_json(A.h), "window": window_to_json(A.window)}


def inf_from_json(obj: Any, default_center="zero") -> InfMatrixBlock:
    obj = _dict(obj, "infinitesimal block")
    return infinitesimal_matrix(
        series_from_json(obj.get("generator"), default_center),
        window_from_json(obj.get("window"), default_center),
    )


def problem_to_json(prob: LoewnerProblem) -> dict:
    return {
        "kind": prob.kind.value,
        "generator": series_to_json(prob.generator),
        "initial": series_to_json(prob.initial),
        "a": prob.a,
        "window": window_to_json(prob.window),
    }


def problem_from_json(obj: Any, default_center="zero") -> LoewnerProblem:
    obj = _dict(obj, "problem")
    kind = obj.get("kind")
    if kind not in ("pde", "ode"):
        _fail(f"'kind' must be 'pde' or 'ode', got {kind!r}")
    return LoewnerProblem(
        kind,
        series_from_json(obj.get("generator"), default_center),
        series_from_json(obj.get("initial"), default_center),
        _real(obj.get("a", 0.0), "'a'"),
        window_from_json(obj.get("window"), default_center),
    )


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"invalid JSON: {exc}") from None
