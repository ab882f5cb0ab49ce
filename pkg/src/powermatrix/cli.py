"""Command-line front end.

Each invocation runs one verb.  Inputs are JSON objects given as a file
path, ``-`` for standard input, or inline text.  Results go to standard
output as JSON (default) or as a plain coefficient table; diagnostics go to
standard error.  Exit status is 0 on success, 1 on a domain error and 2 on
malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import jsonio
from .errors import MalformedInput, PowerMatrixError
from .loewner import (
    LoewnerProblem,
    evolve_const,
    evolve_truncated_polynomial,
    taylor_degree_for_problem,
    taylor_degree_for_tolerance,
)
from .pmatrix import (
    MatrixBlock,
    Window,
    first_row_series,
    power_matrix,
    sandwich_residual,
    sandwich_identity_check,
    verify_row_relations,
)
from .series import FormalSeries, Tolerance, comp_inverse, compose
from .witt import bracket_matrix, bracket_series, exp_inverse, infinitesimal_matrix, mexp, mlog

VERBS = ("exp", "log", "exp-inverse", "compose", "invert", "bracket", "pmatrix", "evolve", "plan", "verify")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise MalformedInput(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="powermatrix", description="Power matrices and formal Loewner evolution.")
    parser.add_argument("verb", choices=VERBS)
    parser.add_argument("inputs", nargs="*", help="JSON file path, '-' for stdin, or inline JSON")
    parser.add_argument("--order", type=int, help="block size N (canonical window)")
    parser.add_argument("--t", type=float, default=1.0, help="time (default 1)")
    parser.add_argument("--a", type=float, default=None, help="start time, overrides the problem's")
    parser.add_argument("--branch", type=int, default=0, help="logarithm branch for exp-inverse")
    parser.add_argument("--degree", type=int, help="Taylor degree for evolve")
    parser.add_argument("--kind", choices=("pde", "ode"), help="override the problem kind")
    parser.add_argument("--tol", type=float, help="comparison tolerance, or target error for plan")
    parser.add_argument("--format", choices=("json", "table"), default="json")
    parser.add_argument("--center", default="zero", help="center for inputs that omit one")
    return parser


# -- input -------------------------------------------------------------------


def _read(source: str):
    if source == "-":
        return jsonio.loads(sys.stdin.read())
    if source.lstrip().startswith(("{", "[")):
        return jsonio.loads(source)
    path = Path(source)
    if not path.is_file():
        raise MalformedInput(f"no such file and not inline JSON: {source!r}")
    return jsonio.loads(path.read_text())


def _inputs(args, count: int) -> list:
    if len(args.inputs) != count:
        raise MalformedInput(f"{args.verb} takes {count} input(s), got {len(args.inputs)}")
    return [_read(s) for s in args.inputs]


def _series(obj, args) -> FormalSeries:
    return jsonio.series_from_json(obj, args.center)


def _size(args, f: FormalSeries | None = None) -> int:
    if args.order is not None:
        n = args.order
    elif f is not None and not f.is_zero:
        n = max(2, f.step * (f.order - 1) + 1)
    else:
        raise MalformedInput("--order is required")
    if n < 2:
        raise MalformedInput("--order must be at least 2")
    return n


def _window(args, f: FormalSeries) -> Window:
    return Window.canonical(f.center, _size(args, f))


def _matrix(obj, args) -> MatrixBlock:
    """A block given directly, or the power matrix of a series."""
    if isinstance(obj, dict) and "rows" in obj:
        return jsonio.matrix_from_json(obj, args.center)
    f = _series(obj, args)
    return power_matrix(f, _window(args, f))


def _tolerance(args) -> Tolerance:
    return Tolerance() if args.tol is None else Tolerance(args.tol, args.tol)


# -- output ------------------------------------------------------------------


def _fmt(z: complex) -> str:
    z = complex(z)
    return f"{z.real:.12g} {z.imag:+.12g}i"


def _series_table(f: FormalSeries) -> list[str]:
    lines = [f"# series at {f.center.value}, order {f.order}"]
    lines += [f"{int(n):>5}  {_fmt(c)}" for n, c in zip(f.exponents, f.coeffs)]
    return lines


def _matrix_table(M: MatrixBlock) -> list[str]:
    w = M.window
    lines = [f"# block at {w.center.value}, window {w.lo}..{w.hi}"]
    for m, row in zip(w.indices, M.entries):
        lines.append(f"{m:>5}  " + "  ".join(_fmt(x) for x in row))
    return lines


def _table(value) -> list[str]:
    if isinstance(value, FormalSeries):
        return _series_table(value)
    if isinstance(value, MatrixBlock):
        return _matrix_table(value)
    if isinstance(value, dict):
        lines = []
        for k, v in value.items():
            if isinstance(v, (FormalSeries, MatrixBlock)):
                lines.append(f"## {k}")
                lines += _table(v)
            else:
                lines.append(f"{k}: {v}")
        return lines
    return [str(value)]


def _to_json(value):
    if isinstance(value, FormalSeries):
        return jsonio.series_to_json(value)
    if isinstance(value, MatrixBlock):
        return jsonio.matrix_to_json(value)
    if isinstance(value, dict):
        return {k: _to_json(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_to_json(v) for v in value]
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    return value


def _emit(value, args, out) -> None:
    if args.format == "table":
        out.write("\n".join(_table(value)) + "\n")
    else:
        out.write(json.dumps(_to_json(value)) + "\n")


# -- verbs -------------------------------------------------------------------


def _cmd_exp(args):
    (obj,) = _inputs(args, 1)
    h = _series(obj, args)
    E = mexp(infinitesimal_matrix(h, _window(args, h)), args.t, _tolerance(args))
    return {"matrix": E, "first_row": first_row_series(E)}


def _cmd_log(args):
    (obj,) = _inputs(args, 1)
    L = mlog(_matrix(obj, args), _tolerance(args))
    return {"generator": L.h, "window": jsonio.window_to_json(L.window)}


def _cmd_exp_inverse(args):
    (obj,) = _inputs(args, 1)
    return exp_inverse(_matrix(obj, args), args.branch, _tolerance(args))


def _cmd_compose(args):
    g, f = (_series(o, args) for o in _inputs(args, 2))
    return compose(g, f)


def _cmd_invert(args):
    (obj,) = _inputs(args, 1)
    return comp_inverse(_series(obj, args))


def _cmd_bracket(args):
    h1, h2 = (_series(o, args) for o in _inputs(args, 2))
    out = {"bracket": bracket_series(h1, h2)}
    if args.order is not None:
        w = _window(args, h1)
        out["matrix"] = bracket_matrix(infinitesimal_matrix(h1, w), infinitesimal_matrix(h2, w))
    return out


def _cmd_pmatrix(args):
    (obj,) = _inputs(args, 1)
    f = _series(obj, args)
    return power_matrix(f, _window(args, f))


def _problem(args) -> LoewnerProblem:
    (obj,) = _inputs(args, 1)
    prob = jsonio.problem_from_json(obj, args.center)
    if args.kind is not None or args.a is not None:
        prob = LoewnerProblem(
            args.kind or prob.kind,
            prob.generator,
            prob.initial,
            prob.a if args.a is None else args.a,
            prob.window,
        )
    return prob


def _cmd_evolve(args):
    prob = _problem(args)
    if args.degree is None:
        M = evolve_const(prob, args.t)
    else:
        M = evolve_truncated_polynomial(prob, args.t, args.degree)
    return {"matrix": M, "first_row": first_row_series(M)}


def _cmd_plan(args):
    (obj,) = _inputs(args, 1)
    eps = 1e-8 if args.tol is None else args.tol
    if isinstance(obj, dict) and "kind" in obj:
        prob = jsonio.problem_from_json(obj, args.center)
        T = abs(args.t - prob.a)
        plan = taylor_degree_for_problem(prob, T, eps)
    else:
        h = _series(obj, args)
        plan = taylor_degree_for_tolerance(h, _size(args, h), abs(args.t), eps)
    return {"q": plan.q, "T": plan.T, "eps": plan.eps, "bound_achieved": plan.bound_achieved}


def _cmd_verify(args):
    """Row relations of a block or series; with a ``{"g","h","f"}`` object,
    also the multiplication identity for every row of the window."""
    (obj,) = _inputs(args, 1)
    tol = _tolerance(args)
    report = {}
    passed = True
    if isinstance(obj, dict) and {"g", "h", "f"} <= obj.keys():
        g, h, f = (_series(obj[k], args) for k in ("g", "h", "f"))
        w = _window(args, g)
        rows = []
        for m in w.indices:
            ok = sandwich_identity_check(g, h, f, m, w, tol)
            rows.append({"m": m, "residual": sandwich_residual(g, h, f, m, w), "passed": ok})
            passed &= ok
        report["sandwich"] = rows
        M = power_matrix(g, w)
    else:
        M = _matrix(obj, args)
    rr = verify_row_relations(M, tol)
    passed &= rr.passed
    report["row_relations"] = {
        "passed": rr.passed,
        "max_residual": rr.max_residual,
        "max_scaled_residual": rr.max_scaled_residual,
        "checked": rr.checked,
    }
    report["passed"] = bool(passed)
    return report


_DISPATCH = {
    "exp": _cmd_exp,
    "log": _cmd_log,
    "exp-inverse": _cmd_exp_inverse,
    "compose": _cmd_compose,
    "invert": _cmd_invert,
    "bracket": _cmd_bracket,
    "pmatrix": _cmd_pmatrix,
    "evolve": _cmd_evolve,
    "plan": _cmd_plan,
    "verify": _cmd_verify,
}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        result = _DISPATCH[args.verb](args)
    except MalformedInput as exc:
        stderr.write(f"MalformedInput: {exc}\n")
        return 2
    except PowerMatrixError as exc:
        stderr.write(f"{type(exc).__name__}: {exc}\n")
        return 1
    except ValueError as exc:
        stderr.write(f"MalformedInput: {exc}\n")
        return 2
    _emit(result, args, stdout)
    if args.verb == "verify" and not result["passed"]:
        stderr.write("verification failed\n")
        return 1
    return 0


def main(argv=None) -> int:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
