import io
import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import random_generator, random_map
from powermatrix import (
    Center,
    LoewnerProblem,
    MalformedInput,
    MatrixBlock,
    Window,
    infinitesimal_matrix,
    max_abs_difference,
    polynomial,
    power_matrix,
)
from powermatrix import jsonio
from powermatrix.cli import run

Z, INF = Center.ZERO, Center.INFINITY


def call(*argv, stdin=None):
    out, err = io.StringIO(), io.StringIO()
    if stdin is not None:
        old = sys.stdin
        sys.stdin = io.StringIO(stdin)
    try:
        code = run(list(argv), out, err)
    finally:
        if stdin is not None:
            sys.stdin = old
    return code, out.getvalue(), err.getvalue()


def sj(f):
    return json.dumps(jsonio.series_to_json(f))


# -- JSON round trips -------------------------------------------------------------


def test_series_round_trip(rng):
    for center, order in ((Z, 9), (INF, -7)):
        f = random_map(rng, 5, order, center=center)
        text = json.dumps(jsonio.series_to_json(f))
        g = jsonio.series_from_json(json.loads(text))
        assert g.center is f.center and g.leading_index == f.leading_index and g.order == f.order
        np.testing.assert_array_equal(g.coeffs, f.coeffs)
        assert json.dumps(jsonio.series_to_json(g)) == text


def test_matrix_round_trip(rng):
    M = power_matrix(random_map(rng, 4, 8), Window(Z, 1, 8))
    text = json.dumps(jsonio.matrix_to_json(M))
    back = jsonio.matrix_from_json(json.loads(text))
    np.testing.assert_array_equal(back.entries, M.entries)
    assert json.dumps(jsonio.matrix_to_json(back)) == text
    plain = MatrixBlock(Window(INF, -1, 1), np.tril(np.ones((3, 3))))
    text = json.dumps(jsonio.matrix_to_json(plain))
    assert json.dumps(jsonio.matrix_to_json(jsonio.matrix_from_json(json.loads(text)))) == text


def test_inf_and_problem_round_trip(rng):
    h = random_generator(rng, 3, 6)
    A = infinitesimal_matrix(h, Window(Z, 1, 6))
    text = json.dumps(jsonio.inf_to_json(A))
    B = jsonio.inf_from_json(json.loads(text))
    np.testing.assert_array_equal(A.entries, B.entries)
    assert json.dumps(jsonio.inf_to_json(B)) == text
    P = LoewnerProblem("ode", h, random_map(rng, 3, 6), 0.25, Window(Z, 1, 6))
    text = json.dumps(jsonio.problem_to_json(P))
    assert json.dumps(jsonio.problem_to_json(jsonio.problem_from_json(json.loads(text)))) == text


def test_complex_json_preserves_full_precision():
    z = complex(1 / 3, -np.pi)
    assert jsonio.complex_from_json(json.loads(json.dumps(jsonio.complex_to_json(z)))) == z


@pytest.mark.parametrize(
    "bad",
    [
        {"leading_index": 1, "order": 2},
        {"leading_index": "1", "order": 2, "coeffs": [[1, 0]]},
        {"leading_index": 1, "order": 2, "coeffs": [[1, 0, 0]]},
        {"leading_index": 1, "order": 2, "coeffs": [True]},
        {"center": "middle", "leading_index": 1, "order": 2, "coeffs": [[1, 0]]},
        {"leading_index": 1, "order": 3, "coeffs": [[1, 0]]},
        {"leading_index": 1, "order": 2, "coeffs": [[0, 0], [1, 0]]},
        [1, 2],
    ],
)
def test_malformed_series_json(bad):
    with pytest.raises(MalformedInput):
        jsonio.series_from_json(bad)


def test_malformed_matrix_and_problem_json():
    with pytest.raises(MalformedInput):
        jsonio.matrix_from_json({"window": {"lo": 1, "hi": 2}, "rows": [[1]]})
    with pytest.raises(MalformedInput):
        jsonio.window_from_json({"lo": 3, "hi": 2})
    with pytest.raises(MalformedInput):
        jsonio.problem_from_json({"kind": "sde"})
    with pytest.raises(MalformedInput):
        jsonio.loads("{not json")


# -- verbs ------------------------------------------------------------------------


def test_exp_example_flow_of_z_squared():
    code, out, _ = call("exp", sj(polynomial([1], 2, 6)), "--order", "6", "--t", "1")
    assert code == 0
    res = json.loads(out)
    row = [jsonio.complex_from_json(x) for x in res["matrix"]["rows"][0]]
    np.testing.assert_allclose(row, np.ones(6), atol=1e-12)


def test_compose_example_identity_echoes():
    g = polynomial([1, -0.5, 0.25j], 1, 5)
    code, out, _ = call("compose", sj(g), sj(polynomial([1], 1, 5)))
    assert code == 0
    assert max_abs_difference(jsonio.series_from_json(json.loads(out)), g) == 0


def test_log_example_not_unipotent():
    M = MatrixBlock(Window(Z, 1, 3), np.diag([2, 4, 8]))
    code, out, err = call("log", json.dumps(jsonio.matrix_to_json(M)))
    assert code == 1 and out == "" and "NotUnipotent" in err


def test_log_and_exp_inverse_recover_generator(rng):
    h = random_generator(rng, 3, 8)
    code, out, _ = call("exp", sj(h), "--order", "8")
    E = json.dumps(json.loads(out)["matrix"])
    code, out, _ = call("exp-inverse", E)
    assert code == 0
    assert max_abs_difference(jsonio.series_from_json(json.loads(out)), h) < 1e-9
    u = polynomial([1, 0.3, -0.1], 1, 8)
    code, out, _ = call("log", sj(u), "--order", "8")
    assert code == 0 and json.loads(out)["window"] == {"center": "zero", "lo": 1, "hi": 8}


def test_invert_and_bracket():
    code, out, _ = call("invert", sj(polynomial([1, 1], 1, 4)))
    g = jsonio.series_from_json(json.loads(out))
    np.testing.assert_allclose([g.coeff(n) for n in range(1, 5)], [1, -1, 2, -5])
    # [e_0, e_1] = e_1
    code, out, _ = call("bracket", sj(polynomial([1], 1, 6)), sj(polynomial([1], 2, 6)), "--order", "6")
    res = json.loads(out)
    b = jsonio.series_from_json(res["bracket"])
    assert b.coeff(2) == 1 and len(res["matrix"]["rows"]) == 6


def test_pmatrix_and_center_default():
    obj = {"leading_index": 1, "order": -2, "coeffs": [[1, 0], [1, 0], [0, 0], [0, 0]]}
    code, out, _ = call("pmatrix", json.dumps(obj), "--center", "infinity", "--order", "4")
    assert code == 0
    M = jsonio.matrix_from_json(json.loads(out))
    assert M.center is INF and (M.window.lo, M.window.hi) == (-2, 1)


def test_evolve_and_plan(rng):
    P = LoewnerProblem("pde", polynomial([1]), polynomial([1], 1, 4), 0.0, Window(Z, 1, 4))
    text = json.dumps(jsonio.problem_to_json(P))
    code, out, _ = call("evolve", text, "--t", "0.5")
    first = jsonio.series_from_json(json.loads(out)["first_row"])
    assert abs(first.coeff(1) - np.exp(0.5)) < 1e-15
    code, out, _ = call("evolve", text, "--t", "0.5", "--kind", "ode")
    assert abs(jsonio.series_from_json(json.loads(out)["first_row"]).coeff(1) - np.exp(-0.5)) < 1e-15
    code, out, _ = call("evolve", text, "--t", "0.5", "--degree", "0")
    assert jsonio.series_from_json(json.loads(out)["first_row"]).coeff(1) == 1
    code, out, _ = call("plan", text, "--tol", "1e-8")
    plan = json.loads(out)
    assert code == 0 and plan["bound_achieved"] <= 1e-8 and plan["q"] > 0
    code, out, _ = call("plan", sj(polynomial([1])), "--order", "4")
    assert code == 0 and json.loads(out)["eps"] == 1e-8


def test_stdin_and_file_inputs(tmp_path):
    f = sj(polynomial([1, 1], 1, 4))
    code, out, _ = call("invert", "-", stdin=f)
    assert code == 0
    path = tmp_path / "f.json"
    path.write_text(f)
    code, out2, _ = call("invert", str(path))
    assert code == 0 and out2 == out


def test_verify_pass_and_fail(rng):
    g, f = random_map(rng, 3, 7), random_map(rng, 3, 7)
    h = random_generator(rng, 3, 7)
    obj = {k: jsonio.series_to_json(x) for k, x in (("g", g), ("h", h), ("f", f))}
    code, out, _ = call("verify", json.dumps(obj), "--order", "7")
    res = json.loads(out)
    assert code == 0 and res["passed"] and len(res["sandwich"]) == 7
    E = np.eye(3, dtype=complex)
    E[1, 2] = 0.1
    code, out, err = call("verify", json.dumps(jsonio.matrix_to_json(MatrixBlock(Window(Z, 1, 3), E))))
    assert code == 1 and not json.loads(out)["passed"]


def test_table_format():
    code, out, _ = call("compose", sj(polynomial([1 / 3], 1, 2)), sj(polynomial([1], 1, 2)), "--format", "table")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# series at zero")
    assert "0.333333333333 +0i" in lines[1]


@pytest.mark.parametrize(
    "argv",
    [
        ["frobnicate", "{}"],
        ["invert"],
        ["invert", "{not json"],
        ["invert", "/no/such/file.json"],
        ["invert", '{"leading_index": 1}'],
        ["pmatrix", sj(polynomial([1], 1, 4)), "--order", "1"],
        ["exp", sj(polynomial([1], 2, 4)), "--t", "soon"],
    ],
)
def test_malformed_input_exits_2(argv):
    code, out, err = call(*argv)
    assert code == 2 and out == "" and "MalformedInput" in err


def test_domain_error_exits_1_with_name():
    code, _, err = call("compose", sj(polynomial([1], 1, 4)), sj(polynomial([1], 2, 4)))
    assert code == 1 and err.startswith("NotComposable")


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "powermatrix.cli", "invert", sj(polynomial([2], 1, 3))],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert jsonio.series_from_json(json.loads(proc.stdout)).coeff(1) == 0.5
