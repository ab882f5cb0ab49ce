"""Formal Loewner evolution of coefficient data.

For a constant generator ``h`` the two formal Loewner equations are solved
by block exponentials:

* PDE ``df/dt = h f'``:      ``[f_t] = [f_a] exp((t - a) <h>)``
* ODE ``dw/dt = -h(w)``:     ``[w_t] = exp(-(t - a) <h>) [w_a]``

The ODE sign follows the classical convention ``h = z p`` with
``dw/dt = -w p(w)``.  An independent fourth-order Runge-Kutta integrator of
the truncated coefficient system serves as an oracle for both.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import BadGeneratorIndex, CenterMismatch, NonPositiveSteps, NonPositiveTolerance, NotComposable
from .pmatrix import MatrixBlock, PowerMatrixBlock, Window, mat_mul, power_matrix
from .series import (
    Center,
    FormalSeries,
    _inv,
    _mul,
    comp_inverse,
    compose,
    derivative,
    multiply,
    reciprocal,
    zero_series,
)
from .witt import infinitesimal_matrix, mexp, taylor_entries

__all__ = [
    "Kind",
    "LoewnerProblem",
    "ApproxPlan",
    "evolve_pde_const",
    "evolve_ode_const",
    "evolve_const",
    "evolve_truncated_polynomial",
    "exponential_tail_bound",
    "taylor_degree_for_tolerance",
    "taylor_degree_for_problem",
    "recover_pde_generator",
    "recover_ode_generator",
    "integrate_coefficient_ode",
]


class Kind(enum.Enum):
    PDE = "pde"
    ODE = "ode"

    @classmethod
    def parse(cls, value) -> "Kind":
        return value if isinstance(value, Kind) else cls(str(value).strip().lower())


@dataclass(frozen=True)
class LoewnerProblem:
    kind: Kind
    generator: FormalSeries
    initial: FormalSeries
    a: float
    window: Window

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind.parse(self.kind))
        c = self.window.center
        if self.generator.center is not c or self.initial.center is not c:
            raise CenterMismatch("generator, initial series and window must share a center")
        if self.initial.is_zero or self.initial.leading_index != 1:
            raise NotComposable("initial series must have leading index 1")
        h = self.generator
        if not h.is_zero and c.step * (h.leading_index - 1) < 0:
            raise BadGeneratorIndex(f"generator leading index {h.leading_index} is not allowed at {c.value}")

    @property
    def center(self) -> Center:
        return self.window.center


@dataclass(frozen=True)
class ApproxPlan:
    q: int
    T: float
    eps: float
    bound_achieved: float


def _generator_block(prob: LoewnerProblem):
    return infinitesimal_matrix(prob.generator, prob.window)


def evolve_pde_const(prob: LoewnerProblem, t: float) -> PowerMatrixBlock:
    """``[f_a] exp((t - a) <h>)``; ``t < a`` gives the reverse flow."""
    A = _generator_block(prob)
    return mat_mul(power_matrix(prob.initial, prob.window), mexp(A, t - prob.a))


def evolve_ode_const(prob: LoewnerProblem, t: float) -> PowerMatrixBlock:
    """``exp(-(t - a) <h>) [w_a]``."""
    A = _generator_block(prob)
    return mat_mul(mexp(A, -(t - prob.a)), power_matrix(prob.initial, prob.window))


def evolve_const(prob: LoewnerProblem, t: float) -> PowerMatrixBlock:
    if prob.kind is Kind.PDE:
        return evolve_pde_const(prob, t)
    return evolve_ode_const(prob, t)


def evolve_truncated_polynomial(prob: LoewnerProblem, t: float, q: int) -> MatrixBlock:
    """The exact evolution with the exponential replaced by its degree-``q``
    Taylor polynomial (in ``-(t - a)`` for the ODE)."""
    if q < 0:
        raise ValueError("Taylor degree must be >= 0")
    A = _generator_block(prob)
    tau = t - prob.a if prob.kind is Kind.PDE else -(t - prob.a)
    Tq = PowerMatrixBlock(prob.window, taylor_entries(A.entries, prob.center, tau, q))
    F = power_matrix(prob.initial, prob.window)
    product = mat_mul(F, Tq) if prob.kind is Kind.PDE else mat_mul(Tq, F)
    return MatrixBlock(prob.window, product.entries)


# ---------------------------------------------------------------------------
# Certified Taylor degree
# ---------------------------------------------------------------------------


def _exp_tail(x: float, q: int) -> float:
    """``sum_{m > q} x^m / m!`` for ``x >= 0``, summed directly (all terms
    are positive, so there is no cancellation)."""
    if x == 0:
        return 0.0
    term = 1.0
    for m in range(1, q + 2):
        term *= x / m
    total = 0.0
    m = q + 1
    while True:
        total += term
        m += 1
        term *= x / m
        if m > x and term <= 1e-17 * total:
            return total


def _norm_estimate(h: FormalSeries, w: Window) -> float:
    """``n max_l |h_l|`` over the first ``n`` generator coefficients, an
    upper bound for the max-norm of ``<h>`` on the block.  For windows
    reaching past index ``n`` the row multiplier is taken from the window."""
    s = h.center.step
    n = w.size
    rows = max(n, abs(w.lo), abs(w.hi))
    return rows * max((abs(h.coeff(1 + s * d)) for d in range(n)), default=0.0)


def _planning_window(h: FormalSeries, n: int, window: Optional[Window]) -> Window:
    if window is None:
        return Window.canonical(h.center, n)
    if window.center is not h.center:
        raise CenterMismatch("generator and window at different centers")
    return window


def exponential_tail_bound(
    h: FormalSeries,
    n: int,
    T: float,
    q: int,
    exact_powers: bool = True,
    window: Optional[Window] = None,
) -> float:
    """Upper bound for ``max|exp(t <h>) - T_q(t <h>)|`` over ``|t| <= T`` on
    the block of size ``n`` (the canonical window unless ``window`` is given).

    The elementary bound uses ``|X Y| <= n |X| |Y|`` in the max-norm and
    reads ``(1/n) sum_{m>q} (T n |<h>|)^m / m!``.  With ``exact_powers`` the
    terms ``T^m |<h>^m| / m!`` are taken from the actual block powers until
    the elementary remainder beyond them is negligible, which is never
    larger and usually much smaller.
    """
    if T < 0:
        raise ValueError("horizon must be >= 0")
    w = _planning_window(h, n, window)
    n = w.size
    x = T * _norm_estimate(h, w)
    loose = _exp_tail(n * x, q) / n
    if not exact_powers or loose == 0.0:
        return loose
    A = infinitesimal_matrix(h, w).upper() * T
    term = np.eye(n, dtype=complex)
    total = 0.0
    m = 0
    while True:
        m += 1
        term = term @ A / m
        if not np.any(term):
            # nilpotent block: every later power vanishes exactly
            return total
        if m > q:
            total += float(np.abs(term).max())
            rest = _exp_tail(n * x, m) / n
            if rest <= 1e-6 * total:
                return min(total + rest, loose)


def taylor_degree_for_tolerance(
    h: FormalSeries,
    n: int,
    T: float,
    eps: float,
    exact_powers: bool = True,
    window: Optional[Window] = None,
) -> ApproxPlan:
    """Smallest ``q`` whose certified Taylor error over ``|t| <= T`` is at most ``eps``."""
    if not eps > 0:
        raise NonPositiveTolerance(f"eps must be positive, got {eps}")
    if not T > 0:
        raise ValueError(f"horizon must be positive, got {T}")
    q = 0
    while True:
        bound = exponential_tail_bound(h, n, T, q, exact_powers, window)
        if bound <= eps:
            return ApproxPlan(q, T, eps, bound)
        q += 1


def taylor_degree_for_problem(prob: LoewnerProblem, T: float, eps: float) -> ApproxPlan:
    """Plan for ``evolve_truncated_polynomial`` itself: the exponential error
    is multiplied by ``[f_a]`` (at most ``n |[f_a]|`` growth in the max-norm),
    so the exponential is planned to ``eps / (n |[f_a]|)``."""
    if not eps > 0:
        raise NonPositiveTolerance(f"eps must be positive, got {eps}")
    n = prob.window.size
    F = power_matrix(prob.initial, prob.window)
    scale = n * max(F.max_norm(), 1e-300)
    inner = taylor_degree_for_tolerance(prob.generator, n, T, eps / scale, window=prob.window)
    return ApproxPlan(inner.q, T, eps, inner.bound_achieved * scale)


# ---------------------------------------------------------------------------
# Generator recovery
# ---------------------------------------------------------------------------


def _require_map(f: FormalSeries) -> None:
    if f.is_zero or f.leading_index != 1:
        raise NotComposable("the path must have leading index 1")


def recover_pde_generator(f: FormalSeries, f_dot: FormalSeries) -> FormalSeries:
    """``h = f_dot / f'``."""
    _require_map(f)
    if f.center is not f_dot.center:
        raise CenterMismatch("path and velocity at different centers")
    if f_dot.is_zero:
        return f_dot
    return multiply(f_dot, reciprocal(derivative(f)))


def recover_ode_generator(f: FormalSeries, f_dot: FormalSeries) -> FormalSeries:
    """``h~ = f_dot o f^{-1}``, the right-hand side of ``dw/dt = h~(w)``."""
    _require_map(f)
    if f.center is not f_dot.center:
        raise CenterMismatch("path and velocity at different centers")
    if f_dot.is_zero:
        return f_dot
    return compose(f_dot, comp_inverse(f))


# ---------------------------------------------------------------------------
# Runge-Kutta oracle
# ---------------------------------------------------------------------------
#
# A path with leading index 1 is stored as the array c with c[r] the
# coefficient of z^(1 + s r), s the center step; a generator as hd with hd[d]
# the coefficient of z^(1 + s d).  Both right-hand sides are then plain
# truncated convolutions, the same at either center.


def _depth_array(h: FormalSeries, n: int) -> np.ndarray:
    s = h.center.step
    return np.array([h.coeff(1 + s * d) for d in range(n)], dtype=complex)


def _shift(a: np.ndarray) -> np.ndarray:
    out = np.zeros_like(a)
    out[1:] = a[:-1]
    return out


def _pde_rhs(c: np.ndarray, hd: np.ndarray, s: int) -> np.ndarray:
    n = len(c)
    dc = c * (1 + s * np.arange(n))
    return _mul(hd, dc, n)


def _ode_rhs(c: np.ndarray, hd: np.ndarray, s: int) -> np.ndarray:
    """``-h(f)`` by Horner's rule.  Writing ``f = z u``, the term ``h_d
    f^(1+sd)`` is ``z u (z^s w)^d`` with ``w = u`` at zero and ``1/u`` at
    infinity, and multiplication by ``z^s`` is a shift of the array."""
    n = len(c)
    w = c if s == 1 else _inv(c, n)
    nz = np.flatnonzero(hd)
    acc = np.zeros(n, dtype=complex)
    for d in range(nz[-1] if len(nz) else -1, -1, -1):
        acc = _shift(_mul(w, acc, n))
        acc[0] += hd[d]
    return -_mul(c, acc, n)


def integrate_coefficient_ode(
    prob: LoewnerProblem,
    t_end: float,
    steps: int,
    generator_at: Optional[Callable[[float], FormalSeries]] = None,
) -> FormalSeries:
    """Classical RK4 for the first coefficients of ``f_t`` from ``t = a`` to
    ``t_end``.

    Tracks the coefficients of ``z^1`` through the far end of the window.
    ``generator_at(t)`` overrides the constant generator of ``prob``.
    """
    if steps < 1:
        raise NonPositiveSteps(f"steps must be >= 1, got {steps}")
    s = prob.center.step
    w = prob.window
    far = w.hi if s == 1 else w.lo
    n = s * (far - 1) + 1
    if n < 1:
        return zero_series(prob.center, far)
    c = np.array([prob.initial.coeff(1 + s * r) for r in range(n)], dtype=complex)
    rhs = _pde_rhs if prob.kind is Kind.PDE else _ode_rhs
    if generator_at is None:
        hd_const = _depth_array(prob.generator, n)
        gen = lambda _t: hd_const
    else:
        gen = lambda t: _depth_array(generator_at(t), n)
    dt = (t_end - prob.a) / steps
    t = prob.a
    for _ in range(steps):
        h0, hm, h1 = gen(t), gen(t + dt / 2), gen(t + dt)
        k1 = rhs(c, h0, s)
        k2 = rhs(c + dt / 2 * k1, hm, s)
        k3 = rhs(c + dt / 2 * k2, hm, s)
        k4 = rhs(c + dt * k3, h1, s)
        c = c + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += dt
    return FormalSeries.build(prob.center, 1, c, far)
