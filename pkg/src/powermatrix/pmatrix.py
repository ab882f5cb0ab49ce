"""Principal blocks of power matrices.

Row ``m`` of the power matrix ``[f]`` lists the coefficients of ``f**m``;
composition on the right by a map with a simple zero (pole) becomes matrix
multiplication.  Blocks are stored densely with rows and columns indexed by
the window ``lo..hi`` in increasing order, so blocks at 0 are upper
triangular and blocks at infinity are lower triangular.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CenterMismatch, OrientationMismatch, WindowMismatch, ZeroSeries
from .series import (
    DEFAULT_TOL,
    Center,
    FormalSeries,
    Tolerance,
    _fit,
    _mul,
    _inv,
    _pow,
    compose,
    derivative,
    multiply,
    power,
)

__all__ = [
    "Window",
    "MatrixBlock",
    "PowerMatrixBlock",
    "RowRelationReport",
    "power_matrix",
    "first_row_series",
    "mat_mul",
    "verify_row_relations",
    "sandwich_residual",
    "sandwich_identity_check",
]


@dataclass(frozen=True)
class Window:
    center: Center
    lo: int
    hi: int

    def __post_init__(self):
        object.__setattr__(self, "center", Center.parse(self.center))
        if self.lo > self.hi:
            raise WindowMismatch(f"empty window {self.lo}..{self.hi}")

    @classmethod
    def canonical(cls, center, size: int) -> "Window":
        """``(1, size)`` at zero and ``(2 - size, 1)`` at infinity."""
        center = Center.parse(center)
        if size < 1:
            raise WindowMismatch("window size must be positive")
        if center is Center.ZERO:
            return cls(center, 1, size)
        return cls(center, 2 - size, 1)

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    @property
    def indices(self) -> range:
        return range(self.lo, self.hi + 1)

    def __contains__(self, index: int) -> bool:
        return self.lo <= index <= self.hi

    def pos(self, index: int) -> int:
        return index - self.lo


def to_upper(entries: np.ndarray, center: Center) -> np.ndarray:
    """Reorder a block so that it is upper triangular (reverses indices at infinity)."""
    return entries if center is Center.ZERO else entries[::-1, ::-1]


from_upper = to_upper


def is_triangular(entries: np.ndarray, center: Center) -> bool:
    u = to_upper(entries, center)
    return not np.any(np.tril(u, -1))


@dataclass(frozen=True, eq=False)
class MatrixBlock:
    window: Window
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.entries, dtype=complex)
        if arr.shape != (self.window.size, self.window.size):
            raise WindowMismatch(
                f"entries of shape {arr.shape} do not match window size {self.window.size}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)

    @property
    def center(self) -> Center:
        return self.window.center

    def entry(self, m: int, n: int) -> complex:
        w = self.window
        return complex(self.entries[w.pos(m), w.pos(n)])

    def row(self, m: int) -> np.ndarray:
        if m not in self.window:
            raise WindowMismatch(f"row {m} is outside window {self.window.lo}..{self.window.hi}")
        return self.entries[self.window.pos(m)]

    def max_norm(self) -> float:
        return float(np.abs(self.entries).max(initial=0.0))

    def upper(self) -> np.ndarray:
        return to_upper(self.entries, self.center)


@dataclass(frozen=True, eq=False)
class PowerMatrixBlock(MatrixBlock):
    source_p: int = 1


def power_matrix(f: FormalSeries, w: Window) -> PowerMatrixBlock:
    """Principal block of ``[f]`` over the window ``w``.

    Coefficients of ``f`` beyond its stored order are taken to be zero.
    Row ``m`` leads at column ``p*m`` where ``p`` is the leading index of
    ``f``; entries outside that support are exactly zero.
    """
    if f.center is not w.center:
        raise CenterMismatch(f"series at {f.center.value}, window at {w.center.value}")
    if f.is_zero:
        raise ZeroSeries("the zero series has no power matrix")
    s = w.center.step
    p = f.leading_index
    rel = [s * (k - p * m) for m in (w.lo, w.hi) for k in (w.lo, w.hi)]
    n = max(rel) + 1
    out = np.zeros((w.size, w.size), dtype=complex)
    if n > 0:
        fa = _fit(f.coeffs, n)
        # powers are built outward from f^0 = 1 (by f upward, by 1/f
        # downward) so that no row is a product of large cancelling powers
        rows = {}
        if w.hi >= 0:
            pw = _pow(fa, max(w.lo, 0), n)
            for m in range(max(w.lo, 0), w.hi + 1):
                rows[m] = pw
                pw = _mul(pw, fa, n)
        if w.lo < 0:
            inv = _inv(fa, n)
            pw = _pow(inv, -min(w.hi, -1), n)
            for m in range(min(w.hi, -1), w.lo - 1, -1):
                rows[m] = pw
                pw = _mul(pw, inv, n)
        for m in w.indices:
            pw = rows[m]
            for k in w.indices:
                r = s * (k - p * m)
                if 0 <= r < n:
                    out[w.pos(m), w.pos(k)] = pw[r]
    return PowerMatrixBlock(w, out, source_p=p)


def first_row_series(M: MatrixBlock) -> FormalSeries:
    """The series whose coefficients form row 1 of the block."""
    w = M.window
    row = M.row(1)
    if w.center is Center.ZERO:
        return FormalSeries.build(w.center, w.lo, row, w.hi)
    return FormalSeries.build(w.center, w.hi, row[::-1], w.lo)


def _check_pair(A: MatrixBlock, B: MatrixBlock) -> None:
    if A.center is not B.center:
        raise OrientationMismatch(f"blocks at {A.center.value} and {B.center.value}")
    if (A.window.lo, A.window.hi) != (B.window.lo, B.window.hi):
        raise WindowMismatch(
            f"windows {A.window.lo}..{A.window.hi} and {B.window.lo}..{B.window.hi} differ"
        )
    for X in (A, B):
        if not is_triangular(X.entries, X.center):
            raise OrientationMismatch(
                f"block is not {'upper' if X.center is Center.ZERO else 'lower'} triangular"
            )


def mat_mul(A: MatrixBlock, B: MatrixBlock) -> MatrixBlock:
    """Block product.  For triangular blocks this is exactly the block of the
    infinite product, since every intermediate index lies between the row and
    the column."""
    _check_pair(A, B)
    entries = A.entries @ B.entries
    if isinstance(A, PowerMatrixBlock) and isinstance(B, PowerMatrixBlock):
        return PowerMatrixBlock(A.window, entries, source_p=A.source_p * B.source_p)
    return MatrixBlock(A.window, entries)


@dataclass(frozen=True)
class RowRelationReport:
    passed: bool
    max_residual: float
    checked: int
    # residuals divided by max(1, largest term magnitude)
    max_scaled_residual: float = 0.0


def _relation_terms(M: MatrixBlock, m: int, n: int):
    """Terms ``m (n-l) [f]^{m-1}_l [f]^1_{n-l}`` of the row relation, or None
    when some needed entry lies outside the window."""
    w = M.window
    if w.center is Center.ZERO:
        ls = range(m - 1, n)
    else:
        ls = range(n - 1, m)
    if m - 1 not in w or 1 not in w:
        return None
    terms = []
    for l in ls:
        if l not in w or (n - l) not in w:
            return None
        terms.append(m * (n - l) * M.entry(m - 1, l) * M.entry(1, n - l))
    return terms


def verify_row_relations(M: MatrixBlock, tol: Tolerance = DEFAULT_TOL) -> RowRelationReport:
    """Check ``n [f]^m_n = sum_l m (n-l) [f]^{m-1}_l [f]^1_{n-l}`` on the block.

    Only pairs ``(m, n)`` whose whole summation range lies inside the window
    are checked.  Each residual is compared against
    ``abs_tol + rel_tol * (largest term magnitude)``.
    """
    worst = worst_scaled = 0.0
    ok = True
    checked = 0
    for m in M.window.indices:
        for n in M.window.indices:
            terms = _relation_terms(M, m, n)
            if terms is None:
                continue
            lhs = n * M.entry(m, n)
            residual = abs(lhs - sum(terms))
            scale = max([abs(lhs)] + [abs(t) for t in terms])
            worst = max(worst, residual)
            worst_scaled = max(worst_scaled, residual / max(1.0, scale))
            if residual > tol.abs_tol + tol.rel_tol * scale:
                ok = False
            checked += 1
    return RowRelationReport(ok, worst, checked, worst_scaled)


def _pad_for(f: FormalSeries, w: Window, extra: int) -> FormalSeries:
    s = w.center.step
    far = w.hi if s == 1 else w.lo
    return f.extend(far + s * extra)


def _sandwich(g: FormalSeries, h: FormalSeries, f: FormalSeries, m: int, w: Window):
    """Largest difference (and largest magnitude), over the columns of ``w``, between the series
    ``m g^{m-1}(f) g'(f) h(f)`` and row ``m`` of ``[g] <h> [f]``.

    Inputs are read as polynomials.  The block product is formed on a window
    stretched to contain the leading column ``p*m`` of row ``m`` of ``[g]`` so
    that no summation index is cut off.
    """
    from .witt import infinitesimal_matrix  # witt builds on this module

    for x in (g, h, f):
        if x.center is not w.center:
            raise CenterMismatch("all series must share the window's center")
    s = w.center.step
    p = g.leading_index
    lead = p * m
    if s == 1:
        big = Window(w.center, min(w.lo, lead, 1), max(w.hi, m))
    else:
        big = Window(w.center, min(w.lo, m), max(w.hi, lead, 1))
    extra = big.size + abs(lead) + abs(m) + 2
    g, h, f = (_pad_for(x, big, extra) for x in (g, h, f))

    G = power_matrix(g, big)
    H = infinitesimal_matrix(h, big)
    F = power_matrix(f, big)
    rhs_row = (G.entries @ H.entries @ F.entries)[big.pos(m)]

    if m == 1:
        gm1 = None
    else:
        gm1 = power(g, m - 1)
    inner = compose(derivative(g), f)
    if gm1 is not None:
        inner = multiply(compose(gm1, f), inner)
    lhs = multiply(inner, compose(h, f)).scale(m)

    worst = scale = 0.0
    for n in w.indices:
        if s * (lhs.order - n) < 0:
            continue
        a, b = lhs.coeff(n), rhs_row[big.pos(n)]
        worst = max(worst, abs(a - b))
        scale = max(scale, abs(a), abs(b))
    return worst, scale


def sandwich_residual(g: FormalSeries, h: FormalSeries, f: FormalSeries, m: int, w: Window) -> float:
    return _sandwich(g, h, f, m, w)[0]


def sandwich_identity_check(
    g: FormalSeries,
    h: FormalSeries,
    f: FormalSeries,
    m: int,
    w: Window,
    tol: Tolerance = DEFAULT_TOL,
) -> bool:
    """True when the left/right multiplication identity holds for row ``m``."""
    residual, scale = _sandwich(g, h, f, m, w)
    return residual <= tol.abs_tol + tol.rel_tol * scale
