"""Truncated formal power series at 0 and at infinity.

A series at ``Center.ZERO`` is ``sum_{n=p}^{N} a_n z**n`` (exponents increase
from the leading index ``p`` to the truncation order ``N``).  A series at
``Center.INFINITY`` is ``sum_{n=N}^{p} a_n z**n`` (exponents decrease from
``p`` down to ``N``).  In both cases ``coeffs[i]`` is the coefficient of
``z**(p + step*i)`` where ``step`` is +1 at zero and -1 at infinity.

Arithmetic tracks relative precision: a product of two series is known to as
many terms past its leading index as the shorter factor.  Coefficients past
the truncation order are unknown, not zero, except where an operation
explicitly treats a series as a polynomial (see :meth:`FormalSeries.extend`).

The zero series has an empty coefficient array and leading index
``order + step``, so that ``len(coeffs) == step*(order - p) + 1`` holds for
every series.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import (
    CenterMismatch,
    LeadingCoefficientZero,
    NotComposable,
    WindowMismatch,
    ZeroSeries,
)

__all__ = [
    "Center",
    "Tolerance",
    "FormalSeries",
    "make_series",
    "polynomial",
    "identity",
    "constant",
    "multiply",
    "derivative",
    "reciprocal",
    "power",
    "compose",
    "comp_inverse",
    "transform_zero_infinity",
    "series_close",
    "max_abs_difference",
]


class Center(enum.Enum):
    ZERO = "zero"
    INFINITY = "infinity"

    @property
    def step(self) -> int:
        return 1 if self is Center.ZERO else -1

    def flipped(self) -> "Center":
        return Center.INFINITY if self is Center.ZERO else Center.ZERO

    @classmethod
    def parse(cls, value) -> "Center":
        if isinstance(value, Center):
            return value
        text = str(value).strip().lower()
        aliases = {"0": "zero", "inf": "infinity", "oo": "infinity", "∞": "infinity"}
        return cls(aliases.get(text, text))


@dataclass(frozen=True)
class Tolerance:
    """Comparison thresholds.

    ``abs_tol`` and ``rel_tol`` combine per coefficient as
    ``|a - b| <= abs_tol + rel_tol * max(|a|, |b|)``.  ``tail_tol`` is the
    relative size below which a further term of an infinite matrix series is
    considered negligible.
    """

    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    tail_tol: float = 1e-18

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol", "tail_tol"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
        if self.abs_tol + self.rel_tol <= 0:
            raise ValueError("abs_tol + rel_tol must be positive")

    def close(self, a, b) -> bool:
        a = np.asarray(a, dtype=complex)
        b = np.asarray(b, dtype=complex)
        scale = np.maximum(np.abs(a), np.abs(b))
        return bool(np.all(np.abs(a - b) <= self.abs_tol + self.rel_tol * scale))


DEFAULT_TOL = Tolerance()


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=complex).reshape(-1)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class FormalSeries:
    center: Center
    leading_index: int
    coeffs: np.ndarray
    order: int

    # -- construction -----------------------------------------------------

    @classmethod
    def build(cls, center: Center, p: int, coeffs, order: int) -> "FormalSeries":
        """Lenient constructor: strips exact leading zeros.

        ``coeffs`` may be shorter than the window ``p..order`` (missing
        trailing terms count as zero) but not longer.
        """
        center = Center.parse(center)
        s = center.step
        p, order = int(p), int(order)
        arr = np.array(coeffs, dtype=complex).reshape(-1)
        length = s * (order - p) + 1
        if length < 0:
            length = 0
        if arr.size > length:
            raise WindowMismatch(
                f"{arr.size} coefficients do not fit exponents {p}..{order} at {center.value}"
            )
        if arr.size < length:
            arr = np.concatenate([arr, np.zeros(length - arr.size, dtype=complex)])
        nz = np.flatnonzero(arr)
        if nz.size == 0:
            return cls(center, order + s, _frozen([]), order)
        first = int(nz[0])
        return cls(center, p + s * first, _frozen(arr[first:]), order)

    # -- basic accessors --------------------------------------------------

    @property
    def step(self) -> int:
        return self.center.step

    @property
    def is_zero(self) -> bool:
        return self.coeffs.size == 0

    def __len__(self) -> int:
        return int(self.coeffs.size)

    @property
    def exponents(self) -> np.ndarray:
        return self.leading_index + self.step * np.arange(len(self))

    def coeff(self, n: int) -> complex:
        """Coefficient of ``z**n``; zero outside the stored range."""
        i = self.step * (n - self.leading_index)
        if 0 <= i < len(self):
            return complex(self.coeffs[i])
        return 0j

    def dense(self, lo: int, hi: int) -> np.ndarray:
        """Coefficients for exponents ``lo..hi`` in ascending exponent order."""
        return np.array([self.coeff(n) for n in range(lo, hi + 1)], dtype=complex)

    def extend(self, order: int) -> "FormalSeries":
        """Treat the stored coefficients as a polynomial known through ``order``."""
        if self.step * (order - self.order) <= 0:
            return self
        if self.is_zero:
            return zero_series(self.center, order)
        return FormalSeries.build(self.center, self.leading_index, self.coeffs, order)

    def truncate(self, order: int) -> "FormalSeries":
        if self.step * (order - self.order) >= 0:
            return self
        keep = max(0, self.step * (order - self.leading_index) + 1)
        return FormalSeries.build(self.center, self.leading_index, self.coeffs[:keep], order)

    # -- ring operations --------------------------------------------------

    def _check_center(self, other: "FormalSeries") -> None:
        if other.center is not self.center:
            raise CenterMismatch(
                f"series at {self.center.value} combined with series at {other.center.value}"
            )

    def __add__(self, other):
        if not isinstance(other, FormalSeries):
            return NotImplemented
        self._check_center(other)
        s = self.step
        # work in "steps from the start" coordinates: k = s * exponent
        order_k = min(s * self.order, s * other.order)
        start_k = min(s * self.leading_index, s * other.leading_index)
        if start_k > order_k:
            return zero_series(self.center, s * order_k)
        out = np.zeros(order_k - start_k + 1, dtype=complex)
        for term in (self, other):
            off = s * term.leading_index - start_k
            n = max(0, min(len(term), len(out) - off))
            out[off:off + n] += term.coeffs[:n]
        return FormalSeries.build(self.center, s * start_k, out, s * order_k)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        if not isinstance(other, FormalSeries):
            return NotImplemented
        return self + (-other)

    def scale(self, c) -> "FormalSeries":
        c = complex(c)
        if c == 0 or self.is_zero:
            return zero_series(self.center, self.order)
        return FormalSeries(self.center, self.leading_index, _frozen(c * self.coeffs), self.order)

    def __mul__(self, other):
        if isinstance(other, FormalSeries):
            return multiply(self, other)
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    def __repr__(self) -> str:
        terms = ", ".join(f"{n}: {c:.6g}" for n, c in zip(self.exponents, self.coeffs))
        return f"FormalSeries({self.center.value}, p={self.leading_index}, N={self.order}, {{{terms}}})"


def zero_series(center: Center, order: int) -> FormalSeries:
    center = Center.parse(center)
    return FormalSeries(center, order + center.step, _frozen([]), order)


def make_series(center, p: int, coeffs: Iterable, N: int) -> FormalSeries:
    """Validated constructor.

    >>> make_series(Center.ZERO, 1, [1, 1], 2)
    FormalSeries(zero, p=1, N=2, {1: 1+0j, 2: 1+0j})
    """
    center = Center.parse(center)
    arr = np.array(list(coeffs), dtype=complex).reshape(-1)
    if arr.size == 0:
        return zero_series(center, N)
    if arr[0] == 0:
        raise LeadingCoefficientZero(f"leading coefficient a_{p} is zero")
    if arr.size != center.step * (N - p) + 1:
        raise WindowMismatch(
            f"{arr.size} coefficients given for exponents {p}..{N} at {center.value}"
        )
    return FormalSeries(center, int(p), _frozen(arr), int(N))


def polynomial(coeffs, p: int = 1, order: int | None = None, center=Center.ZERO) -> FormalSeries:
    """Series from coefficients of ``z**p, z**(p+step), ...``, zero-padded to ``order``."""
    center = Center.parse(center)
    arr = np.array(list(coeffs), dtype=complex).reshape(-1)
    if order is None:
        order = p + center.step * (arr.size - 1)
    return FormalSeries.build(center, p, arr, order)


def identity(center=Center.ZERO, order: int | None = None) -> FormalSeries:
    center = Center.parse(center)
    return polynomial([1], 1, 1 if order is None else order, center)


def constant(c, center=Center.ZERO, order: int = 0) -> FormalSeries:
    return polynomial([c], 0, order, center)


# ---------------------------------------------------------------------------
# Array kernels.  All arrays here are "relative": element i is the
# coefficient i steps past the leading index.
# ---------------------------------------------------------------------------


def _fit(a: np.ndarray, n: int) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.size >= n:
        return a[:n]
    return np.concatenate([a, np.zeros(n - a.size, dtype=complex)])


def _mul(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    if n <= 0:
        return np.zeros(0, dtype=complex)
    return _fit(np.convolve(_fit(a, n), _fit(b, n)), n)


def _inv(a: np.ndarray, n: int) -> np.ndarray:
    a = _fit(a, n)
    r = np.zeros(n, dtype=complex)
    if n == 0:
        return r
    r[0] = 1 / a[0]
    for k in range(1, n):
        r[k] = -np.dot(a[1:k + 1], r[k - 1::-1]) / a[0]
    return r


def _pow(a: np.ndarray, k: int, n: int) -> np.ndarray:
    if k < 0:
        a, k = _inv(a, n), -k
    out = _fit([1.0], n)
    base = _fit(a, n)
    while k:
        if k & 1:
            out = _mul(out, base, n)
        k >>= 1
        if k:
            base = _mul(base, base, n)
    return out


# ---------------------------------------------------------------------------
# Series operations
# ---------------------------------------------------------------------------


def _same_center(f: FormalSeries, g: FormalSeries) -> None:
    if f.center is not g.center:
        raise CenterMismatch(f"centers differ: {f.center.value} vs {g.center.value}")


def multiply(f: FormalSeries, g: FormalSeries) -> FormalSeries:
    """Cauchy product; the result is known to ``min(len(f), len(g))`` terms."""
    _same_center(f, g)
    s = f.step
    p = f.leading_index + g.leading_index
    n = min(len(f), len(g))
    return FormalSeries.build(f.center, p, _mul(f.coeffs, g.coeffs, n), p + s * (n - 1))


def derivative(f: FormalSeries) -> FormalSeries:
    return FormalSeries.build(
        f.center, f.leading_index - 1, f.exponents * f.coeffs, f.order - 1
    )


def reciprocal(f: FormalSeries, N: int | None = None) -> FormalSeries:
    """Multiplicative inverse with leading index ``-p``, known through ``N``.

    ``N`` is clipped to the precision available from ``f``.
    """
    if f.is_zero:
        raise ZeroSeries("cannot invert the zero series")
    s = f.step
    p = -f.leading_index
    n = len(f)
    if N is not None:
        wanted = s * (N - p) + 1
        if wanted < 1:
            raise WindowMismatch(f"order {N} lies before the leading index {p}")
        n = min(n, wanted)
    return FormalSeries.build(f.center, p, _inv(f.coeffs, n), p + s * (n - 1))


def power(f: FormalSeries, k: int) -> FormalSeries:
    """Integer power, negative exponents through the reciprocal."""
    if f.is_zero:
        if k <= 0:
            raise ZeroSeries("non-positive power of the zero series")
        out = f
        for _ in range(k - 1):
            out = multiply(out, f)
        return out
    s = f.step
    p = k * f.leading_index
    n = len(f)
    return FormalSeries.build(f.center, p, _pow(f.coeffs, k, n), p + s * (n - 1))


def _require_map(f: FormalSeries, what: str) -> None:
    if f.is_zero or f.leading_index != 1:
        raise NotComposable(
            f"{what} must have leading index 1 (got {'zero series' if f.is_zero else f.leading_index})"
        )


def compose(g: FormalSeries, f: FormalSeries) -> FormalSeries:
    """``g o f`` for ``f`` with leading index 1 at the same center.

    ``g`` may have any leading index; negative powers of ``f`` go through the
    reciprocal.  Only finite sums occur because ``f`` has a simple zero (or a
    simple pole at infinity).
    """
    if g.center is not f.center:
        raise NotComposable(f"cannot compose a series at {g.center.value} with one at {f.center.value}")
    _require_map(f, "inner series")
    s = f.step
    pg = g.leading_index
    n = min(len(g), len(f))
    if n == 0:
        return zero_series(g.center, g.order)
    fa = _fit(f.coeffs, n)
    step = fa if s == 1 else _inv(fa, n)
    pw = _pow(fa, pg, n)
    out = np.zeros(n, dtype=complex)
    for i in range(n):
        out[i:] += g.coeffs[i] * pw[: n - i]
        if i + 1 < n:
            pw = _mul(pw, step, n)
    return FormalSeries.build(g.center, pg, out, pg + s * (n - 1))


def comp_inverse(f: FormalSeries) -> FormalSeries:
    """Compositional inverse (series reversion) of ``f`` with leading index 1.

    Solves for the coefficients of ``g`` one at a time from ``g o f = z``.
    """
    _require_map(f, "series to invert")
    s = f.step
    n = len(f)
    fa = f.coeffs
    step = fa if s == 1 else _inv(fa, n)
    # powers[i] is f**(1 + s*i), whose leading term sits at exponent 1 + s*i
    powers = []
    pw = _fit(fa, n)
    for i in range(n):
        powers.append(pw)
        if i + 1 < n:
            pw = _mul(pw, step, n)
    g = np.zeros(n, dtype=complex)
    for k in range(n):
        acc = sum(g[i] * powers[i][k - i] for i in range(k))
        g[k] = ((1.0 if k == 0 else 0.0) - acc) / powers[k][0]
    return FormalSeries.build(f.center, 1, g, 1 + s * (n - 1))


def transform_zero_infinity(f: FormalSeries, kind: str = "map") -> FormalSeries:
    """Move a map or a generator between the centers 0 and infinity.

    ``kind="map"`` sends ``f`` to ``1/f(1/z)``; ``kind="generator"`` sends
    ``h`` to ``-z**2 h(1/z)``.  Both are involutions.
    """
    target = f.center.flipped()
    if kind == "map":
        _require_map(f, "map")
        # f(1/z) has the same relative coefficients with leading index -1 at
        # the other center; its reciprocal then leads at +1.
        n = len(f)
        return FormalSeries.build(target, 1, _inv(f.coeffs, n), 1 + target.step * (n - 1))
    if kind == "generator":
        if not f.is_zero and f.step * (f.leading_index - 1) < 0:
            raise NotComposable(
                f"generator at {f.center.value} needs leading index "
                f"{'>=' if f.step == 1 else '<='} 1, got {f.leading_index}"
            )
        return FormalSeries.build(target, 2 - f.leading_index, -f.coeffs, 2 - f.order)
    raise ValueError(f"unknown transform kind {kind!r}")


def _common_range(f: FormalSeries, g: FormalSeries) -> tuple[int, int]:
    _same_center(f, g)
    s = f.step
    start = min(s * f.leading_index, s * g.leading_index)
    stop = min(s * f.order, s * g.order)
    return start, stop


def max_abs_difference(f: FormalSeries, g: FormalSeries) -> float:
    """Largest coefficient difference over the exponents known in both."""
    start, stop = _common_range(f, g)
    s = f.step
    diffs = [abs(f.coeff(s * k) - g.coeff(s * k)) for k in range(start, stop + 1)]
    return max(diffs, default=0.0)


def series_close(f: FormalSeries, g: FormalSeries, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Per-coefficient comparison over the common window."""
    start, stop = _common_range(f, g)
    s = f.step
    a = [f.coeff(s * k) for k in range(start, stop + 1)]
    b = [g.coeff(s * k) for k in range(start, stop + 1)]
    return tol.close(a, b)
