"""Infinitesimal power matrices, the Witt bracket, and exp/log.

The infinitesimal power matrix ``<h>`` of a generator ``h`` has entry
``m * h_{n-m+1}`` in row ``m``, column ``n``.  A row vector of coefficients
multiplied on the right by ``<h>`` is the derivation ``h d/dz`` applied to the
corresponding series, and ``exp(t <h>)`` is the power matrix of the time-``t``
flow of that derivation.

Exponentials are computed one column at a time: column ``k`` of the
exponential of an upper triangular matrix only depends on its leading
``k x k`` block, so computing it from that block alone makes entry ``(1, k)``
a function of ``h_1..h_k`` exactly, in floating point as well.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadGeneratorIndex, CenterMismatch, NotUnipotent, SingularLeading, WindowMismatch
from .pmatrix import (
    MatrixBlock,
    PowerMatrixBlock,
    Window,
    first_row_series,
    from_upper,
    is_triangular,
    to_upper,
)
from .series import DEFAULT_TOL, Center, FormalSeries, Tolerance, derivative, multiply, polynomial

__all__ = [
    "InfMatrixBlock",
    "infinitesimal_matrix",
    "basis_element",
    "bracket_matrix",
    "commutator",
    "bracket_series",
    "interior_mask",
    "mexp",
    "mexp_entries",
    "mlog",
    "unipotent_log",
    "exp_inverse",
    "linear_coefficient",
    "exp_derivation",
    "growth_constant",
    "power_bound",
    "exp_bound",
]


@dataclass(frozen=True, eq=False)
class InfMatrixBlock(MatrixBlock):
    h: FormalSeries = field(default=None, repr=True)


def _check_generator(h: FormalSeries) -> None:
    if h.is_zero:
        return
    if h.step * (h.leading_index - 1) < 0:
        side = ">= 1 at zero" if h.center is Center.ZERO else "<= 1 at infinity"
        raise BadGeneratorIndex(f"generator leading index must be {side}, got {h.leading_index}")


def infinitesimal_matrix(h: FormalSeries, w: Window) -> InfMatrixBlock:
    """Block of ``<h>`` over ``w``; absent coefficients of ``h`` count as zero."""
    if h.center is not w.center:
        raise CenterMismatch(f"generator at {h.center.value}, window at {w.center.value}")
    _check_generator(h)
    out = np.zeros((w.size, w.size), dtype=complex)
    for m in w.indices:
        for n in w.indices:
            c = h.coeff(n - m + 1)
            if c:
                out[w.pos(m), w.pos(n)] = m * c
    return InfMatrixBlock(w, out, h=h)


def basis_element(k: int, w: Window) -> InfMatrixBlock:
    """``e_k = <z^{k+1}>``: entry ``m`` at column ``m + k``."""
    if w.center.step * k < 0:
        raise BadGeneratorIndex(f"e_{k} does not belong to the algebra at {w.center.value}")
    return infinitesimal_matrix(polynomial([1], k + 1, k + 1, w.center), w)


def _check_same_window(A: MatrixBlock, B: MatrixBlock) -> None:
    if A.window != B.window:
        raise WindowMismatch("blocks live on different windows")


def commutator(A: MatrixBlock, B: MatrixBlock) -> MatrixBlock:
    """Plain matrix commutator ``AB - BA``."""
    _check_same_window(A, B)
    return MatrixBlock(A.window, A.entries @ B.entries - B.entries @ A.entries)


def bracket_matrix(A: MatrixBlock, B: MatrixBlock) -> MatrixBlock:
    """Lie bracket of infinitesimal blocks, ``BA - AB``.

    Because ``<h>`` acts on coefficient rows from the right, ``h -> <h>``
    reverses the order of products; with this sign ``<[h1, h2]> =
    bracket_matrix(<h1>, <h2>)`` and ``[e_k, e_l] = (l - k) e_{k+l}``.
    """
    _check_same_window(A, B)
    return MatrixBlock(A.window, B.entries @ A.entries - A.entries @ B.entries)


def bracket_series(h1: FormalSeries, h2: FormalSeries) -> FormalSeries:
    """``h1 h2' - h1' h2``."""
    if h1.center is not h2.center:
        raise CenterMismatch("generators at different centers")
    return multiply(h1, derivative(h2)) - multiply(derivative(h1), h2)


def interior_mask(w: Window, h: FormalSeries) -> np.ndarray:
    """Entries ``(m, n)`` of ``<h>`` whose coefficient ``h_{n-m+1}`` lies
    inside the known range of ``h``."""
    mask = np.zeros((w.size, w.size), dtype=bool)
    s = w.center.step
    for m in w.indices:
        for n in w.indices:
            mask[w.pos(m), w.pos(n)] = s * (h.order - (n - m + 1)) >= 0
    return mask


# ---------------------------------------------------------------------------
# Exponential
# ---------------------------------------------------------------------------


def _taylor(B: np.ndarray, nterms: int) -> np.ndarray:
    """``sum_{j=0}^{nterms} B^j / j!``."""
    n = B.shape[0]
    E = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for j in range(1, nterms + 1):
        term = term @ B / j
        E = E + term
    return E


def _expm_upper(B: np.ndarray, tail_tol: float) -> np.ndarray:
    """Exponential of an upper triangular matrix.

    A zero diagonal means ``B`` is nilpotent and the series ends after
    ``n - 1`` terms.  Otherwise ``B`` is scaled by ``2**-s`` so that
    ``max|B| <= 1``, the series is summed until at least ``n`` terms have
    been taken and a term falls below ``tail_tol`` relative to the sum, and
    the result is squared ``s`` times and its diagonal replaced by
    ``exp(diag B)``, which is exact for a triangular matrix.  With that scaling
    ``max|B^j / j!| <= n^(j-1) / j!``, which caps the number of terms.
    """
    n = B.shape[0]
    if n == 0:
        return B.copy()
    if not np.any(np.diagonal(B)):
        return _taylor(B, n - 1)
    norm = float(np.abs(B).max())
    s = max(0, math.ceil(math.log2(norm)))
    Bs = B / 2.0**s
    cap, bound = 1, 1.0
    while cap < n or (bound > tail_tol and cap < n + 400):
        cap += 1
        bound *= n / cap
    E = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for j in range(1, cap + 1):
        term = term @ Bs / j
        E = E + term
        if j >= n and np.abs(term).max() <= tail_tol * np.abs(E).max():
            break
    for _ in range(s):
        E = E @ E
    # the diagonal of exp(B) is known exactly; squaring only rounds it
    np.fill_diagonal(E, np.exp(np.diagonal(B)))
    return E


def _by_columns(U: np.ndarray, block_fn) -> np.ndarray:
    n = U.shape[0]
    out = np.zeros_like(U, dtype=complex)
    for k in range(1, n + 1):
        out[:k, k - 1] = block_fn(U[:k, :k])[:, k - 1]
    return out


def mexp_entries(entries: np.ndarray, center: Center, t: complex = 1.0, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """``exp(t A)`` for a triangular block given as a raw array."""
    U = to_upper(np.asarray(entries, dtype=complex) * t, center)
    E = _by_columns(U, lambda B: _expm_upper(B, tol.tail_tol))
    return from_upper(E, center)


def taylor_entries(entries: np.ndarray, center: Center, t: complex, q: int) -> np.ndarray:
    """Degree-``q`` partial sum of ``exp(t A)``, computed column by column
    exactly as the nilpotent case of :func:`mexp`."""
    U = to_upper(np.asarray(entries, dtype=complex) * t, center)
    return from_upper(_by_columns(U, lambda B: _taylor(B, q)), center)


def mexp(A: MatrixBlock, t: complex = 1.0, tol: Tolerance = DEFAULT_TOL) -> PowerMatrixBlock:
    """Block exponential ``exp(t A)``.

    For an infinitesimal block this is the power matrix of the time-``t`` flow
    of ``h d/dz``; ``first_row_series`` of the result is that flow.
    """
    if not is_triangular(A.entries, A.center):
        raise WindowMismatch("exponential needs a triangular block")
    return PowerMatrixBlock(A.window, mexp_entries(A.entries, A.center, t, tol), source_p=1)


# ---------------------------------------------------------------------------
# Logarithm and inverse of the exponential
# ---------------------------------------------------------------------------


def _sqrt_unipotent(R: np.ndarray) -> np.ndarray:
    """Principal square root of an upper triangular unipotent matrix.

    Solved column by column from ``S @ S = R``, so column ``k`` only reads
    the leading ``k x k`` block.
    """
    n = R.shape[0]
    S = np.eye(n, dtype=complex)
    for j in range(1, n):
        for i in range(j - 1, -1, -1):
            S[i, j] = (R[i, j] - S[i, i + 1 : j] @ S[i + 1 : j, j]) / 2
    return S


def _nilpotent_log(X: np.ndarray) -> np.ndarray:
    n = X.shape[0]
    L = np.zeros_like(X)
    P = np.eye(n, dtype=complex)
    for j in range(1, n):
        P = P @ X
        L = L + ((-1) ** (j + 1) / j) * P
    return L


def unipotent_log(M: MatrixBlock, tol: Tolerance = DEFAULT_TOL, max_roots: int = 60) -> tuple[np.ndarray, int]:
    """``sum_{j>=1} (-1)^{j+1} (M - I)^j / j`` and the number of terms used.

    The diagonal of ``M - I`` is set to exactly zero (after checking it is
    within ``tol.abs_tol``), so the series stops after ``size - 1`` terms.
    When ``M - I`` is large the alternating sum cancels badly, so it is
    applied to ``R = M^(1/2^s)`` (unipotent, hence with the same finite
    series) and ``log M = 2^s log R``; ``s`` is the least number of square
    roots bringing ``max|R - I|`` to 1/2 or below.
    """
    if not is_triangular(M.entries, M.center):
        raise NotUnipotent("logarithm needs a triangular block")
    diag = np.diagonal(M.entries)
    if np.any(np.abs(diag - 1) > tol.abs_tol):
        raise NotUnipotent(f"diagonal is not 1 (first-row leading entry {M.entry(1, 1) if 1 in M.window else diag[0]})")
    R = np.array(to_upper(M.entries, M.center), dtype=complex)
    np.fill_diagonal(R, 1)
    n = R.shape[0]
    s = 0
    while np.abs(R - np.eye(n)).max(initial=0.0) > 0.5 and s < max_roots:
        R = _sqrt_unipotent(R)
        s += 1
    X = R - np.eye(n)
    np.fill_diagonal(X, 0)
    L = 2.0**s * _nilpotent_log(X)
    return from_upper(L, M.center), n - 1


def mlog(M: MatrixBlock, tol: Tolerance = DEFAULT_TOL) -> InfMatrixBlock:
    """Logarithm of a unipotent power-matrix block as an infinitesimal block.

    The generator is read off row 1 of the finite logarithm series; its first
    coefficient is zero.
    """
    if 1 not in M.window:
        raise WindowMismatch("logarithm needs row 1 in the window")
    if abs(M.entry(1, 1) - 1) > tol.abs_tol:
        raise NotUnipotent(f"[f]^1_1 = {M.entry(1, 1)} is not 1")
    L, _ = unipotent_log(M, tol)
    h = first_row_series(MatrixBlock(M.window, L))
    return infinitesimal_matrix(h, M.window)


def linear_coefficient(h1: complex, k: int) -> complex:
    """Coefficient of ``h_k`` in entry ``(1, k)`` of ``exp <h>``.

    Entry ``(1, k)`` is affine in ``h_k``: the only paths through ``<h>`` that
    use ``h_k`` stay in row 1 (weight ``h_1``), jump once (weight ``h_k``),
    then stay in row ``k`` (weight ``k h_1``).  Summing gives
    ``e^{h_1} (e^{(k-1) h_1} - 1) / ((k-1) h_1)``.
    """
    x = (k - 1) * complex(h1)
    if x == 0:
        return cmath.exp(h1)
    if abs(x) < 1e-3:
        # (e^x - 1)/x by its series; complex expm1 is not available in cmath
        phi = 1 + x / 2 + x * x / 6 + x**3 / 24 + x**4 / 120
    else:
        phi = (cmath.exp(x) - 1) / x
    return cmath.exp(h1) * phi


def _canonical_upper_inf(coeffs: np.ndarray, center: Center) -> np.ndarray:
    """Upper-oriented block of ``<h>`` on the canonical window of size
    ``len(coeffs)``, where ``coeffs[j]`` is ``h`` at exponent ``1 + step*j``."""
    n = len(coeffs)
    w = Window.canonical(center, n)
    h = FormalSeries.build(center, 1, coeffs, 1 + center.step * (n - 1))
    return to_upper(infinitesimal_matrix(h, w).entries, center)


def exp_inverse(M: MatrixBlock, branch_k: int = 0, tol: Tolerance = DEFAULT_TOL) -> FormalSeries:
    """Generator ``h`` with ``exp <h> = M`` and ``h_1 = Log M^1_1 + 2 pi i k``.

    Coefficients are found in order: with ``h_2..h_{j-1}`` known, entry
    ``(1, j)`` of ``exp <h>`` equals ``c_j h_j + Psi_j`` where ``Psi_j`` is the
    same entry for the generator truncated before ``h_j`` (computed by
    exponentiating that truncation) and ``c_j`` is
    :func:`linear_coefficient`.
    """
    if 1 not in M.window:
        raise WindowMismatch("exp_inverse needs row 1 in the window")
    f1 = M.entry(1, 1)
    if f1 == 0:
        raise SingularLeading("[f]^1_1 is zero")
    center = M.center
    target = first_row_series(M)
    s = center.step
    n = s * (target.order - 1) + 1
    a = np.array([target.coeff(1 + s * j) for j in range(n)])
    hh = np.zeros(n, dtype=complex)
    hh[0] = cmath.log(f1) + 2j * math.pi * branch_k
    for j in range(1, n):
        k = 1 + s * j
        c = linear_coefficient(hh[0], k)
        if abs(c) <= 1e-13 * max(1.0, abs(cmath.exp(hh[0])), abs(cmath.exp(k * hh[0]))):
            raise SingularLeading(
                f"h_1 = {hh[0]} makes the coefficient of h_{k} vanish; the logarithm is not unique"
            )
        U = _canonical_upper_inf(hh[: j + 1], center)
        psi = _expm_upper(U, tol.tail_tol)[0, j]
        hh[j] = (a[j] - psi) / c
    return FormalSeries.build(center, 1, hh, 1 + s * (n - 1))


def exp_derivation(h: FormalSeries, g: FormalSeries, w: Window, tol: Tolerance = DEFAULT_TOL) -> FormalSeries:
    """``exp(h d/dz) g`` as the first row of ``[g] exp<h>``.

    The window is stretched to include the leading exponent of ``g`` so that
    no term of ``g`` is dropped; the result is known through the far end of
    ``w``.
    """
    if g.center is not w.center or h.center is not w.center:
        raise CenterMismatch("generator, series and window must share a center")
    if g.is_zero:
        return g.truncate(w.hi if w.center is Center.ZERO else w.lo)
    p = g.leading_index
    if w.center is Center.ZERO:
        big = Window(w.center, min(w.lo, p, 1), w.hi)
    else:
        big = Window(w.center, w.lo, max(w.hi, p, 1))
    E = mexp(infinitesimal_matrix(h, big), 1.0, tol)
    row = np.array([g.coeff(n) for n in big.indices]) @ E.entries
    if w.center is Center.ZERO:
        return FormalSeries.build(w.center, big.lo, row, big.hi)
    return FormalSeries.build(w.center, big.hi, row[::-1], big.lo)


# ---------------------------------------------------------------------------
# Growth bounds
# ---------------------------------------------------------------------------


def _depth_coeffs(h: FormalSeries, k: int) -> list[complex]:
    """Generator coefficients from ``h_1`` out to ``h_k``, nearest first."""
    s = h.center.step
    return [h.coeff(1 + s * d) for d in range(s * (k - 1) + 1)]


def growth_constant(h: FormalSeries, k: int) -> float:
    """``M_k = max |h_j|^{1/j}`` over ``j = 1..k`` at zero.

    At infinity the exponent is the distance from ``h_1`` plus one, i.e.
    ``|h_{1-d}|^{1/(d+1)}`` for ``d = 0..1-k``.
    """
    vals = _depth_coeffs(h, k)
    return max((abs(c) ** (1.0 / (d + 1)) for d, c in enumerate(vals)), default=0.0)


def _first_row_block(h: FormalSeries, k: int) -> np.ndarray:
    vals = _depth_coeffs(h, k)
    return _canonical_upper_inf(np.array(vals, dtype=complex), h.center)


def power_bound(h: FormalSeries, n: int, k: int) -> tuple[float, float]:
    """``(|[<h>^n]^1_k|, size^{2n} M_k^{n+size-1})`` where ``size`` is the
    number of indices from 1 to ``k`` (``k`` at zero, ``2 - k`` at infinity)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_generator(h)
    U = _first_row_block(h, k)
    size = U.shape[0]
    value = abs(np.linalg.matrix_power(U, n)[0, size - 1])
    Mk = growth_constant(h, k)
    return float(value), float(size ** (2 * n) * Mk ** (n + size - 1))


def exp_bound(h: FormalSeries, k: int, tol: Tolerance = DEFAULT_TOL) -> tuple[float, float]:
    """``(|[exp <h>]^1_k|, M_k^{size-1} e^{size^2 M_k})``."""
    _check_generator(h)
    U = _first_row_block(h, k)
    size = U.shape[0]
    value = abs(_expm_upper(U, tol.tail_tol)[0, size - 1])
    Mk = growth_constant(h, k)
    return float(value), float(Mk ** (size - 1) * math.exp(size * size * Mk))
