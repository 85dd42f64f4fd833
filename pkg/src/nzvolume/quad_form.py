"""Positive-definite binary quadratic forms: exact evaluation, lattice
enumeration on levels and bands, automorphism groups, diagonal normalization."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt
from typing import Optional

import numpy as np

from .quadratic import QuadraticNumber
from .slopes import Slope, UnimodularMatrix

# vectorized paths use int64/float64; keep every intermediate below this
_VECTOR_LIMIT = 1 << 50


class NotPositiveDefiniteError(ValueError):
    pass


class RequiresExactShapeError(ValueError):
    pass


@dataclass(frozen=True)
class BinaryQuadraticForm:
    """``A x^2 + B x y + C y^2`` with integer coefficients, positive definite."""

    A: int
    B: int
    C: int

    def __post_init__(self):
        for name in "ABC":
            object.__setattr__(self, name, int(getattr(self, name)))
        if self.A <= 0 or self.discriminant >= 0:
            raise NotPositiveDefiniteError(
                f"form ({self.A},{self.B},{self.C}) is not positive definite"
            )

    @classmethod
    def from_rational(cls, a, b, c) -> tuple["BinaryQuadraticForm", Fraction]:
        """Primitive integer form and scale with ``a x^2 + b xy + c y^2 == scale * form``."""
        a, b, c = Fraction(a), Fraction(b), Fraction(c)
        den = 1
        for t in (a, b, c):
            den = den * t.denominator // gcd(den, t.denominator)
        ia, ib, ic = int(a * den), int(b * den), int(c * den)
        g = gcd(gcd(ia, ib), ic)
        return cls(ia // g, ib // g, ic // g), Fraction(g, den)

    @property
    def discriminant(self) -> int:
        return self.B * self.B - 4 * self.A * self.C

    @property
    def coefficients(self) -> tuple[int, int, int]:
        return (self.A, self.B, self.C)

    def __call__(self, x, y) -> int:
        return self.A * x * x + self.B * x * y + self.C * y * y

    def __str__(self):
        return f"({self.A},{self.B},{self.C})"


def form_from_cusp_shape(c1: QuadraticNumber) -> tuple[BinaryQuadraticForm, Fraction]:
    """Integer form and scale for ``|p + c1 q|^2 = p^2 + 2 Re(c1) pq + |c1|^2 q^2``."""
    if not isinstance(c1, QuadraticNumber):
        raise RequiresExactShapeError("an exact quadratic cusp shape is required")
    if c1.radicand >= 0 or c1.v == 0:
        raise RequiresExactShapeError("cusp shape must be non-real")
    return BinaryQuadraticForm.from_rational(1, 2 * c1.u, c1.norm())


def q_value(f: BinaryQuadraticForm, s) -> int:
    x, y = s
    return f(int(x), int(y))


# -- lattice enumeration -----------------------------------------------------


def _sort_points(xs, ys) -> list[tuple[int, int]]:
    order = np.lexsort((ys, xs))
    return list(zip(xs[order].tolist(), ys[order].tolist()))


def _isqrt_vec(n: np.ndarray) -> np.ndarray:
    """Exact floor square root of nonnegative int64 entries below 2**50."""
    s = np.floor(np.sqrt(n.astype(np.float64))).astype(np.int64)
    s = np.where(s * s > n, s - 1, s)
    s = np.where((s + 1) * (s + 1) <= n, s + 1, s)
    return s


def _level_scalar(f: BinaryQuadraticForm, N: int) -> list[tuple[int, int]]:
    A, B, C = f.coefficients
    D = -f.discriminant
    Y = isqrt(4 * A * N // D)
    pts = []
    for y in range(-Y, Y + 1):
        delta = 4 * A * N - D * y * y
        if delta < 0:
            continue
        s = isqrt(delta)
        if s * s != delta:
            continue
        for t in {s, -s}:
            num = t - B * y
            if num % (2 * A) == 0:
                pts.append((num // (2 * A), y))
    pts.sort()
    return pts


def _level_vector(f: BinaryQuadraticForm, N: int) -> list[tuple[int, int]]:
    A, B, C = f.coefficients
    D = -f.discriminant
    Y = isqrt(4 * A * N // D)
    ys = np.arange(-Y, Y + 1, dtype=np.int64)
    delta = 4 * A * N - D * ys * ys
    s = _isqrt_vec(delta)
    hit = s * s == delta
    ys, s = ys[hit], s[hit]
    xs_list, ys_list = [], []
    for sign in (1, -1):
        if sign == -1:
            keep = s != 0
            yv, sv = ys[keep], -s[keep]
        else:
            yv, sv = ys, s
        num = sv - B * yv
        ok = num % (2 * A) == 0
        xs_list.append(num[ok] // (2 * A))
        ys_list.append(yv[ok])
    return _sort_points(np.concatenate(xs_list), np.concatenate(ys_list))


def lattice_points_on_level(f: BinaryQuadraticForm, N: int) -> list[tuple[int, int]]:
    """All ``(x, y)`` with ``f(x, y) == N`` in lexicographic order.

    For each ``y`` with ``D y^2 <= 4AN`` (``D = 4AC - B^2``) the equation is a
    quadratic in ``x`` with discriminant ``4AN - D y^2``, solved exactly.
    """
    N = int(N)
    if N < 0:
        return []
    if N == 0:
        return [(0, 0)]
    A = f.A
    D = -f.discriminant
    if 4 * A * N + D < _VECTOR_LIMIT and abs(f.B) * isqrt(4 * A * N // D + 1) < _VECTOR_LIMIT:
        Y = isqrt(4 * A * N // D)
        if Y > 24:
            return _level_vector(f, N)
    return _level_scalar(f, N)


def _ceil_isqrt(n: int) -> int:
    if n <= 0:
        return 0
    r = isqrt(n)
    return r if r * r == n else r + 1


def _band_scalar(f, N, m):
    A, B, C = f.coefficients
    D = -f.discriminant
    top = N + m - 1
    Y = isqrt(4 * A * top // D)
    two_a = 2 * A
    pts = []
    for y in range(-Y, Y + 1):
        hi = 4 * A * top - D * y * y
        if hi < 0:
            continue
        s_hi = isqrt(hi)
        s_lo = _ceil_isqrt(4 * A * N - D * y * y)
        by = B * y
        # t = 2Ax + By ranges over [-s_hi, -s_lo] and [s_lo, s_hi]
        ranges = [(-s_hi, s_hi)] if s_lo == 0 else [(-s_hi, -s_lo), (s_lo, s_hi)]
        for lo_t, hi_t in ranges:
            x_lo = -((-(lo_t - by)) // two_a)
            x_hi = (hi_t - by) // two_a
            for x in range(x_lo, x_hi + 1):
                pts.append((x, y))
    pts.sort()
    return pts


def _band_vector(f, N, m):
    A, B, C = f.coefficients
    D = -f.discriminant
    top = N + m - 1
    Y = isqrt(4 * A * top // D)
    two_a = 2 * A
    ys = np.arange(-Y, Y + 1, dtype=np.int64)
    s_hi = _isqrt_vec(4 * A * top - D * ys * ys)
    lo_arg = 4 * A * N - D * ys * ys
    s_lo = _isqrt_vec(np.maximum(lo_arg, 0))
    s_lo = np.where(s_lo * s_lo < lo_arg, s_lo + 1, s_lo)
    by = B * ys
    single = s_lo == 0
    starts, stops, rows = [], [], []
    # negative branch (or the whole interval when s_lo == 0)
    lo_t = -s_hi
    hi_t = np.where(single, s_hi, -s_lo)
    starts.append(-((by - lo_t) // two_a))
    stops.append((hi_t - by) // two_a)
    rows.append(ys)
    # positive branch
    keep = ~single
    starts.append(-((by[keep] - s_lo[keep]) // two_a))
    stops.append((s_hi[keep] - by[keep]) // two_a)
    rows.append(ys[keep])
    start = np.concatenate(starts)
    stop = np.concatenate(stops)
    row = np.concatenate(rows)
    count = np.maximum(stop - start + 1, 0)
    total = int(count.sum())
    if total == 0:
        return []
    yy = np.repeat(row, count)
    offsets = np.arange(total, dtype=np.int64) - np.repeat(np.cumsum(count) - count, count)
    xx = np.repeat(start, count) + offsets
    return _sort_points(xx, yy)


def lattice_points_in_band(f: BinaryQuadraticForm, N: int, m: int) -> list[tuple[int, int]]:
    """All ``(x, y)`` with ``N <= f(x, y) < N + m``, lexicographically ordered."""
    N, m = int(N), int(m)
    if m < 1:
        raise ValueError("band width m must be a positive integer")
    N = max(N, 0)
    top = N + m - 1
    if top < 0:
        return []
    A = f.A
    D = -f.discriminant
    if 4 * A * top + D < _VECTOR_LIMIT and abs(f.B) * isqrt(4 * A * top // D + 1) < _VECTOR_LIMIT:
        if isqrt(4 * A * top // D) > 24:
            return _band_vector(f, N, m)
    return _band_scalar(f, N, m)


def primitive_only(points) -> list[tuple[int, int]]:
    return [pt for pt in points if gcd(pt[0], pt[1]) == 1]


# -- automorphisms -----------------------------------------------------------


def automorphisms(f: BinaryQuadraticForm) -> list[UnimodularMatrix]:
    """Every integer ``T`` with ``det T = +-1`` and ``f(T(x, y)) == f(x, y)``.

    Columns ``(a, c)`` and ``(b, d)`` must represent ``A`` and ``C``; the
    cross term is then checked directly.
    """
    A, B, C = f.coefficients
    first = lattice_points_on_level(f, A)
    second = lattice_points_on_level(f, C)
    out = []
    for a, c in first:
        for b, d in second:
            if abs(a * d - b * c) != 1:
                continue
            if 2 * A * a * b + B * (a * d + b * c) + 2 * C * c * d == B:
                out.append(UnimodularMatrix(a, b, c, d))
    out.sort()
    return out


# -- diagonal normalization --------------------------------------------------


@dataclass(frozen=True)
class DiagonalizationResult:
    diagonalizable: bool
    d: Optional[int]
    matrix: Optional[UnimodularMatrix]
    discriminant: Fraction
    reason: str = ""


def _complete_basis(c: int, d: int) -> tuple[int, int]:
    """Some ``(a, b)`` with ``a d - b c == 1`` for coprime ``(c, d)``."""
    if c == 0:
        return d, 0
    a = pow(d, -1, abs(c)) if abs(c) > 1 else 0
    if abs(c) == 1:
        return 0, -c
    b = (a * d - 1) // c
    return a, b


def normalize_to_diagonal(c1: QuadraticNumber) -> DiagonalizationResult:
    """Look for a determinant-1 basis change taking ``c1`` to ``sqrt(-d')``.

    With ``M = [[a, b], [c, d]]`` the new shape has imaginary part
    ``Im(c1) / N`` where ``N = |c c1 + d|^2``, so ``d' = Im(c1)^2 / N^2`` and
    only the finitely many ``(c, d)`` with ``N <= Im(c1)`` can produce an
    integer ``d' >= 1``.  For each, ``(a, b)`` is unique up to adding
    multiples of ``(c, d)``, and the real part vanishes for at most one shift.
    """
    from .nz_volume import basis_change_cusp_shape

    form, scale = form_from_cusp_shape(c1)
    im2 = c1.imag_squared()
    rational_disc = (2 * c1.u) ** 2 - 4 * c1.norm()
    # largest integer level whose rational value N satisfies N^2 <= Im(c1)^2
    bound_sq = im2 / (scale * scale)
    top = isqrt(bound_sq.numerator // bound_sq.denominator)
    best = None
    if top >= 1:
        for x, y in primitive_only(lattice_points_in_band(form, 1, top)):
            # (p, q) = (d, c) in the form |p + c1 q|^2
            dd, cc = x, y
            N = scale * form(dd, cc)
            dprime = im2 / (N * N)
            if dprime.denominator != 1:
                continue
            a, b = _complete_basis(cc, dd)
            real_num = a * cc * c1.norm() + (a * dd + b * cc) * c1.u + b * dd
            shift = -real_num / N
            if shift.denominator != 1:
                continue
            k = int(shift)
            M = UnimodularMatrix(a + k * cc, b + k * dd, cc, dd)
            if cc < 0 or (cc == 0 and dd < 0):
                M = -M  # same Mobius map
            target = QuadraticNumber.imaginary(0, 1, int(dprime))
            if basis_change_cusp_shape(c1, M) != target:
                continue
            # smallest d', then the identity, then the smallest entries
            size = max(abs(M.a), abs(M.b), abs(M.c), abs(M.d))
            key = (int(dprime), M != UnimodularMatrix.identity(), size, M)
            if best is None or key < best:
                best = key
    if best is None:
        return DiagonalizationResult(
            False,
            None,
            None,
            rational_disc,
            f"|p + c1 q|^2 has discriminant {rational_disc}; no determinant-1 basis change "
            f"brings c1 to sqrt(-d') with d' a positive integer",
        )
    return DiagonalizationResult(True, best[0], best[-1], rational_disc)


def form_points_as_slopes(points) -> list[Slope]:
    return [Slope(x, y) for x, y in points]
