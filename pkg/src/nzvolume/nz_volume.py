"""Truncated Neumann-Zagier volume function and its chart transforms.

For a 1-cusped manifold with potential ``v = c1 u + c3 u^3 + c5 u^5 + ...``
the volume defect of the ``(p, q)`` filling is a series in ``A = p + c1 q``:

    Theta(p, q) = -Im(c1) pi^2 / |A|^2
                  + 1/4 Im[ 1/2 c3 w^4
                            + 1/3 (2 c3^2 q/A - c5) w^6
                            + 1/4 (12 c3^3 q^2/A^2 - 8 c3 c5 q/A + c7) w^8 + ... ]

with ``w = 2 pi / A``.  "Term k" means the k-th homogeneous block (degree
``-2k`` in ``(p, q)``); term k uses ``c3 ... c_{2k-1}``.  Blocks past the
fourth are not known in closed form here and must be supplied per manifold
through ``block_overrides``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import mpmath

from .precision import (
    DEFAULT_PRECISION,
    exact_to_mpf,
    pi_constants,
    portable,
    working_context,
)
from .quadratic import QuadraticNumber
from .slopes import Slope, UnimodularMatrix

# rough per-block operation count feeding the rounding bound
_OPS_PER_BLOCK = 48

KNOWN_BLOCKS = 4


class NZVolumeError(ValueError):
    """Base class for volume-engine errors."""


class InvalidInputError(NZVolumeError):
    pass


class InsufficientCoefficientsError(NZVolumeError):
    pass


class MissingDataError(NZVolumeError):
    pass


class InvalidMatrixError(NZVolumeError):
    pass


class CoefficientWarning(UserWarning):
    pass


# A block evaluator receives (ctx, p, q, A, coeffs) with p, q ctx reals, A the
# ctx complex p + c1 q and coeffs a dict {index: ctx complex}; returns a ctx real.
BlockEvaluator = Callable


@dataclass(frozen=True)
class Coefficient:
    index: int
    value: mpmath.mpc

    def __post_init__(self):
        if self.index < 3 or self.index % 2 == 0:
            raise ValueError(f"coefficient index must be an odd integer >= 3, got {self.index}")
        v = self.value
        if hasattr(v, "_mpf_"):
            v = mpmath.mp.make_mpc((v._mpf_, mpmath.libmp.fzero))
        elif not hasattr(v, "_mpc_"):
            # python floats/complex convert exactly at 53 bits
            v = mpmath.mpc(complex(v))
        object.__setattr__(self, "value", portable(v))


@dataclass(frozen=True)
class ManifoldNZData:
    """Neumann-Zagier data for a 1-cusped manifold.

    ``coefficients`` holds ``c3, c5, ...`` consecutively (missing ones must be
    supplied as explicit zeros).  ``block_overrides`` maps a term index
    ``k >= 2`` to a custom evaluator for that block.
    """

    name: str
    cusp_shape: QuadraticNumber
    coefficients: tuple = ()
    base_volume: Optional[mpmath.mpf] = None
    block_overrides: tuple = field(default=(), compare=False)
    coefficient_text: tuple = field(default=(), compare=False, repr=False)
    base_volume_text: Optional[str] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        c1 = self.cusp_shape
        if not isinstance(c1, QuadraticNumber):
            raise InvalidInputError("cusp_shape must be an exact QuadraticNumber")
        if c1.radicand >= 0 or c1.v <= 0:
            raise InvalidInputError("cusp shape must have positive imaginary part")
        coeffs = tuple(
            c if isinstance(c, Coefficient) else Coefficient(*c) for c in self.coefficients
        )
        for k, c in enumerate(coeffs):
            if c.index != 3 + 2 * k:
                raise InvalidInputError(
                    "coefficient indices must be consecutive odd integers starting at 3"
                )
        object.__setattr__(self, "coefficients", coeffs)
        if self.base_volume is not None and not hasattr(self.base_volume, "_mpf_"):
            raise InvalidInputError("base_volume must be an mpmath real")
        if self.base_volume is not None:
            object.__setattr__(self, "base_volume", portable(self.base_volume))
        overrides = self.block_overrides
        if isinstance(overrides, dict):
            overrides = tuple(sorted(overrides.items()))
        for k, _ in overrides:
            if k < 2:
                raise InvalidInputError("the leading block cannot be overridden")
        object.__setattr__(self, "block_overrides", tuple(overrides))
        if coeffs and all(c.value == 0 for c in coeffs):
            warnings.warn(
                f"{self.name}: all higher NZ coefficients are zero; a genuine hyperbolic "
                "manifold has some nonzero c_(2i-1), i >= 2",
                CoefficientWarning,
                stacklevel=3,
            )

    @property
    def max_terms(self) -> int:
        return 1 + len(self.coefficients)

    def coefficient(self, index: int):
        k = (index - 3) // 2
        if 0 <= k < len(self.coefficients) and index % 2 == 1:
            return self.coefficients[k].value
        return None


@dataclass(frozen=True)
class VolumeValue:
    """A truncated value with an error radius.

    ``error_radius`` is infinite when the ratio heuristic flags the series as
    non-convergent at this slope; ``ratio`` is the estimated convergence ratio.
    """

    value: mpmath.mpf
    error_radius: mpmath.mpf
    terms_used: int
    ratio: mpmath.mpf = field(default=mpmath.mpf(0))
    precision: int = DEFAULT_PRECISION

    @property
    def converged(self) -> bool:
        return mpmath.isfinite(self.error_radius)

    def overlaps(self, other: "VolumeValue", tolerance=0) -> bool:
        """Interval semantics: ``|a - b| <= tolerance + err_a + err_b``."""
        if not (self.converged and other.converged):
            return True
        ctx = working_context(max(self.precision, other.precision))
        diff = abs(ctx.convert(self.value) - ctx.convert(other.value))
        return diff <= ctx.convert(tolerance) + ctx.convert(self.error_radius) + ctx.convert(
            other.error_radius
        )

    def __float__(self):
        return float(self.value)


def _coerce_point(x):
    """Exact rationals stay exact; everything else is treated as a real number."""
    if isinstance(x, bool):
        raise InvalidInputError("booleans are not coordinates")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, Fraction):
        return x
    return x


def _point(s, q=None):
    if q is not None:
        return _coerce_point(s), _coerce_point(q)
    if isinstance(s, Slope):
        return Fraction(s.p), Fraction(s.q)
    p, q = s
    return _coerce_point(p), _coerce_point(q)


class ThetaEvaluator:
    """Prepared evaluation of the volume series for one manifold at one precision.

    Instances hold only context-bound constants and may be reused for many
    slopes; they are cheap to build.
    """

    def __init__(self, m: ManifoldNZData, prec: int = DEFAULT_PRECISION):
        self.manifold = m
        self.prec = int(prec)
        ctx = self.ctx = working_context(self.prec)
        self.pi, self.pi2, self.twopi = pi_constants(self.prec)
        c1 = m.cusp_shape
        self.c1 = c1.to_mp(ctx)
        self.im_c1 = self.c1.imag
        self.re_c1_exact = c1.u
        self.abs2_c1_exact = c1.norm()
        self.lead_numerator = -self.im_c1 * self.pi2
        self.coeffs = {c.index: ctx.convert(c.value) for c in m.coefficients}
        self.overrides = dict(m.block_overrides)
        self.eps = ctx.ldexp(ctx.mpf(1), 1 - self.prec)

    # -- building blocks ----------------------------------------------------

    def _available(self, k: int) -> bool:
        if k == 1:
            return True
        if k in self.overrides:
            return True
        return k <= KNOWN_BLOCKS and (2 * k - 1) in self.coeffs

    def _norm2(self, p, q, pm, qm, A):
        if isinstance(p, Fraction) and isinstance(q, Fraction):
            Q = p * p + 2 * self.re_c1_exact * p * q + self.abs2_c1_exact * q * q
            return exact_to_mpf(self.ctx, Q)
        return A.real * A.real + A.imag * A.imag

    def blocks(self, s, count: int, q=None) -> list:
        """The first ``count`` blocks at the point ``s`` (a Slope or pair)."""
        p, q = _point(s, q)
        if p == 0 and q == 0:
            raise InvalidInputError("the zero slope has no volume")
        ctx = self.ctx
        pm = exact_to_mpf(ctx, p)
        qm = exact_to_mpf(ctx, q)
        A = pm + self.c1 * qm
        norm2 = self._norm2(p, q, pm, qm, A)
        out = [self.lead_numerator / norm2]
        if count == 1:
            return out
        inv = 1 / A
        w = self.twopi * inv
        qa = qm * inv
        w2 = w * w
        w4 = w2 * w2
        c = self.coeffs
        for k in range(2, count + 1):
            if k in self.overrides:
                out.append(ctx.convert(self.overrides[k](ctx, pm, qm, A, c)))
                continue
            if k == 2:
                out.append((c[3] * w4).imag / 8)
            elif k == 3:
                w6 = w4 * w2
                out.append(((2 * c[3] * c[3] * qa - c[5]) * w6).imag / 12)
            elif k == 4:
                w8 = w4 * w4
                c3, c5 = c[3], c[5]
                bracket = 12 * c3 * c3 * c3 * qa * qa - 8 * c3 * c5 * qa + c[7]
                out.append((bracket * w8).imag / 16)
            else:
                raise InsufficientCoefficientsError(
                    f"term {k} needs a block evaluator; only {KNOWN_BLOCKS} blocks are built in"
                )
        return out

    def check_terms(self, terms: int):
        if int(terms) != terms or terms < 1:
            raise InvalidInputError("terms must be a positive integer")
        if terms > self.manifold.max_terms and not all(
            k in self.overrides for k in range(self.manifold.max_terms + 1, terms + 1)
        ):
            raise InsufficientCoefficientsError(
                f"{terms} terms requested but {self.manifold.name} supplies "
                f"{len(self.manifold.coefficients)} higher coefficient(s)"
            )
        for k in range(2, terms + 1):
            if not self._available(k):
                raise InsufficientCoefficientsError(
                    f"term {k} of {self.manifold.name} is not evaluable"
                )

    def _tail(self, included: list, omitted):
        ctx = self.ctx
        last = abs(included[-1])
        if omitted is not None:
            nxt = abs(omitted)
            if last == 0:
                ratio = ctx.zero if nxt == 0 else ctx.inf
            else:
                ratio = nxt / last
        else:
            # first omitted block is not computable: extrapolate geometrically
            if len(included) < 2:
                return ctx.inf, ctx.inf
            prev = abs(included[-2])
            if prev == 0:
                ratio = ctx.zero if last == 0 else ctx.inf
            else:
                ratio = last / prev
            nxt = last * ratio
        if ratio >= 1:
            return ctx.inf, ratio
        return nxt / (1 - ratio), ratio

    def evaluate(self, s, terms: int, q=None) -> VolumeValue:
        self.check_terms(terms)
        extra = 1 if self._available(terms + 1) else 0
        bl = self.blocks(s, terms + extra, q)
        included = bl[:terms]
        omitted = bl[terms] if extra else None
        value = self.ctx.fsum(included) if terms > 1 else included[0]
        tail, ratio = self._tail(included, omitted)
        rounding = self.eps * _OPS_PER_BLOCK * terms * self.ctx.fsum(abs(b) for b in included)
        return VolumeValue(
            value=portable(value),
            error_radius=portable(tail + rounding),
            terms_used=terms,
            ratio=portable(self.ctx.convert(ratio)),
            precision=self.prec,
        )


# -- public operations -------------------------------------------------------


def leading_term(m: ManifoldNZData, s, prec: int = DEFAULT_PRECISION):
    """``-pi^2 Im(c1) / |p + c1 q|^2`` at working precision."""
    ev = ThetaEvaluator(m, prec)
    return portable(ev.blocks(s, 1)[0])


def theta_truncated(m: ManifoldNZData, s, terms: int, prec: int = DEFAULT_PRECISION) -> VolumeValue:
    """Partial sum of the first ``terms`` blocks with a ratio-test error radius."""
    return ThetaEvaluator(m, prec).evaluate(s, terms)


def tail_estimate(m: ManifoldNZData, s, terms: int, prec: int = DEFAULT_PRECISION):
    """Geometric tail bound ``|first omitted| / (1 - rho)``; ``inf`` when non-convergent.

    When the first omitted block cannot be evaluated (no coefficient for it),
    it is extrapolated as ``|last| * rho`` with ``rho = |last| / |previous|``.
    """
    ev = ThetaEvaluator(m, prec)
    ev.check_terms(terms)
    extra = 1 if ev._available(terms + 1) else 0
    bl = ev.blocks(s, terms + extra)
    tail, _ = ev._tail(bl[:terms], bl[terms] if extra else None)
    return portable(tail)


def filled_volume(m: ManifoldNZData, s, terms: int, prec: int = DEFAULT_PRECISION) -> VolumeValue:
    """``vol(M) + Theta(p, q)`` with the error radius carried over."""
    if m.base_volume is None:
        raise MissingDataError(f"{m.name} has no base volume; supply one in the manifold file")
    th = theta_truncated(m, s, terms, prec)
    ctx = working_context(prec)
    total = ctx.convert(m.base_volume) + ctx.convert(th.value)
    err = ctx.convert(th.error_radius) + abs(total) * ctx.ldexp(ctx.mpf(1), 1 - prec)
    return VolumeValue(portable(total), portable(err), terms, th.ratio, prec)


def chart_psi(m: ManifoldNZData, x, y, terms: int, prec: int = DEFAULT_PRECISION) -> VolumeValue:
    """``Psi(x, y) = Theta(x/y, 1/y)``, the chart at infinity."""
    if y == 0:
        raise InvalidInputError("chart_psi is undefined on y = 0")
    x, y = _coerce_point(x), _coerce_point(y)
    if isinstance(x, Fraction) and isinstance(y, Fraction):
        return theta_truncated(m, (x / y, 1 / y), terms, prec)
    ctx = working_context(prec)
    xm, ym = exact_to_mpf(ctx, x), exact_to_mpf(ctx, y)
    return theta_truncated(m, (xm / ym, 1 / ym), terms, prec)


def chart_term_identity_check(n: int, j: int, xp, yp, d: int = 1, prec: int = DEFAULT_PRECISION):
    """``|LHS - RHS|`` for the chart rewrite of a single series term.

    LHS is ``Im(y^j conj(A)^(2n+j)) / |A|^(4n+2j)`` at ``(x, y) = (x'/y', 1/y')``
    with ``A = x + sqrt(-d) y``; RHS is
    ``Im(y'^(2n) (x' - sqrt(-d))^(2n+j)) / (x'^2 + d)^(2n+j)``.
    """
    if yp == 0:
        raise InvalidInputError("y' must be nonzero")
    if n < 0 or j < 0:
        raise InvalidInputError("n and j must be nonnegative")
    ctx = working_context(prec)
    xp = exact_to_mpf(ctx, _coerce_point(xp))
    yp = exact_to_mpf(ctx, _coerce_point(yp))
    rd = ctx.sqrt(d)
    e = 2 * n + j
    x = xp / yp
    y = 1 / yp
    abar = ctx.mpc(x, -rd * y)
    lhs = (y**j * abar**e).imag / (x * x + d * y * y) ** e
    rhs = (yp ** (2 * n) * ctx.mpc(xp, -rd) ** e).imag / (xp * xp + d) ** e
    return portable(abs(lhs - rhs))


def basis_change_cusp_shape(c1: QuadraticNumber, M) -> QuadraticNumber:
    """Cusp shape ``(a c1 + b) / (c c1 + d)`` after a determinant-1 change of basis."""
    if not isinstance(M, UnimodularMatrix):
        try:
            M = UnimodularMatrix.from_rows(M)
        except ValueError as exc:
            raise InvalidMatrixError(str(exc)) from None
    if M.det != 1:
        raise InvalidMatrixError(f"basis change needs determinant 1, got {M.det}")
    return (M.a * c1 + M.b) / (M.c * c1 + M.d)
