"""The four example manifolds with their printed two-term expansions.

``c3`` is never typed in by hand.  It is recovered from the printed second
term by exact polynomial matching against the series block
``(1/8) Im(c3 (2 pi / A)^4)``; the printed formula itself is evaluated by an
independent closed-form routine for cross-checking the generic engine.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable

import mpmath
import sympy as sp

from .nz_volume import Coefficient, InvalidInputError, ManifoldNZData
from .precision import DEFAULT_PRECISION, GUARD_BITS, working_context
from .quadratic import QuadraticNumber


class UnknownPresetError(KeyError):
    pass


class InconsistentTermError(ValueError):
    """The printed term does not have the shape of the degree -4 series block."""


_p, _q = sp.symbols("p q", real=True)

# cusp shape (u, v, d) for u + v sqrt(-d), and the printed second term in p, q
_PRINTED = {
    "figure8": (
        (0, 2, 3),
        "4*sqrt(3)*(p**4 - 72*p**2*q**2 + 144*q**4)*pi**4 / (3*(p**2 + 12*q**2)**4)",
    ),
    "figure8-sister": (
        ("1/2", "1/2", 3),
        "pi**4*((2*p + q)**4 - 18*q**2*(2*p + q)**2 + 9*q**4) / (64*sqrt(3)*(p**2 + p*q + q**2)**4)",
    ),
    "whitehead-infty": (
        (0, 2, 1),
        "pi**4*(p**4 - 24*p**2*q**2 + 16*q**4) / (3*(p**2 + 4*q**2)**4)",
    ),
    "whitehead-sister-infty": (
        (0, 1, 1),
        "pi**4*(p**4 - 12*p**3*q - 6*p**2*q**2 + 12*p*q**3 + q**4) / (24*(p**2 + q**2)**4)",
    ),
}

PRESET_NAMES = tuple(_PRINTED)


# Closed forms of the printed expansions, written out independently of the
# engine.  Each takes (ctx, p, q) with ctx reals and returns the two-term sum.


def _figure8(ctx, p, q):
    s3, pi = ctx.sqrt(3), ctx.pi
    den = p**2 + 12 * q**2
    return -2 * s3 * pi**2 / den + 4 * s3 * (p**4 - 72 * p**2 * q**2 + 144 * q**4) * pi**4 / (
        3 * den**4
    )


def _figure8_sister(ctx, p, q):
    s3, pi = ctx.sqrt(3), ctx.pi
    den = p**2 + p * q + q**2
    t = 2 * p + q
    return -s3 * pi**2 / (2 * den) + pi**4 * (t**4 - 18 * q**2 * t**2 + 9 * q**4) / (
        64 * s3 * den**4
    )


def _whitehead(ctx, p, q):
    pi = ctx.pi
    den = p**2 + 4 * q**2
    return -2 * pi**2 / den + pi**4 * (p**4 - 24 * p**2 * q**2 + 16 * q**4) / (3 * den**4)


def _whitehead_sister(ctx, p, q):
    pi = ctx.pi
    den = p**2 + q**2
    num = p**4 - 12 * p**3 * q - 6 * p**2 * q**2 + 12 * p * q**3 + q**4
    return -(pi**2) / den + pi**4 * num / (24 * den**4)


_CLOSED_FORMS: dict[str, Callable] = {
    "figure8": _figure8,
    "figure8-sister": _figure8_sister,
    "whitehead-infty": _whitehead,
    "whitehead-sister-infty": _whitehead_sister,
}


@dataclass(frozen=True)
class PresetEntry:
    name: str
    manifold: ManifoldNZData
    example_formula: Callable

    @property
    def cusp_shape(self) -> QuadraticNumber:
        return self.manifold.cusp_shape


def _check_name(name: str):
    if name not in _PRINTED:
        raise UnknownPresetError(
            f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}"
        )


def cusp_shape_of(name: str) -> QuadraticNumber:
    _check_name(name)
    u, v, d = _PRINTED[name][0]
    return QuadraticNumber.imaginary(u, v, d)


def printed_second_term(name: str) -> sp.Expr:
    _check_name(name)
    return sp.sympify(_PRINTED[name][1], locals={"p": _p, "q": _q})


def solve_c3(c1: QuadraticNumber, second_term: sp.Expr) -> sp.Expr:
    """Exact ``c3`` making ``(1/8) Im(c3 (2 pi/A)^4)`` equal ``second_term``.

    Multiplying by ``|A|^8 / pi^4`` turns the identity into
    ``2 Im(c3 conj(A)^4) == P(p, q)`` for a binary quartic ``P``; matching its
    five coefficients gives a linear system in ``(Re c3, Im c3)`` that must be
    consistent with a unique solution.
    """
    a, b = sp.symbols("a b", real=True)
    u, v = sp.Rational(c1.u), sp.Rational(c1.v)
    im_c1 = v * sp.sqrt(c1.d)
    abar = _p + u * _q - sp.I * im_c1 * _q
    norm2 = sp.expand(_p**2 + 2 * u * _p * _q + (u**2 + im_c1**2) * _q**2)
    power = sp.expand(abar**4)
    re4, im4 = sp.re(power), sp.im(power)
    lhs = sp.expand(2 * (a * im4 + b * re4))
    target = sp.cancel(sp.simplify(second_term * norm2**4 / sp.pi**4))
    if not target.is_polynomial(_p, _q):
        raise InconsistentTermError("printed term is not a quartic over |A|^8")
    residual = sp.Poly(sp.expand(lhs - target), _p, _q)
    equations = [sp.nsimplify(e) if e.is_number else e for e in residual.coeffs()]
    solution = sp.solve(equations, [a, b], dict=True)
    if len(solution) != 1 or set(solution[0]) != {a, b}:
        raise InconsistentTermError(
            "printed second term does not match the shape Im(c3 (2 pi / A)^4) / 8"
        )
    sol = solution[0]
    # re-substitute: every monomial coefficient must vanish exactly
    check = sp.expand(sp.simplify((lhs - target).subs(sol)))
    if check != 0:
        raise InconsistentTermError("matching system is inconsistent")
    return sp.nsimplify(sp.simplify(sol[a])) + sp.I * sp.nsimplify(sp.simplify(sol[b]))


@functools.lru_cache(maxsize=None)
def derive_c3_exact(name: str) -> sp.Expr:
    return solve_c3(cusp_shape_of(name), printed_second_term(name))


def derive_c3(name: str, prec: int = DEFAULT_PRECISION):
    """``c3`` for a preset as an mpmath complex at ``prec`` bits plus a guard word."""
    exact = derive_c3_exact(name)
    digits = int((prec + GUARD_BITS) * 0.30103) + 5
    re_, im_ = (sp.re(exact), sp.im(exact))
    ctx = working_context(prec + GUARD_BITS)
    val = ctx.mpc(
        ctx.mpf(str(sp.N(re_, digits))), ctx.mpf(str(sp.N(im_, digits)))
    )
    return mpmath.mp.make_mpc(val._mpc_)


def preset(name: str, prec: int = DEFAULT_PRECISION) -> PresetEntry:
    """The named example manifold with derived ``c3`` and no base volume."""
    _check_name(name)
    manifold = ManifoldNZData(
        name=name,
        cusp_shape=cusp_shape_of(name),
        coefficients=(Coefficient(3, derive_c3(name, prec)),),
    )
    return PresetEntry(name, manifold, functools.partial(example_theta_two_terms, name))


def example_theta_two_terms(name: str, s, prec: int = DEFAULT_PRECISION):
    """The printed two-term expansion evaluated verbatim at ``s``."""
    _check_name(name)
    p, q = s
    if p == 0 and q == 0:
        raise InvalidInputError("the zero slope has no volume")
    ctx = working_context(prec)
    val = _CLOSED_FORMS[name](ctx, ctx.convert(p), ctx.convert(q))
    return mpmath.mp.make_mpf(val._mpf_)
