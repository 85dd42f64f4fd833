"""Exact arithmetic in quadratic fields Q(sqrt(D)).

A :class:`QuadraticNumber` is ``u + v*sqrt(D)`` with rational ``u, v`` and a
square-free integer radicand ``D``.  Negative radicands give imaginary
quadratic numbers such as cusp shapes ``u + v*sqrt(-d)``; positive radicands
are used by the obstruction checks, whose coefficients live in Q(sqrt(d)).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from numbers import Rational


def squarefree_decomposition(n: int) -> tuple[int, int]:
    """Return ``(s, r)`` with ``n == s*s*r`` and ``r`` square-free (sign kept in ``r``)."""
    if n == 0:
        raise ValueError("radicand must be nonzero")
    sign = -1 if n < 0 else 1
    n = abs(n)
    s = 1
    f = 2
    while f * f <= n:
        while n % (f * f) == 0:
            n //= f * f
            s *= f
        f += 1
    return s, sign * n


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


@dataclass(frozen=True, init=False)
class QuadraticNumber:
    """``u + v*sqrt(D)`` kept in a unique normal form.

    ``D`` is square-free; when ``v == 0`` the radicand is stored as 1 so that
    rationals compare equal regardless of the field they came from.
    """

    u: Fraction
    v: Fraction
    radicand: int

    def __init__(self, u=0, v=0, radicand: int = 1):
        u = _frac(u)
        v = _frac(v)
        radicand = int(radicand)
        s, r = squarefree_decomposition(radicand)
        v = v * s
        if r == 1:
            u, v = u + v, Fraction(0)
        if v == 0:
            r = 1
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "radicand", r)

    @classmethod
    def imaginary(cls, u, v, d: int) -> "QuadraticNumber":
        """The imaginary quadratic number ``u + v*sqrt(-d)`` for ``d > 0``."""
        if int(d) <= 0:
            raise ValueError("d must be a positive integer")
        return cls(u, v, -int(d))

    # -- field bookkeeping -------------------------------------------------

    @property
    def d(self) -> int:
        """Positive square-free ``d`` for numbers written as ``u + v*sqrt(-d)``."""
        return -self.radicand if self.radicand < 0 else self.radicand

    @property
    def is_rational(self) -> bool:
        return self.v == 0

    @property
    def is_real(self) -> bool:
        return self.radicand > 0

    def _common(self, other) -> tuple["QuadraticNumber", "QuadraticNumber", int]:
        if not isinstance(other, QuadraticNumber):
            other = QuadraticNumber(_frac(other))
        if self.v == 0:
            return self, other, other.radicand
        if other.v == 0 or other.radicand == self.radicand:
            return self, other, self.radicand
        raise ValueError(
            f"cannot combine numbers from Q(sqrt({self.radicand})) and Q(sqrt({other.radicand}))"
        )

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        a, b, r = self._common(other)
        return QuadraticNumber(a.u + b.u, a.v + b.v, r)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticNumber(-self.u, -self.v, self.radicand)

    def __sub__(self, other):
        return self + (-QuadraticNumber._coerce(other))

    def __rsub__(self, other):
        return QuadraticNumber._coerce(other) - self

    def __mul__(self, other):
        a, b, r = self._common(other)
        return QuadraticNumber(a.u * b.u + a.v * b.v * r, a.u * b.v + a.v * b.u, r)

    __rmul__ = __mul__

    def conjugate(self) -> "QuadraticNumber":
        """Galois conjugate ``u - v*sqrt(D)``; complex conjugation when ``D < 0``."""
        return QuadraticNumber(self.u, -self.v, self.radicand)

    def norm(self) -> Fraction:
        """Field norm ``u^2 - D v^2`` (equals ``|z|^2`` for imaginary fields)."""
        return self.u * self.u - self.radicand * self.v * self.v

    def inverse(self) -> "QuadraticNumber":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in quadratic field")
        c = self.conjugate()
        return QuadraticNumber(c.u / n, c.v / n, self.radicand)

    def __truediv__(self, other):
        return self * QuadraticNumber._coerce(other).inverse()

    def __rtruediv__(self, other):
        return QuadraticNumber._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result = QuadraticNumber(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    @staticmethod
    def _coerce(x) -> "QuadraticNumber":
        return x if isinstance(x, QuadraticNumber) else QuadraticNumber(_frac(x))

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = QuadraticNumber(other)
        if not isinstance(other, QuadraticNumber):
            return NotImplemented
        return (self.u, self.v, self.radicand) == (other.u, other.v, other.radicand)

    def __hash__(self):
        return hash((self.u, self.v, self.radicand))

    def is_zero(self) -> bool:
        return self.u == 0 and self.v == 0

    # -- views -------------------------------------------------------------

    @property
    def real(self) -> Fraction:
        """Exact real part; only defined for imaginary fields (or rationals)."""
        if self.radicand > 1:
            raise ValueError("real part of a real-quadratic number is irrational")
        return self.u

    @property
    def imag_coefficient(self) -> Fraction:
        """``v`` such that ``Im(z) = v*sqrt(d)`` for imaginary ``z``."""
        return self.v if self.radicand < 0 else Fraction(0)

    def imag_squared(self) -> Fraction:
        """Exact ``Im(z)^2 = v^2 d``."""
        if self.radicand > 0:
            return Fraction(0)
        return self.v * self.v * self.d

    def to_mp(self, ctx):
        """Render at the precision of the mpmath context ``ctx`` (each part rounded once)."""
        from .precision import exact_to_mpf, guarded_sqrt

        u = exact_to_mpf(ctx, self.u)
        if self.v == 0:
            return u
        w = guarded_sqrt(ctx, self.v * self.v * abs(self.radicand))
        if self.v < 0:
            w = -w
        if self.radicand < 0:
            return ctx.mpc(u, w)
        return u + w

    def __repr__(self):
        if self.v == 0:
            return f"QuadraticNumber({self.u})"
        return f"QuadraticNumber({self.u} + {self.v}*sqrt({self.radicand}))"

    def __str__(self):
        if self.v == 0:
            return str(self.u)
        return f"{self.u} + {self.v}*sqrt({self.radicand})"


def is_perfect_square(n: int) -> bool:
    return n >= 0 and isqrt(n) ** 2 == n
