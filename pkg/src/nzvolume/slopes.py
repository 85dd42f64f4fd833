"""Integer lattice primitives: slopes and unimodular matrices."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd


@dataclass(frozen=True, order=True)
class Slope:
    """An integer pair ``(p, q)``.

    As a Dehn-filling slope it must be primitive; as a lattice point any pair
    is allowed.  ``(p, q)`` and ``(-p, -q)`` name the same filling.
    """

    p: int
    q: int

    def __post_init__(self):
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "q", int(self.q))

    @classmethod
    def parse(cls, text: str) -> "Slope":
        """Parse ``"p/q"`` (or ``"p,q"``)."""
        sep = "/" if "/" in text else ","
        parts = text.split(sep)
        if len(parts) != 2:
            raise ValueError(f"bad slope syntax {text!r}; expected p/q")
        return cls(int(parts[0].strip()), int(parts[1].strip()))

    @property
    def is_zero(self) -> bool:
        return self.p == 0 and self.q == 0

    @property
    def is_primitive(self) -> bool:
        return gcd(self.p, self.q) == 1

    def __neg__(self) -> "Slope":
        return Slope(-self.p, -self.q)

    def canonical(self) -> "Slope":
        """Representative of ``{s, -s}`` with ``q > 0``, or ``q == 0`` and ``p > 0``."""
        if self.q < 0 or (self.q == 0 and self.p < 0):
            return -self
        return self

    def height(self) -> int:
        return max(abs(self.p), abs(self.q))

    def __iter__(self):
        yield self.p
        yield self.q

    def __str__(self):
        return f"{self.p}/{self.q}"


def primitive_slopes(bound: int) -> list[Slope]:
    """Canonical primitive slopes with ``max(|p|,|q|) <= bound``, sorted."""
    out = []
    for q in range(0, bound + 1):
        for p in range(-bound, bound + 1):
            if q == 0 and p <= 0:
                continue
            if gcd(p, q) == 1:
                out.append(Slope(p, q))
    out.sort()
    return out


@dataclass(frozen=True, order=True)
class UnimodularMatrix:
    """Integer matrix ``[[a, b], [c, d]]`` acting on columns: ``(x, y) -> (ax+by, cx+dy)``."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if abs(self.det) != 1:
            raise ValueError(f"matrix {self.rows()} has determinant {self.det}, expected +-1")

    @classmethod
    def from_rows(cls, rows) -> "UnimodularMatrix":
        (a, b), (c, d) = rows
        return cls(int(a), int(b), int(c), int(d))

    @classmethod
    def identity(cls) -> "UnimodularMatrix":
        return cls(1, 0, 0, 1)

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def is_proper(self) -> bool:
        return self.det == 1

    def rows(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return ((self.a, self.b), (self.c, self.d))

    def __matmul__(self, other: "UnimodularMatrix") -> "UnimodularMatrix":
        return UnimodularMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __neg__(self) -> "UnimodularMatrix":
        return UnimodularMatrix(-self.a, -self.b, -self.c, -self.d)

    def inverse(self) -> "UnimodularMatrix":
        e = self.det  # +-1, so 1/e == e
        return UnimodularMatrix(e * self.d, -e * self.b, -e * self.c, e * self.a)

    def apply(self, s) -> Slope:
        x, y = s
        return Slope(self.a * x + self.b * y, self.c * x + self.d * y)

    def __str__(self):
        return f"[[{self.a},{self.b}],[{self.c},{self.d}]]"


def rational_height(x) -> int:
    """``max(|num|, |den|)`` of a rational in lowest terms (0 counts as 0/1)."""
    x = Fraction(x)
    return max(abs(x.numerator), abs(x.denominator))
