"""Mechanical checks: the coefficient obstruction, level-set discrepancy and a
batch suite of engine/form/search invariants."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, gcd
from typing import Optional

import mpmath

from . import equal_volume as ev_mod
from .nz_volume import (
    InvalidInputError,
    ManifoldNZData,
    ThetaEvaluator,
    basis_change_cusp_shape,
    chart_psi,
    chart_term_identity_check,
)
from .precision import DEFAULT_PRECISION, GUARD_BITS, working_context
from .quad_form import (
    automorphisms,
    lattice_points_in_band,
    lattice_points_on_level,
)
from .quadratic import QuadraticNumber
from .slopes import Slope, UnimodularMatrix, primitive_slopes

CONSTANT_NOTE = (
    "the factor (-1)^i (2 pi)^(2i) / (4i) multiplying Im(c_(2i-1) conj(A)^(2i)) is "
    "absorbed into the real unknown a_i"
)
UNKNOWNS = ("alpha", "beta", "a")


class EmptyLevelError(ValueError):
    pass


# -- exact linear algebra over Q(sqrt(d)) ------------------------------------------


def _rref(rows: list[list[QuadraticNumber]], col_order: list[int]):
    """Row-reduce with pivots searched in ``col_order``; returns (rref rows, pivot cols)."""
    M = [list(r) for r in rows]
    pivots = []
    r = 0
    n_rows = len(M)
    for c in col_order:
        piv = next((i for i in range(r, n_rows) if not M[i][c].is_zero()), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = M[r][c].inverse()
        M[r] = [x * inv for x in M[r]]
        for i in range(n_rows):
            if i != r and not M[i][c].is_zero():
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == n_rows:
            break
    return M, pivots


def nullspace(rows: list[list[QuadraticNumber]], n_cols: int, col_order=None):
    col_order = list(range(n_cols)) if col_order is None else list(col_order)
    M, pivots = _rref(rows, col_order)
    free = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [QuadraticNumber(0)] * n_cols
        vec[fc] = QuadraticNumber(1)
        for row, pc in zip(M, pivots):
            vec[pc] = -row[fc]
        basis.append(tuple(vec))
    return basis, len(pivots)


# -- obstruction system ------------------------------------------------------------


def _conj_power_parts(i: int, d: int):
    """Real and imaginary monomial coefficients of ``(x - sqrt(-d) y)^(2i)``.

    Returns two dicts ``k -> coefficient of x^(2i-k) y^k`` with values in Q(sqrt(d)).
    """
    re, im = {}, {}
    n = 2 * i
    for k in range(n + 1):
        binom = comb(n, k)
        half = k // 2
        if k % 2 == 0:
            # (-i sqrt(d))^k = (-1)^(k/2) d^(k/2)
            re[k] = QuadraticNumber((-1) ** half * binom * d**half)
            im[k] = QuadraticNumber(0)
        else:
            # (-i)^k = -i (-1)^((k-1)/2), sqrt(d)^k = d^((k-1)/2) sqrt(d)
            re[k] = QuadraticNumber(0)
            im[k] = QuadraticNumber(0, -((-1) ** half) * binom * d**half, d)
    return re, im


def _form_power(i: int, d: int):
    """Monomial coefficients of ``(x^2 + d y^2)^i`` keyed by the power of ``y``."""
    return {2 * j: QuadraticNumber(comb(i, j) * d**j) for j in range(i + 1)}


def obstruction_system(i: int, d: int) -> list[list[QuadraticNumber]]:
    """Rows (one per monomial) of ``alpha Im X + beta Re X - a (x^2+dy^2)^i = 0``."""
    re, im = _conj_power_parts(i, d)
    rhs = _form_power(i, d)
    rows = []
    for k in range(2 * i + 1):
        rows.append([im[k], re[k], -rhs.get(k, QuadraticNumber(0))])
    return rows


def _residual_polynomial(i: int, d: int, vec) -> dict:
    alpha, beta, a = vec
    re, im = _conj_power_parts(i, d)
    rhs = _form_power(i, d)
    out = {}
    for k in range(2 * i + 1):
        val = alpha * im[k] + beta * re[k] - a * rhs.get(k, QuadraticNumber(0))
        if not val.is_zero():
            out[k] = val
    return out


@dataclass(frozen=True)
class ObstructionReport:
    i: int
    d: int
    nullspace_dimension: int
    basis: tuple
    rank: int
    rank_second_order: int
    equations: int
    note: str = CONSTANT_NOTE

    @property
    def trivial(self) -> bool:
        return self.nullspace_dimension == 0 and self.rank == self.rank_second_order == 3

    def to_dict(self) -> dict:
        return {
            "i": self.i,
            "d": self.d,
            "nullspace_dimension": self.nullspace_dimension,
            "rank": self.rank,
            "rank_second_order": self.rank_second_order,
            "equations": self.equations,
            "basis": [[str(x) for x in v] for v in self.basis],
            "unknowns": list(UNKNOWNS),
            "note": self.note,
        }


def obstruction_nullspace(i: int, d: int) -> ObstructionReport:
    """Exact solutions ``(alpha, beta, a)`` of
    ``Im((alpha + i beta)(x - sqrt(-d) y)^(2i)) = a (x^2 + d y^2)^i``.

    Every basis vector is substituted back and must give the zero polynomial;
    the rank is recomputed with the reverse pivot order as a second opinion.
    """
    if i < 1 or d < 1:
        raise InvalidInputError("need i >= 1 and d >= 1")
    rows = obstruction_system(i, d)
    basis, rank = nullspace(rows, 3)
    _, rank2 = nullspace(list(reversed(rows)), 3, col_order=[2, 1, 0])
    for vec in basis:
        if _residual_polynomial(i, d, vec):
            raise ArithmeticError(f"nullspace vector {vec} does not solve the system")
    return ObstructionReport(i, d, len(basis), tuple(basis), rank, rank2, len(rows))


# -- level-set discrepancy ----------------------------------------------------------


def level_set_discrepancy(
    m: ManifoldNZData, N: int, terms: int, prec: int = DEFAULT_PRECISION
):
    """Spread ``max - min`` of truncated Theta over all integer points with ``Q = N``."""
    form, _ = ev_mod.integer_form(m)
    pts = [pt for pt in lattice_points_on_level(form, N) if pt != (0, 0)]
    if not pts:
        raise EmptyLevelError(f"level {N} of {form} has no nonzero integer points")
    ev = ThetaEvaluator(m, prec)
    ev.check_terms(terms)
    vals = []
    for pt in pts:
        bl = ev.blocks(pt, terms)
        vals.append(ev.ctx.fsum(bl) if terms > 1 else bl[0])
    return mpmath.mp.make_mpf((max(vals) - min(vals))._mpf_)


def level_set_witness(m: ManifoldNZData, N: int, terms: int, prec: int = DEFAULT_PRECISION):
    """The two points realising the discrepancy, with their values."""
    form, _ = ev_mod.integer_form(m)
    ev = ThetaEvaluator(m, prec)
    vals = []
    for pt in lattice_points_on_level(form, N):
        if pt == (0, 0):
            continue
        bl = ev.blocks(pt, terms)
        vals.append((ev.ctx.fsum(bl), pt))
    if not vals:
        raise EmptyLevelError(f"level {N} of {form} has no nonzero integer points")
    lo = min(vals)
    hi = max(vals)
    return lo[1], hi[1], float(hi[0] - lo[0])


# -- invariant suite ----------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    checked: int = 0
    witness: Optional[str] = None

    def to_dict(self):
        return {
            "name": self.name,
            "passed": self.passed,
            "checked": self.checked,
            "witness": self.witness,
        }


@dataclass
class SuiteReport:
    manifold: str
    bound: int
    terms: int
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def to_dict(self):
        return {
            "manifold": self.manifold,
            "bound": self.bound,
            "terms": self.terms,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }


def _check(name, items, predicate, describe=str) -> CheckResult:
    count = 0
    for item in items:
        count += 1
        if not predicate(item):
            return CheckResult(name, False, count, describe(item))
    return CheckResult(name, True, count)


def run_invariant_suite(
    m: ManifoldNZData,
    bound: int,
    terms: int,
    tolerance="1e-12",
    prec: int = DEFAULT_PRECISION,
) -> SuiteReport:
    """Run the engine, form and search invariants over the slope box ``bound``.

    Failures are reported with a witness rather than raised.
    """
    report = SuiteReport(m.name, bound, terms)
    ev = ThetaEvaluator(m, prec)
    ev.check_terms(terms)
    slopes = primitive_slopes(bound) if bound >= 1 else []
    form, _ = ev_mod.integer_form(m)
    add = report.checks.append

    # volume engine
    def parity(s):
        return all(
            ev.evaluate(s, t).value == ev.evaluate(-s, t).value for t in range(1, terms + 1)
        )

    add(_check("theta parity under (p,q) -> (-p,-q)", slopes, parity))

    def lead_exact(s):
        v = ev.evaluate(s, 1)
        return v.value == mpmath.mp.make_mpf(ev.blocks(s, 1)[0]._mpf_)

    add(_check("terms=1 equals the leading term", slopes, lead_exact))

    def monotone(s):
        prev = None
        for t in range(1, terms + 1):
            v = ev.evaluate(s, t)
            if prev is not None and prev.ratio < 1 and v.ratio < 1:
                if v.error_radius > prev.error_radius:
                    return False
            prev = v
        return True

    add(_check("error radius non-increasing in terms", slopes, monotone))

    def chart(s):
        if s.q == 0:
            return True
        psi = chart_psi(m, Fraction(s.p, s.q), Fraction(1, s.q), terms, prec)
        return psi.value == ev.evaluate(s, terms).value

    add(_check("chart_psi(x,y) == theta(x/y, 1/y)", slopes, chart))

    if bound >= 1:
        grid = [-1 + Fraction(2 * t, 9) for t in range(10)]
        cells = [(n, j, x, y) for n in range(4) for j in range(4) for x in grid for y in grid]
        add(
            _check(
                "chart term identity < 1e-12",
                cells,
                lambda c: chart_term_identity_check(*c, prec=prec) < mpmath.mpf("1e-12"),
            )
        )
        mats = [UnimodularMatrix(1, 1, 0, 1), UnimodularMatrix(0, -1, 1, 0), UnimodularMatrix(2, 1, 1, 1)]
        pairs = [(A, B) for A in mats for B in mats]
        c1 = m.cusp_shape
        add(
            _check(
                "basis change composes exactly",
                pairs,
                lambda ab: basis_change_cusp_shape(basis_change_cusp_shape(c1, ab[0]), ab[1])
                == basis_change_cusp_shape(c1, ab[1] @ ab[0]),
            )
        )

    # quadratic form
    autos = automorphisms(form)
    add(
        _check(
            "automorph invariance of Q",
            [(T, s) for T in autos for s in slopes],
            lambda ts: form(*ts[0].apply(ts[1])) == form(*ts[1]),
        )
    )
    aset = set(autos)
    add(
        _check(
            "automorphs closed under product and inverse",
            [(S, T) for S in autos for T in autos],
            lambda st: (st[0] @ st[1]) in aset and st[0].inverse() in aset,
        )
    )
    add(
        CheckResult(
            "automorphs contain +-I",
            UnimodularMatrix.identity() in aset and -UnimodularMatrix.identity() in aset,
            1,
        )
    )
    levels = range(0, bound + 1)

    def decomposition(N):
        band = lattice_points_in_band(form, N, 3)
        union = sorted(p for j in range(3) for p in lattice_points_on_level(form, N + j))
        return band == union

    add(_check("band = disjoint union of levels", levels, decomposition))

    def naive(N):
        # box from positive definiteness: Q >= (D / 4C) x^2 and (D / 4A) y^2
        D = -form.discriminant
        X = int((4 * form.C * N / D) ** 0.5) + 1
        Y = int((4 * form.A * N / D) ** 0.5) + 1
        brute = sorted(
            (x, y) for x in range(-X, X + 1) for y in range(-Y, Y + 1) if form(x, y) == N
        )
        return brute == lattice_points_on_level(form, N)

    add(_check("level enumeration matches brute force", levels, naive))
    add(
        _check(
            "primitive slopes have gcd 1",
            slopes,
            lambda s: gcd(s.p, s.q) == 1,
        )
    )

    # equal-volume search
    if terms >= 2 and slopes:
        records = ev_mod.search_collisions(m, bound, terms, tolerance, prec)
        try:
            C = ev_mod.empirical_error_constant(m, terms, max(bound, 1), prec)
            gap = ev_mod.gap_bound(C)
        except ev_mod.EstimationFailedError:
            gap = None
        add(
            _check(
                "|k| <= gap_bound(C_emp)",
                records,
                lambda r: gap is None or abs(r.k) <= gap,
                lambda r: f"{r.slope_a} ~ {r.slope_b} k={r.k} gap={gap}",
            )
        )
        add(
            _check(
                "no record pairs a slope with its negative",
                records,
                lambda r: r.slope_a != -r.slope_b,
                lambda r: f"{r.slope_a} ~ {r.slope_b}",
            )
        )
        found = {(r.slope_a, r.slope_b): r.classification for r in records}

        def complete(ts):
            T, s = ts
            t = T.apply(s).canonical()
            if t == s:
                return True
            if max(abs(t.p), abs(t.q)) > bound:
                return True
            va, vb = ev.evaluate(s, terms), ev.evaluate(t, terms)
            if not (ev_mod._usable(va, ev_mod.DEFAULT_MAX_RATIO) and ev_mod._usable(vb, ev_mod.DEFAULT_MAX_RATIO)):
                return True
            if ev.blocks(s, terms) != ev.blocks(t, terms):
                return True
            key = (s, t) if s < t else (t, s)
            return found.get(key) == ev_mod.AUTOMORPH_INDUCED

        add(
            _check(
                "termwise-equal automorph images are found",
                [(T, s) for T in autos for s in slopes],
                complete,
                lambda ts: f"{ts[1]} -> {ts[0].apply(ts[1])} under {ts[0]}",
            )
        )
        hp = prec + GUARD_BITS
        hev = ThetaEvaluator(m, hp)

        def sound(r):
            a, b = hev.evaluate(r.slope_a, terms), hev.evaluate(r.slope_b, terms)
            return ev_mod._overlap(a, b, r.tolerance, hp)

        add(
            _check(
                "records re-verify at higher precision",
                records,
                sound,
                lambda r: f"{r.slope_a} ~ {r.slope_b}",
            )
        )
    return report
