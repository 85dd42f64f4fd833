"""Equal-volume fillings: error constants, the quadratic-form gap bound,
exhaustive collision search, integer fibers and symmetry classification."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import mpmath

from .nz_volume import InvalidInputError, ManifoldNZData, ThetaEvaluator, VolumeValue
from .precision import DEFAULT_PRECISION, working_context
from .quad_form import (
    BinaryQuadraticForm,
    automorphisms,
    form_from_cusp_shape,
    lattice_points_on_level,
)
from .slopes import Slope, UnimodularMatrix, primitive_slopes, rational_height

AUTOMORPH_INDUCED = "automorph-induced"
TRIVIAL_NEGATION = "trivial-negation"
UNEXPLAINED = "unexplained"

# Slopes whose estimated convergence ratio exceeds this are left out of
# searches: the geometric tail estimate is not trustworthy near ratio 1.
DEFAULT_MAX_RATIO = 0.25


class EstimationFailedError(RuntimeError):
    pass


@dataclass(frozen=True)
class CollisionRecord:
    slope_a: Slope
    slope_b: Slope
    theta_a: VolumeValue
    theta_b: VolumeValue
    q_a: int
    q_b: int
    k: int
    classification: str
    truncation_terms: int
    tolerance: object
    stable_when_deepened: Optional[bool] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.slope_a < self.slope_b:
            raise ValueError("slope_a must precede slope_b in canonical order")
        if self.k != self.q_a - self.q_b:
            raise ValueError("k must equal q_a - q_b")

    def interval_gap_holds(self, prec: Optional[int] = None) -> bool:
        """``|theta_a - theta_b| <= tolerance + err_a + err_b`` (exact mpf arithmetic)."""
        return _overlap(self.theta_a, self.theta_b, self.tolerance, prec)


@dataclass(frozen=True)
class FiberQuery:
    base_slope: Slope
    k: int
    bound: int
    tolerance: object
    terms: int

    def __post_init__(self):
        if self.bound < max(abs(self.base_slope.p), abs(self.base_slope.q)):
            raise InvalidInputError("bound must cover the base slope")
        if self.terms < 1:
            raise InvalidInputError("terms must be positive")


def _tol(ctx, tolerance):
    if isinstance(tolerance, str):
        return ctx.mpf(tolerance)
    return ctx.convert(tolerance)


def _overlap(a: VolumeValue, b: VolumeValue, tolerance, prec=None) -> bool:
    ctx = working_context(prec or max(a.precision, b.precision))
    diff = abs(mpmath.fsub(a.value, b.value, exact=True))
    room = mpmath.fadd(
        mpmath.fadd(_tol(ctx, tolerance), a.error_radius, exact=True), b.error_radius, exact=True
    )
    return diff <= room


def integer_form(m: ManifoldNZData) -> tuple[BinaryQuadraticForm, Fraction]:
    return form_from_cusp_shape(m.cusp_shape)


# -- error constant and gap bound ---------------------------------------------


def empirical_error_constant(
    m: ManifoldNZData,
    terms: int,
    sample_bound: int,
    prec: int = DEFAULT_PRECISION,
    normalized: bool = False,
):
    """Largest ``|Theta_trunc - leading| * Q^2`` over convergent primitive slopes.

    ``Q`` is the rational form value ``|p + c1 q|^2``.  With ``normalized=True``
    the result is divided by ``pi^2 Im(c1)``, which is the constant appearing
    in the reciprocal comparison ``|1/r - 1/r'| < C (1/r^2 + 1/r'^2)``.
    """
    if terms < 2:
        raise InvalidInputError("the error constant needs at least two terms")
    ev = ThetaEvaluator(m, prec)
    ev.check_terms(terms)
    ctx = ev.ctx
    form, scale = integer_form(m)
    best = None
    for s in primitive_slopes(sample_bound):
        val = ev.evaluate(s, terms)
        if not val.converged:
            continue
        lead = ev.blocks(s, 1)[0]
        Q = scale * form(s.p, s.q)
        err = abs(ctx.convert(val.value) - lead) * (ctx.mpf(Q.numerator) / Q.denominator) ** 2
        if best is None or err > best:
            best = err
    if best is None:
        raise EstimationFailedError("no sample slope has a convergent tail")
    if normalized:
        best = best / (ev.pi2 * ev.im_c1)
    return mpmath.mp.make_mpf(best._mpf_)


def gap_bound(C) -> int:
    """Integer bound ``m = ceil(2C) + 1`` on ``|Q - Q'|`` for equal volumes."""
    if C < 0:
        raise InvalidInputError("C must be nonnegative")
    return math.ceil(2 * _as_fraction(C)) + 1


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if hasattr(x, "_mpf_"):
        man, exp = mpmath.mpf(x).man_exp
        return Fraction(int(man)) * (Fraction(2) ** int(exp))
    return Fraction(x)


def claim_inequality_holds(r, r_prime, C) -> bool:
    """Exact test of ``|1/r - 1/r'| > C (1/r^2 + 1/r'^2)``."""
    r, rp, C = _as_fraction(r), _as_fraction(r_prime), _as_fraction(C)
    if r <= 0 or rp <= 0 or C <= 0:
        raise InvalidInputError("r, r' and C must be positive")
    return abs(1 / r - 1 / rp) > C * (1 / (r * r) + 1 / (rp * rp))


def claim_polynomial_form(r, k, C) -> bool:
    """``r (r + k) (k - 2C) > k^2 C``: the reciprocal inequality with ``r' = r + k``, ``k > 0``."""
    r, k, C = _as_fraction(r), _as_fraction(k), _as_fraction(C)
    if r <= 0 or k <= 0 or C <= 0:
        raise InvalidInputError("r, k and C must be positive")
    return r * (r + k) * (k - 2 * C) > k * k * C


# -- classification -------------------------------------------------------------


def classify_pair(a: Slope, b: Slope, autos: Sequence[UnimodularMatrix]) -> str:
    if a == -b:
        return TRIVIAL_NEGATION
    for T in autos:
        img = T.apply(a)
        if img == b or img == -b:
            return AUTOMORPH_INDUCED
    return UNEXPLAINED


def classify_collision(rec: CollisionRecord, autos: Sequence[UnimodularMatrix]) -> str:
    """Automorph-induced when some automorph sends ``slope_a`` to ``+-slope_b``."""
    autos = list(autos) or [UnimodularMatrix.identity(), -UnimodularMatrix.identity()]
    return classify_pair(rec.slope_a, rec.slope_b, autos)


# -- evaluation (optionally in worker processes) -----------------------------------


def _evaluate_chunk(args):
    m, pairs, terms, prec = args
    ev = ThetaEvaluator(m, prec)
    out = []
    for p, q in pairs:
        v = ev.evaluate(Slope(p, q), terms)
        out.append((v.value._mpf_, v.error_radius._mpf_, v.ratio._mpf_))
    return out


def evaluate_slopes(
    m: ManifoldNZData, slopes: Sequence[Slope], terms: int, prec: int, jobs: int = 1
) -> list[VolumeValue]:
    """Truncated values for many slopes; results are independent of ``jobs``."""
    ThetaEvaluator(m, prec).check_terms(terms)
    pairs = [(s.p, s.q) for s in slopes]
    if jobs <= 1 or len(pairs) < 256:
        raw = _evaluate_chunk((m, pairs, terms, prec))
    else:
        n_chunks = jobs * 4
        size = -(-len(pairs) // n_chunks)
        chunks = [pairs[i : i + size] for i in range(0, len(pairs), size)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            raw = [
                item
                for part in pool.map(_evaluate_chunk, [(m, c, terms, prec) for c in chunks])
                for item in part
            ]
    make = mpmath.mp.make_mpf
    return [VolumeValue(make(v), make(e), terms, make(r), prec) for v, e, r in raw]


# -- search ---------------------------------------------------------------------


def _usable(v: VolumeValue, max_ratio) -> bool:
    return v.converged and v.ratio <= max_ratio


def search_collisions(
    m: ManifoldNZData,
    bound: int,
    terms: int,
    tolerance,
    prec: int = DEFAULT_PRECISION,
    jobs: int = 1,
    max_ratio=DEFAULT_MAX_RATIO,
) -> list[CollisionRecord]:
    """All pairs of distinct fillings in the box whose truncated intervals overlap.

    Slopes are taken up to sign (one representative per filling).  Intervals
    ``[v - e, v + e]`` are sorted by lower end and swept, so every pair within
    ``tolerance`` is found whatever its ``k``; the output is sorted by slope.
    """
    if bound < 0:
        raise InvalidInputError("bound must be nonnegative")
    ctx = working_context(prec)
    tol = _tol(ctx, tolerance)
    if tol < 0:
        raise InvalidInputError("tolerance must be nonnegative")
    slopes = primitive_slopes(bound)
    values = evaluate_slopes(m, slopes, terms, prec, jobs)
    form, _ = integer_form(m)
    autos = automorphisms(form)

    live = [(s, v) for s, v in zip(slopes, values) if _usable(v, max_ratio)]
    ends = []
    for s, v in live:
        lo = mpmath.fsub(v.value, v.error_radius, exact=True)
        hi = mpmath.fadd(v.value, v.error_radius, exact=True)
        ends.append((lo, hi, s, v))
    ends.sort(key=lambda e: (e[0], e[2]))

    deeper = None
    if ThetaEvaluator(m, prec)._available(terms + 1):
        deeper = ThetaEvaluator(m, prec)

    records = []
    for i, (lo_i, hi_i, s_i, v_i) in enumerate(ends):
        reach = mpmath.fadd(hi_i, tol, exact=True)
        for j in range(i + 1, len(ends)):
            lo_j, _, s_j, v_j = ends[j]
            if lo_j > reach:
                break
            a, b = (s_i, s_j) if s_i < s_j else (s_j, s_i)
            va, vb = (v_i, v_j) if s_i < s_j else (v_j, v_i)
            qa, qb = form(a.p, a.q), form(b.p, b.q)
            stable = None
            if deeper is not None:
                stable = _overlap(
                    deeper.evaluate(a, terms + 1), deeper.evaluate(b, terms + 1), tol
                )
            records.append(
                CollisionRecord(
                    a, b, va, vb, qa, qb, qa - qb,
                    classify_pair(a, b, autos), terms, tolerance, stable,
                )
            )
    records.sort(key=lambda r: (r.slope_a, r.slope_b))
    return records


def fiber_integer_points(
    m: ManifoldNZData,
    query: FiberQuery,
    prec: int = DEFAULT_PRECISION,
    max_ratio=DEFAULT_MAX_RATIO,
) -> list[Slope]:
    """Primitive ``(z, w)`` in the box with ``Q(z, w) = Q(base) - k`` and overlapping volume.

    Points are reported once per filling (canonical sign); the base slope is
    always included when ``k == 0``.
    """
    form, _ = integer_form(m)
    base = query.base_slope
    target = form(base.p, base.q) - query.k
    if target < 0:
        return []
    ev = ThetaEvaluator(m, prec)
    base_val = ev.evaluate(base, query.terms)
    base_c = base.canonical()
    found = set()
    for z, w in lattice_points_on_level(form, target):
        s = Slope(z, w)
        if max(abs(z), abs(w)) > query.bound or not s.is_primitive:
            continue
        c = s.canonical()
        if c == base_c:
            found.add(c)
            continue
        if not _usable(base_val, max_ratio):
            continue
        v = ev.evaluate(c, query.terms)
        if _usable(v, max_ratio) and _overlap(base_val, v, query.tolerance):
            found.add(c)
    return sorted(found)


def fibers_from_records(records: Sequence[CollisionRecord], max_k: Optional[int] = None):
    """Map each slope to the set of fillings sharing its volume (itself included)."""
    out: dict[Slope, set] = {}
    for r in records:
        if max_k is not None and abs(r.k) >= max_k:
            continue
        out.setdefault(r.slope_a, {r.slope_a}).add(r.slope_b)
        out.setdefault(r.slope_b, {r.slope_b}).add(r.slope_a)
    return out


def automorph_orbit(s: Slope, autos: Sequence[UnimodularMatrix]) -> set:
    """Orbit of ``s`` under the automorph group, one representative per filling."""
    return {T.apply(s).canonical() for T in autos}


# -- heights ------------------------------------------------------------------------


def height(point) -> int:
    """Largest absolute numerator or denominator of the coordinates (lowest terms)."""
    if not point:
        raise InvalidInputError("a point needs at least one coordinate")
    return max(rational_height(x) for x in point)


def density_count(points, T: int) -> int:
    """Number of points of height at most ``T``."""
    return sum(1 for pt in points if height(pt) <= T)
