"""Manifold spec files (JSON) and collision reports (CSV + JSON sidecar)."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from fractions import Fraction
from pathlib import Path

import mpmath
from mpmath import libmp

from .equal_volume import CollisionRecord
from .nz_volume import Coefficient, InvalidInputError, ManifoldNZData
from .precision import DEFAULT_PRECISION, GUARD_BITS, working_context
from .quadratic import QuadraticNumber

CSV_HEADER = (
    "p_a", "q_a", "p_b", "q_b", "Q_a", "Q_b", "k",
    "theta_a", "theta_b", "err_a", "err_b",
    "classification", "terms", "tolerance",
)


class SpecFormatError(InvalidInputError):
    pass


# -- numbers as text ------------------------------------------------------------------


def _rational(text, what: str) -> Fraction:
    if isinstance(text, bool) or not isinstance(text, (str, int)):
        raise SpecFormatError(f"{what} must be a rational string such as \"3/2\"")
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise SpecFormatError(f"{what}: cannot read {text!r} as a rational") from None


def _decimal(ctx, text, what: str):
    if not isinstance(text, str):
        raise SpecFormatError(f"{what} must be a decimal string")
    try:
        x = ctx.mpf(text.strip())
    except (ValueError, TypeError):
        raise SpecFormatError(f"{what}: cannot read {text!r} as a decimal") from None
    if not ctx.isfinite(x):
        raise SpecFormatError(f"{what} must be finite")
    return x


def mpf_text(x, digits: int | None = None) -> str:
    """Decimal text for an mpf; by default with enough digits to round-trip it."""
    raw = x._mpf_
    if raw == libmp.finf:
        return "inf"
    if raw == libmp.fninf:
        return "-inf"
    if raw == libmp.fnan:
        return "nan"
    if digits is None:
        digits = libmp.repr_dps(max(raw[3], 1))
    return libmp.to_str(raw, digits)


# -- manifold spec files --------------------------------------------------------------


def manifold_from_dict(doc: dict, prec: int = DEFAULT_PRECISION) -> ManifoldNZData:
    """Decimals are read at ``prec`` plus guard bits; rationals stay exact."""
    if not isinstance(doc, dict):
        raise SpecFormatError("spec must be a JSON object")
    try:
        name = doc["name"]
        cusp = doc["cusp_shape"]
    except KeyError as exc:
        raise SpecFormatError(f"missing field {exc.args[0]!r}") from None
    if not isinstance(name, str) or not isinstance(cusp, dict):
        raise SpecFormatError("name must be a string and cusp_shape an object")
    try:
        d = cusp["d"]
        u = _rational(cusp["u"], "cusp_shape.u")
        v = _rational(cusp["v"], "cusp_shape.v")
    except KeyError as exc:
        raise SpecFormatError(f"cusp_shape is missing {exc.args[0]!r}") from None
    if isinstance(d, bool) or not isinstance(d, int) or d <= 0:
        raise SpecFormatError("cusp_shape.d must be a positive integer")
    ctx = working_context(prec + GUARD_BITS)
    coeffs, texts = [], []
    for i, entry in enumerate(doc.get("coefficients", [])):
        if not isinstance(entry, dict) or "index" not in entry:
            raise SpecFormatError(f"coefficient #{i} needs an index")
        idx = entry["index"]
        if isinstance(idx, bool) or not isinstance(idx, int):
            raise SpecFormatError(f"coefficient #{i}: index must be an integer")
        re_t, im_t = entry.get("re", "0"), entry.get("im", "0")
        val = ctx.mpc(_decimal(ctx, re_t, f"c{idx}.re"), _decimal(ctx, im_t, f"c{idx}.im"))
        coeffs.append(Coefficient(idx, val))
        texts.append((idx, re_t, im_t))
    base, base_t = None, doc.get("base_volume")
    if base_t is not None:
        base = _decimal(ctx, base_t, "base_volume")
    try:
        return ManifoldNZData(
            name=name,
            cusp_shape=QuadraticNumber.imaginary(u, v, d),
            coefficients=tuple(coeffs),
            base_volume=None if base is None else mpmath.mp.make_mpf(base._mpf_),
            coefficient_text=tuple(texts),
            base_volume_text=base_t,
        )
    except ValueError as exc:
        raise SpecFormatError(str(exc)) from None


def manifold_to_dict(m: ManifoldNZData) -> dict:
    """Source text is reused where the manifold came from a file."""
    c1 = m.cusp_shape
    # u + v sqrt(-d): the stored radicand is -d (square-free)
    doc = {
        "name": m.name,
        "cusp_shape": {"u": str(c1.u), "v": str(c1.v), "d": -c1.radicand},
        "coefficients": [],
    }
    texts = {t[0]: t[1:] for t in m.coefficient_text}
    for c in m.coefficients:
        if c.index in texts:
            re_t, im_t = texts[c.index]
        else:
            re_t, im_t = mpf_text(c.value.real), mpf_text(c.value.imag)
        doc["coefficients"].append({"index": c.index, "re": re_t, "im": im_t})
    if m.base_volume is not None:
        doc["base_volume"] = m.base_volume_text or mpf_text(m.base_volume)
    return doc


def read_manifold(path, prec: int = DEFAULT_PRECISION) -> ManifoldNZData:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecFormatError(f"{path}: not valid JSON ({exc})") from None
    return manifold_from_dict(doc, prec)


def write_manifold(m: ManifoldNZData, path) -> None:
    Path(path).write_text(json.dumps(manifold_to_dict(m), indent=2) + "\n", encoding="utf-8")


def manifold_digest(m: ManifoldNZData) -> str:
    blob = json.dumps(manifold_to_dict(m), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


# -- collision reports ----------------------------------------------------------------


def _value_digits(prec: int) -> int:
    return libmp.prec_to_dps(prec) + 2


def collision_rows(records, prec: int = DEFAULT_PRECISION):
    digits = _value_digits(prec)
    for r in sorted(records, key=lambda r: (r.slope_a, r.slope_b)):
        yield (
            r.slope_a.p, r.slope_a.q, r.slope_b.p, r.slope_b.q,
            r.q_a, r.q_b, r.k,
            mpf_text(r.theta_a.value, digits), mpf_text(r.theta_b.value, digits),
            mpf_text(r.theta_a.error_radius, 8), mpf_text(r.theta_b.error_radius, 8),
            r.classification, r.truncation_terms, str(r.tolerance),
        )


def collisions_csv(records, prec: int = DEFAULT_PRECISION) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    w.writerows(collision_rows(records, prec))
    return buf.getvalue()


def collision_summary(records: list[CollisionRecord]) -> dict:
    counts: dict[str, int] = {}
    for r in records:
        counts[r.classification] = counts.get(r.classification, 0) + 1
    return {
        "total": len(records),
        "by_classification": dict(sorted(counts.items())),
        "max_abs_k": max((abs(r.k) for r in records), default=0),
    }


def sidecar_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.name + ".json")


def write_collision_report(
    records, csv_path, *, manifold: ManifoldNZData, bound: int, terms: int,
    tolerance, prec: int, version: str, wall_time: float, jobs: int,
) -> Path:
    """Write the CSV and its sidecar; only the ``non_canonical`` block varies run to run."""
    Path(csv_path).write_text(collisions_csv(records, prec), encoding="utf-8")
    meta = {
        "canonical": {
            "manifold": manifold.name,
            "manifold_digest": manifold_digest(manifold),
            "bound": bound,
            "terms": terms,
            "tolerance": str(tolerance),
            "precision": prec,
            "version": version,
            "summary": collision_summary(records),
        },
        "non_canonical": {"wall_time_seconds": round(wall_time, 3), "jobs": jobs},
    }
    side = sidecar_path(csv_path)
    side.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return side


def read_collision_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return rows
