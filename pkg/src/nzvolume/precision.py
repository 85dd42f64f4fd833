"""Per-precision mpmath contexts.

mpmath's global context carries mutable precision, which is not safe to share
between threads.  Every computation here runs in a private context keyed by
its precision; contexts are created once and never mutated afterwards.
Values that leave a computation are re-wrapped as plain ``mpmath.mpf`` /
``mpmath.mpc`` objects (no rounding) so they pickle across processes.
"""

from __future__ import annotations

import threading
from fractions import Fraction

import mpmath
from mpmath.ctx_mp import MPContext

DEFAULT_PRECISION = 128
GUARD_BITS = 64

_lock = threading.Lock()
_contexts: dict[int, MPContext] = {}
_constants: dict[int, tuple] = {}


def working_context(prec: int = DEFAULT_PRECISION) -> MPContext:
    prec = int(prec)
    if prec < 16:
        raise ValueError("precision must be at least 16 bits")
    ctx = _contexts.get(prec)
    if ctx is None:
        with _lock:
            ctx = _contexts.get(prec)
            if ctx is None:
                ctx = MPContext()
                ctx.prec = prec
                _contexts[prec] = ctx
    return ctx


def pi_constants(prec: int = DEFAULT_PRECISION):
    """``(pi, pi^2, 2*pi)`` at ``prec`` bits, computed with one guard word."""
    consts = _constants.get(prec)
    if consts is None:
        ctx = working_context(prec)
        guard = MPContext()
        guard.prec = prec + GUARD_BITS
        gpi = guard.pi
        consts = (ctx.mpf(+gpi), ctx.mpf(gpi * gpi), ctx.mpf(2 * gpi))
        with _lock:
            consts = _constants.setdefault(prec, consts)
    return consts


def guarded_sqrt(ctx, n) -> "mpmath.mpf":
    """Square root of an exact rational, rounded once to the context precision."""
    guard = MPContext()
    guard.prec = ctx.prec + GUARD_BITS
    n = Fraction(n)
    return ctx.mpf(guard.sqrt(guard.mpf(n.numerator) / n.denominator))


def portable(x):
    """Rewrap an mpf/mpc from any context as a global-context value, exactly."""
    if hasattr(x, "_mpc_"):
        return mpmath.mp.make_mpc(x._mpc_)
    if hasattr(x, "_mpf_"):
        return mpmath.mp.make_mpf(x._mpf_)
    raise TypeError(f"not an mpmath number: {x!r}")


def exact_to_mpf(ctx, x):
    """Convert int/Fraction exactly-then-round-once; mp numbers and floats pass through ``ctx``."""
    if isinstance(x, Fraction):
        return ctx.mpf(x.numerator) / x.denominator
    return ctx.convert(x)
