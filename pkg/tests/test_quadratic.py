from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from nzvolume.precision import working_context
from nzvolume.quadratic import QuadraticNumber, is_perfect_square, squarefree_decomposition

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=30)
radicands = st.sampled_from([-1, -2, -3, -7, -12, 2, 3, 5, 12])


def q_numbers(radicand):
    return st.builds(QuadraticNumber, rationals, rationals, st.just(radicand))


def test_squarefree_decomposition():
    assert squarefree_decomposition(12) == (2, 3)
    assert squarefree_decomposition(-12) == (2, -3)
    assert squarefree_decomposition(49) == (7, 1)
    assert squarefree_decomposition(1) == (1, 1)
    assert is_perfect_square(144) and not is_perfect_square(12)


def test_normal_form():
    a = QuadraticNumber(0, 1, -12)
    b = QuadraticNumber(0, 2, -3)
    assert a == b and a.radicand == -3 and a.v == 2
    assert QuadraticNumber(1, 3, 4) == QuadraticNumber(7)
    assert QuadraticNumber(5, 0, -3) == QuadraticNumber(5)
    assert hash(QuadraticNumber(5, 0, -3)) == hash(QuadraticNumber(5))


def test_imaginary_constructor():
    z = QuadraticNumber.imaginary("1/2", "1/2", 3)
    assert z.d == 3 and z.u == Fraction(1, 2)
    assert z.norm() == 1
    with pytest.raises(ValueError):
        QuadraticNumber.imaginary(0, 1, 0)


def test_sqrt_minus_three_squared():
    w = QuadraticNumber(0, 1, -3)
    assert w * w == QuadraticNumber(-3)
    assert w.imag_squared() == 3


def test_inverse_of_zero():
    with pytest.raises(ZeroDivisionError):
        QuadraticNumber(0).inverse()


@given(radicands.flatmap(lambda r: st.tuples(q_numbers(r), q_numbers(r), q_numbers(r))))
def test_field_axioms(triple):
    a, b, c = triple
    assert (a + b) * c == a * c + b * c
    assert a * b == b * a
    assert (a - b) + b == a
    if not b.is_zero():
        assert (a / b) * b == a
    assert (a * b).norm() == a.norm() * b.norm()
    assert a.conjugate().conjugate() == a


@given(radicands.flatmap(q_numbers))
def test_to_mp_matches_float(x):
    ctx = working_context(128)
    val = x.to_mp(ctx)
    if x.radicand < 0:
        ref = complex(float(x.u), float(x.v) * abs(x.radicand) ** 0.5)
        assert abs(complex(val) - ref) <= 1e-12 * (1 + abs(ref))
    else:
        ref = float(x.u) + float(x.v) * abs(x.radicand) ** 0.5
        assert abs(float(val) - ref) <= 1e-12 * (1 + abs(ref))


@given(radicands.flatmap(q_numbers), st.integers(-4, 4))
def test_power(x, k):
    if x.is_zero() and k < 0:
        return
    expected = QuadraticNumber(1)
    base = x if k >= 0 else x.inverse()
    for _ in range(abs(k)):
        expected = expected * base
    assert x**k == expected
