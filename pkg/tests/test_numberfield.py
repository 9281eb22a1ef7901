from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from hmgreen.errors import InputError, PrecisionError
from hmgreen.numberfield import (
    FieldElement,
    chi_D,
    field_context,
    fundamental_units,
    hurwitz_zeta_and_derivative,
    l_value_and_derivative,
    l_value_minus1,
)

FIELDS = [5, 8, 12, 13, 17]


def elements(D):
    ints = st.integers(-40, 40)
    return st.builds(lambda p, q, r: FieldElement(D, p, q, r), ints, ints, st.integers(1, 12))


@pytest.mark.parametrize("D,eps0,eps1", [
    (5, (1, 1, 2), (3, 1, 2)),
    (8, (2, 1, 2), (3, 1, 1)),
    (13, (3, 1, 2), (11, 3, 2)),
])
def test_units_frozen(D, eps0, eps1):
    e0, e1 = fundamental_units(D)
    assert e0 == FieldElement(D, *eps0)
    assert e1 == FieldElement(D, *eps1)
    assert e0.norm() == -1
    assert e1.is_totally_positive()


@pytest.mark.parametrize("D", FIELDS)
def test_unit_powers(D):
    e0, e1 = fundamental_units(D)
    for k in range(-5, 6):
        assert abs((e0 ** k).norm()) == 1
        assert (e1 ** k).is_totally_positive()


def test_bad_discriminants():
    for D in (0, -4, 4, 9, 20, 7):
        with pytest.raises(InputError):
            fundamental_units(D)


def test_chi_examples():
    assert chi_D(5, 5) == 0
    assert chi_D(5, 2) == -1
    assert chi_D(5, 4) == 1


@given(st.integers(1, 10**4), st.integers(1, 10**4), st.sampled_from(FIELDS))
def test_chi_multiplicative(m, n, D):
    assert chi_D(D, m * n) == chi_D(D, m) * chi_D(D, n)


@given(st.integers(1, 10**4), st.sampled_from(FIELDS))
def test_chi_period(n, D):
    assert chi_D(D, n) == chi_D(D, n + D)


def test_l_minus1_exact():
    assert l_value_minus1(5) == Fraction(-2, 5)
    assert l_value_minus1(8) == -1
    ctx = field_context(5)
    assert ctx.zetaK_minus1 == Fraction(1, 30)
    assert field_context(8).zetaK_minus1 == Fraction(1, 12)
    assert l_value_minus1(13) < 0 and field_context(13).zetaK_minus1 > 0


@pytest.mark.parametrize("D", FIELDS)
def test_l_value_numeric_matches_exact(D):
    val, _ = l_value_and_derivative(D, -1.0)
    assert abs(val - float(l_value_minus1(D))) <= 1e-10 * abs(float(l_value_minus1(D)))


def test_l_derivative_finite_difference():
    h = 1e-4
    _, der = l_value_and_derivative(5, -1.0)
    fd = (l_value_and_derivative(5, -1 + h)[0] - l_value_and_derivative(5, -1 - h)[0]) / (2 * h)
    assert abs(der - fd) < 1e-6
    # mpmath reference value
    assert abs(der - 0.192526428420522) < 1e-10


def test_l_zero_character_sum():
    for D in (5, 13):
        val, _ = l_value_and_derivative(D, 0.0)
        ref = -sum(chi_D(D, a) * a for a in range(1, D + 1)) / D
        assert val >= -1e-12
        assert abs(val - ref) < 1e-10


def test_hurwitz_precision_guard():
    with pytest.raises(PrecisionError):
        hurwitz_zeta_and_derivative(-30.0, 0.5, n_direct=2, n_bernoulli=2, rel_tol=1e-14)


@given(st.data())
def test_ring_laws(data):
    D = data.draw(st.sampled_from(FIELDS))
    x = data.draw(elements(D))
    y = data.draw(elements(D))
    assert (x * y).norm() == x.norm() * y.norm()
    assert (x + y).trace() == x.trace() + y.trace()
    assert x.conj().conj() == x
    if not y.is_zero():
        assert (x / y) * y == x


@given(st.data())
def test_sign_matches_float(data):
    D = data.draw(st.sampled_from(FIELDS))
    x = data.draw(elements(D))
    v = float(x)
    if abs(v) > 1e-9:
        assert x.sign() == (1 if v > 0 else -1)


def test_json_round_trip():
    x = FieldElement(13, 3, 1, 2)
    assert FieldElement.from_json(13, x.to_json()) == x
    assert x.to_json() == {"p": 3, "q": 1, "r": 2}
