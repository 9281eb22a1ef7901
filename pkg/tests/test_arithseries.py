from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from hmgreen import checks
from hmgreen.arithseries import (_divisors, dirichlet_coefficients, dirichlet_identity_check, divisor_sigma,
                                 divisor_weights, gsum, gsum_reference, mobius, phi_function, regularization_constants,
                                 sigma_derivative)
from hmgreen.errors import InputError, UnsupportedError
from hmgreen.ideals import FractionalIdeal
from hmgreen.numberfield import FieldElement, chi_D

O5 = FractionalIdeal.unit(5)


def test_divisors_and_mobius():
    for n in range(1, 200):
        assert _divisors(n) == [d for d in range(1, n + 1) if n % d == 0]
    assert [mobius(n) for n in range(1, 13)] == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0]


def test_sigma_hand_values():
    # D = 5, c = O: c_d = chi(d) + chi(m/d), chi(5) = 0
    assert divisor_weights(O5, 4) == {1: 2, 2: -2, 4: 2}
    assert divisor_sigma(O5, 4, 3).coefficient == Fraction(57, 2)
    assert divisor_sigma(O5, 1, -1).coefficient == 2
    assert divisor_sigma(O5, 2, -1).coefficient == 0
    s = divisor_sigma(O5, 5, 2)
    assert s.exact and s.value == pytest.approx(5 ** -0.5 * (1 + 25), rel=1e-14)


def test_sigma_float_matches_exact():
    for m in range(1, 30):
        ex = divisor_sigma(O5, m, 3).value
        assert divisor_sigma(O5, m, 3.0).value == pytest.approx(ex, rel=1e-13, abs=1e-13)


@pytest.mark.parametrize("D", [5, 13, 17])
def test_sigma_symmetry(D):
    rep = checks.sigma_functional_equation((D,), m_max=40)
    assert rep.ok, rep.worst


def test_sigma_derivative_fd():
    for m in (4, 6, 9):
        h = 1e-5
        fd = (divisor_sigma(O5, m, -1 + h).value - divisor_sigma(O5, m, -1 - h).value) / (2 * h)
        assert sigma_derivative(O5, m, -1.0) == pytest.approx(fd, rel=1e-7, abs=1e-9)


def test_even_discriminant_rejected():
    with pytest.raises(UnsupportedError):
        divisor_weights(FractionalIdeal.unit(8), 1)
    with pytest.raises(InputError):
        divisor_sigma(O5, 0, 1)


def test_regularization_constants_d5():
    r = regularization_constants(O5, 1)
    assert r.q == 5 and r.L is not None
    r2 = regularization_constants(O5, 2)
    assert r2.q == 0 and r2.L is None


def test_phi_function_residue_limit():
    # phi(s) has a pole-free value near s = 1 tied to q through sigma(-1) / L(-1)
    a, m = O5, 1
    v1 = phi_function(a, m, 1.0 + 1e-7)
    # Gamma(1/2) / Gamma(1/2) = 1, so phi(1) = -sigma(-1) / L(-1) = q
    assert v1 == pytest.approx(float(regularization_constants(a, m).q), rel=1e-5)


nu_coeffs = st.tuples(st.integers(-4, 4), st.integers(-4, 4))


@given(pq=nu_coeffs, b=st.integers(1, 12), m=st.integers(1, 6))
def test_gsum_table_vs_reference(pq, b, m):
    nu = FieldElement(5, pq[0], pq[1]) / FieldElement.sqrt_d(5)
    ref = gsum_reference(O5, m, nu, b)
    assert abs(gsum(O5, m, nu, b) - ref) < 1e-9


@pytest.mark.parametrize("D,ideal", [(13, "OK"), (17, "diffinv"), (21, "diff")])
def test_gsum_other_fields(D, ideal):
    a = FractionalIdeal.named(D, ideal)
    big = a * FractionalIdeal.different_inv(D)
    g1, g2 = big.basis
    for b in (1, 2, 3, 6):
        for i, j in ((0, 0), (1, 0), (1, -2), (3, 1)):
            nu = i * g1 + j * g2
            assert abs(gsum(a, 2, nu, b) - gsum_reference(a, 2, nu, b)) < 1e-9


def test_gsum_independent_of_coset_shift():
    nu = FieldElement(5, 1, 1) / FieldElement.sqrt_d(5)
    for b in (2, 3, 4):
        shift = b * FieldElement.omega(5) + 2 * b
        assert abs(gsum_reference(O5, 1, nu, b, shift=shift) - gsum_reference(O5, 1, nu, b)) < 1e-9


def test_gsum_rejects_bad_input():
    with pytest.raises(InputError):
        gsum(O5, 1, FieldElement(5, 0), 0)
    with pytest.raises(InputError):
        gsum(O5, 1, FieldElement(5, 1, 0, 7), 2)


@pytest.mark.parametrize("D", [5, 13, 17])
@pytest.mark.parametrize("m", [1, 2, 4, 7])
def test_dirichlet_identity(D, m):
    rep = dirichlet_identity_check(FractionalIdeal.unit(D), m, 40)
    assert rep.ok, rep.deltas


def test_dirichlet_coefficients_first_terms():
    # first coefficient is c_1 = chi(1) + chi(m)
    for m in range(1, 10):
        assert dirichlet_coefficients(O5, m, 1)[0] == 1 + chi_D(5, m)
