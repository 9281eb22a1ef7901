import math

import mpmath
import pytest
import scipy.special as ss
from hypothesis import given, strategies as st

from hmgreen import specialfun as sf
from hmgreen.errors import DomainError, InputError, PrecisionError


def test_policy_validation():
    with pytest.raises(InputError):
        sf.PrecisionPolicy(rel_tol=0)
    with pytest.raises(InputError):
        sf.PrecisionPolicy(max_terms=8)


@pytest.mark.parametrize("z", [0.5, 1.0, 2.5, 7.3, 0.1 + 0.7j, 2.5 + 0.5j, -1.5])
def test_gamma_against_mpmath(z):
    assert abs(sf.gamma(z) - complex(mpmath.gamma(z))) <= 1e-12 * abs(complex(mpmath.gamma(z)))


def test_gamma_poles():
    with pytest.raises(DomainError):
        sf.gamma(-2)


def test_beta_and_digamma():
    assert sf.beta(0.5, 0.5) == pytest.approx(math.pi, rel=1e-13)
    assert sf.beta(2.0, 3.0) == pytest.approx(1 / 12, rel=1e-13)
    assert sf.digamma(1.0) == pytest.approx(-0.5772156649015329, rel=1e-12)


def test_hyp2f1_examples():
    assert sf.hyp2f1(0.3, 1.2, 2.2, 0.0) == 1
    assert sf.hyp2f1(1, 1, 2, 0.5) == pytest.approx(2 * math.log(2), rel=1e-13)


@given(a=st.floats(0.2, 3), b=st.floats(0.2, 3), c=st.floats(0.3, 4), x=st.floats(0, 0.97))
def test_hyp2f1_against_mpmath(a, b, c, x):
    ref = float(mpmath.hyp2f1(a, b, c, x))
    assert sf.hyp2f1(a, b, c, x) == pytest.approx(ref, rel=1e-10)


def test_hyp2f1_integral_identity():
    # int_R (x^2+b^2)^(1-2s) / (x^2+1)^(1-s) dx = B(1/2, s-1/2) 2F1(2s-1, s-1/2; s; 1-b^2)
    from scipy import integrate

    s, b = 1.5, 0.8
    val, _ = integrate.quad(lambda x: (x * x + b * b) ** (1 - 2 * s) / (x * x + 1) ** (1 - s), -math.inf, math.inf,
                            epsabs=1e-13, epsrel=1e-12)
    closed = sf.beta(0.5, s - 0.5) * sf.hyp2f1(2 * s - 1, s - 0.5, s, 1 - b * b)
    assert closed == pytest.approx(val, abs=1e-8)


def test_legendre_q_closed_forms():
    assert sf.legendre_q(1, 1.25) == pytest.approx(math.log(3), rel=1e-13)
    assert sf.legendre_q(1, 3.0) == pytest.approx(0.5 * math.log(2), rel=1e-13)
    assert sf.legendre_q(2, 3.0) == pytest.approx(1.5 * math.log(2) - 1, rel=1e-12)
    with pytest.raises(DomainError):
        sf.legendre_q(1.5, 1.0)


@pytest.mark.parametrize("s", [1, 1.25, 1.5])
@pytest.mark.parametrize("x", [1.1, 2.0, 10.0])
def test_legendre_q_integral_representation(s, x):
    # Q_nu(x) = int_0^inf (x + sqrt(x^2-1) cosh t)^(-nu-1) dt
    from scipy import integrate

    nu = s - 1
    val, _ = integrate.quad(lambda t: (x + math.sqrt(x * x - 1) * math.cosh(t)) ** (-nu - 1), 0, 80,
                            epsabs=1e-14, epsrel=1e-12, limit=200)
    assert sf.legendre_q(s, x) == pytest.approx(val, rel=1e-8)


@given(s=st.floats(1.01, 4), g=st.floats(1e-4, 50))
def test_q_of_g_matches_scalar(s, g):
    import numpy as np

    vec = sf.legendre_q_of_g(s, np.array([g]))[0]
    assert vec == pytest.approx(sf.legendre_q(s, 1 + 2 * g), rel=1e-10)


def test_q_of_g_complex_s():
    import numpy as np

    s = 2.5 + 0.5j
    g = np.array([0.3, 1.7, 12.0])
    ref = [complex(mpmath.legenq(s - 1, 0, 1 + 2 * x, type=3)) for x in g]
    for v, r in zip(sf.legendre_q_of_g(s, g), ref):
        assert abs(v - r) <= 1e-11 * abs(r)


def test_q_series_coefficients_sum():
    # Q_{s-1}(1+2g) = 1/2 sum c_n (1+g)^(-n-s)
    s, g = 1.7, 3.0
    c = sf.legendre_q_series_coefficients(s, 80)
    total = 0.5 * sum(cn * (1 + g) ** (-n - s) for n, cn in enumerate(c))
    assert total == pytest.approx(sf.legendre_q(s, 1 + 2 * g), rel=1e-12)


@pytest.mark.parametrize("x", [1.0, 5.0, 20.0])
def test_k_half_closed_form(x):
    assert sf.bessel("K", 0.5, x) == pytest.approx(math.sqrt(math.pi / (2 * x)) * math.exp(-x), rel=1e-12)


def test_small_argument_limits():
    assert sf.bessel("I", 1, 1e-4) / 5e-5 == pytest.approx(1, abs=1e-6)
    assert abs(sf.bessel("J", 1, 1e-8)) < 1e-8


@pytest.mark.parametrize("x", [0.5, 2.0, 10.0])
def test_wronskian(x):
    w = sf.bessel("I", 1, x) * sf.bessel("K", 0, x) + sf.bessel("I", 0, x) * sf.bessel("K", 1, x)
    assert w == pytest.approx(1 / x, rel=1e-10)


@given(kappa=st.sampled_from([0.5, 1.0, 0.55, 0.75, 1.5, 2.0]), x=st.floats(0.01, 50))
def test_bessel_against_scipy(kappa, x):
    assert sf.bessel("I", kappa, x) == pytest.approx(ss.iv(kappa, x), rel=1e-10)
    assert sf.bessel("K", kappa, x) == pytest.approx(ss.kv(kappa, x), rel=1e-10)
    if kappa == int(kappa) or kappa == 0.5 or x <= 12 or x > 30:
        j = sf.bessel("J", kappa, x)
        # near zeros of J compare absolutely
        assert abs(j - ss.jv(kappa, x)) <= 1e-10 * max(1.0, abs(ss.jv(kappa, x)))
    else:
        with pytest.raises(PrecisionError):
            sf.bessel("J", kappa, x)


def test_bessel_rejects_bad_input():
    with pytest.raises(InputError):
        sf.bessel("Y", 1, 1.0)
    with pytest.raises((DomainError, InputError)):
        sf.bessel("I", 1, -1.0)


def test_reference_integrals():
    v, _ = sf.reference_integrals("beta_line", a=1, s=1)
    assert v == pytest.approx(math.pi, abs=1e-10)
    v, _ = sf.reference_integrals("beta_line", a=2, s=1.5)
    assert v == pytest.approx(0.5, abs=1e-8)
    v, _ = sf.reference_integrals("core_green", s=2)
    assert v == pytest.approx(4 * math.pi, abs=1e-3)
    with pytest.raises(DomainError):
        sf.reference_integrals("core_green", s=1)
    with pytest.raises(InputError):
        sf.reference_integrals("nothing")


@pytest.mark.parametrize("s", [1.5, 2.0, 2.5 + 0.5j])
def test_unit_sum(s):
    raw, acc = sf.unit_sum_partials(s, 200)
    exact = 1 / (s * (s - 1))
    assert abs(acc - exact) < 1e-10
    # the raw partial sum is only good to about 1/n_max
    assert 1e-3 < abs(raw - exact) < 1e-2


def test_determinism():
    assert sf.bessel("K", 0.6, 3.3) == sf.bessel("K", 0.6, 3.3)
    assert sf.legendre_q(1.4, 2.2) == sf.legendre_q(1.4, 2.2)
