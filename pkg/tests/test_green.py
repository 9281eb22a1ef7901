import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hmgreen import specialfun as sf
from hmgreen.borcherds import log_norm_block
from hmgreen.errors import DegenerateInputError, DomainError, InputError, SingularityError, UnsupportedError
from hmgreen.green import (FourierGreen, Truncation, beta_sum, fourier_coeff_b, fourier_quadrature, lambda_series_block,
                           laplace_fd, phi_direct, phi_fourier, phi_fourier_s, phi_regularized_direct, psi0_direct,
                           psi0_fourier, smooth_coeff_bound, smooth_coeff_s1, smooth_decomposition, smooth_kernel)
from hmgreen.ideals import FractionalIdeal, cusp_transport
from hmgreen.lattice import EvalPoint, enumerate_dual_coords, g_values, mobius
from hmgreen.numberfield import FieldElement

O5 = FractionalIdeal.unit(5)
Z0 = EvalPoint(0.1 + 2.0j, 0.3 + 1.7j)


def test_truncation_validation():
    with pytest.raises(InputError):
        Truncation(b_max=0)
    with pytest.raises(InputError):
        Truncation(s_sequence=(1.1, 1.2, 1.05))
    t = Truncation.from_overrides("b_max=60,nu_trace_max=6")
    assert t.b_max == 60 and t.nu_trace_max == 6.0
    with pytest.raises(InputError):
        Truncation.from_overrides("colour=3")


@pytest.mark.parametrize("s,B,y,kernel", [(2.0, 0.2, (2.0, 2.0), "green"), (1.5, 0.2, (1.0, 2.0), "smooth"),
                                          (2.5, 0.5, (1.3, 0.9), "green")])
def test_constant_coefficient_against_quadrature(s, B, y, kernel):
    closed = fourier_coeff_b(s, B, O5, None, y, kernel=kernel)
    assert closed == pytest.approx(fourier_quadrature(s, B, O5, y, kernel=kernel), rel=1e-9)


def test_smooth_s1_constant_matches_closed_form():
    y = (1.2, 0.8)
    closed = fourier_coeff_b(1.0, 0.3, O5, None, y, kernel="smooth")
    assert smooth_coeff_s1(0.3, O5, None, y) == pytest.approx(closed, rel=1e-10)


@pytest.mark.parametrize("p,q", [(1, 0), (1, 1), (2, -1), (0, 3)])
def test_smooth_s1_coefficient_bound(p, q):
    # heights small enough that the bound sits well above quadrature noise
    nu = FieldElement(5, p, q)
    for y in ((0.15, 0.2), (0.3, 0.25)):
        c = smooth_coeff_s1(0.2, O5, nu, y)
        bound = smooth_coeff_bound(0.2, O5, nu, y)
        assert bound > 1e-8
        assert abs(c) <= bound * (1 + 1e-9)


def test_psi0_two_routes():
    z = EvalPoint(0.2 + 1.0j, 0.4 + 1.3j)
    four = psi0_fourier(O5, 1, z).value
    assert four == pytest.approx(20.935369004637874, rel=1e-10)
    assert psi0_direct(O5, 1, z) == pytest.approx(four, rel=1e-8)


@given(x1=st.floats(-1, 1), x2=st.floats(-1, 1), y1=st.floats(0.7, 2.5), r=st.floats(1.05, 1.4))
@settings(max_examples=25)
def test_product_expansion_identity(x1, x2, y1, r):
    # y1 != y2 keeps z off the walls of D = 5, m = 1
    z = EvalPoint(complex(x1, y1), complex(x2, y1 * r))
    lb = log_norm_block(O5, 1, z)
    series = lambda_series_block(O5, 1, z, n_max=4000)
    assert lb.total == pytest.approx(4 * math.pi * beta_sum(O5, 1, z) + series, abs=1e-8)


@pytest.mark.parametrize("m,z", [(1, Z0), (4, EvalPoint(-0.2 + 2.2j, 0.45 + 1.6j))])
def test_lattice_sum_matches_fourier_at_s3(m, z):
    t = Truncation(majorant_radius=400.0, b_max=60)
    direct = phi_direct(O5, m, 3.0, z, t)
    four = phi_fourier_s(O5, m, 3.0, z, Truncation(b_max=200, nu_trace_max=7))["total"]
    assert abs(direct.value - four) <= direct.tail_bound + 1e-10
    finer = phi_direct(O5, m, 3.0, z, Truncation(majorant_radius=3200.0))
    assert abs(finer.value - four) <= finer.tail_bound + 1e-10
    assert finer.tail_bound < direct.tail_bound / 4


def test_direct_tail_bound_shrinks():
    small = phi_direct(O5, 1, 2.0, Z0, Truncation(majorant_radius=50.0))
    big = phi_direct(O5, 1, 2.0, Z0, Truncation(majorant_radius=400.0))
    assert big.tail_bound < small.tail_bound
    assert abs(big.value - small.value) <= 2 * small.tail_bound


def test_smooth_decomposition_sums_to_phi():
    s = 2.0
    z = EvalPoint(0.5911 + 1.7163j, 0.5133 + 0.4661j)
    parts = smooth_decomposition(O5, 1, s, z, 120)
    assert sum(parts) == pytest.approx(phi_direct(O5, 1, s, z).value, rel=1e-10)
    assert parts[0] == pytest.approx(sf.legendre_q_series_coefficients(s, 1)[0] * smooth_kernel(O5, 1, s, z).value / 2)


def test_smooth_kernel_finite_on_divisor():
    # z1 = z2 lies on T(O, 1) for D = 5
    z = EvalPoint(1j, 1j)
    with pytest.raises(SingularityError):
        phi_direct(O5, 1, 2.0, z)
    assert math.isfinite(smooth_kernel(O5, 1, 2.0, z).value)


def test_log_singularity_along_divisor():
    # A and -A both reach g_min, each adding -log(g)/2, so Phi(s) + log(g_min) stays bounded
    vals = []
    for eps in (1e-1, 1e-2, 1e-3):
        z = EvalPoint(0.1 + 1.5j, 0.1 + (1.5 + eps) * 1j)
        v = phi_direct(O5, 1, 2.0, z)
        vals.append(v.value + math.log(v.parts["min_g"]))
    assert abs(vals[2] - vals[1]) < abs(vals[1] - vals[0]) + 1e-3
    assert abs(vals[2] - vals[1]) < 1e-2


@pytest.mark.parametrize("f,expected", [
    (lambda z: math.log(z.y[0]), lambda z: -1.0),
    (lambda z: 7.0, lambda z: 0.0),
    (lambda z: z.y[0] ** 2.5, lambda z: 2.5 * 1.5 * z.y[0] ** 2.5),
])
def test_laplace_fd_examples(f, expected):
    z = EvalPoint(0.3 + 1.4j, -0.2 + 0.8j)
    assert laplace_fd(f, z, 1) == pytest.approx(expected(z), rel=1e-6, abs=1e-6)
    assert laplace_fd(f, z, 2) == pytest.approx(0.0, abs=1e-6)


def test_fourier_translation_invariance():
    fg = FourierGreen(O5, 1, Z0.y)
    base = fg(Z0)
    for mu in (FieldElement(5, 1), FieldElement.omega(5), FieldElement(5, -2, 3)):
        assert fg(Z0.translate(mu)) == pytest.approx(base, abs=1e-10)


def test_fourier_continuous_across_wall():
    # y1 = y2 is a wall of D = 5, m = 1, where the Weyl data jump
    fg = FourierGreen(O5, 1, (2.0, 2.0))

    def at(d):
        return fg(EvalPoint(complex(0.21, 2.0 + d), complex(-0.37, 2.0 - d)))

    assert abs(at(1e-3) - at(-1e-3)) <= 1e-5
    # one-sided linear extrapolations to the wall meet
    left = 2 * at(-1e-3) - at(-2e-3)
    right = 2 * at(1e-3) - at(2e-3)
    assert abs(left - right) <= 1e-9


def test_lattice_sum_modular_invariance():
    t = Truncation(majorant_radius=1000.0)
    z = EvalPoint(1.1j, 0.9j)
    one, zero, w = FieldElement(5, 1), FieldElement(5, 0), FieldElement.omega(5)
    base = phi_direct(O5, 1, 2.0, z, t)
    for M in (((one, w), (zero, one)), ((zero, -one), (one, zero)), ((one, zero), (w + 1, one))):
        moved = phi_direct(O5, 1, 2.0, mobius(M, z), t)
        assert abs(moved.value - base.value) <= 1e-6
        assert abs(moved.value - base.value) <= base.tail_bound + moved.tail_bound


def test_lattice_sum_eigenvalue_on_fixed_vector_set():
    s, z0 = 1.5, EvalPoint(0.2 + 1.1j, -0.1 + 0.9j)
    X = enumerate_dual_coords(O5, 1, z0, 200.0)

    def f(z):
        return float(sf.legendre_q_of_g(s, g_values(O5, 1, X, z)).sum())

    for j in (1, 2):
        assert laplace_fd(f, z0, j) == pytest.approx(s * (s - 1) * f(z0), rel=1e-3)


def test_s_sequence_halving_within_residual():
    halved = Truncation(s_sequence=tuple(1 + 0.05 * 2.0 ** (-j) for j in range(7)))
    for z in (EvalPoint(0.37 + 2.4j, -0.21 + 2.1j), EvalPoint(0.1 + 2.0j, 0.3 + 1.7j), EvalPoint(0.8 + 2.8j, 0.55 + 2.5j)):
        full = phi_regularized_direct(O5, 1, z)
        assert abs(phi_regularized_direct(O5, 1, z, halved).value - full.value) <= full.tail_bound


def test_regularized_direct_matches_fourier():
    z = EvalPoint(0.37 + 2.4j, -0.21 + 2.1j)
    four = phi_fourier(O5, 1, z)
    reg = phi_regularized_direct(O5, 1, z)
    assert abs(four.value - reg.value) < 1e-5
    assert four.tail_bound < 1e-3


def test_fourier_errors():
    with pytest.raises(DomainError):
        phi_direct(O5, 1, 1.0, Z0)
    with pytest.raises(UnsupportedError):
        phi_fourier(FractionalIdeal.unit(8), 1, Z0)
    with pytest.raises(DomainError):
        phi_fourier(O5, 1, EvalPoint(0.1j, 1j))
    with pytest.raises(DegenerateInputError):
        phi_fourier(O5, 1, EvalPoint(0.1 + 2j, 0.3 + 2j))
    with pytest.raises(UnsupportedError):
        FourierGreen(O5, 2, (2.0, 2.0))
    # explicit constants make sigma(-1) = 0 usable
    v = FourierGreen(O5, 2, (2.0, 1.8), constants=(0.0, 0.0))(Z0)
    assert np.isfinite(v)


def test_evaluation_deterministic():
    assert phi_fourier(O5, 1, Z0).value == phi_fourier(O5, 1, Z0).value


@pytest.mark.parametrize("D,m,z", [(5, 5, EvalPoint(0.37 + 2.4j, -0.21 + 2.1j)), (13, 4, EvalPoint(0.37 + 2.6j, -0.21 + 2.2j))])
def test_two_routes_other_configurations(D, m, z):
    a = FractionalIdeal.unit(D)
    assert abs(phi_fourier(a, m, z).value - phi_regularized_direct(a, m, z).value) < 1e-5


@pytest.mark.parametrize("D,ideal,kappa", [
    (5, "OK", ((3, 0), (1, 1))),
    (5, "diffinv", ((2, 0), (1, 0))),
    (5, "diffinv", ((0, 0), (1, 0))),
    (13, "OK", ((3, 0), (1, 1))),
])
def test_cusp_transport_law(D, ideal, kappa):
    # Phi(b, m, s, Mz) = Phi(a^2 b, m, s, z) for (M, a) transporting infinity to kappa
    b = FractionalIdeal.named(D, ideal)
    M, a = cusp_transport(tuple(FieldElement(D, p, q) for p, q in kappa), b)
    z = EvalPoint(0.13 + 1.2j, -0.27 + 0.95j)
    t = Truncation(majorant_radius=400.0)
    lhs = phi_direct(b, 1, 2.0, mobius(M, z), t)
    rhs = phi_direct(a * a * b, 1, 2.0, z, t)
    assert abs(lhs.value - rhs.value) <= lhs.tail_bound + rhs.tail_bound
