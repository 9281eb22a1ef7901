import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hmgreen.errors import DegenerateInputError, DomainError, InputError
from hmgreen.ideals import FractionalIdeal
from hmgreen.lattice import (EvalPoint, LatticeVector, dual_data, enumerate_dual, enumerate_dual_coords, g_values,
                             h_g_majorant, lambda_set, majorant_two_term, mobius, reduced_and_weyl, sl_action)
from hmgreen.numberfield import FieldElement, field_context

D5 = 5
O5 = FractionalIdeal.unit(D5)
ONE = LatticeVector(Fraction(1), Fraction(1), FieldElement(D5, 0))


def fe(D, p, q=0, r=1):
    return FieldElement(D, p, q, r)


points = st.builds(lambda x1, y1, x2, y2: EvalPoint(complex(x1, y1), complex(x2, y2)),
                   st.floats(-1, 1), st.floats(0.3, 3), st.floats(-1, 1), st.floats(0.3, 3))


def test_evalpoint_contract():
    with pytest.raises(DomainError):
        EvalPoint(1j, -1j)
    z = EvalPoint.parse("0.5,1,0.25,2")
    assert z.x == (0.5, 0.25) and z.y == (1.0, 2.0)
    with pytest.raises(InputError):
        EvalPoint.parse("1,2,3")


def test_h_g_examples():
    h, g, qz = h_g_majorant(ONE, EvalPoint(1j, 1j))
    assert h == pytest.approx(0, abs=1e-15) and g == pytest.approx(0, abs=1e-15) and qz == pytest.approx(1)
    h, g, _ = h_g_majorant(ONE, EvalPoint(2j, 1j))
    assert h == pytest.approx(1 / 8) and g == pytest.approx(1 / 8)
    zero_det = LatticeVector(Fraction(1), Fraction(0), FieldElement(D5, 0))
    with pytest.raises(DomainError):
        h_g_majorant(zero_det, EvalPoint(1j, 1j))
    assert h_g_majorant(zero_det, EvalPoint(1j, 1j), want_g=False)[1] is None


def random_vector(rng, D=D5):
    return LatticeVector(Fraction(rng.randint(-6, 6), rng.randint(1, 3)), Fraction(rng.randint(-6, 6)),
                         fe(D, rng.randint(-6, 6), rng.randint(-6, 6), 2))


def test_majorant_two_formulas():
    rng = random.Random(4)
    for _ in range(1000):
        A = random_vector(rng)
        z = EvalPoint(complex(rng.uniform(-2, 2), rng.uniform(0.2, 3)), complex(rng.uniform(-2, 2), rng.uniform(0.2, 3)))
        qz = h_g_majorant(A, z, want_g=False)[2]
        assert majorant_two_term(A, z) == pytest.approx(qz, rel=1e-12, abs=1e-12)


def random_sl2(rng, D=D5):
    w = FieldElement.omega(D)
    M = ((fe(D, 1), fe(D, 0)), (fe(D, 0), fe(D, 1)))
    for _ in range(3):
        mu = rng.randint(-2, 2) + rng.randint(-2, 2) * w
        E = ((fe(D, 1), mu), (fe(D, 0), fe(D, 1))) if rng.random() < 0.5 else ((fe(D, 1), fe(D, 0)), (mu, fe(D, 1)))
        M = tuple(tuple(sum((M[i][k] * E[k][j] for k in range(2)), fe(D, 0)) for j in range(2)) for i in range(2))
    return M


def test_sl_action_identity_and_det():
    rng = random.Random(1)
    I = ((1, 0), (0, 1))
    for _ in range(1000):
        A = random_vector(rng)
        assert sl_action(I, A) == A
        M = random_sl2(rng)
        assert sl_action(M, A).det == A.det
    with pytest.raises(InputError):
        sl_action(((2, 0), (0, 1)), ONE)


def test_h_invariance_under_sl2():
    rng = random.Random(2)
    for _ in range(50):
        A = random_vector(rng)
        M = random_sl2(rng)
        z = EvalPoint(complex(rng.uniform(-1, 1), rng.uniform(0.5, 2)), complex(rng.uniform(-1, 1), rng.uniform(0.5, 2)))
        h0 = h_g_majorant(A, z, want_g=False)[0]
        h1 = h_g_majorant(sl_action(M, A), mobius(M, z), want_g=False)[0]
        assert h1 == pytest.approx(h0, rel=1e-9, abs=1e-12)


def naive_dual(a, m, z, R, box=10, lam_box=None):
    """Box oracle: a0, k in [-box, box], lam coordinates in [-lam_box, lam_box]."""
    lam_box = lam_box or box
    data = dual_data(a, m)
    det = Fraction(m) / (a.norm * a.D)
    out = set()
    for a0 in range(-box, box + 1):
        for k in range(-box, box + 1):
            for s in range(-lam_box, lam_box + 1):
                for t in range(-lam_box, lam_box + 1):
                    A = data.vector(a0, k, s, t)
                    if A.det != det:
                        continue
                    if h_g_majorant(A, z, want_g=False)[2] <= R:
                        out.add((a0, k, s, t))
    return out


def test_enumeration_matches_box_oracle_d5():
    z = EvalPoint(1j, 1j)
    X = enumerate_dual_coords(O5, 1, z, 3.0)
    got = {tuple(int(v) for v in row) for row in X}
    assert got == naive_dual(O5, 1, z, 3.0)
    assert len(got) % 2 == 0
    assert all(tuple(-v for v in row) in got for row in got)


@pytest.mark.parametrize("D,ideal,m,seed", [(5, "OK", 1, 0), (5, "diffinv", 4, 1), (13, "OK", 1, 2), (8, "OK", 2, 3),
                                            (17, "diff", 3, 4), (12, "OK", 1, 5)])
def test_enumeration_random_configs(D, ideal, m, seed):
    rng = random.Random(seed)
    a = FractionalIdeal.named(D, ideal)
    z = EvalPoint(complex(rng.uniform(-0.5, 0.5), rng.uniform(0.8, 1.4)), complex(rng.uniform(-0.5, 0.5), rng.uniform(0.8, 1.4)))
    R = 4 * m / (float(a.norm) * D) + 1.0
    got = {tuple(int(v) for v in row) for row in enumerate_dual_coords(a, m, z, R)}
    assert got == naive_dual(a, m, z, R, box=6, lam_box=14)
    det = Fraction(m) / (a.norm * D)
    for A in enumerate_dual(a, m, z, R):
        assert A.in_dual(a) and A.det == det


@given(z=points)
def test_g_spectrum_translation_invariant(z):
    mu = FieldElement.omega(D5)
    X0 = enumerate_dual_coords(O5, 1, z, 6.0)
    X1 = enumerate_dual_coords(O5, 1, z.translate(mu), 6.0)
    g0 = np.sort(g_values(O5, 1, X0, z))
    g1 = np.sort(g_values(O5, 1, X1, z.translate(mu)))
    assert len(g0) == len(g1)
    assert np.allclose(g0, g1, rtol=1e-9, atol=1e-10)


def test_lambda_set_examples():
    hz = lambda_set(O5, 1)
    assert hz.representatives == (1 / FieldElement.sqrt_d(5),)
    assert hz.orbit_unit == field_context(5).eps0 ** 2
    assert lambda_set(O5, 2).representatives == ()


@pytest.mark.parametrize("D,ideal", [(5, "OK"), (13, "OK"), (17, "diffinv"), (8, "OK"), (21, "diff")])
def test_lambda_set_contract(D, ideal):
    a = FractionalIdeal.named(D, ideal)
    e2 = field_context(D).eps0 ** 2
    for m in range(1, 13):
        reps = lambda_set(a, m).representatives
        for lam in reps:
            assert lam.norm() * D / a.norm == -m
            assert lam.sign() > 0 and lam.conj().sign() < 0
        # pairwise inequivalent under eps0^2
        for i, x in enumerate(reps):
            for y in reps[i + 1:]:
                r = x / y
                k = 0
                while r.embeddings()[0] > 1.5 and k < 50:
                    r = r / e2
                    k += 1
                while r.embeddings()[0] < 0.5 and k < 100:
                    r = r * e2
                    k += 1
                assert r != 1


def test_weyl_example_d5():
    wd = reduced_and_weyl(O5, 1, (1.0, 1.0))
    assert wd.reduced == (1 / FieldElement.sqrt_d(5),)
    assert wd.walls == wd.reduced
    assert wd.rho == FieldElement(5, 5, -1, 10)
    assert wd.rho.is_totally_positive()
    with pytest.raises(DegenerateInputError):
        reduced_and_weyl(O5, 1, (1.0, 1.0), strict=True)


def test_weyl_empty_and_bad_weight():
    wd = reduced_and_weyl(O5, 2, (1.0, 2.0))
    assert wd.reduced == () and wd.rho.is_zero()
    with pytest.raises(InputError):
        reduced_and_weyl(O5, 1, (1.0, -1.0))


@given(t=st.floats(0.05, 0.95), u=st.floats(0.05, 0.95))
def test_chamber_locality(t, u):
    # (1, c) and (1, c') with c, c' in the same chamber (1, eps0^4) of D = 5, m = 1
    e4 = float(field_context(5).eps0 ** 4)
    c1, c2 = 1 + t * (e4 - 1), 1 + u * (e4 - 1)
    assert reduced_and_weyl(O5, 1, (1.0, c1)).reduced == reduced_and_weyl(O5, 1, (1.0, c2)).reduced


@pytest.mark.parametrize("D", [5, 13, 17])
def test_rho_totally_positive(D):
    a = FractionalIdeal.unit(D)
    for m in range(1, 10):
        wd = reduced_and_weyl(a, m, (1.0, 1.7))
        if wd.reduced:
            assert wd.rho.is_totally_positive()
