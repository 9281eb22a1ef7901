"""Local Borcherds products at the cusp infinity.

For the orbit data Lambda^+(a, m) and a weight vector w the product

    Psi_w(z) = e(tr(rho z)) * prod_{lam in Lambda_w} (1 - e(tr(lam z)))

is evaluated next to the raw product of the factors
sigma_w(lam) * (e(lam z1) - e(-lam' z2)).  The blocks -log|Psi|^2 and
2 log prod |1 - e(lam z1) conj(e(-lam' z2))| feed the Fourier evaluator of the
Green function.
"""
from __future__ import annotations

import cmath
import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InputError, SingularityError
from .ideals import FractionalIdeal, boundary_cycle
from .lattice import EvalPoint, HZData, lambda_set, reduced_and_weyl
from .numberfield import FieldElement, field_context

PRODUCT_TOL = 1e-18
GUARD = 1e-9
TWO_PI = 2 * math.pi


def _orbit_steps(lam: FieldElement, unit: float, y, start: int = 0):
    """Yield (k, l1, l2) for lam * unit^k, walking up from `start` and down from
    start - 1 until the element no longer contributes at height y."""
    l1, l2 = lam.embeddings()
    y1, y2 = y
    for direction in (1, -1):
        k = start if direction > 0 else start - 1
        while True:
            a1 = l1 * unit ** k
            a2 = l2 * unit ** (-k)
            yield k, a1, a2
            small = min(abs(a1) * y1, abs(a2) * y2)
            big = max(abs(a1) * y1, abs(a2) * y2)
            if TWO_PI * small < PRODUCT_TOL and math.exp(-TWO_PI * (big - small)) < PRODUCT_TOL:
                break
            k += direction
            if abs(k - start) > 2000:
                raise RuntimeError("orbit walk did not terminate")


def orbit_embeddings(hz: HZData, y) -> np.ndarray:
    """All contributing elements of Lambda^+ at height y as rows (lam, lam')."""
    unit = float(hz.orbit_unit)
    rows = [(a1, a2) for lam in hz.representatives for _, a1, a2 in _orbit_steps(lam, unit, y)]
    return np.array(rows, dtype=float).reshape(-1, 2)


def _e(w: complex) -> complex:
    return cmath.exp(2j * math.pi * w)


@dataclass(frozen=True)
class LogBlock:
    """-log|Psi|^2 (f5) and 2 log prod |1 - e(lam z1) conj(e(|lam'| z2))| (f6)."""
    f5: float
    f6: float
    tail: float

    @property
    def total(self) -> float:
        return self.f5 + self.f6


def _log_abs_one_minus(w: np.ndarray) -> np.ndarray:
    """log|1 - exp(w)| for Re w < 0, accurate when exp(w) is tiny."""
    ew = np.exp(w)
    out = np.log(np.abs(1 - ew))
    small = np.abs(ew) < 1e-8
    out[small] = -np.real(ew[small]) - np.real(ew[small] ** 2) / 2
    return out


def log_norm_block(a: FractionalIdeal, m: int, z: EvalPoint, t=None) -> LogBlock:
    hz = lambda_set(a, m)
    if not hz.representatives:
        return LogBlock(0.0, 0.0, 0.0)
    E = orbit_embeddings(hz, z.y)
    l1, l2 = E[:, 0], -E[:, 1]  # both positive
    A = 2j * math.pi * l1 * z.z1
    B = 2j * math.pi * l2 * z.z2
    top = np.maximum(A.real, B.real)
    # |e^A - e^B| = e^top |1 - e^(low - top)|
    w = np.where(A.real >= B.real, B - A, A - B)
    gap = np.abs(np.expm1(w))
    if gap.min() < GUARD:
        i = int(np.argmin(gap))
        raise SingularityError(f"z lies on the divisor of lam = ({E[i, 0]:.6g}, {E[i, 1]:.6g})")
    den = top + _log_abs_one_minus(w)
    num = _log_abs_one_minus(A + np.conj(B))
    f5 = -2.0 * float(den.sum())
    f6 = 2.0 * float(num.sum())
    return LogBlock(f5, f6, 4 * PRODUCT_TOL * len(E))


def _weyl_data(a, m, w):
    if isinstance(w, FieldElement):
        return reduced_and_weyl(a, m, w)
    return reduced_and_weyl(a, m, (float(w[0]), float(w[1])))


def local_product(a: FractionalIdeal, m: int, z: EvalPoint, w=(1.0, 1.0), t=None, form: str = "weyl") -> complex:
    """Psi_{sigma_w}(a, m, z) in the Weyl-vector form or as the raw product."""
    hz = lambda_set(a, m)
    if not hz.representatives:
        return 1 + 0j
    wd = _weyl_data(a, m, w)
    unit = float(hz.orbit_unit)
    z1, z2 = z.z1, z.z2
    if form == "weyl":
        rho1, rho2 = wd.rho.embeddings()
        logsum = 2j * math.pi * (rho1 * z1 + rho2 * z2)
        for r in wd.reduced:
            for k, a1, a2 in _orbit_steps(r, unit, z.y):
                sign = 1 if k >= 0 else -1
                q = _e(sign * (a1 * z1 + a2 * z2))
                if abs(1 - q) < GUARD:
                    raise SingularityError(f"z lies on the divisor of lam = ({a1:.6g}, {a2:.6g})")
                logsum += cmath.log(1 - q)
        return cmath.exp(logsum)
    if form == "direct":
        value = 1 + 0j
        for r in wd.reduced:
            for k, a1, a2 in _orbit_steps(r, unit, z.y):
                sigma = -1 if k >= 0 else 1
                f = sigma * (_e(a1 * z1) - _e(-a2 * z2))
                if abs(f) < GUARD * max(abs(_e(a1 * z1)), abs(_e(-a2 * z2))):
                    raise SingularityError(f"z lies on the divisor of lam = ({a1:.6g}, {a2:.6g})")
                value *= f
        return value
    raise InputError(f"unknown product form {form!r}")


def minimal_admissible_power(D: int) -> int:
    """Smallest even n > 0 with n / (1 - eps0^2) integral."""
    eps0 = field_context(D).eps0
    d = 1 - eps0 * eps0
    n = 2
    while not (FieldElement.rational(D, n) / d).is_integral():
        n += 2
    return n


def invariance_check(a: FractionalIdeal, m: int, n: int, samples: int = 5, seed: int = 0, w=(1.0, 1.0)) -> dict:
    """Relative changes of Psi^n under translations by a basis of a^-1 and under
    z -> (eps0^2 z1, eps0^-2 z2), at random points."""
    D = a.D
    n_min = minimal_admissible_power(D)
    eps0 = field_context(D).eps0
    if n <= 0 or n % 2 or not (FieldElement.rational(D, n) / (1 - eps0 * eps0)).is_integral():
        raise InputError(f"n = {n} is not admissible; the minimal admissible power is {n_min}")
    rng = random.Random(seed)
    e2 = float(eps0 * eps0)
    translations = a.inverse().basis
    worst_t = worst_u = 0.0
    factor_delta = 0.0
    hz = lambda_set(a, m)
    for _ in range(samples):
        z = EvalPoint(complex(rng.uniform(-1, 1), rng.uniform(0.6, 1.6)),
                      complex(rng.uniform(-1, 1), rng.uniform(0.6, 1.6)))
        base = local_product(a, m, z, w) ** n
        scale = max(abs(base), 1e-300)
        for mu in translations:
            moved = local_product(a, m, z.translate(mu), w) ** n
            worst_t = max(worst_t, abs(moved - base) / scale)
        zu = EvalPoint(z.z1 * e2, z.z2 / e2)
        moved = local_product(a, m, zu, w) ** n
        worst_u = max(worst_u, abs(moved - base) / scale)
        if hz.representatives:
            factor_delta = max(factor_delta, _factor_multiset_delta(hz, z, zu))
    return {"n": n, "n_min": n_min, "translation_delta": worst_t, "unit_delta": worst_u,
            "factor_multiset_delta": factor_delta, "samples": samples}


def _factor_multiset_delta(hz: HZData, z: EvalPoint, zu: EvalPoint, count: int = 20) -> float:
    """Largest difference between the `count` factor values 1 - e(tr(+-lam z)) of largest |q|
    at z and at the unit-moved point (reindexing lam -> eps0^2 lam)."""
    def top(zz):
        E = orbit_embeddings(hz, (max(zz.y), max(zz.y)))
        w = 2j * math.pi * (E[:, 0] * zz.z1 + E[:, 1] * zz.z2)
        # use lam or -lam, whichever gives |e(tr(lam z))| <= 1
        q = np.exp(np.where(w.real <= 0, w, -w))
        vals = 1 - q
        order = np.argsort(-np.abs(q))[:count]
        return sorted(vals[order], key=lambda c: (round(abs(c), 9), round(cmath.phase(c), 9)))
    x, y = top(z), top(zu)
    return max(abs(p - q) for p, q in zip(x, y))


# ------------------------------------------------------------ local coordinates
def _check_basis(alpha: FieldElement, beta: FieldElement) -> None:
    if not (alpha.is_totally_positive() and beta.is_totally_positive()):
        raise InputError("local coordinates need a totally positive basis")


def local_coordinates(alpha: FieldElement, beta: FieldElement, z: EvalPoint) -> tuple[complex, complex]:
    """(u, v) with (2 pi i z1, 2 pi i z2) = [[alpha, beta], [alpha', beta']] (log u, log v)."""
    _check_basis(alpha, beta)
    a1, a2 = alpha.embeddings()
    b1, b2 = beta.embeddings()
    det = a1 * b2 - b1 * a2
    w1, w2 = 2j * math.pi * z.z1, 2j * math.pi * z.z2
    lu = (b2 * w1 - b1 * w2) / det
    lv = (a1 * w2 - a2 * w1) / det
    return cmath.exp(lu), cmath.exp(lv)


def local_to_z(alpha: FieldElement, beta: FieldElement, u: complex, v: complex) -> EvalPoint:
    """Inverse of `local_coordinates` with principal logarithms."""
    _check_basis(alpha, beta)
    a1, a2 = alpha.embeddings()
    b1, b2 = beta.embeddings()
    lu, lv = cmath.log(u), cmath.log(v)
    return EvalPoint((a1 * lu + b1 * lv) / (2j * math.pi), (a2 * lu + b2 * lv) / (2j * math.pi))


# ------------------------------------------------------------ vanishing orders
@dataclass(frozen=True)
class MultiplicityRow:
    k: int
    point: FieldElement
    self_intersection: int
    multiplicity: Fraction

    def to_json(self) -> dict:
        return {"k": self.k, "A_k": self.point.to_json(), "b_k": self.self_intersection,
                "multiplicity": str(self.multiplicity)}


def multiplicity_table(a: FractionalIdeal, m: int) -> list[MultiplicityRow]:
    """tr(rho(a, m, A_k) A_k) for one period of the boundary cycle of a^-1."""
    cyc = boundary_cycle(a.inverse())
    rows = []
    hz = lambda_set(a, m)
    for k, A in enumerate(cyc.points):
        if hz.representatives:
            rho = reduced_and_weyl(a, m, A).rho
            mult = (rho * A).trace()
        else:
            mult = Fraction(0)
        rows.append(MultiplicityRow(k, A, cyc.self_intersections[k], mult))
    return rows


def vanishing_orders(a: FractionalIdeal, m: int) -> list[Fraction]:
    return [row.multiplicity for row in multiplicity_table(a, m)]


def slope_profile(a: FractionalIdeal, m: int, k: int, n: int, u: complex, radii) -> list[float]:
    """Slopes of log|Psi^n| against log|v| between consecutive |v| in `radii`,
    in the chart (A_{k-1}, A_k) with u fixed and w = A_k."""
    cyc = boundary_cycle(a.inverse())
    alpha, beta = cyc.point(k - 1), cyc.point(k)
    w = cyc.point(k)
    vals = []
    for r in radii:
        z = local_to_z(alpha, beta, u, complex(r))
        vals.append((math.log(r), n * math.log(abs(local_product(a, m, z, w)))))
    return [(y1 - y0) / (x1 - x0) for (x0, y0), (x1, y1) in zip(vals, vals[1:])]
