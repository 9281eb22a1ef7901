"""Verification battery: exact identities, two-route comparisons, quadratures.

Each check function returns a `Report` of named measurements with the delta,
the tolerance and the verdict.  The CLI `verify` subcommand groups them into
suites; the acceptance tests call them one by one.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import specialfun as sf
from .arithseries import dirichlet_identity_check, divisor_sigma, regularization_constants
from .borcherds import invariance_check, local_product, multiplicity_table, slope_profile
from .green import (FourierGreen, Truncation, fourier_coeff_b, fourier_quadrature, laplace_fd, phi_direct,
                    phi_fourier, phi_regularized_direct, smooth_coeff_bound, smooth_coeff_s1, smooth_decomposition,
                    smooth_kernel)
from .ideals import FractionalIdeal, prime_discriminants
from .lattice import EvalPoint, dual_data, enumerate_dual_coords, g_values
from .numberfield import FieldElement, chi_D, field_context, l_value_and_derivative

ACCEPT_DISCS = (5, 13, 17)


@dataclass
class Check:
    label: str
    delta: float
    tol: float
    ok: bool

    def to_json(self) -> dict:
        return {"label": self.label, "delta": self.delta, "tol": self.tol, "pass": self.ok}


@dataclass
class Report:
    name: str
    checks: list[Check] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def add(self, label: str, delta, tol: float, ok: bool | None = None) -> Check:
        delta = float(abs(delta))
        c = Check(label, delta, tol, delta <= tol if ok is None else bool(ok))
        self.checks.append(c)
        return c

    @property
    def ok(self) -> bool:
        return bool(self.checks) and all(c.ok for c in self.checks)

    @property
    def worst(self) -> float:
        return max((c.delta for c in self.checks), default=0.0)

    def to_json(self) -> dict:
        return {"suite": self.name, "pass": self.ok, "checks": [c.to_json() for c in self.checks], "info": self.info}


def _ok(D: int) -> FractionalIdeal:
    return FractionalIdeal.unit(D)


# ------------------------------------------------------------ exact arithmetic
def field_checks(discs=ACCEPT_DISCS) -> Report:
    """Unit norms and the Bernoulli value L(-1, chi_D) against the Hurwitz-zeta route."""
    rep = Report("field")
    for D in discs:
        ctx = field_context(D)
        rep.add(f"D={D} N(eps0)=+-1", abs(ctx.eps0.norm()) - 1, 0)
        rep.add(f"D={D} eps1 totally positive", 0, 0, ctx.eps1.is_totally_positive() and ctx.eps1.norm() == 1)
        L, _ = l_value_and_derivative(D, -1.0)
        rep.add(f"D={D} L(-1) Bernoulli vs Hurwitz", L - float(ctx.L_minus1), 1e-10)
    return rep


def sigma_functional_equation(discs=ACCEPT_DISCS, m_max: int = 50, s_values=(1, 3)) -> Report:
    rep = Report("sigma")
    for D in discs:
        for name in ("OK", "diffinv"):
            a = FractionalIdeal.named(D, name)
            for m in range(1, m_max + 1):
                for s in s_values:
                    p, n = divisor_sigma(a, m, s), divisor_sigma(a, m, -s)
                    exact = p.coefficient == n.coefficient and (p.radicand == n.radicand or p.coefficient == 0)
                    rep.add(f"D={D} a={name} m={m} s={s}", p.value - n.value, 0, exact)
    return rep


def dirichlet_identity(discs=ACCEPT_DISCS, m_max: int = 20, b_max: int = 50) -> Report:
    rep = Report("dirichlet")
    for D in discs:
        a = _ok(D)
        for m in range(1, m_max + 1):
            r = dirichlet_identity_check(a, m, b_max)
            rep.add(f"D={D} m={m}", max(map(abs, r.deltas)), 1e-9, r.ok)
    return rep


def integral_identities(D: int, a: FractionalIdeal, m: int, s_samples=(2,)) -> dict:
    """Exact volume and integral values derived from sigma(a, m, -1)."""
    ctx = field_context(D)
    sig = divisor_sigma(a, m, -1).coefficient
    vol = sig / 24
    q = regularization_constants(a, m).q
    out = {"vol": vol, "q": q, "integral_phi": -2 * vol, "q_zeta": q * ctx.zetaK_minus1,
           "split": (-4 * vol, 2 * vol), "s": {}}
    for s in s_samples:
        s = Fraction(s)
        out["s"][str(s)] = {"integral_phi_s": 2 * vol / (s * (s - 1)), "integral_psi_s": 4 * vol / (s - 1)}
    return out


def integral_chain(discs=ACCEPT_DISCS, m_max: int = 50) -> Report:
    rep = Report("integral_chain")
    d5 = integral_identities(5, _ok(5), 1)
    rep.add("D=5 m=1 vol = 1/12", d5["vol"] - Fraction(1, 12), 0)
    rep.add("D=5 m=1 q = 5", d5["q"] - 5, 0)
    rep.add("D=5 m=1 integral = -1/6", d5["integral_phi"] + Fraction(1, 6), 0)
    for D in discs:
        for m in range(1, m_max + 1):
            d = integral_identities(D, _ok(D), m)
            rep.add(f"D={D} m={m} integral = -q zeta_K(-1)", d["integral_phi"] + d["q_zeta"], 0)
    return rep


def qexp(D: int, a: FractionalIdeal, m_max: int) -> dict:
    """Generating-series coefficients c_m = -sigma(a, m, -1)/12, the normalized
    Eisenstein coefficients and the constant -L(-1, chi_D)/24 linking them."""
    L = field_context(D).L_minus1
    sig = [divisor_sigma(a, m, -1).coefficient for m in range(1, m_max + 1)]
    return {"c": [-s / 12 for s in sig], "eisenstein": [Fraction(1)] + [2 * s / L for s in sig],
            "constant": -L / 24}


def classical_eisenstein(D: int, m_max: int) -> list[Fraction]:
    """1 + (2/L(-1, chi_D)) sum_m sum_{d | m} d (chi_D(d) + chi_D(m/d)) q^m, straight from chi_D."""
    L = field_context(D).L_minus1
    out = [Fraction(1)]
    for m in range(1, m_max + 1):
        s = sum(d * (chi_D(D, d) + chi_D(D, m // d)) for d in range(1, m + 1) if m % d == 0)
        out.append(2 * Fraction(s) / L)
    return out


def qexp_proportionality(discs=ACCEPT_DISCS, m_max: int = 50) -> Report:
    rep = Report("qexp")
    for D in discs:
        e = qexp(D, _ok(D), m_max)
        for m, c in enumerate(e["c"], start=1):
            rep.add(f"D={D} m={m}", c - e["constant"] * e["eisenstein"][m], 0)
        if len(prime_discriminants(D)) == 1:
            # one genus: the Eisenstein coefficients must match the classical divisor formula
            ref = classical_eisenstein(D, m_max)
            worst = max(abs(x - y) for x, y in zip(e["eisenstein"], ref))
            rep.add(f"D={D} Eisenstein vs classical divisor formula", worst, 0)
    return rep


def growth_trend(discs=(5,), m_max: int = 200, slope_max: float = 2.2) -> Report:
    """Least-squares slope of log q(O_K, m) against log m over the m with q != 0."""
    rep = Report("growth")
    for D in discs:
        a = _ok(D)
        pts = [(math.log(m), math.log(float(q))) for m in range(1, m_max + 1)
               if (q := regularization_constants(a, m).q) > 0]
        x, y = np.array(pts).T
        slope = float(np.polyfit(x, y, 1)[0])
        rep.info[f"D={D}"] = {"slope": slope, "points": len(pts)}
        rep.add(f"D={D} slope {slope:.4f}", max(slope - 2, 0.0), slope_max - 2, slope <= slope_max)
    return rep


# ------------------------------------------------------------ Green function routes
# 3x3 grids above the height threshold y1 y2 >= 4m/(D N(a)), away from walls
GRID_X = ((0.1, 0.3), (0.37, -0.21), (0.8, 0.55))
GRID_Y = {
    (5, 1): ((2.0, 1.7), (2.4, 2.1), (2.8, 2.5)),
    (5, 4): ((2.2, 1.9), (2.6, 2.3), (3.0, 2.7)),
    (13, 1): ((2.6, 2.2), (3.0, 2.6), (3.4, 3.0)),
}
GRID_CONFIGS = tuple(GRID_Y)


def grid_points(D: int, m: int) -> list[EvalPoint]:
    return [EvalPoint(complex(x1, y1), complex(x2, y2)) for (y1, y2) in GRID_Y[(D, m)] for (x1, x2) in GRID_X]


def green_two_route(configs=GRID_CONFIGS, tol: float = 1e-5, t: Truncation | None = None) -> Report:
    rep = Report("green2route")
    t = t or Truncation()
    for D, m in configs:
        a = _ok(D)
        for z in grid_points(D, m):
            f = phi_fourier(a, m, z, t)
            r = phi_regularized_direct(a, m, z, t)
            rep.add(f"D={D} m={m} z={z.z1:.2f},{z.z2:.2f}", f.value - r.value, tol)
            rep.info.setdefault("tails", []).append({"fourier": f.tail_bound, "extrapolation": r.tail_bound})
    return rep


def laplace_equation(configs=GRID_CONFIGS, tol: float = 1e-4, t: Truncation | None = None) -> Report:
    """Finite-difference Delta_j of the Fourier route against q(a, m), j = 1, 2."""
    rep = Report("laplace")
    t = t or Truncation()
    for D, m in configs:
        a = _ok(D)
        q = float(regularization_constants(a, m).q)
        for z in grid_points(D, m)[::4]:
            fg = FourierGreen(a, m, z.y, t)
            for j in (1, 2):
                rep.add(f"D={D} m={m} j={j} z={z.z1:.2f},{z.z2:.2f}", laplace_fd(fg, z, j) - q, tol)
    return rep


# (D, m, coordinate row (a0, k, s, t) of a vector with det = m/D, z)
EIGEN_SAMPLES = ((5, 1, (-1, 0, 1, -2), EvalPoint(0.2 + 0.9j, -0.1 + 1.3j)),
                 (5, 1, (-2, -1, 0, -3), EvalPoint(0.2 + 0.9j, -0.1 + 1.3j)),
                 (13, 1, (0, -1, -1, 2), EvalPoint(-0.3 + 0.8j, 0.25 + 1.6j)))


def single_term_eigen(s: float = 1.5, tol: float = 1e-4) -> Report:
    """Delta_j Q_{s-1}(1 + 2 g(A, z)) = s(s-1) times the term, for single vectors A."""
    rep = Report("eigen")
    for D, m, row, z0 in EIGEN_SAMPLES:
        a = _ok(D)
        if dual_data(a, m).vector(*row).det != Fraction(m, D):
            raise AssertionError(f"{row} does not have determinant m/D")
        X = np.array([row], dtype=np.int64)

        def term(z, X=X, a=a, m=m):
            return float(sf.legendre_q_of_g(s, g_values(a, m, X, z))[0])

        base = term(z0)
        for j in (1, 2):
            lap = laplace_fd(term, z0, j)
            rep.add(f"D={D} A={row} j={j}", (lap - s * (s - 1) * base) / abs(base), tol)
    return rep


# Points chosen to maximize the smallest g(A, z) under y1 y2 >= 4m/D (Nelder-Mead, frozen)
SMOOTH_POINTS = {
    (5, 1): EvalPoint(0.5911 + 1.7163j, 0.5133 + 0.4661j),
    (5, 4): EvalPoint(0.0993 + 1.1174j, 0.6567 + 2.8638j),
    (13, 1): EvalPoint(0.1661 + 3.1951j, 0.8278 + 0.2490j),
}


def smooth_series(configs=GRID_CONFIGS, N: int = 30, s: float = 2.0, tol: float = 1e-8) -> Report:
    """Partial sums of Phi_n against the direct lattice sum on the same vector set,
    and finiteness of Psi on a point of T(O_K, 5) (D = 5, z = (i, i))."""
    rep = Report("smooth")
    t = Truncation()
    for D, m in configs:
        a = _ok(D)
        z = SMOOTH_POINTS[(D, m)]
        direct = phi_direct(a, m, s, z, t).value
        parts = smooth_decomposition(a, m, s, z, N, t)
        rep.add(f"D={D} m={m} N={N}", sum(parts) - direct, tol)
        longer = smooth_decomposition(a, m, s, z, 4 * N, t)
        rep.info[f"D={D} m={m}"] = {"delta_N": sum(parts) - direct, f"delta_{4 * N}": sum(longer) - direct}
    psi = smooth_kernel(_ok(5), 5, s, EvalPoint(1j, 1j), t).value
    rep.add("Psi finite at (i, i) on T(O_K, 5)", 0, 0, math.isfinite(psi) and psi > 0)
    return rep


# ------------------------------------------------------------ quadratures and series
def quadrature_checks(seed: int = 0) -> Report:
    rep = Report("quadrature")
    for s in (1.5, 2.0):
        val, err = sf.reference_integrals("core_green", s=s)
        rep.add(f"core integral s={s}", val - 4 * math.pi / (s - 1), 1e-3)
    O5 = _ok(5)
    for s, B, y in ((1.5, 0.2, (1.0, 2.0)), (2.0, 0.2, (2.0, 2.0))):
        closed = fourier_coeff_b(s, B, O5, None, y, kernel="smooth")
        quad = fourier_quadrature(s, B, O5, y, kernel="smooth")
        rep.add(f"smooth constant coefficient s={s} B={B} y={y}", closed - quad, 1e-6)
    rng = random.Random(seed)
    dual = O5.trace_dual()
    for _ in range(10):
        nu = FieldElement(5, 0, 0, 1)
        while nu.is_zero():
            nu = dual.element(rng.randint(-3, 3), rng.randint(-3, 3))
        y = (rng.uniform(0.4, 2.0), rng.uniform(0.4, 2.0))
        B = rng.uniform(0.05, 0.5)
        c = smooth_coeff_s1(B, O5, nu, y)
        bound = smooth_coeff_bound(B, O5, nu, y)
        rep.add(f"bound nu={nu} y=({y[0]:.3f},{y[1]:.3f}) B={B:.3f}", max(abs(c) - bound, 0.0), 0.0)
    return rep


def hypergeometric_sum(s_values=(1.5, 2.0, 2.5 + 0.5j), n_max: int = 200, tol: float = 1e-10) -> Report:
    rep = Report("hypergeometric")
    for s in s_values:
        raw, acc = sf.unit_sum_partials(s, n_max)
        exact = 1 / (s * (s - 1))
        rep.add(f"s={s} extrapolated partial sums", acc - exact, tol)
        rep.info[f"s={s}"] = {"raw_partial_sum_delta": abs(raw - exact)}
    return rep


# ------------------------------------------------------------ Borcherds products
def borcherds_suite(seed: int = 0) -> Report:
    rep = Report("borcherds")
    rng = random.Random(seed)
    a = _ok(5)
    for _ in range(4):
        z = EvalPoint(complex(rng.uniform(-1, 1), rng.uniform(0.7, 1.5)), complex(rng.uniform(-1, 1), rng.uniform(0.7, 1.5)))
        w_ = local_product(a, 1, z, form="weyl")
        d_ = local_product(a, 1, z, form="direct")
        rep.add(f"weyl vs direct z={z.z1:.2f},{z.z2:.2f}", abs(w_ - d_) / abs(w_), 1e-10)
    inv = invariance_check(a, 1, 2, samples=5, seed=seed)
    rep.add("Psi^2 translation", inv["translation_delta"], 1e-9)
    rep.add("Psi^2 unit", inv["unit_delta"], 1e-9)
    mult = multiplicity_table(a, 1)[0].multiplicity
    rep.add("tr(rho A_0) = 1", mult - 1, 0)
    n = 2
    slopes = slope_profile(a, 1, 0, n, 0.4 + 0.2j, [10.0 ** -k for k in range(3, 8)])
    expected = n * float(mult)
    rep.add("vanishing-order slope", (slopes[-1] - expected) / expected, 0.05)
    rep.info["slopes"] = slopes
    return rep


SUITES = {
    "field": lambda o: [field_checks(o["discs"])],
    "dirichlet": lambda o: [dirichlet_identity(o["discs"], min(o["mmax"], 20) if o["mmax_default"] else o["mmax"], o["bmax"])],
    "sigma": lambda o: [sigma_functional_equation(o["discs"], o["mmax"]), qexp_proportionality(o["discs"], o["mmax"])],
    "green2route": lambda o: [green_two_route(o["configs"], t=o["trunc"]), smooth_series(o["configs"])],
    "laplace": lambda o: [laplace_equation(o["configs"], t=o["trunc"]), single_term_eigen()],
    "borcherds": lambda o: [borcherds_suite(o["seed"])],
    "integrals": lambda o: [integral_chain(o["discs"], o["mmax"]), quadrature_checks(o["seed"]), hypergeometric_sum()],
    "growth": lambda o: [growth_trend(o["discs"], o["mmax_growth"])],
}
