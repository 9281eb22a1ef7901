"""Exponential sums G^b(a, m, nu), the genus divisor sum sigma(a, m, s), the
regularization constants q(a, m) and L(a, m), and the exact Dirichlet-series
identity linking G^b(a, m, 0) to sigma.
"""
from __future__ import annotations

import cmath
import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import InputError, UnsupportedError
from .ideals import FractionalIdeal, genus_representative, prime_discriminants, quotient_coords
from .lattice import dual_data
from .numberfield import FieldElement, chi_D, field_context, l_value_and_derivative


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def _squarefree_split(n: int) -> tuple[int, int]:
    """n = k^2 * r with r squarefree; returns (k, r)."""
    k, r = 1, 1
    p = 2
    while p * p <= n:
        while n % (p * p) == 0:
            n //= p * p
            k *= p
        if n % p == 0:
            n //= p
            r *= p
        p += 1
    return k, r * n


def mobius(n: int) -> int:
    result = 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            result = -result
        p += 1
    return -result if n > 1 else result


# ------------------------------------------------------------ exponential sums
class GTable:
    """Solutions of D N(lam)/N(a) = -m (mod bD) in a*delta^-1 / b*a, cached per b.

    The phase tr(nu lam' / (N(a) b)) equals T(nu, lam)/(bD) with an integer
    bilinear form T, so every G^b(a, m, nu) is a sum of bD-th roots of unity and
    is accumulated exactly as a histogram of exponents.
    """

    def __init__(self, a: FractionalIdeal, m: int) -> None:
        if m == 0:
            raise InputError("m must be nonzero")
        self.a = a
        self.m = m
        self.data = dual_data(a, abs(m))
        self._solutions: dict[int, np.ndarray] = {}
        self._lock = threading.Lock()

    def solutions(self, b: int) -> np.ndarray:
        sol = self._solutions.get(b)
        if sol is not None:
            return sol
        D = self.a.D
        (A, _, C), _ = quotient_coords(self.a, b, with_list=False)
        qa, qb, qc = self.data.quad
        mod = b * D
        chunks = []
        s = np.arange(A, dtype=np.int64)[None, :]
        step = max(1, 400_000 // A)
        for t0 in range(0, C, step):
            t = np.arange(t0, min(C, t0 + step), dtype=np.int64)[:, None]
            Q = (qa * s * s + qb * s * t + qc * t * t + self.m) % mod
            ti, si = np.nonzero(Q == 0)
            if ti.size:
                chunks.append(np.stack([si, ti + t0], axis=1).astype(np.int64))
        sol = np.concatenate(chunks) if chunks else np.zeros((0, 2), dtype=np.int64)
        with self._lock:
            self._solutions.setdefault(b, sol)
        return sol

    def nu_coefficients(self, nu: FieldElement) -> tuple[int, int]:
        """Integers (T1, T2) with T(nu, s nu1 + t nu2) = s T1 + t T2."""
        D = self.a.D
        n = self.a.norm
        out = []
        for basis_vec in (self.data.nu1, self.data.nu2):
            v = D * (nu * basis_vec.conj()).trace() / n
            if v.denominator != 1:
                raise InputError("nu is not in a*delta^-1")
            out.append(int(v))
        return out[0], out[1]

    def histogram(self, nu: FieldElement, b: int) -> np.ndarray:
        sol = self.solutions(b)
        mod = b * self.a.D
        if nu.is_zero():
            counts = np.zeros(mod, dtype=np.int64)
            counts[0] = len(sol)
            return counts
        T1, T2 = self.nu_coefficients(nu)
        expo = (T1 * sol[:, 0] + T2 * sol[:, 1]) % mod
        return np.bincount(expo, minlength=mod)

    def value(self, nu: FieldElement, b: int) -> complex:
        counts = self.histogram(nu, b)
        mod = len(counts)
        nz = np.nonzero(counts)[0]
        return complex(np.sum(counts[nz] * np.exp(2j * np.pi * nz / mod)))

    def real_values(self, T: tuple[int, int], bs: Sequence[int]) -> np.ndarray:
        """Re G^b for a nu given through its integer pair (T1, T2); G^b(nu) is real
        because the index set is symmetric under lam -> -lam."""
        out = np.empty(len(bs))
        for i, b in enumerate(bs):
            sol = self.solutions(b)
            mod = b * self.a.D
            expo = (T[0] * sol[:, 0] + T[1] * sol[:, 1]) % mod
            out[i] = np.cos(2 * np.pi * expo / mod).sum()
        return out


@lru_cache(maxsize=None)
def g_table(a: FractionalIdeal, m: int) -> GTable:
    return GTable(a, m)


def gsum(a: FractionalIdeal, m: int, nu: FieldElement, b: int) -> complex:
    """G^b(a, m, nu)."""
    if b < 1:
        raise InputError("b must be a positive integer")
    big = a * FractionalIdeal.different_inv(a.D)
    if not nu.is_zero() and nu not in big:
        raise InputError("nu must lie in a*delta^-1")
    return g_table(a, m).value(nu, b)


def gsum_reference(a: FractionalIdeal, m: int, nu: FieldElement, b: int, shift: FieldElement | None = None) -> complex:
    """G^b by the defining sum over explicit coset representatives (optionally
    shifted by an element of b*a), one FieldElement at a time."""
    from .ideals import quotient_reps

    D = a.D
    n = a.norm
    total = 0j
    for lam in quotient_reps(a, b):
        if shift is not None:
            lam = lam + shift
        if ((lam.norm() / n + Fraction(m, D)) / b).denominator != 1:
            continue
        phase = (nu * lam.conj()).trace() / (n * b) if not nu.is_zero() else Fraction(0)
        phase -= math.floor(phase)
        total += cmath.exp(2j * math.pi * float(phase))
    return total


# ------------------------------------------------------------ divisor sums
def _require_odd(D: int) -> None:
    if D % 2 == 0:
        raise UnsupportedError("the genus divisor sum is defined for odd discriminants only")


def divisor_weights(a: FractionalIdeal, m: int) -> dict[int, int]:
    """c_d = prod_p (chi_{D(p)}(d) + chi_{D(p)}(N(c) m / d)) for d | m."""
    D = a.D
    _require_odd(D)
    c = genus_representative(a)
    nc = int(c.norm)
    pds = prime_discriminants(D)
    out = {}
    for d in _divisors(m):
        w = 1
        for dp in pds:
            w *= chi_D(dp, d) + chi_D(dp, nc * abs(m) // d)
        out[d] = w
    return out


@dataclass(frozen=True)
class SigmaValue:
    """sigma(a, m, s) = coefficient * sqrt(radicand) (exact) or a float value."""
    m: int
    s: Fraction | float
    coefficient: Fraction | None
    radicand: int
    float_value: float
    terms: dict = field(default_factory=dict, compare=False)

    @property
    def value(self) -> float:
        return self.float_value

    @property
    def exact(self) -> bool:
        return self.coefficient is not None

    def to_json(self) -> dict:
        out = {"m": self.m, "s": str(self.s), "value": self.float_value}
        if self.exact:
            out["exact"] = {"coefficient": str(self.coefficient), "sqrt": self.radicand}
        return out


def divisor_sigma(a: FractionalIdeal, m: int, s) -> SigmaValue:
    if m == 0:
        raise InputError("m must be nonzero")
    weights = divisor_weights(a, m)
    am = abs(m)
    if isinstance(s, int) or (isinstance(s, Fraction) and s.denominator == 1):
        s = Fraction(s)
        si = int(s)
        core = sum((Fraction(d) ** si * w for d, w in weights.items()), Fraction(0))
        # |m|^((1-s)/2): exact in Q(sqrt|m|)
        e = 1 - si
        if e % 2 == 0:
            coef = Fraction(am) ** (e // 2) * core
            rad = 1
        else:
            k, r = _squarefree_split(am)
            # |m|^(e/2) = |m|^((e-1)/2) * k * sqrt(r)
            coef = Fraction(am) ** ((e - 1) // 2) * k * core
            rad = r
        if coef == 0:
            rad = 1
        terms = {d: w for d, w in weights.items() if w}
        return SigmaValue(m, s, coef, rad, float(coef) * math.sqrt(rad), terms)
    sf = float(s)
    val = am ** ((1 - sf) / 2) * sum(d ** sf * w for d, w in weights.items())
    return SigmaValue(m, sf, None, 1, val, {d: w for d, w in weights.items() if w})


def sigma_derivative(a: FractionalIdeal, m: int, s: float) -> float:
    """d/ds sigma(a, m, s) = sum_d c_d |m|^((1-s)/2) d^s (ln d - ln|m| / 2)."""
    weights = divisor_weights(a, m)
    am = abs(m)
    half_log = 0.5 * math.log(am)
    return sum(w * am ** ((1 - s) / 2) * d ** s * (math.log(d) - half_log) for d, w in weights.items())


def phi_function(a: FractionalIdeal, m: int, s: float) -> float:
    """phi(a, m, s) = -Gamma(s-1/2)/Gamma(3/2-s) sigma(a, m, 1-2s) / L(1-2s, chi_D)."""
    from .specialfun import gamma

    L, _ = l_value_and_derivative(a.D, 1 - 2 * s)
    return -gamma(s - 0.5) / gamma(1.5 - s) * divisor_sigma(a, m, 1 - 2 * s).value / L


@dataclass(frozen=True)
class RegularizationConstants:
    q: Fraction
    L: float | None
    sigma_minus1: Fraction
    note: str = ""


def regularization_constants(a: FractionalIdeal, m: int) -> RegularizationConstants:
    """q(a, m) exactly and L(a, m) as a float (None when sigma(a, m, -1) = 0)."""
    D = a.D
    _require_odd(D)
    ctx = field_context(D)
    sig = divisor_sigma(a, m, -1)
    sig_val = sig.coefficient
    q = -sig_val / ctx.L_minus1
    if sig_val == 0:
        return RegularizationConstants(q, None, sig_val, "sigma(a,m,-1) = 0: L(a,m) left undefined")
    _, Lp = l_value_and_derivative(D, -1.0)
    Lm1 = float(ctx.L_minus1)
    sig_der = sigma_derivative(a, m, -1.0)
    L = float(q) * (2 * Lp / Lm1 - 2 * sig_der / float(sig_val) + math.log(D / float(a.norm)))
    return RegularizationConstants(q, L, sig_val)


# ------------------------------------------------------------ Dirichlet identity
def dirichlet_coefficients(a: FractionalIdeal, m: int, B: int) -> list[int]:
    """Coefficients 1..B of |m|^(-s/2) zeta(s-1) / L(s, chi_D) sigma(a, m, 1-s),
    computed by exact Dirichlet convolution."""
    D = a.D
    weights = divisor_weights(a, m)
    # |m|^(-s/2) sigma(a, m, 1-s) = sum_{d | m} d c_d d^(-s)
    f = [0] * (B + 1)
    for d, w in weights.items():
        if d <= B:
            f[d] += d * w
    g = [0] * (B + 1)  # zeta(s-1) / L(s, chi): (n) * (mu chi)
    mu_chi = [0] + [mobius(n) * chi_D(D, n) for n in range(1, B + 1)]
    for e in range(1, B + 1):
        if mu_chi[e]:
            for k in range(1, B // e + 1):
                g[e * k] += mu_chi[e] * k
    h = [0] * (B + 1)
    for d in range(1, B + 1):
        if f[d]:
            for k in range(1, B // d + 1):
                h[d * k] += f[d] * g[k]
    return h[1:]


@dataclass
class DirichletReport:
    D: int
    m: int
    B: int
    brute: list[int]
    convolution: list[int]

    @property
    def deltas(self) -> list[int]:
        return [x - y for x, y in zip(self.brute, self.convolution)]

    @property
    def ok(self) -> bool:
        return all(d == 0 for d in self.deltas)

    def to_json(self) -> dict:
        return {"D": self.D, "m": self.m, "B": self.B, "max_abs_delta": max(map(abs, self.deltas), default=0),
                "ok": self.ok}


def dirichlet_identity_check(a: FractionalIdeal, m: int, B: int) -> DirichletReport:
    _require_odd(a.D)
    if B < 1:
        raise InputError("B must be at least 1")
    table = g_table(a, m)
    brute = [len(table.solutions(b)) for b in range(1, B + 1)]
    return DirichletReport(a.D, m, B, brute, dirichlet_coefficients(a, m, B))
