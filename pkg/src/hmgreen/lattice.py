"""The quadratic space V of symmetric matrices [[a, lam'], [lam, b]], the lattices
L(a) and L(a)^dual, majorants at points of H^2, vector enumeration and the
Hirzebruch-Zagier data Lambda^+(a, m).

Elements of L(a)^dual are stored through integer coordinates (a0, k, s, t):
A = (1/N(a)) [[a0, lam'], [lam, N(a) k]] with lam = s*nu1 + t*nu2 over the
Hermite basis of a*delta^-1.  The determinant condition det A = m/(N(a) D)
becomes the integer equation D*a0*k - Q(s, t) = m with Q(s, t) = D N(lam)/N(a).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DegenerateInputError, DomainError, InputError
from .ideals import FractionalIdeal
from .numberfield import FieldElement, field_context

WALL_TOL = 1e-12


@dataclass(frozen=True)
class LatticeVector:
    """A = [[a, lam'], [lam, b]] with a, b rational."""
    a: Fraction
    b: Fraction
    lam: FieldElement

    @property
    def det(self) -> Fraction:
        return self.a * self.b - self.lam.norm()

    def __neg__(self) -> LatticeVector:
        return LatticeVector(-self.a, -self.b, -self.lam)

    def matrix(self):
        D = self.lam.D
        return ((FieldElement.rational(D, self.a), self.lam.conj()),
                (self.lam, FieldElement.rational(D, self.b)))

    @classmethod
    def from_matrix(cls, M) -> LatticeVector:
        (m11, m12), (m21, m22) = M
        if not (m11.is_rational() and m22.is_rational() and m12 == m21.conj()):
            raise InputError("matrix is not in V (needs A^T = A')")
        return cls(m11.to_fraction(), m22.to_fraction(), m21)

    def in_lattice(self, ideal: FractionalIdeal) -> bool:
        n = ideal.norm
        return (self.a.denominator == 1 and (self.b / n).denominator == 1
                and (self.lam.is_zero() or self.lam in ideal))

    def in_dual(self, ideal: FractionalIdeal) -> bool:
        n = ideal.norm
        scaled = LatticeVector(self.a * n, self.b * n, self.lam * n)
        dual_lam = ideal * FractionalIdeal.different_inv(ideal.D)
        return (scaled.a.denominator == 1 and (scaled.b / n).denominator == 1
                and (scaled.lam.is_zero() or scaled.lam in dual_lam))

    def embedded(self) -> tuple[float, float, float, float]:
        l1, l2 = self.lam.embeddings() if not self.lam.is_zero() else (0.0, 0.0)
        return float(self.a), float(self.b), l1, l2

    def to_json(self) -> dict:
        return {"a": str(self.a), "b": str(self.b), "lam": self.lam.to_json()}


@dataclass(frozen=True)
class EvalPoint:
    z1: complex
    z2: complex

    def __post_init__(self) -> None:
        if not (self.z1.imag > 0 and self.z2.imag > 0):
            raise DomainError(f"point ({self.z1}, {self.z2}) is not in H^2")

    @classmethod
    def parse(cls, text: str) -> EvalPoint:
        parts = [float(p) for p in text.split(",")]
        if len(parts) != 4:
            raise InputError("expected four numbers x1,y1,x2,y2")
        x1, y1, x2, y2 = parts
        return cls(complex(x1, y1), complex(x2, y2))

    @property
    def x(self) -> tuple[float, float]:
        return self.z1.real, self.z2.real

    @property
    def y(self) -> tuple[float, float]:
        return self.z1.imag, self.z2.imag

    def shifted(self, dz1: complex = 0, dz2: complex = 0) -> EvalPoint:
        return EvalPoint(self.z1 + dz1, self.z2 + dz2)

    def translate(self, mu: FieldElement) -> EvalPoint:
        m1, m2 = mu.embeddings() if not mu.is_zero() else (0.0, 0.0)
        return EvalPoint(self.z1 + m1, self.z2 + m2)


def _divisor_form(A: LatticeVector, z: EvalPoint, conj_first: bool = False) -> complex:
    a, b, l1, l2 = A.embedded()
    z1 = z.z1.conjugate() if conj_first else z.z1
    return b * z1 * z.z2 - l1 * z1 - l2 * z.z2 + a


def h_value(A: LatticeVector, z: EvalPoint) -> float:
    y1, y2 = z.y
    return abs(_divisor_form(A, z)) ** 2 / (4 * y1 * y2)


def h_g_majorant(A: LatticeVector, z: EvalPoint, want_g: bool = True):
    """(h, g, q_z) at z; g is None when not requested."""
    h = h_value(A, z)
    det = float(A.det)
    g = None
    if want_g:
        if A.det == 0:
            raise DomainError("g(A, z) needs det(A) != 0")
        g = h / det
    return h, g, det + 2 * h


def majorant_two_term(A: LatticeVector, z: EvalPoint) -> float:
    """q_z as h + q on the positive definite complement, both from closed forms."""
    y1, y2 = z.y
    return h_value(A, z) + abs(_divisor_form(A, z, conj_first=True)) ** 2 / (4 * y1 * y2)


def _mat_mul(X, Y):
    D = X[0][0].D
    zero = FieldElement(D, 0)
    return tuple(tuple(sum((X[i][k] * Y[k][j] for k in range(2)), zero) for j in range(2)) for i in range(2))


def _as_field_matrix(M, D: int):
    return tuple(tuple(x if isinstance(x, FieldElement) else FieldElement.rational(D, x) for x in row) for row in M)


def sl_action(M, A: LatticeVector) -> LatticeVector:
    """M.A = M A (M')^T."""
    D = A.lam.D
    M = _as_field_matrix(M, D)
    (m11, m12), (m21, m22) = M
    if m11 * m22 - m12 * m21 != 1:
        raise InputError("matrix must have determinant 1")
    Mct = ((m11.conj(), m21.conj()), (m12.conj(), m22.conj()))
    return LatticeVector.from_matrix(_mat_mul(_mat_mul(M, A.matrix()), Mct))


def mobius(M, z: EvalPoint) -> EvalPoint:
    """Componentwise action: first embedding on z1, conjugate entries on z2."""
    D = None
    for row in M:
        for x in row:
            if isinstance(x, FieldElement):
                D = x.D
    M = _as_field_matrix(M, D or 5)
    e = [[x.embeddings() if not x.is_zero() else (0.0, 0.0) for x in row] for row in M]
    out = []
    for j, zj in enumerate((z.z1, z.z2)):
        a, b, c, d = e[0][0][j], e[0][1][j], e[1][0][j], e[1][1][j]
        out.append((a * zj + b) / (c * zj + d))
    return EvalPoint(out[0], out[1])


@dataclass(frozen=True)
class DualLatticeData:
    """Integer data describing L(a)^dual for fixed (a, m)."""
    ideal: FractionalIdeal
    m: int
    nu1: FieldElement
    nu2: FieldElement
    quad: tuple[int, int, int]  # Q(s,t) = A s^2 + B s t + C t^2 = D N(lam)/N(a)

    def lam(self, s: int, t: int) -> FieldElement:
        return s * self.nu1 + t * self.nu2

    def vector(self, a0: int, k: int, s: int, t: int) -> LatticeVector:
        n = self.ideal.norm
        return LatticeVector(Fraction(a0) / n, Fraction(k), self.lam(s, t) / n)


@lru_cache(maxsize=None)
def dual_data(a: FractionalIdeal, m: int) -> DualLatticeData:
    D = a.D
    big = a * FractionalIdeal.different_inv(D)
    n1, n2 = big.basis
    n = a.norm

    def form(x, y):
        v = D * (x * y.conj()).trace() / n
        assert v.denominator == 1
        return int(v)

    A = form(n1, n1) // 2
    C = form(n2, n2) // 2
    B = form(n1, n2)
    return DualLatticeData(a, m, n1, n2, (A, B, C))


def majorant_gram(data: DualLatticeData, z: EvalPoint) -> np.ndarray:
    """Gram matrix of q_z in the coordinates (a0, k, s, t)."""
    n = float(data.ideal.norm)
    y1, y2 = z.y
    e1 = data.nu1.embeddings()
    e2 = data.nu2.embeddings()
    # linear form bz1z2 - lam z1 - lam' z2 + a per coordinate
    ell = np.array([
        1.0 / n,
        z.z1 * z.z2,
        -(e1[0] * z.z1 + e1[1] * z.z2) / n,
        -(e2[0] * z.z1 + e2[1] * z.z2) / n,
    ], dtype=complex)
    H = np.real(np.outer(ell, ell.conj())) / (4 * y1 * y2)
    Dm = np.zeros((4, 4))
    Dm[0, 1] = Dm[1, 0] = 0.5 / n
    Dm[2, 2] = -e1[0] * e1[1] / n ** 2
    Dm[3, 3] = -e2[0] * e2[1] / n ** 2
    Dm[2, 3] = Dm[3, 2] = -0.5 * (e1[0] * e2[1] + e1[1] * e2[0]) / n ** 2
    return Dm + 2 * H


def _q_values(G: np.ndarray, X: np.ndarray) -> np.ndarray:
    return np.einsum("ij,jk,ik->i", X, G, X)


def enumerate_dual_coords(a: FractionalIdeal, m: int, z: EvalPoint, R: float) -> np.ndarray:
    """Integer rows (a0, k, s, t) of all A in L(a)^dual with det A = m/(N(a) D) and q_z(A) <= R."""
    data = dual_data(a, m)
    D = a.D
    A_, B_, C_ = data.quad
    G = majorant_gram(data, z)
    Rm = R * (1 + 1e-9) + 1e-9
    # project out a0: shadow of the ellipsoid on (k, s, t)
    g00 = G[0, 0]
    S = G[1:, 1:] - np.outer(G[1:, 0], G[0, 1:]) / g00
    Sinv = np.linalg.inv(S)
    rows = []
    kmax = math.floor(math.sqrt(Rm * Sinv[0, 0])) + 1
    for k in range(-kmax, kmax + 1):
        # condition on (s, t) given k: complete the square in the 2x2 block
        S2 = S[1:, 1:]
        c2 = S[1:, 0] * k
        center = -np.linalg.solve(S2, c2)
        rest = Rm - (S[0, 0] * k * k - c2 @ np.linalg.solve(S2, c2))
        if rest < 0:
            continue
        S2inv = np.linalg.inv(S2)
        smax = math.sqrt(rest * S2inv[0, 0])
        for s in range(math.floor(center[0] - smax) - 1, math.ceil(center[0] + smax) + 2):
            ds = s - center[0]
            # t-range from S2 restricted to fixed s
            tc = center[1] - S2[1, 0] * ds / S2[1, 1]
            rem = rest - (S2[0, 0] - S2[0, 1] ** 2 / S2[1, 1]) * ds * ds
            if rem < 0:
                continue
            tw = math.sqrt(rem / S2[1, 1])
            t = np.arange(math.floor(tc - tw) - 1, math.ceil(tc + tw) + 2, dtype=np.int64)
            Q = A_ * s * s + B_ * s * t + C_ * t * t
            if k != 0:
                num = m + Q
                ok = num % (D * k) == 0
                if not ok.any():
                    continue
                tt = t[ok]
                a0 = num[ok] // (D * k)
                X = np.stack([a0, np.full_like(tt, k), np.full_like(tt, s), tt], axis=1)
                rows.append(X)
            else:
                for tv in t[Q == -m]:
                    # a0 range from the 1D restriction
                    x = np.array([0.0, 0.0, float(s), float(tv)])
                    lin = G[0] @ x
                    const = x @ G @ x
                    disc = lin * lin - g00 * (const - Rm)
                    if disc < 0:
                        continue
                    lo = (-lin - math.sqrt(disc)) / g00
                    hi = (-lin + math.sqrt(disc)) / g00
                    a0 = np.arange(math.floor(lo) - 1, math.ceil(hi) + 2, dtype=np.int64)
                    X = np.stack([a0, np.zeros_like(a0), np.full_like(a0, s), np.full_like(a0, tv)], axis=1)
                    rows.append(X)
    if not rows:
        return np.zeros((0, 4), dtype=np.int64)
    X = np.concatenate(rows)
    qv = _q_values(G, X.astype(float))
    X = X[qv <= R]
    order = np.lexsort(X.T[::-1])
    return X[order]


def enumerate_dual(a: FractionalIdeal, m: int, z: EvalPoint, R: float) -> list[LatticeVector]:
    data = dual_data(a, m)
    return [data.vector(*map(int, row)) for row in enumerate_dual_coords(a, m, z, R)]


def embedded_coords(a: FractionalIdeal, m: int, X: np.ndarray) -> np.ndarray:
    """Rows (a, b, lam, lam') as floats for integer coordinate rows."""
    data = dual_data(a, m)
    n = float(a.norm)
    e1, e2 = data.nu1.embeddings(), data.nu2.embeddings()
    Xf = X.astype(float)
    lam1 = (Xf[:, 2] * e1[0] + Xf[:, 3] * e2[0]) / n
    lam2 = (Xf[:, 2] * e1[1] + Xf[:, 3] * e2[1]) / n
    return np.stack([Xf[:, 0] / n, Xf[:, 1], lam1, lam2], axis=1)


def g_values(a: FractionalIdeal, m: int, X: np.ndarray, z: EvalPoint) -> np.ndarray:
    """g(A, z) for all coordinate rows at once."""
    E = embedded_coords(a, m, X)
    y1, y2 = z.y
    form = E[:, 1] * z.z1 * z.z2 - E[:, 2] * z.z1 - E[:, 3] * z.z2 + E[:, 0]
    det = m / (float(a.norm) * a.D)
    return np.abs(form) ** 2 / (4 * y1 * y2 * det)


@dataclass(frozen=True)
class HZData:
    ideal: FractionalIdeal
    m: int
    representatives: tuple[FieldElement, ...]
    orbit_unit: FieldElement  # eps0^2

    def orbit(self, lam: FieldElement, k0: int, k1: int) -> list[FieldElement]:
        return [lam * self.orbit_unit ** k for k in range(k0, k1 + 1)]


@lru_cache(maxsize=None)
def lambda_set(a: FractionalIdeal, m: int) -> HZData:
    """Orbit representatives of Lambda^+(a, m) under eps0^2, each the unique
    orbit element with 1 <= lam/|lam'| < eps0^4."""
    D = a.D
    ctx = field_context(D)
    e2 = ctx.eps0 ** 2
    e4 = e2 * e2
    data = dual_data(a, m)
    c = m * float(a.norm) / D
    lam_hi = math.sqrt(c) * float(e2) * (1 + 1e-9)
    # lam in [sqrt c, sqrt c eps0^2), |lam'| = c/lam in (sqrt c / eps0^2, sqrt c]
    v1, v2 = data.nu1.embeddings(), data.nu2.embeddings()
    det = v1[0] * v2[1] - v1[1] * v2[0]
    ss, tt = [], []
    for x1 in (0.0, lam_hi):
        for x2 in (-math.sqrt(c) * (1 + 1e-9), 0.0):
            ss.append((x1 * v2[1] - x2 * v2[0]) / det)
            tt.append((v1[0] * x2 - v1[1] * x1) / det)
    reps = []
    A_, B_, C_ = data.quad
    for s in range(math.floor(min(ss)) - 1, math.ceil(max(ss)) + 2):
        for t in range(math.floor(min(tt)) - 1, math.ceil(max(tt)) + 2):
            if A_ * s * s + B_ * s * t + C_ * t * t != -m:
                continue
            lam = data.lam(s, t)
            if lam.sign() <= 0:
                continue
            if (lam + lam.conj()).sign() >= 0 and (lam + lam.conj() * e4).sign() < 0:
                reps.append(lam)
    reps.sort(key=lambda x: x.embeddings()[0])
    return HZData(a, m, tuple(reps), e2)


def _weight_trace(lam: FieldElement, w) -> float | Fraction:
    if isinstance(w, FieldElement):
        return (lam * w).trace()
    l1, l2 = lam.embeddings()
    return l1 * w[0] + l2 * w[1]


@dataclass(frozen=True)
class WeylData:
    reduced: tuple[FieldElement, ...]
    rho: FieldElement
    walls: tuple[FieldElement, ...] = field(default=())


def reduced_and_weyl(a: FractionalIdeal, m: int, w, strict: bool = False) -> WeylData:
    """Reduced representatives R(a, m, w) and the Weyl vector rho(a, m, w).

    w is either a pair of positive floats or a totally positive FieldElement
    (meaning its embedding pair, evaluated exactly).  Elements with
    tr(lam w) = 0 count as reduced, following the >= 0 rule; they are listed in
    `walls`, and strict=True turns a wall hit into DegenerateInputError.
    """
    D = a.D
    if isinstance(w, FieldElement):
        if not w.is_totally_positive():
            raise InputError("weight element must be totally positive")
        wnorm = math.hypot(*w.embeddings())
    else:
        w = (float(w[0]), float(w[1]))
        if not (w[0] > 0 and w[1] > 0):
            raise InputError("weight vector must be positive")
        wnorm = math.hypot(*w)
    hz = lambda_set(a, m)
    e2 = hz.orbit_unit
    reduced, walls = [], []
    for lam0 in hz.representatives:
        lam = lam0
        # the pairing increases along the orbit; walk to the first index with pairing >= 0
        while _weight_trace(lam, w) < 0:
            lam = lam * e2
        while True:
            prev = lam / e2
            if _weight_trace(prev, w) >= 0:
                lam = prev
            else:
                break
        tr = _weight_trace(lam, w)
        exact_zero = isinstance(tr, Fraction) and tr == 0
        if exact_zero or abs(float(tr)) < WALL_TOL * math.hypot(*lam.embeddings()) * wnorm:
            walls.append(lam)
        reduced.append(lam)
    if walls and strict:
        raise DegenerateInputError(f"weight vector lies on the wall of lambda = {walls[0]}")
    rho = sum(reduced, FieldElement(D, 0)) / (e2 - 1)
    return WeylData(tuple(reduced), rho, tuple(walls))
