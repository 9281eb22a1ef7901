"""Fractional ideals of O_K as explicit rank-2 Z-modules.

An ideal is stored as (1/den) * J where J is an integral lattice in Hermite
normal form over the basis {1, omega}, omega = (D + sqrt D)/2:
J = Z*a + Z*(b + c*omega) with 0 <= b < a and c > 0.  This form is unique,
so equality and hashing compare (D, den, a, b, c).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import InputError, SearchExhaustedError, UnsupportedError
from .numberfield import FieldElement, check_discriminant, chi_D, field_context


def _egcd(x: int, y: int) -> tuple[int, int, int]:
    """(g, s, t) with s*x + t*y = g = gcd(x, y) >= 0."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while y:
        k = x // y
        x, y = y, x - k * y
        s0, s1 = s1, s0 - k * s1
        t0, t1 = t1, t0 - k * t1
    if x < 0:
        x, s0, t0 = -x, -s0, -t0
    return x, s0, t0


def _hnf_with_coeffs(vectors: Sequence[tuple[int, int]]):
    """Hermite basis {(a,0), (b,c)} of the span of integer vectors.

    Also returns, for both basis vectors, integer coefficient lists expressing
    them in terms of the input vectors.
    """
    n = len(vectors)
    a, ca = 0, [0] * n
    cur, ccur = None, None
    for i, (u, v) in enumerate(vectors):
        e = [0] * n
        e[i] = 1
        if v == 0:
            if u:
                g, s, t = _egcd(a, u)
                ca = [s * x + t * y for x, y in zip(ca, e)]
                a = g
            continue
        if cur is None:
            if v < 0:
                u, v, e = -u, -v, [-x for x in e]
            cur, ccur = (u, v), e
            continue
        cu, cv = cur
        g, s, t = _egcd(cv, v)
        new = (s * cu + t * u, g)
        cnew = [s * x + t * y for x, y in zip(ccur, e)]
        ku = (v // g) * cu - (cv // g) * u
        ck = [(v // g) * x - (cv // g) * y for x, y in zip(ccur, e)]
        if ku:
            g2, s2, t2 = _egcd(a, ku)
            ca = [s2 * x + t2 * y for x, y in zip(ca, ck)]
            a = g2
        cur, ccur = new, cnew
    if cur is None or a == 0:
        raise InputError("vectors do not span a rank-2 lattice")
    b, c = cur
    k = b // a
    b -= k * a
    ccur = [x - k * y for x, y in zip(ccur, ca)]
    return (a, b, c), ca, ccur


def _common_coords(elements: Iterable[FieldElement]) -> tuple[int, list[tuple[int, int]]]:
    coords = [x.coords() for x in elements]
    den = 1
    for u, v in coords:
        den = math.lcm(den, u.denominator, v.denominator)
    return den, [(int(u * den), int(v * den)) for u, v in coords]


class FractionalIdeal:
    """Nonzero fractional ideal of O_K in canonical Hermite form."""

    __slots__ = ("D", "den", "a", "b", "c")

    def __init__(self, D: int, den: int, a: int, b: int, c: int) -> None:
        g = math.gcd(math.gcd(den, a), math.gcd(b, c))
        self.D = D
        self.den, self.a, self.b, self.c = den // g, a // g, b // g, c // g

    @classmethod
    def from_generators(cls, D: int, gens: Sequence[FieldElement]) -> FractionalIdeal:
        """The O_K-module generated by the given elements."""
        omega = FieldElement.omega(D)
        elems = []
        for g in gens:
            if not g.is_zero():
                elems += [g, g * omega]
        if not elems:
            raise InputError("zero module is not a fractional ideal")
        den, vecs = _common_coords(elems)
        (a, b, c), _, _ = _hnf_with_coeffs(vecs)
        return cls(D, den, a, b, c)

    @classmethod
    def from_basis(cls, D: int, basis: Sequence[FieldElement]) -> FractionalIdeal:
        """Ideal with the given Z-basis; the O_K-closure is checked."""
        den, vecs = _common_coords(basis)
        (a, b, c), _, _ = _hnf_with_coeffs(vecs)
        ideal = cls(D, den, a, b, c)
        if ideal != cls.from_generators(D, basis):
            raise InputError("basis does not span an O_K-module")
        return ideal

    @classmethod
    def unit(cls, D: int) -> FractionalIdeal:
        check_discriminant(D)
        return cls(D, 1, 1, 0, 1)

    @classmethod
    def principal(cls, x: FieldElement) -> FractionalIdeal:
        return cls.from_generators(x.D, [x])

    @classmethod
    def different(cls, D: int) -> FractionalIdeal:
        return cls.principal(FieldElement.sqrt_d(D))

    @classmethod
    def different_inv(cls, D: int) -> FractionalIdeal:
        return cls.principal(1 / FieldElement.sqrt_d(D))

    @classmethod
    def named(cls, D: int, name: str) -> FractionalIdeal:
        table = {"OK": cls.unit, "diff": cls.different, "diffinv": cls.different_inv}
        if name not in table:
            raise InputError(f"unknown ideal name {name!r}; use one of {sorted(table)}")
        return table[name](D)

    @classmethod
    def from_json(cls, D: int, obj) -> FractionalIdeal:
        if isinstance(obj, str):
            return cls.named(D, obj)
        basis = [FieldElement.from_json(D, e) for e in obj["basis"]]
        return cls.from_basis(D, basis)

    def to_json(self) -> dict:
        return {"basis": [e.to_json() for e in self.basis]}

    @property
    def key(self) -> tuple[int, int, int, int, int]:
        return (self.D, self.den, self.a, self.b, self.c)

    def __eq__(self, other) -> bool:
        return isinstance(other, FractionalIdeal) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        b1, b2 = self.basis
        return f"FractionalIdeal(D={self.D}, basis=[{b1}, {b2}])"

    @property
    def basis(self) -> tuple[FieldElement, FieldElement]:
        D = self.D
        return (FieldElement.from_coords(D, Fraction(self.a, self.den), 0),
                FieldElement.from_coords(D, Fraction(self.b, self.den), Fraction(self.c, self.den)))

    @property
    def norm(self) -> Fraction:
        return Fraction(self.a * self.c, self.den * self.den)

    @property
    def volume(self) -> float:
        return float(self.norm) * math.sqrt(self.D)

    def is_integral(self) -> bool:
        return self.den == 1

    def coords(self, x: FieldElement) -> tuple[Fraction, Fraction]:
        """Rational (s, t) with x = s*beta1 + t*beta2."""
        u, v = x.coords()
        t = v * self.den / self.c
        s = (u * self.den - t * self.b) / self.a
        return s, t

    def __contains__(self, x: FieldElement) -> bool:
        s, t = self.coords(x)
        return s.denominator == 1 and t.denominator == 1

    def contains_ideal(self, other: FractionalIdeal) -> bool:
        return all(x in self for x in other.basis)

    def element(self, s: int, t: int) -> FieldElement:
        b1, b2 = self.basis
        return s * b1 + t * b2

    def __mul__(self, other) -> FractionalIdeal:
        if isinstance(other, FractionalIdeal):
            gens = [x * y for x in self.basis for y in other.basis]
            return FractionalIdeal.from_generators(self.D, gens)
        if isinstance(other, (int, Fraction, FieldElement)):
            return FractionalIdeal.from_generators(self.D, [x * other for x in self.basis])
        return NotImplemented

    __rmul__ = __mul__

    def conj(self) -> FractionalIdeal:
        return FractionalIdeal.from_generators(self.D, [x.conj() for x in self.basis])

    def inverse(self) -> FractionalIdeal:
        # a * a' = N(a) O_K
        return self.conj() * (1 / self.norm)

    def __truediv__(self, other: FractionalIdeal) -> FractionalIdeal:
        return self * other.inverse()

    def __pow__(self, k: int) -> FractionalIdeal:
        base = self if k >= 0 else self.inverse()
        result = FractionalIdeal.unit(self.D)
        for _ in range(abs(k)):
            result = result * base
        return result

    def trace_dual(self) -> FractionalIdeal:
        return (self * FractionalIdeal.different(self.D)).inverse()

    def norm_dual(self) -> FractionalIdeal:
        return (self * FractionalIdeal.different(self.D)).conj().inverse()


def ideal_arith(a: FractionalIdeal, b: FractionalIdeal | None, op: str) -> FractionalIdeal:
    if op == "product":
        if b is None:
            raise InputError("product needs two ideals")
        return a * b
    if op == "inverse":
        return a.inverse()
    if op == "trace_dual":
        return a.trace_dual()
    if op == "norm_dual":
        return a.norm_dual()
    raise InputError(f"unknown ideal operation {op!r}")


def relative_hnf(big: FractionalIdeal, small: FractionalIdeal) -> tuple[int, int, int]:
    """Hermite basis (A,0),(B,C) of `small` written in the Z-basis of `big`."""
    vecs = []
    for x in small.basis:
        s, t = big.coords(x)
        if s.denominator != 1 or t.denominator != 1:
            raise InputError("second ideal is not contained in the first")
        vecs.append((int(s), int(t)))
    (A, B, C), _, _ = _hnf_with_coeffs(vecs)
    return A, B, C


def quotient_coords(a: FractionalIdeal, b: int, with_list: bool = True):
    """Coset representatives of a*delta^-1 / b*a as integer coordinates (s, t)
    over the basis of a*delta^-1, reduced into the Hermite parallelotope of b*a.

    Returns ((A, B, C), reps) where (A,0), (B,C) is the Hermite basis of b*a in
    those coordinates; the representatives are 0 <= s < A, 0 <= t < C.
    """
    if b < 1:
        raise InputError("b must be a positive integer")
    big = a * FractionalIdeal.different_inv(a.D)
    A, B, C = relative_hnf(big, a * b)
    reps = [(i, j) for j in range(C) for i in range(A)] if with_list else None
    return (A, B, C), reps


def quotient_reps(a: FractionalIdeal, b: int) -> list[FieldElement]:
    """b^2 * D coset representatives of a*delta^-1 / b*a."""
    big = a * FractionalIdeal.different_inv(a.D)
    _, coords = quotient_coords(a, b)
    return [big.element(s, t) for s, t in coords]


def prime_discriminants(D: int) -> list[int]:
    """The prime discriminants D(p) = +-p (= 1 mod 4) for the odd primes p | D."""
    if D % 2 == 0:
        raise UnsupportedError("prime discriminant decomposition is only used for odd D")
    out = []
    n, p = D, 3
    while n > 1:
        if n % p == 0:
            out.append(p if p % 4 == 1 else -p)
            while n % p == 0:
                n //= p
        p += 2
    return out


def _small_vectors(bound: int):
    pts = [(s, t) for s in range(-bound, bound + 1) for t in range(-bound, bound + 1) if (s, t) != (0, 0)]
    pts.sort(key=lambda st: (abs(st[0]) + abs(st[1]), st))
    return pts


@lru_cache(maxsize=None)
def genus_representative(a: FractionalIdeal, search_bound: int = 12) -> FractionalIdeal:
    """Integral ideal c with gcd(N(c), D) = 1 in the genus of a (odd D only).

    c = lambda*a with lambda in a^-1 of positive norm, so N(lambda)N(a) = N(c).
    """
    D = a.D
    if D % 2 == 0:
        raise UnsupportedError("genus representatives are only defined here for odd D")
    if a.is_integral() and math.gcd(a.norm.numerator, D) == 1:
        return a
    inv = a.inverse()
    for s, t in _small_vectors(search_bound):
        lam = inv.element(s, t)
        n = lam.norm()
        if n <= 0:
            continue
        c_norm = n * a.norm
        if c_norm.denominator == 1 and math.gcd(c_norm.numerator, D) == 1:
            return a * lam
    raise SearchExhaustedError(f"no genus representative found within coefficient bound {search_bound}")


def genus_characters(a: FractionalIdeal) -> tuple[int, ...]:
    """(chi_{D(p)}(N(c)))_p for the genus representative c of a."""
    c = genus_representative(a)
    n = int(c.norm)
    return tuple(chi_D(dp, n) for dp in prime_discriminants(a.D))


def same_genus(a: FractionalIdeal, b: FractionalIdeal) -> bool:
    return genus_characters(a) == genus_characters(b)


@dataclass(frozen=True)
class BoundaryCycle:
    """Boundary points A_0..A_{r-1} of the convex hull of the totally positive
    points of a lattice, with b_k defined by A_{k-1} + A_{k+1} = b_k A_k."""
    lattice: FractionalIdeal
    points: tuple[FieldElement, ...]
    self_intersections: tuple[int, ...]
    unit: FieldElement

    @property
    def length(self) -> int:
        return len(self.points)

    def point(self, k: int) -> FieldElement:
        """A_k for any integer k, using A_{k+r} = unit * A_k."""
        r = self.length
        q, i = divmod(k, r)
        return self.points[i] * self.unit ** q


def _orient(x: FieldElement, y: FieldElement) -> int:
    """Sign of x*y' - x'*y; negative means y has the larger ratio y/y'."""
    d = x * y.conj() - x.conj() * y
    return d.sign() if d.q else 0


def _first_positive_on_line(base: FieldElement, step: FieldElement) -> int:
    """Smallest integer j with base + j*step totally positive (step totally positive)."""
    e_base = base.embeddings()
    e_step = step.embeddings()
    j = math.floor(max(-e_base[0] / e_step[0], -e_base[1] / e_step[1])) + 1
    while not (base + j * step).is_totally_positive():
        j += 1
    while (base + (j - 1) * step).is_totally_positive():
        j -= 1
    return j


def _min_trace_point(L: FractionalIdeal) -> FieldElement:
    """A totally positive point of L with minimal trace (smallest ratio on ties)."""
    start = FieldElement.rational(L.D, Fraction(L.a, L.den))
    T = float(start.trace())
    b1, b2 = L.basis
    e1, e2 = b1.embeddings(), b2.embeddings()
    det = e1[0] * e2[1] - e1[1] * e2[0]
    # x = s*b1 + t*b2 with both embeddings in [0, T]
    corners = [(0.0, 0.0), (T, 0.0), (0.0, T), (T, T)]
    ss, tt = [], []
    for x, xc in corners:
        ss.append((x * e2[1] - xc * e2[0]) / det)
        tt.append((e1[0] * xc - e1[1] * x) / det)
    best = start
    for s in range(math.floor(min(ss)) - 1, math.ceil(max(ss)) + 2):
        for t in range(math.floor(min(tt)) - 1, math.ceil(max(tt)) + 2):
            x = s * b1 + t * b2
            if x.is_totally_positive():
                if x.trace() < best.trace() or (x.trace() == best.trace() and _orient(x, best) < 0):
                    best = x
    return best


@lru_cache(maxsize=None)
def boundary_cycle(a_inv: FractionalIdeal) -> BoundaryCycle:
    """One period of the boundary points of the convex hull of the totally positive
    points of the lattice a_inv, ordered by increasing ratio x/x'."""
    L = a_inv
    A0 = _min_trace_point(L)
    s0, t0 = (int(v) for v in L.coords(A0))
    g, x, y = _egcd(s0, t0)
    if g != 1:
        raise SearchExhaustedError("minimal-trace point is not primitive")
    X = L.element(-y, x)  # integer determinant s0*x - t0*(-y) = 1
    if _orient(A0, X) > 0:
        X = -X
    j = _first_positive_on_line(X, A0)
    pts = [A0, X + j * A0]
    bs = []
    while True:
        prev, cur = pts[-2], pts[-1]
        bk = _first_positive_on_line(-prev, cur)
        bs.append(bk)
        nxt = bk * cur - prev
        ratio = cur / A0
        if ratio.is_integral() and (1 / ratio).is_integral() and len(pts) > 1:
            break
        pts.append(nxt)
        if len(pts) > 10_000:
            raise SearchExhaustedError("boundary cycle did not close")
    # pts = A0..A_r with A_r = unit*A0; bs = b_1..b_r and b_r = b_0
    r = len(pts) - 1
    unit = pts[-1] / A0
    b_list = [bs[-1]] + bs[:-1]
    return BoundaryCycle(L, tuple(pts[:r]), tuple(b_list[:r]), unit)


def totally_positive_basis(a: FractionalIdeal) -> tuple[FieldElement, FieldElement]:
    """A Z-basis (alpha, beta) of a with both elements totally positive and
    alpha*beta' - alpha'*beta < 0."""
    cyc = boundary_cycle(a)
    alpha, beta = cyc.point(0), cyc.point(1)
    return alpha, beta


def _express(target: FieldElement, gens: Sequence[FieldElement]) -> list[int]:
    """Integer coefficients n with sum n_i gens_i = target (gens span a lattice)."""
    den, vecs = _common_coords(list(gens) + [target])
    tvec = vecs[-1]
    vecs = vecs[:-1]
    idx = [i for i, v in enumerate(vecs) if v != (0, 0)]
    (A, B, C), ca, cbc = _hnf_with_coeffs([vecs[i] for i in idx])
    u, v = tvec
    if v % C:
        raise SearchExhaustedError("target not in the span of the generators")
    t = v // C
    rem = u - t * B
    if rem % A:
        raise SearchExhaustedError("target not in the span of the generators")
    k = rem // A
    out = [0] * len(gens)
    for pos, i in enumerate(idx):
        out[i] = t * cbc[pos] + k * ca[pos]
    return out


def sl_membership(M, a: FractionalIdeal, b: FractionalIdeal) -> bool:
    """M in SL(a, b) = [[a, (ab)^-1], [ab, a^-1]] with determinant one."""
    (m11, m12), (m21, m22) = M
    ab = a * b
    if m11 * m22 - m12 * m21 != 1:
        return False
    checks = [(m11, a), (m12, ab.inverse()), (m21, ab), (m22, a.inverse())]
    return all(x.is_zero() or x in ideal for x, ideal in checks)


def cusp_transport(kappa: tuple[FieldElement, FieldElement], b: FractionalIdeal):
    """Matrix M in SL(a, b), a = alpha*O_K + beta*b^-1, with M(infinity) = kappa.

    Returns (M, a)."""
    alpha, beta = kappa
    D = b.D
    if alpha.is_zero() and beta.is_zero():
        raise InputError("cusp (0:0) is not a point of P^1(K)")
    gens_a = [g for g in (alpha,) if not g.is_zero()]
    a_parts = []
    if gens_a:
        a_parts.append(FractionalIdeal.principal(alpha))
    if not beta.is_zero():
        a_parts.append(FractionalIdeal.principal(beta) * b.inverse())
    a_gens = [x for part in a_parts for x in part.basis]
    a = FractionalIdeal.from_generators(D, a_gens)
    e = a.inverse().basis
    f = (a * b).inverse().basis
    gens = [alpha * e[0], alpha * e[1], -beta * f[0], -beta * f[1]]
    n = _express(FieldElement.rational(D, 1), gens)
    x = n[0] * e[0] + n[1] * e[1]
    y = n[2] * f[0] + n[3] * f[1]
    M = ((alpha, y), (beta, x))
    if not sl_membership(M, a, b):
        raise SearchExhaustedError("transport matrix failed the membership check")
    return M, a
