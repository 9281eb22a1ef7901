"""Exact arithmetic in a real quadratic field K = Q(sqrt(D)).

Elements are stored as (p + q*sqrt(D)) / r with integers p, q, r and r > 0,
always in lowest terms.  The real embedding uses the positive square root,
the second embedding is the Galois conjugate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, total_ordering
from typing import Union

from .errors import InputError, PrecisionError

Rational = Union[int, Fraction]


def is_fundamental_discriminant(D: int) -> bool:
    """True for fundamental discriminants of real quadratic fields."""
    if D <= 1 or math.isqrt(D) ** 2 == D:
        return False
    if D % 4 == 1:
        return _squarefree(D)
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and _squarefree(m)
    return False


def _squarefree(n: int) -> bool:
    p = 2
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        p += 1
    return True


def check_discriminant(D: int) -> int:
    if not isinstance(D, int) or not is_fundamental_discriminant(D):
        raise InputError(f"{D!r} is not a fundamental discriminant of a real quadratic field")
    return D


def _sign_of(p: int, q: int, D: int) -> int:
    """Exact sign of p + q*sqrt(D)."""
    if q == 0:
        return (p > 0) - (p < 0)
    if p == 0:
        return (q > 0) - (q < 0)
    if (p > 0) == (q > 0):
        return 1 if p > 0 else -1
    # opposite signs: the larger magnitude wins
    lhs, rhs = p * p, D * q * q
    if lhs == rhs:
        return 0
    if lhs > rhs:
        return 1 if p > 0 else -1
    return 1 if q > 0 else -1


@total_ordering
class FieldElement:
    """Exact element (p + q*sqrt(D)) / r of Q(sqrt(D))."""

    __slots__ = ("_p", "_q", "_r", "_D")

    def __init__(self, D: int, p: int = 0, q: int = 0, r: int = 1) -> None:
        if r == 0:
            raise ZeroDivisionError("denominator r must be nonzero")
        if r < 0:
            p, q, r = -p, -q, -r
        g = math.gcd(math.gcd(p, q), r)
        if g > 1:
            p, q, r = p // g, q // g, r // g
        self._p, self._q, self._r, self._D = p, q, r, D

    # construction helpers
    @classmethod
    def rational(cls, D: int, x: Rational) -> FieldElement:
        x = Fraction(x)
        return cls(D, x.numerator, 0, x.denominator)

    @classmethod
    def sqrt_d(cls, D: int) -> FieldElement:
        return cls(D, 0, 1, 1)

    @classmethod
    def omega(cls, D: int) -> FieldElement:
        """The second integral basis element (D + sqrt(D)) / 2."""
        return cls(D, D, 1, 2)

    @classmethod
    def from_coords(cls, D: int, u: Rational, v: Rational) -> FieldElement:
        """u + v*omega for rational u, v."""
        u, v = Fraction(u), Fraction(v)
        # u + v(D + sqrt D)/2 = (2u + vD + v sqrt D) / 2
        num_p = 2 * u + v * D
        num_q = v
        den = math.lcm(num_p.denominator, num_q.denominator)
        return cls(D, int(num_p * den), int(num_q * den), 2 * den)

    @classmethod
    def from_json(cls, D: int, obj) -> FieldElement:
        if isinstance(obj, dict):
            return cls(D, int(obj["p"]), int(obj["q"]), int(obj.get("r", 1)))
        p, q, r = (list(obj) + [1])[:3]
        return cls(D, int(p), int(q), int(r))

    def to_json(self) -> dict:
        return {"p": self._p, "q": self._q, "r": self._r}

    @property
    def p(self) -> int:
        return self._p

    @property
    def q(self) -> int:
        return self._q

    @property
    def r(self) -> int:
        return self._r

    @property
    def D(self) -> int:
        return self._D

    def _coerce(self, other) -> FieldElement:
        if isinstance(other, FieldElement):
            if other._D != self._D:
                raise InputError("elements of different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return FieldElement.rational(self._D, other)
        return NotImplemented

    def __add__(self, other) -> FieldElement:
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        r = self._r * o._r
        return FieldElement(self._D, self._p * o._r + o._p * self._r, self._q * o._r + o._q * self._r, r)

    __radd__ = __add__

    def __neg__(self) -> FieldElement:
        return FieldElement(self._D, -self._p, -self._q, self._r)

    def __sub__(self, other) -> FieldElement:
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other) -> FieldElement:
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o - self

    def __mul__(self, other) -> FieldElement:
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        D = self._D
        p = self._p * o._p + D * self._q * o._q
        q = self._p * o._q + self._q * o._p
        return FieldElement(D, p, q, self._r * o._r)

    __rmul__ = __mul__

    def __truediv__(self, other) -> FieldElement:
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o.is_zero():
            raise ZeroDivisionError("division by zero field element")
        n = o._p * o._p - self._D * o._q * o._q
        # x / y = x * (p - q sqrt D) * r / (p^2 - D q^2)
        num = self * FieldElement(self._D, o._p * o._r, -o._q * o._r, 1)
        return FieldElement(self._D, num._p, num._q, num._r * n)

    def __rtruediv__(self, other) -> FieldElement:
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o / self

    def __pow__(self, k: int) -> FieldElement:
        if k < 0:
            return FieldElement.rational(self._D, 1) / (self ** (-k))
        result = FieldElement.rational(self._D, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conj(self) -> FieldElement:
        return FieldElement(self._D, self._p, -self._q, self._r)

    def norm(self) -> Fraction:
        return Fraction(self._p * self._p - self._D * self._q * self._q, self._r * self._r)

    def trace(self) -> Fraction:
        return Fraction(2 * self._p, self._r)

    def is_zero(self) -> bool:
        return self._p == 0 and self._q == 0

    def is_rational(self) -> bool:
        return self._q == 0

    def to_fraction(self) -> Fraction:
        if self._q:
            raise InputError(f"{self} is not rational")
        return Fraction(self._p, self._r)

    def sign(self) -> int:
        return _sign_of(self._p, self._q, self._D)

    def is_totally_positive(self) -> bool:
        return self.sign() > 0 and _sign_of(self._p, -self._q, self._D) > 0

    def coords(self) -> tuple[Fraction, Fraction]:
        """Coordinates (u, v) with self = u + v*omega."""
        v = Fraction(2 * self._q, self._r)
        u = Fraction(self._p, self._r) - v * self._D / 2
        return u, v

    def is_integral(self) -> bool:
        u, v = self.coords()
        return u.denominator == 1 and v.denominator == 1

    def embeddings(self) -> tuple[float, float]:
        """Both real embeddings, computed without catastrophic cancellation."""
        s = math.sqrt(self._D)
        a = self._p + self._q * s
        b = self._p - self._q * s
        if self._p != 0 and self._q != 0:
            nrm = float(self.norm()) * self._r * self._r
            if (self._p > 0) != (self._q > 0):
                a = nrm / b
            else:
                b = nrm / a
        return a / self._r, b / self._r

    def __float__(self) -> float:
        return self.embeddings()[0]

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            return self._q == 0 and Fraction(self._p, self._r) == other
        if isinstance(other, FieldElement):
            return (self._D, self._p, self._q, self._r) == (other._D, other._p, other._q, other._r)
        return NotImplemented

    def __lt__(self, other) -> bool:
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return (o - self).sign() > 0

    def __hash__(self) -> int:
        return hash((self._D, self._p, self._q, self._r))

    def __repr__(self) -> str:
        return f"FieldElement(D={self._D}, p={self._p}, q={self._q}, r={self._r})"

    def __str__(self) -> str:
        body = f"{self._p}{self._q:+}√{self._D}" if self._q else f"{self._p}"
        return body if self._r == 1 else f"({body})/{self._r}"


def fundamental_units(D: int) -> tuple[FieldElement, FieldElement]:
    """Return (eps0, eps1): the smallest unit > 1 and the smallest totally positive unit > 1."""
    check_discriminant(D)
    # units are (p + q sqrt D)/2 with p^2 - D q^2 = +-4 and p = qD mod 2
    q = 1
    while True:
        best = None
        for target in (-4, 4):
            p2 = D * q * q + target
            if p2 > 0:
                p = math.isqrt(p2)
                if p * p == p2 and (p - q * D) % 2 == 0:
                    cand = FieldElement(D, p, q, 2)
                    if best is None or cand < best:
                        best = cand
        if best is not None:
            eps0 = best
            break
        q += 1
    eps1 = eps0 if eps0.norm() == 1 else eps0 * eps0
    return eps0, eps1


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n), extended to n <= 0 in the usual way."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 == 1 and a % 8 in (3, 5):
            result = -result
    # Jacobi symbol (a/n) for odd n > 0
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def chi_D(D: int, n: int) -> int:
    """The quadratic character of K, (D/n) as a Kronecker symbol."""
    return kronecker(D, n)


@lru_cache(maxsize=None)
def bernoulli_numbers(n: int) -> tuple[Fraction, ...]:
    """B_0 .. B_n with B_1 = -1/2."""
    B = [Fraction(0)] * (n + 1)
    B[0] = Fraction(1)
    for m in range(1, n + 1):
        B[m] = -sum(math.comb(m + 1, k) * B[k] for k in range(m)) / (m + 1)
    return tuple(B)


@lru_cache(maxsize=None)
def l_value_minus1(D: int) -> Fraction:
    """L(-1, chi_D) = -B_{2,chi}/2 via the generalized Bernoulli number."""
    check_discriminant(D)
    total = Fraction(0)
    for a in range(1, D + 1):
        c = chi_D(D, a)
        if c:
            x = Fraction(a, D)
            total += c * (x * x - x + Fraction(1, 6))
    return -D * total / 2


def _rising_and_derivative(s: float, k: int) -> tuple[float, float]:
    """(s)_k = s(s+1)...(s+k-1) and its s-derivative, stable at integer s."""
    val = 1.0
    der = 0.0
    for i in range(k):
        der = der * (s + i) + val
        val *= s + i
    return val, der


def hurwitz_zeta_and_derivative(s: float, a: float, n_direct: int = 32, n_bernoulli: int = 8,
                                rel_tol: float = 1e-10) -> tuple[float, float]:
    """Hurwitz zeta(s, a) and d/ds zeta(s, a) for real s != 1 by Euler-Maclaurin."""
    if s == 1:
        raise InputError("Hurwitz zeta has a pole at s = 1")
    B = bernoulli_numbers(2 * n_bernoulli + 2)
    val = 0.0
    der = 0.0
    for k in range(n_direct):
        x = k + a
        t = x ** (-s)
        val += t
        der -= math.log(x) * t
    x = n_direct + a
    lx = math.log(x)
    t = x ** (1 - s) / (s - 1)
    val += t
    der += -lx * t - x ** (1 - s) / (s - 1) ** 2
    t = 0.5 * x ** (-s)
    val += t
    der -= lx * t
    last = 0.0
    for j in range(1, n_bernoulli + 2):
        coef = float(B[2 * j]) / math.factorial(2 * j)
        rise, drise = _rising_and_derivative(s, 2 * j - 1)
        power = x ** (-s - 2 * j + 1)
        term = coef * rise * power
        dterm = coef * (drise * power - lx * rise * power)
        if j == n_bernoulli + 1:
            last = abs(term) + abs(dterm)
            break
        val += term
        der += dterm
    # the first omitted term bounds the remainder for real s once x > |s|
    if last > rel_tol * max(abs(val), 1e-300) and last > 1e-300:
        raise PrecisionError(f"Euler-Maclaurin remainder {last:.3e} exceeds tolerance at s={s}")
    return val, der


def l_value_and_derivative(D: int, s: float, n_direct: int = 32, n_bernoulli: int = 8) -> tuple[float, float]:
    """L(s, chi_D) and its s-derivative for real s != 1."""
    check_discriminant(D)
    val = 0.0
    der = 0.0
    for a in range(1, D + 1):
        c = chi_D(D, a)
        if c:
            z, dz = hurwitz_zeta_and_derivative(s, a / D, n_direct, n_bernoulli)
            val += c * z
            der += c * dz
    scale = D ** (-s)
    lD = math.log(D)
    return scale * val, scale * (der - lD * val)


@dataclass(frozen=True)
class FieldContext:
    D: int
    eps0: FieldElement
    eps1: FieldElement
    L_minus1: Fraction
    zetaK_minus1: Fraction

    @property
    def sqrt_d(self) -> FieldElement:
        return FieldElement.sqrt_d(self.D)

    def one(self) -> FieldElement:
        return FieldElement.rational(self.D, 1)

    def element(self, p: int, q: int = 0, r: int = 1) -> FieldElement:
        return FieldElement(self.D, p, q, r)


@lru_cache(maxsize=None)
def field_context(D: int) -> FieldContext:
    eps0, eps1 = fundamental_units(D)
    L = l_value_minus1(D)
    return FieldContext(D, eps0, eps1, L, -L / 12)
