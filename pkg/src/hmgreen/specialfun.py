"""Scalar special functions: Gamma, Beta, digamma, Gauss 2F1, Legendre Q_{s-1},
Bessel I, J, K of real order, and two reference integrals.

Everything here is written out directly; scipy is used only for the adaptive
quadrature behind `reference_integrals`, which serve as independent oracles.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Union

from .errors import DomainError, InputError, PrecisionError

Number = Union[float, complex]


@dataclass(frozen=True)
class PrecisionPolicy:
    rel_tol: float = 1e-12
    max_terms: int = 10_000

    def __post_init__(self) -> None:
        if not self.rel_tol > 0:
            raise InputError("rel_tol must be positive")
        if self.max_terms < 16:
            raise InputError("max_terms must be at least 16")


DEFAULT_POLICY = PrecisionPolicy()

# Lanczos approximation, g = 7, n = 9
_LANCZOS_G = 7
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _is_nonpositive_integer(z: Number) -> bool:
    z = complex(z)
    return z.imag == 0 and z.real <= 0 and z.real == math.floor(z.real)


def loggamma(z: Number) -> complex:
    """Principal-branch-free log Gamma, valid as exp(loggamma) = Gamma."""
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise DomainError(f"Gamma has a pole at {z.real:g}")
    if z.real < 0.5:
        # reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
        return cmath.log(math.pi / cmath.sin(math.pi * z)) - loggamma(1 - z)
    z -= 1
    x = _LANCZOS[0]
    for i in range(1, _LANCZOS_G + 2):
        x += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return 0.5 * math.log(2 * math.pi) + (z + 0.5) * cmath.log(t) - t + cmath.log(x)


def gamma(z: Number) -> Number:
    if isinstance(z, (int, float)) or (isinstance(z, complex) and z.imag == 0):
        x = float(complex(z).real)
        if _is_nonpositive_integer(x):
            raise DomainError(f"Gamma has a pole at {x:g}")
        if x == math.floor(x) and x <= 30:
            return float(math.factorial(int(x) - 1))
        if x >= 0.5:
            return cmath.exp(loggamma(x)).real
        return math.pi / (math.sin(math.pi * x) * gamma(1 - x))
    return cmath.exp(loggamma(z))


def beta(a: Number, b: Number) -> Number:
    val = cmath.exp(loggamma(a) + loggamma(b) - loggamma(complex(a) + complex(b)))
    if complex(a).imag == 0 and complex(b).imag == 0:
        # sign of the real Beta follows the Gamma signs
        sign = 1.0
        for v in (a, b):
            if complex(v).real < 0:
                sign *= math.copysign(1.0, gamma(complex(v).real))
        if complex(a).real + complex(b).real < 0:
            sign *= math.copysign(1.0, gamma(complex(a).real + complex(b).real))
        return sign * abs(val)
    return val


def digamma(z: Number) -> Number:
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise DomainError(f"digamma has a pole at {z.real:g}")
    acc = 0j
    if z.real < 0.5:
        return digamma(1 - z) - math.pi / cmath.tan(math.pi * z)
    while abs(z) < 12:
        acc -= 1 / z
        z += 1
    inv2 = 1 / (z * z)
    series = inv2 * (1 / 12 - inv2 * (1 / 120 - inv2 * (1 / 252 - inv2 * (1 / 240 - inv2 / 132))))
    res = acc + cmath.log(z) - 0.5 / z - series
    return res


def _real_if_possible(v: complex, *params) -> Number:
    if all(complex(p).imag == 0 for p in params):
        return v.real
    return v


def _series_2f1(a, b, c, x, policy: PrecisionPolicy) -> complex:
    term = 1 + 0j
    total = 1 + 0j
    n = 0
    ax = abs(x)
    nmin = abs(complex(a)) + abs(complex(b)) + abs(complex(c)) + 2
    while True:
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * x
        total += term
        n += 1
        if n > nmin and ax < 1:
            ratio = abs((a + n) * (b + n) / ((c + n) * (n + 1))) * ax
            if ratio < 1:
                tail = abs(term) * ratio / (1 - ratio)
                if tail <= 0.01 * policy.rel_tol * abs(total):
                    return total
        if term == 0:
            return total
        if n >= policy.max_terms:
            raise PrecisionError(f"2F1 series did not converge within {policy.max_terms} terms at x={x}")


def _log_case_2f1(a, b, x, policy: PrecisionPolicy) -> complex:
    """2F1(a, b; a+b; x) for x near 1 (the c - a - b = 0 logarithmic case)."""
    w = 1 - x
    lw = math.log(w)
    pref = cmath.exp(loggamma(a + b) - loggamma(a) - loggamma(b))
    coef = 1 + 0j
    psi1, psia, psib = digamma(1), digamma(a), digamma(b)
    total = 0j
    n = 0
    while True:
        term = coef * (2 * psi1 - psia - psib - lw)
        total += term
        coef *= (a + n) * (b + n) / ((n + 1) ** 2) * w
        psi1 += 1 / (n + 1)
        psia += 1 / (a + n)
        psib += 1 / (b + n)
        n += 1
        if n > 4 and abs(coef) * (abs(lw) + 10) < policy.rel_tol * abs(total) * (1 - w):
            return pref * total
        if n >= policy.max_terms:
            raise PrecisionError("logarithmic 2F1 expansion did not converge")


def hyp2f1(a: Number, b: Number, c: Number, x: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> Number:
    """Gauss hypergeometric function for real x in (-1, 1).

    |x| <= 1/2 sums the power series.  x < -1/2 goes through the Pfaff
    transformation; x > 1/2 uses the connection formula to 1 - x, including
    the logarithmic case c = a + b.
    """
    if _is_nonpositive_integer(c):
        raise DomainError("c must not be a nonpositive integer")
    x = float(x)
    if not -1 < x < 1:
        raise DomainError("hyp2f1 is implemented for -1 < x < 1")
    a, b, c = complex(a), complex(b), complex(c)
    if x == 0:
        return _real_if_possible(1 + 0j, a, b, c)
    if x < -0.5:
        # Pfaff: (1-x)^(-a) 2F1(a, c-b; c; x/(x-1))
        val = (1 - x) ** (-a) * complex(hyp2f1(a, c - b, c, x / (x - 1), policy))
        return _real_if_possible(val, a, b, c)
    if x <= 0.5:
        return _real_if_possible(_series_2f1(a, b, c, x, policy), a, b, c)
    diff = c - a - b
    if abs(diff) < 1e-14:
        return _real_if_possible(_log_case_2f1(a, b, x, policy), a, b, c)
    if diff.imag == 0 and abs(diff.real - round(diff.real)) < 1e-12:
        # integer difference other than zero: plain series with more terms
        return _real_if_possible(_series_2f1(a, b, c, x, policy), a, b, c)
    w = 1 - x

    def ratio(top, bottom):
        # 1/Gamma vanishes at the poles of Gamma
        if any(_is_nonpositive_integer(v) for v in bottom):
            return 0j
        return cmath.exp(sum(loggamma(v) for v in top) - sum(loggamma(v) for v in bottom))

    g1 = ratio((c, diff), (c - a, c - b))
    g2 = ratio((c, -diff), (a, b))
    val = g1 * _series_2f1(a, b, 1 - diff, w, policy) + g2 * w ** diff * _series_2f1(c - a, c - b, 1 + diff, w, policy)
    return _real_if_possible(val, a, b, c)


def legendre_q(s: Number, x: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> Number:
    """Q_{s-1}(x) for x > 1 and Re(s) > 1/2 (s = 1 uses the closed form)."""
    x = float(x)
    if not x > 1:
        raise DomainError(f"Q_(s-1)(x) needs x > 1, got {x}")
    if complex(s) == 1:
        return 0.5 * math.log((x + 1) / (x - 1))
    if complex(s).real <= 0.5:
        raise DomainError("legendre_q needs Re(s) > 1/2")
    s = complex(s)
    u = 2 / (1 + x)
    pref = cmath.exp(2 * loggamma(s) - loggamma(2 * s) - math.log(2)) * u ** s
    return _real_if_possible(pref * complex(hyp2f1(s, s, 2 * s, u, policy)), s)


def legendre_q_series_coefficients(s: Number, n_terms: int) -> list[Number]:
    """c_n = Gamma(s+n)^2 / (Gamma(2s+n) n!) so that
    Q_{s-1}(1+2g) = 1/2 sum_n c_n (1+g)^(-n-s)."""
    s = complex(s)
    c = cmath.exp(2 * loggamma(s) - loggamma(2 * s))
    out = []
    for n in range(n_terms):
        out.append(_real_if_possible(c, s))
        c *= (s + n) ** 2 / ((2 * s + n) * (n + 1))
    return out


def unit_sum_partials(s: Number, n_max: int = 200) -> tuple[Number, Number]:
    """Partial sum to n_max of sum_n c_n / (s + n - 1) (c_n as in
    `legendre_q_series_coefficients`), which tends to 1/(s(s-1)), and the
    polynomial extrapolation in 1/N of the partial sums at N = n_max/5, ..., n_max.

    The terms fall off like n^-2 only, so the raw partial sum is off by about 1/n_max.
    """
    if n_max < 40 or n_max % 20:
        raise InputError("n_max must be a multiple of 20, at least 40")
    c = legendre_q_series_coefficients(s, n_max + 1)
    partial, acc = [], 0
    for n in range(n_max + 1):
        acc += c[n] / (s + n - 1)
        partial.append(acc)
    nodes = list(range(n_max, n_max // 5 - 1, -n_max // 10))
    xs = [1 / N for N in nodes]
    p = [partial[N] for N in nodes]
    for k in range(1, len(xs)):
        for i in range(len(xs) - k):
            p[i] = (xs[i] * p[i + 1] - xs[i + k] * p[i]) / (xs[i] - xs[i + k])
    return partial[n_max], p[0]


def legendre_q_of_g(s: Number, g, policy: PrecisionPolicy = DEFAULT_POLICY):
    """Q_{s-1}(1 + 2g) for an array of g > 0.

    Entries with g >= 1 use the series in u = 1/(1+g) <= 1/2 summed for all of
    them at once; the rest go through `legendre_q` one by one.
    """
    import numpy as np

    g = np.asarray(g, dtype=float)
    if g.size and not (g > 0).all():
        raise DomainError("Q_(s-1)(1+2g) needs g > 0")
    s = complex(s)
    real = s.imag == 0
    out = np.zeros(g.shape, dtype=float if real else complex)
    if s == 1:
        return 0.5 * np.log1p(1 / g)
    far = g >= 1
    if far.any():
        u = 1 / (1 + g[far])
        # 1/2 sum_n c_n u^(n+s); u <= 1/2, terms ratio -> u
        c = cmath.exp(2 * loggamma(s) - loggamma(2 * s))
        upow = u ** (s.real if real else s)
        total = np.zeros(u.shape, dtype=out.dtype)
        c0 = abs(c)
        umax = float(u.max())
        n = 0
        while True:
            total += (c.real if real else c) * upow
            c *= (s + n) ** 2 / ((2 * s + n) * (n + 1))
            upow = upow * u
            n += 1
            # relative size of the next term against the leading one, geometric tail
            if n > abs(s) ** 2 + 2 and abs(c) / c0 * umax ** n / (1 - umax) <= 0.01 * policy.rel_tol:
                break
            if n >= policy.max_terms:
                raise PrecisionError("Q series did not converge")
        out[far] = 0.5 * total
    for idx in np.flatnonzero(~far):
        out.flat[idx] = legendre_q(s, 1 + 2 * g.flat[idx], policy)
    return out


# ---------------------------------------------------------------- Bessel
J_ASYMPTOTIC_THRESHOLD = 30.0
OVERFLOW_THRESHOLD = 700.0


def _check_x(x: float) -> float:
    x = float(x)
    if not x > 0:
        raise DomainError("Bessel functions here need x > 0")
    if x > OVERFLOW_THRESHOLD:
        raise OverflowError(f"argument {x} beyond the supported range x <= {OVERFLOW_THRESHOLD}")
    return x


def _power_series_ij(kappa: float, x: float, sign: int, policy: PrecisionPolicy) -> float:
    half = x / 2
    term = math.exp(kappa * math.log(half) - loggamma(kappa + 1).real)
    total = term
    q = sign * half * half
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + kappa))
        total += term
        if abs(term) <= policy.rel_tol * 1e-3 * abs(total) and k > half:
            return total
        if k > policy.max_terms:
            raise PrecisionError("Bessel power series did not converge")


def _bessel_i(kappa: float, x: float, policy: PrecisionPolicy) -> float:
    if kappa == 0.5:
        return math.sqrt(2 / (math.pi * x)) * math.sinh(x)
    if x > 60:
        # large-argument expansion; terms (4k^2 - mu)... alternate in effect
        mu = 4 * kappa * kappa
        term, total, k = 1.0, 1.0, 0
        while True:
            k += 1
            nxt = -term * (mu - (2 * k - 1) ** 2) / (k * 8 * x)
            if abs(nxt) >= abs(term) or abs(nxt) < 1e-17 * abs(total):
                break
            term = nxt
            total += term
        return math.exp(x) / math.sqrt(2 * math.pi * x) * total
    return _power_series_ij(kappa, x, +1, policy)


def _bessel_j_asymptotic(kappa: float, x: float) -> float:
    """Hankel expansion J = sqrt(2/(pi x)) (P cos chi - Q sin chi), summed to the smallest term."""
    mu = 4 * kappa * kappa
    p, q = 1.0, 0.0
    term = 1.0
    prev = float("inf")
    k = 0
    while True:
        k += 1
        term *= (mu - (2 * k - 1) ** 2) / (k * 8 * x)
        if abs(term) >= prev or term == 0:
            break
        prev = abs(term)
        i, odd = divmod(k, 2)
        sign = -1.0 if i % 2 else 1.0
        if odd:
            q += sign * term
        else:
            p += sign * term
        if abs(term) < 1e-18:
            break
    chi = x - (kappa / 2 + 0.25) * math.pi
    return math.sqrt(2 / (math.pi * x)) * (p * math.cos(chi) - q * math.sin(chi))


def _bessel_j_miller(n: int, x: float) -> float:
    """Integer-order J_n(x) by downward recurrence normalised with
    J_0 + 2 sum J_2k = 1."""
    start = 2 * ((max(n, int(x)) + 30 + int(math.sqrt(40 * max(n, int(x)) + 1))) // 2)
    jp1, j = 0.0, 1e-300
    norm = 0.0
    result = 0.0
    for k in range(start, 0, -1):
        jm1 = 2 * k / x * j - jp1
        jp1, j = j, jm1
        if abs(j) > 1e250:
            j *= 1e-250
            jp1 *= 1e-250
            norm *= 1e-250
            result *= 1e-250
        if k - 1 == n:
            result = j
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2 * j
    norm += j
    return result / norm


def _bessel_j(kappa: float, x: float, policy: PrecisionPolicy) -> float:
    if kappa == 0.5:
        return math.sqrt(2 / (math.pi * x)) * math.sin(x)
    if x > J_ASYMPTOTIC_THRESHOLD:
        return _bessel_j_asymptotic(kappa, x)
    if kappa == int(kappa) and kappa >= 0 and x > 2:
        return _bessel_j_miller(int(kappa), x)
    if x > 12:
        raise PrecisionError(
            f"J of non-integer order {kappa} at x={x} between the series range (<= 12) "
            f"and the asymptotic threshold ({J_ASYMPTOTIC_THRESHOLD})")
    return _power_series_ij(kappa, x, -1, policy)


def _bessel_k_integral(kappa: float, x: float, policy: PrecisionPolicy) -> float:
    # K_v(x) = int_0^inf exp(-x cosh t) cosh(v t) dt; the trapezoid rule converges
    # exponentially for this doubly decaying integrand.
    tmax = math.acosh(max(1.0, (x + 745) / x)) + 1
    best = None
    h = 0.25
    while True:
        n = int(tmax / h) + 1
        total = 0.5 * math.exp(-x)
        for i in range(1, n + 1):
            t = i * h
            total += math.exp(-x * math.cosh(t) + abs(kappa) * t) * 0.5 * (1 + math.exp(-2 * abs(kappa) * t))
        val = total * h
        if best is not None and abs(val - best) <= policy.rel_tol * abs(val):
            return val
        best = val
        h /= 2
        if h < 1e-4:
            raise PrecisionError("K quadrature did not converge")


def _bessel_k(kappa: float, x: float, policy: PrecisionPolicy) -> float:
    kappa = abs(kappa)
    if kappa == 0.5:
        return math.sqrt(math.pi / (2 * x)) * math.exp(-x)
    if kappa == 1.5:
        return math.sqrt(math.pi / (2 * x)) * math.exp(-x) * (1 + 1 / x)
    return _bessel_k_integral(kappa, x, policy)


def bessel(kind: str, kappa: float, x: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    """Bessel I, J or K of real order kappa at x > 0."""
    kappa = float(kappa)
    x = _check_x(x)
    if kind == "I":
        return _bessel_i(kappa, x, policy)
    if kind == "J":
        return _bessel_j(kappa, x, policy)
    if kind == "K":
        return _bessel_k(kappa, x, policy)
    raise InputError(f"unknown Bessel kind {kind!r}")


# ---------------------------------------------------------------- integrals
def reference_integrals(which: str, **params) -> tuple[float, float]:
    """Adaptive quadrature oracles, returning (value, absolute error estimate).

    beta_line(a, s): integral over R of (x^2 + a^2)^(-s)
    core_green(s): integral over H of (1 + |z - i|^2 / (4y))^(-s) dx dy / y^2
    """
    import warnings

    from scipy import integrate

    if which == "beta_line":
        a, s = float(params["a"]), float(params["s"])
        if not (a > 0 and s > 0.5):
            raise DomainError("beta_line needs a > 0 and s > 1/2")
        val, err = integrate.quad(lambda t: (t * t + a * a) ** (-s), -math.inf, math.inf, epsabs=1e-13, epsrel=1e-12, limit=200)
        return val, err
    if which == "core_green":
        s = float(params["s"])
        if not s > 1:
            raise DomainError("core_green needs s > 1")
        # the x-integral has the closed form B(1/2, s-1/2) a^(1-2s) with
        # a^2 = 4y + (y-1)^2 = (y+1)^2 after scaling; keep it numeric in x as well
        def inner(y):
            f = lambda x: (1 + (x * x + (y - 1) ** 2) / (4 * y)) ** (-s) / (y * y)
            with warnings.catch_warnings():
                # far out in y the integrand is below epsabs and quad complains needlessly
                warnings.simplefilter("ignore")
                v, e = integrate.quad(f, -math.inf, math.inf, epsabs=1e-12, epsrel=1e-11, limit=200)
            return v, e

        errs = []

        def outer(y):
            v, e = inner(y)
            errs.append(e)
            return v

        v1, e1 = integrate.quad(outer, 0, 1, epsabs=1e-11, epsrel=1e-10, limit=200)
        v2, e2 = integrate.quad(outer, 1, math.inf, epsabs=1e-11, epsrel=1e-10, limit=200)
        return v1 + v2, e1 + e2 + max(errs, default=0.0)
    raise InputError(f"unknown reference integral {which!r}")
