"""Green function evaluators.

Three routes to the same objects:

* `phi_direct` sums Q_{s-1}(1 + 2g(A, z)) over the enumerated dual lattice
  vectors of fixed determinant (Re s > 1).
* `phi_fourier` evaluates the regularized function at s = 1 through its closed
  Fourier expansion: constants, the Borcherds log block and the I_1 / J_1 Bessel
  blocks over nu in a*delta^-1.
* `phi_regularized_direct` evaluates the Fourier expansion of Phi(a, m, s, z)
  at several real s > 1 with general-order Bessel functions, removes the pole
  q/(s-1) and extrapolates the remainder polynomially to s = 1.

`smooth_decomposition` splits the lattice sum into the terms Phi_n built from
the smooth kernel sum Psi(a, m, s, z) = sum_A (1 + g(A, z))^-s.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import specialfun as sf
from .arithseries import divisor_sigma, g_table, regularization_constants
from .borcherds import log_norm_block, orbit_embeddings
from .errors import DegenerateInputError, DomainError, InputError, PrecisionError, SingularityError, UnsupportedError
from .ideals import FractionalIdeal
from .lattice import EvalPoint, WALL_TOL, dual_data, enumerate_dual_coords, g_values, lambda_set
from .numberfield import FieldElement, chi_D

GUARD = 1e-9


@dataclass(frozen=True)
class Truncation:
    majorant_radius: float = 200.0
    b_max: int = 40
    nu_trace_max: float = 5.0
    n_max: int = 30
    s_sequence: tuple[float, ...] = tuple(1 + 0.1 * 2.0 ** (-j) for j in range(7))
    tol: float = 1e-6

    def __post_init__(self) -> None:
        if self.majorant_radius <= 0 or self.b_max < 1 or self.nu_trace_max <= 0 or self.n_max < 0 or self.tol <= 0:
            raise InputError("truncation parameters must be positive")
        seq = self.s_sequence
        if len(seq) < 3 or any(x <= 1 for x in seq) or any(b >= a for a, b in zip(seq, seq[1:])):
            raise InputError("s_sequence must be strictly decreasing, > 1, with at least 3 points")

    @classmethod
    def from_overrides(cls, text: str | None) -> Truncation:
        """Parse 'key=value,key=value' overrides, e.g. 'b_max=60,nu_trace_max=6'."""
        if not text:
            return cls()
        kw = {}
        names = {f for f in cls.__dataclass_fields__}
        for item in text.split(","):
            key, _, val = item.partition("=")
            key = key.strip()
            if key not in names or key == "s_sequence":
                raise InputError(f"unknown truncation key {key!r}")
            kw[key] = int(val) if key in ("b_max", "n_max") else float(val)
        return cls(**kw)


@dataclass
class GreenValue:
    value: float
    tail_bound: float
    parts: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        def conv(v):
            if isinstance(v, complex):
                return [v.real, v.imag]
            return v
        return {"value": conv(self.value), "tail_bound": self.tail_bound,
                "parts": {k: conv(v) for k, v in self.parts.items()}}


def _require_odd(D: int) -> None:
    if D % 2 == 0:
        raise UnsupportedError("the regularization constants need an odd discriminant")


# ------------------------------------------------------------ direct lattice sums
def _enumerate(a: FractionalIdeal, m: int, z: EvalPoint, t: Truncation):
    X = enumerate_dual_coords(a, m, z, t.majorant_radius)
    g = g_values(a, m, X, z)
    return X, g


def _guard(a: FractionalIdeal, m: int, X: np.ndarray, g: np.ndarray) -> None:
    if len(g) and g.min() < GUARD:
        i = int(np.argmin(g))
        A = dual_data(a, m).vector(*map(int, X[i]))
        raise SingularityError(f"z lies on T(a, m): g(A, z) = {g[i]:.3g} for A = {A.to_json()}")


def _direct_tail(s: complex, g: np.ndarray, G: float) -> float:
    """Estimate of the terms with g > G, from the empirical counting density
    of the enumerated vectors (about linear in g) and Q_{s-1}(1+2g) ~ c_s g^-s."""
    if len(g) == 0 or G <= 2:
        return math.inf
    s_re = complex(s).real
    upper = g[g > G / 2]
    kappa = len(upper) / (G / 2) if len(upper) else len(g) / G
    c = abs(math.exp((2 * sf.loggamma(complex(s)) - sf.loggamma(2 * complex(s))).real)) / 2
    return 1.25 * c * kappa * G ** (1 - s_re) / (s_re - 1)


def phi_direct(a: FractionalIdeal, m: int, s, z: EvalPoint, t: Truncation | None = None) -> GreenValue:
    """Phi(a, m, s, z) as a truncated lattice sum over q_z(A) <= majorant_radius."""
    t = t or Truncation()
    if complex(s).real <= 1:
        raise DomainError("the lattice sum converges for Re(s) > 1 only")
    X, g = _enumerate(a, m, z, t)
    _guard(a, m, X, g)
    det = m / (float(a.norm) * a.D)
    G = (t.majorant_radius / det - 1) / 2
    vals = sf.legendre_q_of_g(s, g)
    value = vals.sum()
    value = float(value) if np.isrealobj(vals) else complex(value)
    return GreenValue(value, _direct_tail(s, g, G), {"terms": int(len(g)), "min_g": float(g.min()) if len(g) else None})


def smooth_kernel(a: FractionalIdeal, m: int, s, z: EvalPoint, t: Truncation | None = None) -> GreenValue:
    """Psi(a, m, s, z) = sum_A (1 + g(A, z))^-s; finite on T(a, m) as well."""
    t = t or Truncation()
    X, g = _enumerate(a, m, z, t)
    det = m / (float(a.norm) * a.D)
    G = (t.majorant_radius / det - 1) / 2
    value = np.sum((1 + g) ** (-complex(s) if complex(s).imag else -float(complex(s).real)))
    s_re = complex(s).real
    upper = g[g > G / 2]
    kappa = len(upper) / (G / 2) if len(upper) else 0.0
    tail = 1.25 * kappa * G ** (1 - s_re) / (s_re - 1) if s_re > 1 else math.inf
    return GreenValue(value, tail, {"terms": int(len(g))})


def smooth_decomposition(a: FractionalIdeal, m: int, s, z: EvalPoint, N: int, t: Truncation | None = None) -> list:
    """(Phi_0, ..., Phi_N) with Phi_n = c_n Psi(a, m, s+n, z) / 2 on the same
    enumerated vector set as `phi_direct`."""
    t = t or Truncation()
    X, g = _enumerate(a, m, z, t)
    coeffs = sf.legendre_q_series_coefficients(s, N + 1)
    base = 1 / (1 + g)
    sc = complex(s)
    power = base ** (sc.real if sc.imag == 0 else sc)
    out = []
    for n in range(N + 1):
        out.append(coeffs[n] * power.sum() / 2)
        power = power * base
    return [float(np.real(v)) if sc.imag == 0 else complex(v) for v in out]


# ------------------------------------------------------------ nu enumeration
@dataclass(frozen=True)
class NuTerm:
    nu: FieldElement
    emb: tuple[float, float]
    T: tuple[int, int]


def nu_list(a: FractionalIdeal, y, trace_max: float) -> list[NuTerm]:
    """nu in a*delta^-1 with nu > 0 in the first embedding, nu' != 0 and
    |nu| y1 + |nu'| y2 <= trace_max."""
    data = dual_data(a, 1)
    gt_T = g_table(a, 1).nu_coefficients
    v1, v2 = data.nu1.embeddings(), data.nu2.embeddings()
    det = v1[0] * v2[1] - v1[1] * v2[0]
    r1, r2 = trace_max / y[0], trace_max / y[1]
    ss, tt = [], []
    for x1 in (-r1, r1):
        for x2 in (-r2, r2):
            ss.append((x1 * v2[1] - x2 * v2[0]) / det)
            tt.append((v1[0] * x2 - v1[1] * x1) / det)
    out = []
    for s in range(math.floor(min(ss)) - 1, math.ceil(max(ss)) + 2):
        for t in range(math.floor(min(tt)) - 1, math.ceil(max(tt)) + 2):
            e1 = s * v1[0] + t * v2[0]
            e2 = s * v1[1] + t * v2[1]
            if not e1 > 0 or abs(e1) * y[0] + abs(e2) * y[1] > trace_max:
                continue
            nu = data.lam(s, t)
            if nu.conj().is_zero():
                continue
            out.append(NuTerm(nu, nu.embeddings(), gt_T(nu)))
    out.sort(key=lambda n: (abs(n.emb[0]) * y[0] + abs(n.emb[1]) * y[1], n.emb))
    return out


def _check_walls(a: FractionalIdeal, m: int, z: EvalPoint) -> None:
    hz = lambda_set(a, m)
    if not hz.representatives:
        return
    E = orbit_embeddings(hz, z.y)
    y1, y2 = z.y
    tr = E[:, 0] * y1 + E[:, 1] * y2
    scale = np.hypot(E[:, 0], E[:, 1]) * math.hypot(y1, y2)
    if (np.abs(tr) < 1e3 * WALL_TOL * scale).any():
        i = int(np.argmin(np.abs(tr) / scale))
        raise DegenerateInputError(f"Im(z) lies on the wall of lam = ({E[i, 0]:.6g}, {E[i, 1]:.6g})")


def _check_height(a: FractionalIdeal, m: int, z: EvalPoint) -> None:
    bound = m / (a.D * float(a.norm))
    if min(z.y) <= bound:
        raise DomainError(f"the Fourier expansion needs Im(z_j) > m/(D N(a)) = {bound:.6g}")


# ------------------------------------------------------------ Fourier route at s = 1
class FourierGreen:
    """Phi(a, m, z) through its closed Fourier expansion.

    The nu set and the Bessel/exponential-sum coefficients are fixed at
    construction (from the reference height y_ref), so nearby evaluations, e.g.
    finite-difference stencils, use one and the same truncated series.
    """

    def __init__(self, a: FractionalIdeal, m: int, y_ref, t: Truncation | None = None,
                 constants: tuple[float, float] | None = None) -> None:
        t = t or Truncation()
        D = a.D
        _require_odd(D)
        self.a, self.m, self.t = a, m, t
        if constants is None:
            rc = regularization_constants(a, m)
            if rc.L is None:
                raise UnsupportedError(f"sigma(a, {m}, -1) = 0: supply the constants (q, L) explicitly")
            self.q, self.L = float(rc.q), rc.L
        else:
            self.q, self.L = constants
        na = float(a.norm)
        nus = nu_list(a, y_ref, t.nu_trace_max)
        gt = g_table(a, m)
        bs = np.arange(1, t.b_max + 1)
        coef, tails, emb, mixed = [], [], [], []
        for term in nus:
            n1, n2 = term.emb
            N = abs(n1 * n2)
            G = gt.real_values(term.T, bs)
            x = 4 * math.pi * math.sqrt(m * N / (na * D))
            kind = "I" if n2 > 0 else "J"
            bess = np.array([sf.bessel(kind, 1, x / b) for b in bs])
            pref = 2 * math.pi / D * math.sqrt(m * na / N)
            terms = G / bs * bess
            coef.append(pref * float(np.sum(terms)))
            # partial sums settle like 1/b in practice; the b-tail is estimated by
            # twice the contribution of the last doubling range (b_max/2, b_max]
            tails.append(2 * pref * abs(float(np.sum(terms[len(bs) // 2:]))))
            emb.append((n1, n2))
            mixed.append(n2 < 0)
        self.nus = nus
        self.coef = np.array(coef)
        self.b_tail = np.array(tails)
        self.emb = np.array(emb, dtype=float).reshape(-1, 2)
        self.mixed = np.array(mixed, dtype=bool)

    def blocks(self, z: EvalPoint) -> dict:
        y1, y2 = z.y
        e1, e2 = self.emb[:, 0], self.emb[:, 1]
        phase = 2j * math.pi * (e1 * z.z1 + e2 * z.z2)
        # nu >> 0: e(tr(nu z)); nu > 0 > nu': e(nu z1) conj(e(-nu' z2))
        mixed_phase = 2j * math.pi * e1 * z.z1 + np.conj(-2j * math.pi * e2 * z.z2)
        ph = np.where(self.mixed, mixed_phase, phase)
        terms = self.coef * 2 * np.real(np.exp(ph))
        decay = np.exp(-2 * math.pi * (np.abs(e1) * y1 + np.abs(e2) * y2))
        return {
            "I_block": float(terms[~self.mixed].sum()),
            "J_block": float(terms[self.mixed].sum()),
            "b_tail": float(2 * (self.b_tail * decay).sum()),
            "nu_tail": self._nu_tail(z),
        }

    def _nu_tail(self, z: EvalPoint) -> float:
        """Geometric extrapolation of the last unit shell of the nu sum."""
        if not len(self.coef):
            return 0.0
        y1, y2 = z.y
        tr = np.abs(self.emb[:, 0]) * y1 + np.abs(self.emb[:, 1]) * y2
        shell = tr > self.t.nu_trace_max - 1
        mag = float(np.sum(2 * np.abs(self.coef[shell]) * np.exp(-2 * math.pi * tr[shell])))
        r = math.exp(-2 * math.pi)
        return 2 * mag * r / (1 - r)

    def evaluate(self, z: EvalPoint, check: bool = True) -> GreenValue:
        if check:
            _check_height(self.a, self.m, z)
            _check_walls(self.a, self.m, z)
        y1, y2 = z.y
        const = self.L - self.q * math.log(16 * math.pi ** 2 * y1 * y2)
        lb = log_norm_block(self.a, self.m, z)
        blk = self.blocks(z)
        value = const + lb.total + blk["I_block"] + blk["J_block"]
        parts = {"constant": const, "borcherds_log": lb.f5, "companion_log": lb.f6,
                 "I_block": blk["I_block"], "J_block": blk["J_block"]}
        return GreenValue(value, blk["b_tail"] + blk["nu_tail"] + lb.tail, parts)

    def __call__(self, z: EvalPoint) -> float:
        return self.evaluate(z, check=False).value


def phi_fourier(a: FractionalIdeal, m: int, z: EvalPoint, t: Truncation | None = None,
                constants: tuple[float, float] | None = None) -> GreenValue:
    _require_odd(a.D)
    _check_height(a, m, z)
    _check_walls(a, m, z)
    return FourierGreen(a, m, z.y, t, constants).evaluate(z)


def lambda_series_block(a: FractionalIdeal, m: int, z: EvalPoint, n_max: int = 400) -> float:
    """sum_lam sum_{n <= n_max} (e^{-2 pi n |tr(lam y)|} - e^{-2 pi n (lam y1 - lam' y2)}) / n
    * 2 cos(2 pi n tr(lam x)), summed term by term."""
    hz = lambda_set(a, m)
    if not hz.representatives:
        return 0.0
    E = orbit_embeddings(hz, z.y)
    (x1, x2), (y1, y2) = z.x, z.y
    total = 0.0
    n = np.arange(1, n_max + 1)
    for l1, l2 in E:
        r1 = abs(l1 * y1 + l2 * y2)
        r2 = l1 * y1 - l2 * y2
        th = l1 * x1 + l2 * x2
        total += float(np.sum((np.exp(-2 * math.pi * n * r1) - np.exp(-2 * math.pi * n * r2)) / n * 2 * np.cos(2 * math.pi * n * th)))
    return total


def beta_sum(a: FractionalIdeal, m: int, z: EvalPoint) -> float:
    """sum over Lambda^+ of min(lam y1, |lam'| y2)."""
    hz = lambda_set(a, m)
    if not hz.representatives:
        return 0.0
    E = orbit_embeddings(hz, z.y)
    y1, y2 = z.y
    return float(np.minimum(E[:, 0] * y1, -E[:, 1] * y2).sum())


# ------------------------------------------------------------ Fourier route at s > 1
def _chi_list(D: int) -> list[int]:
    return [chi_D(D, n) for n in range(D)]


def phi_fourier_s(a: FractionalIdeal, m: int, s: float, z: EvalPoint, t: Truncation | None = None,
                  nus: list[NuTerm] | None = None) -> dict:
    """Fourier expansion of Phi(a, m, s, z) for real s > 1/2, s != 1, split into
    the b = 0 part, the constant coefficient summed over b >= 1 (analytically
    continued through the divisor-sum identity) and the nu != 0 coefficients.

    Uses scipy Bessel functions and mpmath zeta/L-values, independently of the
    s = 1 formulas in `FourierGreen`.
    """
    import mpmath
    from scipy import special

    t = t or Truncation()
    D = a.D
    _require_odd(D)
    na = float(a.norm)
    y1, y2 = z.y
    x1, x2 = z.x
    out = {}

    # b = 0: Lambda^+ orbits
    p0 = 0.0
    hz = lambda_set(a, m)
    if hz.representatives:
        E = orbit_embeddings(hz, z.y)
        A = E[:, 0] * y1
        B = -E[:, 1] * y2
        alpha, beta = np.maximum(A, B), np.minimum(A, B)
        p0 += 4 * math.pi / (2 * s - 1) * float(np.sum(alpha ** (1 - s) * beta ** s))
        th = E[:, 0] * x1 + E[:, 1] * x2
        kap = s - 0.5
        for i in range(len(E)):
            gap = alpha[i] - beta[i]
            if 2 * math.pi * gap > 60:
                continue
            nmax = int(min(50_000, max(4, math.ceil(42 / (2 * math.pi * max(gap, 1e-9))))))
            n = np.arange(1, nmax + 1)
            ik = special.ive(kap, 2 * math.pi * n * beta[i]) * special.kve(kap, 2 * math.pi * n * alpha[i])
            ik *= np.exp(-2 * math.pi * n * gap)
            p0 += 4 * math.pi * math.sqrt(alpha[i] * beta[i]) * float(np.sum(ik * 2 * np.cos(2 * math.pi * n * th[i])))
    out["b0"] = p0

    # constant coefficient of the b >= 1 terms
    mp = mpmath.mp
    with mpmath.workdps(30):
        ss = mpmath.mpf(s)
        Lval = mpmath.dirichlet(2 * ss, _chi_list(D))
        sig = divisor_sigma(a, m, float(1 - 2 * s)).value
        const = (mpmath.pi * mpmath.gamma(ss - 0.5) ** 2 / (mpmath.sqrt(D) * mpmath.gamma(2 * ss))
                 * (4 * mpmath.mpf(m) / D) ** ss * (na * y1 * y2) ** (1 - ss) * mpmath.mpf(m) ** (-ss)
                 * mpmath.zeta(2 * ss - 1) / Lval * sig)
        out["constant_coefficient"] = float(const)
    del mp

    # nu != 0
    if nus is None:
        nus = nu_list(a, z.y, t.nu_trace_max)
    gt = g_table(a, m)
    bs = np.arange(1, t.b_max + 1)
    Bb = m / (na * D * bs.astype(float) ** 2)
    pn = 0.0
    for term in nus:
        n1, n2 = term.emb
        N = abs(n1 * n2)
        G = gt.real_values(term.T, bs)
        arg = 4 * math.pi * np.sqrt(Bb * N)
        bess = special.iv(2 * s - 1, arg) if n2 > 0 else special.jv(2 * s - 1, arg)
        kk = special.kv(s - 0.5, 2 * math.pi * abs(n1) * y1) * special.kv(s - 0.5, 2 * math.pi * abs(n2) * y2)
        coeff = 4 * math.pi * na * np.sqrt(Bb * y1 * y2 / D) * bess * kk
        # nu and -nu share G^b and b_s^B; together 2 cos(2 pi tr(nu x))
        pn += 2 * float(np.sum(G * coeff)) * 2 * math.cos(2 * math.pi * (n1 * x1 + n2 * x2))
    out["nu_terms"] = pn
    out["total"] = out["b0"] + out["constant_coefficient"] + out["nu_terms"]
    return out


def _neville_at_zero(xs, ys) -> float:
    p = list(ys)
    n = len(xs)
    for k in range(1, n):
        for i in range(n - k):
            p[i] = (xs[i] * p[i + 1] - xs[i + k] * p[i]) / (xs[i] - xs[i + k])
    return p[0]


def phi_regularized_direct(a: FractionalIdeal, m: int, z: EvalPoint, t: Truncation | None = None) -> GreenValue:
    """Constant term at s = 1 of Phi(a, m, s, z): evaluate Phi(s_j) - q/(s_j - 1)
    along t.s_sequence and extrapolate polynomially in s - 1 to 0."""
    t = t or Truncation()
    _require_odd(a.D)
    _check_height(a, m, z)
    q = float(regularization_constants(a, m).q)
    nus = nu_list(a, z.y, t.nu_trace_max)
    xs, ys = [], []
    for s in t.s_sequence:
        parts = phi_fourier_s(a, m, s, z, t, nus)
        xs.append(s - 1)
        ys.append(parts["total"] - q / (s - 1))
    full = _neville_at_zero(xs, ys)
    # drop the point farthest from s = 1 for the residual
    lower = _neville_at_zero(xs[1:], ys[1:])
    residual = abs(full - lower)
    if residual > t.tol:
        raise PrecisionError(f"Laurent extrapolation residual {residual:.3g} exceeds tol {t.tol:.3g}")
    return GreenValue(full, residual, {"s": list(t.s_sequence), "regularized": ys, "residual": residual})


# ------------------------------------------------------------ Fourier coefficients
def fourier_coeff_b(s: float, B: float, lattice: FractionalIdeal, nu: FieldElement | None, y, kernel: str = "green"):
    """Fourier coefficient at nu of the lattice-periodic sum H_s^B(lattice, z)
    (kernel 'green': Q_{s-1}(1 + |z1 z2 + B|^2 / (2 y1 y2 B))) or of its smooth
    analogue (kernel 'smooth': (1 + |z1 z2 + B|^2 / (4 y1 y2 B))^-s, nu = 0 only)."""
    y1, y2 = float(y[0]), float(y[1])
    if not y1 * y2 > B:
        raise DomainError("the expansion needs y1 y2 > B")
    if complex(s).real <= 0.5:
        raise DomainError("needs Re(s) > 1/2")
    D = lattice.D
    nb = float(lattice.norm)
    zero = nu is None or nu.is_zero()
    if kernel == "smooth":
        if not zero:
            raise UnsupportedError("only the constant coefficient of the smooth kernel has a closed form")
        vol = nb * math.sqrt(D)
        bt = sf.beta(0.5, s - 0.5)
        return (4 * B) ** s * (y1 * y2) ** (1 - s) * bt * bt / vol * sf.hyp2f1(2 * s - 1, s - 0.5, s, -B / (y1 * y2))
    if kernel != "green":
        raise InputError(f"unknown kernel {kernel!r}")
    if zero:
        g = math.exp(2 * sf.loggamma(s - 0.5).real - sf.loggamma(2 * s).real)
        return math.pi * g / (2 * math.sqrt(D) * nb) * (4 * B) ** s * (y1 * y2) ** (1 - s)
    n1, n2 = nu.embeddings()
    N = abs(n1 * n2)
    kind = "I" if n1 * n2 > 0 else "J"
    k1 = sf.bessel("K", s - 0.5, 2 * math.pi * abs(n1) * y1)
    k2 = sf.bessel("K", s - 0.5, 2 * math.pi * abs(n2) * y2)
    return 4 * math.pi / nb * math.sqrt(B * y1 * y2 / D) * sf.bessel(kind, 2 * s - 1, 4 * math.pi * math.sqrt(B * N)) * k1 * k2


def fourier_quadrature(s: float, B: float, lattice: FractionalIdeal, y, kernel: str = "green") -> float:
    """(1 / vol) * integral over R^2 of the kernel at x, the constant coefficient
    by Poisson summation, computed with adaptive quadrature."""
    from scipy import integrate

    y1, y2 = float(y[0]), float(y[1])
    vol = float(lattice.norm) * math.sqrt(lattice.D)

    def arg(x1, x2):
        w = complex(x1, y1) * complex(x2, y2) + B
        return abs(w) ** 2

    if kernel == "green":
        def f(x1, x2):
            return sf.legendre_q(s, 1 + arg(x1, x2) / (2 * y1 * y2 * B))
    else:
        def f(x1, x2):
            return (1 + arg(x1, x2) / (4 * y1 * y2 * B)) ** (-s)

    def inner(x2):
        # the x1 profile is centred at -B x2 / |z2|^2
        c = -B * x2 / (x2 * x2 + y2 * y2)
        lo, _ = integrate.quad(lambda u: f(c - u, x2), 0, math.inf, epsabs=1e-13, epsrel=1e-11, limit=200)
        hi, _ = integrate.quad(lambda u: f(c + u, x2), 0, math.inf, epsabs=1e-13, epsrel=1e-11, limit=200)
        return lo + hi

    val, _ = integrate.quad(inner, -math.inf, math.inf, epsabs=1e-12, epsrel=1e-10, limit=200)
    return val / vol


def smooth_coeff_s1(B: float, lattice: FractionalIdeal, nu: FieldElement | None, y) -> float:
    """Fourier coefficient at nu of the smooth kernel at s = 1.

    The x1 integral is done in closed form after completing the square, the
    remaining x2 integral numerically.
    """
    from scipy import integrate

    y1, y2 = float(y[0]), float(y[1])
    n1, n2 = (0.0, 0.0) if nu is None else nu.embeddings()
    vol = float(lattice.norm) * math.sqrt(lattice.D)

    def amp(x2):
        r2 = x2 * x2 + y2 * y2
        a = y1 + B * y2 / r2
        return math.pi * math.exp(-2 * math.pi * abs(n1) * a) / (a * r2), 2 * math.pi * n1 * B * x2 / r2

    def f(x2):
        g, psi = amp(x2)
        return g * math.cos(psi - 2 * math.pi * n2 * x2)

    # even integrand: finite pieces plus a Fourier-weighted tail in the fast phase
    X = 64 * y2
    edges = [0.0, y2, 4 * y2, 16 * y2, X]
    val = sum(integrate.quad(f, lo, hi, limit=400, epsabs=1e-15, epsrel=1e-11)[0] for lo, hi in zip(edges, edges[1:]))
    if n2 == 0:
        val += integrate.quad(f, X, math.inf, limit=400, epsabs=1e-15, epsrel=1e-11)[0]
    else:
        w = 2 * math.pi * n2
        c = integrate.quad(lambda u: amp(u)[0] * math.cos(amp(u)[1]), X, math.inf, weight="cos", wvar=w)[0]
        d = integrate.quad(lambda u: amp(u)[0] * math.sin(amp(u)[1]), X, math.inf, weight="sin", wvar=w)[0]
        val += c + d
    return 4 * y1 * y2 * B / vol * 2 * val


def smooth_coeff_bound(B: float, lattice: FractionalIdeal, nu: FieldElement, y) -> float:
    """Upper bound 4 B pi^2 / vol * exp(-2 pi max(|nu y1|, |nu' y2|)) for smooth_coeff_s1."""
    n1, n2 = nu.embeddings()
    vol = float(lattice.norm) * math.sqrt(lattice.D)
    alpha = max(abs(n1 * float(y[0])), abs(n2 * float(y[1])))
    return 4 * B * math.pi ** 2 / vol * math.exp(-2 * math.pi * alpha)


# ------------------------------------------------------------ smooth kernel at b = 0
def _psi0_gammas(a: FractionalIdeal, m: int, z: EvalPoint):
    hz = lambda_set(a, m)
    if not hz.representatives:
        return None
    E = orbit_embeddings(hz, z.y)
    y1, y2 = z.y
    x1, x2 = z.x
    gam = E[:, 0] * y1 - E[:, 1] * y2
    th = E[:, 0] * x1 + E[:, 1] * x2
    return E, gam, th


def psi0_fourier(a: FractionalIdeal, m: int, z: EvalPoint, t: Truncation | None = None, n_max: int | None = None) -> GreenValue:
    """Psi^0(a, m, 1, z) from its Fourier series in n, truncated with the exact
    geometric tail bound."""
    data = _psi0_gammas(a, m, z)
    if data is None:
        return GreenValue(0.0, 0.0)
    E, gam, th = data
    y1, y2 = z.y
    pref = 8 * math.pi * y1 * y2 * m * float(a.norm) / a.D
    total = 0.0
    tail = 0.0
    for g, theta in zip(gam, th):
        r = math.exp(-2 * math.pi * g)
        N = n_max if n_max is not None else max(1, math.ceil(40 / (2 * math.pi * g)))
        n = np.arange(1, N + 1)
        total += (1 + 2 * float(np.sum(r ** n * np.cos(2 * math.pi * n * theta)))) / g
        tail += 2 * r ** (N + 1) / (1 - r) / g
    return GreenValue(pref * total, pref * tail)


def psi0_direct(a: FractionalIdeal, m: int, z: EvalPoint, a_max: int = 200_000) -> float:
    """2 sum_lam sum_{|a| <= a_max} (1 + |lam z1 + lam' z2 + a|^2 / (4 y1 y2 m N(a) / D))^-1,
    with an integral estimate of the terms |a| > a_max."""
    data = _psi0_gammas(a, m, z)
    if data is None:
        return 0.0
    E, _, th = data
    y1, y2 = z.y
    c = 4 * y1 * y2 * m * float(a.norm) / a.D
    k = np.arange(-a_max, a_max + 1, dtype=float)
    total = 0.0
    # imaginary part of lam z1 + lam' z2
    for g, theta in zip(E[:, 0] * y1 + E[:, 1] * y2, th):
        theta -= round(theta)
        total += float(np.sum(1 / (1 + ((theta + k) ** 2 + g * g) / c)))
        # midpoint-rule tail for |a| > a_max, both sides
        w = math.sqrt(g * g + c)
        total += 2 * c / w * (math.pi / 2 - math.atan((a_max + 0.5) / w))
    return 2 * total


# ------------------------------------------------------------ Laplacian
def laplace_fd(f: Callable[[EvalPoint], float], z: EvalPoint, j: int, h: float = 1e-2) -> float:
    """y_j^2 (d^2/dx_j^2 + d^2/dy_j^2) f by central differences, Richardson over h and h/2.

    With this sign, Delta log(y) = -1 and Delta y^s = s(s-1) y^s.
    """
    if j not in (1, 2):
        raise InputError("j must be 1 or 2")
    y = z.y[j - 1]
    if h <= 0 or y - h <= 0:
        raise InputError("finite-difference stencil leaves the upper half plane")

    def shift(d: complex) -> EvalPoint:
        return z.shifted(d, 0) if j == 1 else z.shifted(0, d)

    def lap(step: float) -> float:
        c = f(z)
        s = f(shift(step)) + f(shift(-step)) + f(shift(1j * step)) + f(shift(-1j * step))
        return (s - 4 * c) / (step * step)

    l1, l2 = lap(h), lap(h / 2)
    return y * y * (4 * l2 - l1) / 3
