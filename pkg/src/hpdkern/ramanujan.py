"""Spherical power series, the series-to-transform route, and psi positivity.

A spherical power series is F(x) = sum_m ((-1)^[m] / [m]!) a(m) Z_m(x) over
partitions m with at most N parts, [m] the weight.  When the coefficients
take the form a(lam) = Gamma_M(2 alpha + lam) psi(lam - delta), the function
Delta^alpha(x) F(x) is integrable and U-invariant, its spherical transform is
|Gamma_M(alpha + delta + it)|^2 psi(it - alpha), and it is positive definite
exactly when psi(it - alpha) >= 0 on real t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.integrate

from .errors import AlphaOutOfRange, CoefficientPole, EmptyGrid, PoleError
from .gammafn import abs_gamma_m_sq, log_gamma_m_real
from .spherical import delta_vector, partitions_of, zonal_polynomial

MAX_SERIES_WEIGHT = 30


# ---------------------------------------------------------------------------
# Series machinery
# ---------------------------------------------------------------------------

@dataclass
class SeriesState:
    """Partial sums of a spherical power series, accumulated by total degree."""
    n_max: int
    partial_sums: np.ndarray                    # cumulative sum through degree n
    term_magnitudes: np.ndarray                 # |sum of degree-n terms| per degree
    partitions_per_degree: list[int] = field(default_factory=list)

    @property
    def value(self) -> float:
        return float(self.partial_sums[-1])

    def to_obj(self) -> dict:
        return {
            "n_max": self.n_max,
            "partial_sums": [float(v) for v in self.partial_sums],
            "term_magnitudes": [float(v) for v in self.term_magnitudes],
            "partitions_per_degree": self.partitions_per_degree,
        }


def spherical_series(a: Callable, rho, n_max: int) -> SeriesState:
    """Accumulate sum_m ((-1)^[m] / [m]!) a(m) Z_m(rho) degree by degree.

    a maps a zero-padded partition tuple to a coefficient.  Partitions within
    each weight are enumerated in lexicographic order.
    """
    if n_max > MAX_SERIES_WEIGHT:
        raise ValueError(f"n_max capped at {MAX_SERIES_WEIGHT}")
    rho = np.asarray(rho, dtype=float)
    n = len(rho)
    partial = np.empty(n_max + 1)
    mags = np.empty(n_max + 1)
    counts = []
    acc = 0.0
    for w in range(n_max + 1):
        parts = partitions_of(w, n) if w > 0 else [(0,) * n]
        counts.append(len(parts))
        degree_sum = 0.0
        sign = (-1.0) ** w
        inv_fact = 1.0 / math.factorial(w)
        for m in parts:
            try:
                coef = a(m)
            except PoleError as exc:
                raise CoefficientPole(f"coefficient pole at partition {m}") from exc
            if coef != 0.0:
                degree_sum += sign * inv_fact * coef * zonal_polynomial(m, rho)
        acc += degree_sum
        partial[w] = acc
        mags[w] = abs(degree_sum)
    return SeriesState(n_max=n_max, partial_sums=partial, term_magnitudes=mags,
                       partitions_per_degree=counts)


@dataclass
class BinomialReport:
    partial: float
    target: float
    gap: float                    # relative gap at n_max
    gaps_by_degree: np.ndarray = field(repr=False, default=None)


def binomial_series_check(alpha: float, rho, n_max: int) -> BinomialReport:
    """Series with a(m) = Gamma_M(2 alpha + m) against its binomial closed form.

    The closed form is Gamma_M(2 alpha) prod_k (1 + rho_k)^{-2 alpha}, valid
    when every rho_k < 1.
    """
    rho = np.asarray(rho, dtype=float)
    n = len(rho)
    if alpha <= n - 1:
        raise AlphaOutOfRange(f"need alpha > N - 1 = {n - 1}, got {alpha}")
    if np.max(rho) >= 1.0:
        raise ValueError("binomial series requires all rho_k < 1")
    base = log_gamma_m_real(np.full(n, 2.0 * alpha))

    def a(m):
        # Normalized by Gamma_M(2 alpha) to keep magnitudes tame.
        return math.exp(log_gamma_m_real(2.0 * alpha + np.asarray(m, float)) - base)

    state = spherical_series(a, rho, n_max)
    target = float(np.exp(-2.0 * alpha * np.sum(np.log1p(rho))))
    gaps = np.abs(state.partial_sums - target) / abs(target)
    return BinomialReport(partial=state.value, target=target,
                          gap=float(gaps[-1]), gaps_by_degree=gaps)


# ---------------------------------------------------------------------------
# The transform route
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PsiFunction:
    """A symmetric function on C^N with declared (not verified) growth bounds.

    growth_p and growth_a declare |psi(lam)| <= C prod e^{P Re lam_k}
    e^{A |Im lam_k|}; A must be below pi.
    """
    name: str
    fn: Callable[[np.ndarray], complex]
    growth_p: float = 1.0
    growth_a: float = 0.0

    def __post_init__(self):
        if not (0 <= self.growth_a < math.pi):
            raise ValueError("growth exponent A must satisfy 0 <= A < pi")

    def __call__(self, lam) -> complex:
        return complex(self.fn(np.asarray(lam, dtype=complex)))


def check_psi_symmetry(psi: PsiFunction, n: int, seed: int = 0,
                       tol: float = 1e-10) -> None:
    rng = np.random.default_rng(seed)
    for _ in range(8):
        lam = rng.normal(size=n) + 1j * rng.normal(size=n)
        p = rng.permutation(n)
        a, b = psi(lam), psi(lam[p])
        if abs(a - b) > tol * max(abs(a), 1.0):
            raise ValueError(f"{psi.name} is not permutation-symmetric")


def constant_psi(value: float = 1.0) -> PsiFunction:
    return PsiFunction(name=f"const:{value}", fn=lambda lam: value, growth_p=0.0)


def ramanujan_transform(psi: PsiFunction, alpha: float, t, n: int | None = None) -> complex:
    """Closed-form spherical transform |Gamma_M(alpha + delta + it)|^2 psi(it - alpha).

    With psi identically 1 this is the spherical transform of the radial
    function Gamma_M(2 alpha) Delta^alpha(x (id + x)^{-2}).
    """
    t = np.asarray(t, dtype=float)
    if n is None:
        n = len(t)
    if alpha <= n - 1:
        raise AlphaOutOfRange(f"need alpha > N - 1 = {n - 1}, got {alpha}")
    lam = alpha + delta_vector(n) + 1j * t
    return abs_gamma_m_sq(lam) * psi(1j * t - alpha)


@dataclass
class PsiScanReport:
    min_real: float
    argmin: np.ndarray
    max_imag: float
    verdict: str                              # "CONSISTENT_PD" or "NOT_PD"


def psi_positivity_scan(psi: PsiFunction, alpha: float, t_grid,
                        abs_tol_rel: float = 1e-6) -> PsiScanReport:
    """Scan psi(it - alpha) over a finite t-grid and judge its sign.

    A necessary-condition scan, not a positivity certificate: the criterion
    quantifies over all real t.
    """
    t_grid = [np.asarray(t, dtype=float) for t in t_grid]
    if not t_grid:
        raise EmptyGrid("empty t-grid")
    vals = np.array([psi(1j * t - alpha) for t in t_grid])
    re = vals.real
    peak = max(np.abs(re).max(), 1e-300)
    imin = int(np.argmin(re))
    verdict = "NOT_PD" if re[imin] < -abs_tol_rel * peak else "CONSISTENT_PD"
    return PsiScanReport(min_real=float(re[imin]), argmin=t_grid[imin],
                         max_imag=float(np.abs(vals.imag).max()), verdict=verdict)


# ---------------------------------------------------------------------------
# Integrability probe
# ---------------------------------------------------------------------------

def factored_radial_integral(w: Callable[[float], float], n: int,
                             cutoff: float) -> float:
    """Invariant volume integral of a factored radial function, up to constant.

    For f_o(rho) = prod_k w(rho_k) the volume integral reduces to
    det[ int_0^inf w(rho) rho^{k+l-N} d rho ]_{k,l=0}^{N-1}; each 1-D
    integral is truncated to [1/cutoff, cutoff].
    """
    if cutoff <= 1:
        raise ValueError("cutoff must exceed 1")
    smax = math.log(cutoff)
    mat = np.empty((n, n))
    for k in range(n):
        for l in range(k, n):
            # substitute rho = e^s so the mass is not hidden on a log scale
            val = scipy.integrate.quad(
                lambda s: w(math.exp(s)) * math.exp((k + l - n + 1) * s),
                -smax, smax, limit=400)[0]
            mat[k, l] = mat[l, k] = val
    return float(np.linalg.det(mat))


def beta_prime_integrability(alpha: float, n: int, cutoffs=(10.0, 100.0, 1000.0, 10000.0)):
    """Truncated invariant integrals of the Beta-prime radial function.

    The sequence stabilizes for alpha > N - 1 and grows without bound at
    alpha = N - 1 (the corner moment integrals diverge logarithmically).
    """
    w = lambda r: (r / (1.0 + r) ** 2) ** alpha
    return np.array([factored_radial_integral(w, n, c) for c in cutoffs])
