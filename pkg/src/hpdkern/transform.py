"""Spherical transforms by quadrature and the Godement kernel constructors.

The forward/inverse transforms are computed on tensor grids after the
substitution rho = e^s, which turns both integrals into rapidly decaying
integrals over a truncated box.  All transform values carry one uncalibrated
N-dependent constant; :func:`calibrate_constant` pins it against the
closed-form Gaussian transform.
"""

from __future__ import annotations

import json
import math
import os
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.integrate

from .errors import (
    CalibrationInconsistent,
    NonRealResult,
    TruncationWarning,
)
from .gammafn import log_gamma_m_real
from .hpd_core import eigenvalues, log_vandermonde, logdet_hpd
from .spherical import confluent_eval, delta_vector, gauss_spherical_transform

_IMAG_TOL = 1e-8


# ---------------------------------------------------------------------------
# Radial functions and spectral densities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialFunction:
    """A permutation-symmetric function of the spectrum, f(x) = f_o(rho).

    The evaluator must be vectorized over leading axes: input (..., N),
    output (...).
    """
    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    integrable: bool = True

    def __call__(self, rho):
        return self.fn(np.asarray(rho, dtype=float))


@dataclass(frozen=True)
class SpectralDensity:
    """A symmetric density g(t) on R^N, vectorized like RadialFunction."""
    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    nonnegative: bool = False

    def __call__(self, t):
        return self.fn(np.asarray(t, dtype=float))


def check_permutation_symmetry(f, n: int, seed: int = 0, tol: float = 1e-10) -> None:
    """Spot-check that f is invariant under random permutations of its vector."""
    rng = np.random.default_rng(seed)
    for _ in range(8):
        v = rng.uniform(0.2, 3.0, n)
        p = rng.permutation(n)
        a, b = f(v), f(v[p])
        if abs(a - b) > tol * max(abs(a), 1.0):
            raise ValueError(f"{getattr(f, 'name', f)} is not permutation-symmetric")


def gaussian_radial(sigma: float) -> RadialFunction:
    """f_o(rho) = exp(-sum log^2(rho_k) / 2 sigma^2) = exp(-d^2(x, id)/2 sigma^2)."""
    def fn(rho):
        s = np.log(rho)
        return np.exp(-np.sum(s * s, axis=-1) / (2.0 * sigma**2))
    return RadialFunction(name=f"gaussian:sigma={sigma}", fn=fn)


def beta_prime_radial(alpha: float, n: int, include_gamma: bool = False) -> RadialFunction:
    """f_o(rho) = [Gamma_M(2 alpha)] prod_k (rho_k / (1 + rho_k)^2)^alpha."""
    if alpha <= n - 1:
        from .errors import AlphaOutOfRange
        raise AlphaOutOfRange(f"need alpha > N - 1 = {n - 1}, got {alpha}")
    pref = math.exp(log_gamma_m_real(np.full(n, 2.0 * alpha))) if include_gamma else 1.0

    def fn(rho):
        return pref * np.exp(alpha * np.sum(
            np.log(rho) - 2.0 * np.log1p(rho), axis=-1))
    return RadialFunction(name=f"betaprime:alpha={alpha}", fn=fn)


def gaussian_density(kappa: float, n: int) -> SpectralDensity:
    """g(t) = exp(-kappa ((t,t) + (delta,delta))), the heat-kernel density."""
    dd = float(np.sum(delta_vector(n) ** 2))
    def fn(t):
        return np.exp(-kappa * (np.sum(t * t, axis=-1) + dd))
    return SpectralDensity(name=f"heat:kappa={kappa}", fn=fn, nonnegative=True)


# ---------------------------------------------------------------------------
# Quadrature grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureGrid:
    """Per-axis rule on [-T, T]: trapezoid or Gauss-Legendre."""
    rule: str = "trapezoid"
    half_width: float = 12.0
    points: int = 64

    def __post_init__(self):
        if self.points < 8:
            raise ValueError("need at least 8 points per axis")
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        if self.rule not in ("trapezoid", "gauss-legendre"):
            raise ValueError(f"unknown rule {self.rule!r}")

    def axis(self) -> tuple[np.ndarray, np.ndarray]:
        t = self.half_width
        if self.rule == "trapezoid":
            nodes = np.linspace(-t, t, self.points)
            h = 2.0 * t / (self.points - 1)
            w = np.full(self.points, h)
            w[0] = w[-1] = h / 2.0
            return nodes, w
        nodes, w = np.polynomial.legendre.leggauss(self.points)
        return nodes * t, w * t

    def refined(self) -> "QuadratureGrid":
        return QuadratureGrid(self.rule, self.half_width, 2 * self.points)

    def key(self) -> str:
        return f"{self.rule}:T={self.half_width}:P={self.points}"


def _mesh(grid: QuadratureGrid, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tensor nodes (B, N), weights (B,), and a boundary-node mask (B,)."""
    if grid.points ** n > 10**8:
        raise ValueError("tensor grid exceeds the memory budget")
    nodes, w = grid.axis()
    axes = np.meshgrid(*([nodes] * n), indexing="ij")
    s = np.stack([a.ravel() for a in axes], axis=-1)
    waxes = np.meshgrid(*([w] * n), indexing="ij")
    ww = np.prod(np.stack([a.ravel() for a in waxes], axis=-1), axis=-1)
    edge = np.abs(s).max(axis=-1) >= nodes.max() - 1e-12
    return s, ww, edge


def _vandermonde_last(v: np.ndarray) -> np.ndarray:
    n = v.shape[-1]
    out = np.ones(v.shape[:-1], dtype=v.dtype)
    for k in range(n):
        for l in range(k + 1, n):
            out = out * (v[..., l] - v[..., k])
    return out


def _check_truncation(mass: np.ndarray, edge: np.ndarray, what: str) -> None:
    total = np.abs(mass).sum()
    if total == 0:
        return
    boundary = np.abs(mass[edge]).sum()
    if boundary > 1e-6 * total:
        warnings.warn(
            f"{what}: boundary mass fraction {boundary / total:.2e} exceeds 1e-6; "
            "increase the half-width",
            TruncationWarning,
        )


# ---------------------------------------------------------------------------
# Forward and inverse transforms
# ---------------------------------------------------------------------------

def forward_transform(f_o, t, grid: QuadratureGrid | None = None,
                      estimate_error: bool = False):
    """Spherical transform of a radial function at the spectral point t.

    Computes (1/N!) / V(-it) * int f_o(rho) V(rho) det[rho_k^{-i t_l - (N+1)/2}]
    d rho over the log-substituted truncated box; the N-dependent constant
    C_N is left out (see calibrate_constant).
    """
    t = np.asarray(t, dtype=float)
    n = len(t)
    if grid is None:
        grid = QuadratureGrid()
    s, ww, edge = _mesh(grid, n)
    rho = np.exp(s)
    base = np.asarray(f_o(rho), dtype=float) * _vandermonde_last(rho) \
        * np.exp(s.sum(axis=-1))
    # The determinant factor has modulus prod_k rho_k^{-(N+1)/2} in every
    # term, independent of t; fold it into the boundary-mass estimate.
    _check_truncation(base * np.exp(-(n + 1) / 2.0 * s.sum(axis=-1)) * ww,
                      edge, "forward_transform")

    def inner(tc):
        expo = -1j * tc - (n + 1) / 2.0
        m = np.exp(s[:, :, None] * expo[None, None, :])
        det = np.linalg.det(m)
        integral = np.sum(ww * base * det)
        return integral / (math.factorial(n) * np.exp(log_vandermonde(-1j * tc)))

    val = complex(confluent_eval(inner, [t.astype(complex)], kinds=["complex"])) \
        if n > 1 else complex(inner(t.astype(complex)))
    if not estimate_error:
        return val
    ref = forward_transform(f_o, t, grid.refined(), estimate_error=False)
    return val, abs(val - ref) / max(abs(ref), 1e-300)


def inverse_transform(g, rho, grid: QuadratureGrid | None = None) -> float:
    """Inverse spherical transform of a spectral density at the spectrum rho.

    Computes (1/N!) / V(i rho) * int g(t) V(t) det[rho_k^{i t_l + (N-1)/2}] dt
    over the truncated box, up to the same N-dependent constant as
    forward_transform.  The result must be real; a large imaginary residual
    raises NonRealResult.
    """
    rho = np.asarray(rho, dtype=float)
    n = len(rho)
    if grid is None:
        grid = QuadratureGrid()
    t, ww, edge = _mesh(grid, n)
    gv = np.asarray(g(t), dtype=float)
    base = gv * _vandermonde_last(t)
    _check_truncation(gv * ww, edge, "inverse_transform")

    def inner(rh):
        logr = np.log(np.asarray(rh, dtype=float))
        expo = 1j * t + (n - 1) / 2.0          # (B, N) exponents per column
        m = np.exp(logr[None, :, None] * expo[:, None, :])
        det = np.linalg.det(m)
        integral = np.sum(ww * base * det)
        return integral / (math.factorial(n) * np.exp(log_vandermonde(1j * rh)))

    val = complex(confluent_eval(inner, [rho], kinds=["positive"])) \
        if n > 1 else complex(inner(rho))
    if abs(val.imag) > _IMAG_TOL * max(abs(val), 1.0):
        raise NonRealResult(f"imaginary residual {val.imag:.3e} on {val:.6e}")
    return float(val.real)


# ---------------------------------------------------------------------------
# Constant calibration
# ---------------------------------------------------------------------------

_CAL_CACHE: dict[str, float] = {}


def _calibration_t_points(n: int) -> list[np.ndarray]:
    offsets = 0.7 * np.arange(n)
    return [np.asarray(0.25 + 0.45 * j + offsets) for j in range(5)]


def calibrate_constant(n: int, grid: QuadratureGrid | None = None,
                       sigma: float = 1.0, cache_path: str | None = None) -> float:
    """The constant kappa_N with kappa_N * forward_transform = closed form.

    Fitted by least squares over 5 spectral points against the closed-form
    Gaussian transform; a non-constant ratio raises CalibrationInconsistent.
    Results are cached in memory, and optionally in a JSON file keyed by
    (N, rule, T, P).
    """
    if grid is None:
        grid = QuadratureGrid()
    key = f"N={n}:{grid.key()}"
    if key in _CAL_CACHE:
        return _CAL_CACHE[key]
    if cache_path and os.path.exists(cache_path):
        with open(cache_path) as fh:
            disk = json.load(fh)
        if key in disk:
            _CAL_CACHE[key] = disk[key]
            return disk[key]

    f_o = gaussian_radial(sigma)
    quads, closed = [], []
    for t in _calibration_t_points(n):
        q = forward_transform(f_o, t, grid)
        quads.append(q.real)
        closed.append(gauss_spherical_transform(sigma, t))
    quads = np.asarray(quads)
    closed = np.asarray(closed)
    ratios = closed / quads
    kappa = float(np.dot(quads, closed) / np.dot(quads, quads))
    spread = (ratios.max() - ratios.min()) / abs(ratios.mean())
    if spread > 1e-3:
        raise CalibrationInconsistent(
            f"ratio spread {spread:.2e} across t-points exceeds 1e-3"
        )
    if kappa <= 0:
        raise CalibrationInconsistent("calibration constant is not positive")
    _CAL_CACHE[key] = kappa
    if cache_path:
        disk = {}
        if os.path.exists(cache_path):
            with open(cache_path) as fh:
                disk = json.load(fh)
        disk[key] = kappa
        with open(cache_path, "w") as fh:
            json.dump(disk, fh, indent=2)
    return kappa


# ---------------------------------------------------------------------------
# Positive definite function constructors
# ---------------------------------------------------------------------------

def pd_from_gamma_product_spectrum(gamma_fn, rho, t_max: float = 60.0) -> float:
    """PD function from a factored density g(t) = prod gamma(t_k), at a spectrum.

    f = (det x)^{(N-1)/2} / V(i rho) * det[ int gamma(t) t^{k-1} e^{i t s_l} dt ]
    with s_l = log(rho_l).  The 1-D integrals use adaptive quadrature on
    [-t_max, t_max] with a breakpoint at 0.
    """
    rho = np.asarray(rho, dtype=float)
    n = len(rho)

    def entry(k, sl):
        re = scipy.integrate.quad(
            lambda u: gamma_fn(u) * u**k * math.cos(u * sl),
            -t_max, t_max, points=[0.0], limit=400)[0]
        im = scipy.integrate.quad(
            lambda u: gamma_fn(u) * u**k * math.sin(u * sl),
            -t_max, t_max, points=[0.0], limit=400)[0]
        return complex(re, im)

    def inner(rh):
        s = np.log(np.asarray(rh, dtype=float))
        mat = np.array([[entry(k, sl) for sl in s] for k in range(n)])
        logdet_x = float(np.sum(s))
        pref = math.exp((n - 1) / 2.0 * logdet_x)
        return pref * np.linalg.det(mat) / np.exp(log_vandermonde(1j * np.asarray(rh)))

    val = complex(confluent_eval(inner, [rho], kinds=["positive"])) \
        if n > 1 else complex(inner(rho))
    if abs(val.imag) > _IMAG_TOL * max(abs(val), 1.0):
        raise NonRealResult(f"imaginary residual {val.imag:.3e}")
    return float(val.real)


def pd_from_gamma_product(gamma_fn, x, t_max: float = 60.0) -> float:
    return pd_from_gamma_product_spectrum(gamma_fn, eigenvalues(x), t_max=t_max)


def exponential_gamma(kappa: float) -> Callable[[float], float]:
    """gamma(t) = (kappa/2) e^{-kappa |t|}, the density behind the Cauchy family."""
    return lambda u: (kappa / 2.0) * math.exp(-kappa * abs(u))


def _gtilde_deriv(k: int, s: float, kappa: float) -> complex:
    """Exact k-th derivative of 1/(kappa^2 + s^2) via partial fractions."""
    a = s - 1j * kappa
    b = s + 1j * kappa
    c = 1.0 / (2j * kappa)
    return c * (-1.0) ** k * math.factorial(k) * (a ** (-k - 1) - b ** (-k - 1))


def cauchy_family_spectrum(kappa: float, rho) -> float:
    """Closed-form Cauchy positive definite function at a spectrum.

    f = (det x)^{(N-1)/2} / V(rho) * det[(-1)^{k-1} gtilde^{(k-1)}(log rho_l)]
    where gtilde(s) = 1/(kappa^2 + s^2).
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    rho = np.asarray(rho, dtype=float)
    n = len(rho)

    def inner(rh):
        s = np.log(np.asarray(rh, dtype=float))
        mat = np.array([
            [(-1.0) ** k * _gtilde_deriv(k, sl, kappa) for sl in s]
            for k in range(n)
        ])
        pref = math.exp((n - 1) / 2.0 * float(np.sum(s)))
        v = np.exp(log_vandermonde(np.asarray(rh, dtype=complex)))
        return pref * np.linalg.det(mat) / v

    val = complex(confluent_eval(inner, [rho], kinds=["positive"])) \
        if n > 1 else complex(inner(rho))
    return float(val.real)


def cauchy_family(kappa: float, x) -> float:
    return cauchy_family_spectrum(kappa, eigenvalues(x))


def _log_ratio(a: float, b: float) -> float:
    """(log a - log b) / (a - b), continuous at a = b where it equals 1/a."""
    d = a - b
    if abs(d) < 1e-8 * max(a, b):
        return 2.0 / (a + b)
    return math.log(a / b) / d


def heat_kernel_radial_spectrum(kappa: float, rho) -> float:
    """Closed-form heat kernel (unnormalized, C_kappa = 1) at a spectrum.

    f = (det x)^{(N-1)/2} * (V(log rho)/V(rho)) * exp(-|log rho|^2 / 4 kappa).
    The V-ratio is computed factorwise, each factor continuous at confluent
    eigenvalues.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    rho = np.asarray(rho, dtype=float)
    n = len(rho)
    s = np.log(rho)
    vratio = 1.0
    for k in range(n):
        for l in range(k + 1, n):
            vratio *= _log_ratio(rho[l], rho[k])
    pref = math.exp((n - 1) / 2.0 * float(np.sum(s)))
    return pref * vratio * math.exp(-float(np.sum(s * s)) / (4.0 * kappa))


def heat_kernel_radial(kappa: float, x) -> float:
    return heat_kernel_radial_spectrum(kappa, eigenvalues(x))


# ---------------------------------------------------------------------------
# Godement positivity scan
# ---------------------------------------------------------------------------

@dataclass
class GodementReport:
    """Finite positivity scan of a spherical transform (a scan, not a proof)."""
    min_value: float
    argmin: np.ndarray
    verdict: str                      # "CONSISTENT_PD" or "NOT_PD"
    values: np.ndarray = field(repr=False, default=None)


def godement_check(f_o, t_grid, grid: QuadratureGrid | None = None,
                   abs_tol_rel: float = 1e-6) -> GodementReport:
    """Evaluate the forward transform on a finite t-grid and judge its sign.

    Verdict NOT_PD if any value drops below -abs_tol_rel * max value;
    CONSISTENT_PD otherwise.  This is a necessary-condition scan over the
    given grid, not a positivity certificate.
    """
    t_grid = [np.asarray(t, dtype=float) for t in t_grid]
    if not t_grid:
        from .errors import EmptyGrid
        raise EmptyGrid("empty t-grid")
    vals = np.array([forward_transform(f_o, t, grid).real for t in t_grid])
    peak = np.abs(vals).max()
    imin = int(np.argmin(vals))
    verdict = "NOT_PD" if vals[imin] < -abs_tol_rel * peak else "CONSISTENT_PD"
    return GodementReport(min_value=float(vals[imin]), argmin=t_grid[imin],
                          verdict=verdict, values=vals)


def gaussian_not_pd_witness(sigma: float, n: int) -> np.ndarray:
    """A spectral point where the Gaussian transform is negative.

    The last two coordinates are chosen so that exactly one pair factor
    sc((sigma^2/2)(t_l - t_k)) lands in the negative lobe (argument 1.8 pi)
    while every other pair factor stays positive.
    """
    if n < 2:
        raise ValueError("need N >= 2")
    t = np.zeros(n)
    t[-2] = 0.8 * math.pi / sigma**2
    t[-1] = 4.4 * math.pi / sigma**2
    assert gauss_spherical_transform(sigma, t) < 0
    return t
