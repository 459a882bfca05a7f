"""Invariant kernels on HPD matrices, Gram matrices, and the runtime benchmark.

Every kernel here satisfies K(g x g*, g y g*) = K(x, y) for invertible g.
Radially-defined kernels evaluate their radial function at the spectrum of
y^{-1} x; the Beta-prime kernel has a direct determinant form that needs
only triangular factorizations.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import AlphaOutOfRange, DimensionMismatch
from .gammafn import log_gamma_m_real
from .hpd_core import logdet_hpd, relative_spectrum, sample_spd
from .transform import (
    RadialFunction,
    beta_prime_radial,
    cauchy_family_spectrum,
    heat_kernel_radial_spectrum,
)


# ---------------------------------------------------------------------------
# Kernel classes
# ---------------------------------------------------------------------------

class Kernel:
    """Base class: an invariant kernel K(x, y) on HPD matrices."""

    name = "kernel"

    def radial(self, rho) -> float:
        """The kernel against the identity, as a function of the spectrum."""
        raise NotImplementedError

    def __call__(self, x, y) -> float:
        x = np.asarray(x)
        y = np.asarray(y)
        if x.shape != y.shape:
            raise DimensionMismatch(f"shapes {x.shape} and {y.shape} do not match")
        return self.radial(relative_spectrum(x, y))

    def get_params(self) -> dict:
        return {}


class BetaPrimeKernel(Kernel):
    """K(x, y) = [Gamma_M(2 alpha)] [det(x) det(y) / det(x+y)^2]^alpha.

    Requires alpha > N - 1.  Evaluated entirely in the log domain through
    Cholesky factorizations; no inversions or square roots.  The Gamma
    prefactor is optional (it does not affect positive definiteness) and
    off by default.
    """

    def __init__(self, alpha: float, include_gamma: bool = False):
        if alpha <= 0:
            raise AlphaOutOfRange(f"alpha must be positive, got {alpha}")
        self.alpha = float(alpha)
        self.include_gamma = bool(include_gamma)
        self.name = f"betaprime:alpha={self.alpha}"

    def _check_dim(self, n: int) -> None:
        if self.alpha <= n - 1:
            raise AlphaOutOfRange(
                f"need alpha > N - 1 = {n - 1}, got {self.alpha}")

    def _gamma_pref(self, n: int) -> float:
        if not self.include_gamma:
            return 0.0
        return log_gamma_m_real(np.full(n, 2.0 * self.alpha))

    def radial(self, rho) -> float:
        rho = np.asarray(rho, dtype=float)
        self._check_dim(len(rho))
        logval = self.alpha * float(np.sum(np.log(rho) - 2.0 * np.log1p(rho)))
        return math.exp(logval + self._gamma_pref(len(rho)))

    def __call__(self, x, y) -> float:
        x = np.asarray(x)
        y = np.asarray(y)
        if x.shape != y.shape:
            raise DimensionMismatch(f"shapes {x.shape} and {y.shape} do not match")
        n = x.shape[0]
        self._check_dim(n)
        logval = self.alpha * (logdet_hpd(x) + logdet_hpd(y)
                               - 2.0 * logdet_hpd(x + y))
        return math.exp(logval + self._gamma_pref(n))

    def diagonal_value(self, n: int) -> float:
        """K(x, x) = [Gamma_M(2 alpha)] 4^{-N alpha}, the same for every x."""
        self._check_dim(n)
        return math.exp(self._gamma_pref(n) - n * self.alpha * math.log(4.0))

    def get_params(self) -> dict:
        return {"alpha": self.alpha, "include_gamma": self.include_gamma}


class HeatKernel(Kernel):
    """Closed-form heat kernel, normalized so that K(x, x) = 1."""

    def __init__(self, kappa: float):
        if kappa <= 0:
            raise ValueError("kappa must be positive")
        self.kappa = float(kappa)
        self.name = f"heat:kappa={self.kappa}"

    def radial(self, rho) -> float:
        return heat_kernel_radial_spectrum(self.kappa, rho)

    def get_params(self) -> dict:
        return {"kappa": self.kappa}


class CauchyKernel(Kernel):
    """Kernel from the closed-form Cauchy family of PD functions."""

    def __init__(self, kappa: float):
        if kappa <= 0:
            raise ValueError("kappa must be positive")
        self.kappa = float(kappa)
        self.name = f"cauchy:kappa={self.kappa}"

    def radial(self, rho) -> float:
        return cauchy_family_spectrum(self.kappa, rho)

    def get_params(self) -> dict:
        return {"kappa": self.kappa}


class RadialKernel(Kernel):
    """Kernel built from a user-supplied radial function f: K(x,y) = f_o(rho)."""

    def __init__(self, radial_function: RadialFunction):
        self.radial_function = radial_function
        self.name = f"radial:{radial_function.name}"

    def radial(self, rho) -> float:
        return float(self.radial_function(np.asarray(rho, dtype=float)))

    def get_params(self) -> dict:
        return {"radial_function": self.radial_function.name}


def parse_kernel(spec: str) -> Kernel:
    """Build a kernel from a string like "betaprime:alpha=2" or "heat:kappa=0.5".

    Recognized families: betaprime (alpha, optional gamma=1), heat (kappa),
    cauchy (kappa).
    """
    head, _, tail = spec.partition(":")
    head = head.strip().lower()
    params = {}
    if tail:
        for item in tail.split(","):
            k, _, v = item.partition("=")
            if not _:
                raise ValueError(f"malformed kernel parameter {item!r}")
            params[k.strip()] = float(v)
    if head == "betaprime":
        return BetaPrimeKernel(params.pop("alpha"),
                               include_gamma=bool(params.pop("gamma", 0)))
    if head == "heat":
        return HeatKernel(params.pop("kappa"))
    if head == "cauchy":
        return CauchyKernel(params.pop("kappa"))
    raise ValueError(f"unknown kernel family {head!r}")


def kernel_eval(kernel: Kernel, x, y) -> float:
    return kernel(x, y)


# ---------------------------------------------------------------------------
# Gram matrices
# ---------------------------------------------------------------------------

def _fingerprint(samples) -> str:
    h = hashlib.sha256()
    for x in samples:
        h.update(np.ascontiguousarray(x).tobytes())
    return h.hexdigest()[:16]


@dataclass
class GramMatrix:
    entries: np.ndarray
    kernel_name: str
    fingerprint: str

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries)[0])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            for row in self.entries:
                w.writerow([repr(float(v)) for v in row])

    def to_json_obj(self) -> dict:
        return {
            "kernel": self.kernel_name,
            "size": self.size,
            "fingerprint": self.fingerprint,
            "entries": [[float(v) for v in row] for row in self.entries],
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_obj(), fh)


def gram(kernel: Kernel, samples) -> GramMatrix:
    """Gram matrix [K(x_i, x_j)]; upper triangle computed, mirrored by symmetry."""
    if not samples:
        raise ValueError("empty sample list")
    shapes = {np.asarray(x).shape for x in samples}
    if len(shapes) != 1:
        raise DimensionMismatch(f"inconsistent sample shapes {shapes}")
    m = len(samples)
    if isinstance(kernel, BetaPrimeKernel):
        k = _gram_beta_prime(kernel, samples)
    else:
        k = np.empty((m, m))
        for i in range(m):
            for j in range(i, m):
                k[i, j] = k[j, i] = kernel(samples[i], samples[j])
    return GramMatrix(entries=k, kernel_name=kernel.name,
                      fingerprint=_fingerprint(samples))


def _gram_beta_prime(kernel: BetaPrimeKernel, samples) -> np.ndarray:
    """Batched Beta-prime Gram: one stacked Cholesky over all pairwise sums."""
    xs = np.stack([np.asarray(x) for x in samples])
    m, n = xs.shape[0], xs.shape[1]
    kernel._check_dim(n)
    L = np.linalg.cholesky(xs)
    ld = 2.0 * np.log(np.abs(np.diagonal(L, axis1=1, axis2=2))).sum(axis=1)
    ii, jj = np.triu_indices(m)
    Ls = np.linalg.cholesky(xs[ii] + xs[jj])
    lds = 2.0 * np.log(np.abs(np.diagonal(Ls, axis1=1, axis2=2))).sum(axis=1)
    vals = np.exp(kernel.alpha * (ld[ii] + ld[jj] - 2.0 * lds)
                  + kernel._gamma_pref(n))
    k = np.empty((m, m))
    k[ii, jj] = vals
    k[jj, ii] = vals
    return k


@dataclass
class PsdReport:
    min_eig: float
    is_psd: bool
    tol: float


def psd_check(gm: GramMatrix, tol: float = 1e-8) -> PsdReport:
    """Verdict min_eig >= -tol * trace / m on the (Hermitian) Gram matrix."""
    k = gm.entries
    if np.abs(k - k.conj().T).max() > 1e-10 * max(np.abs(k).max(), 1e-300):
        raise DimensionMismatch("Gram matrix is not Hermitian")
    min_eig = gm.min_eigenvalue()
    bound = -tol * float(np.trace(k).real) / gm.size
    return PsdReport(min_eig=min_eig, is_psd=bool(min_eig >= bound), tol=tol)


# ---------------------------------------------------------------------------
# Benchmark
# ---------------------------------------------------------------------------

@dataclass
class BenchRow:
    n: int
    mean_s: float
    std_s: float
    threads: str
    times: list = field(default_factory=list)


def bench_gram(kernel: Kernel, n_list, m: int = 100, repeats: int = 3,
               seed=0, threads: str = "default") -> list[BenchRow]:
    """Wall-clock Gram timings over fresh random samples per repeat.

    Sample generation is excluded from the timing; one warm-up round per N
    is discarded.  Samples use eigenvalues uniform on [1, 2].
    """
    if m < 2:
        raise ValueError("need m >= 2")
    rows = []
    for idx, n in enumerate(n_list):
        times = []
        for rep in range(repeats + 1):
            samples = sample_spd(n, 1.0, 2.0, m, field="real",
                                 seed=np.random.SeedSequence([int(seed), idx, rep]))
            t0 = time.perf_counter()
            gram(kernel, samples)
            dt = time.perf_counter() - t0
            if rep > 0:                  # warm-up round discarded
                times.append(dt)
        rows.append(BenchRow(n=int(n), mean_s=float(np.mean(times)),
                             std_s=float(np.std(times)), threads=threads,
                             times=times))
    return rows


def bench_to_csv(rows: list[BenchRow], fh=None) -> str:
    buf = fh or io.StringIO()
    w = csv.writer(buf)
    w.writerow(["N", "mean_s", "std_s", "threads"])
    for r in rows:
        w.writerow([r.n, repr(r.mean_s), repr(r.std_s), r.threads])
    return buf.getvalue() if fh is None else ""


def loglog_slope(rows: list[BenchRow]) -> float:
    """Least-squares slope of log(mean time) against log(N)."""
    x = np.log([r.n for r in rows])
    y = np.log([r.mean_s for r in rows])
    return float(np.polyfit(x, y, 1)[0])
