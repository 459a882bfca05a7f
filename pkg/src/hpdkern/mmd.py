"""Kernel two-sample testing on HPD matrices via maximum mean discrepancy.

Provides the unbiased quadratic MMD^2 estimate, a linear-time statistic with
a one-sided Gaussian asymptotic threshold, permutation-calibrated testing,
and the spectral-scaling rejection-rate experiment.
"""

from __future__ import annotations

import csv
import io
import json
import statistics
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, OddSampleSize, SizeMismatch
from .hpd_core import sample_spd
from .kernels import Kernel, gram, parse_kernel


# ---------------------------------------------------------------------------
# Sample sets and results
# ---------------------------------------------------------------------------

@dataclass
class SampleSet:
    matrices: list
    label: str = ""
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.matrices:
            raise ValueError("empty sample set")
        shapes = {np.asarray(x).shape for x in self.matrices}
        if len(shapes) != 1:
            raise DimensionMismatch(f"inconsistent matrix shapes {shapes}")

    def __len__(self) -> int:
        return len(self.matrices)


@dataclass
class TestResult:
    statistic: float
    threshold: float
    reject: bool
    level: float
    method: str

    def to_obj(self) -> dict:
        return {
            "statistic": self.statistic,
            "threshold": self.threshold,
            "reject": self.reject,
            "level": self.level,
            "method": self.method,
        }


def _as_matrices(x) -> list:
    return x.matrices if isinstance(x, SampleSet) else list(x)


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------

def _pooled_gram(kernel: Kernel, xs, ys) -> np.ndarray:
    return gram(kernel, list(xs) + list(ys)).entries


def _mmd2_from_gram(k: np.ndarray, idx_x, idx_y) -> float:
    """Unbiased MMD^2 from a pooled Gram matrix and index sets of equal size."""
    m = len(idx_x)
    kxx = k[np.ix_(idx_x, idx_x)]
    kyy = k[np.ix_(idx_y, idx_y)]
    kxy = k[np.ix_(idx_x, idx_y)]
    # h(z_i, z_j) = Kxx_ij - Kxy_ij - Kxy_ji + Kyy_ij summed over i != j
    total = (kxx.sum() - np.trace(kxx)
             + kyy.sum() - np.trace(kyy)
             - 2.0 * (kxy.sum() - np.trace(kxy)))
    return float(total / (m * (m - 1)))


def mmd2_unbiased(kernel: Kernel, x, y) -> float:
    """Unbiased quadratic estimate (1/(m(m-1))) sum_{i != j} h(z_i, z_j).

    h(z_i, z_j) = K(x_i, x_j) - K(x_i, y_j) - K(x_j, y_i) + K(y_i, y_j).
    Can be negative; equals 0 exactly when y is x in the same order.
    """
    xs, ys = _as_matrices(x), _as_matrices(y)
    m = len(xs)
    if len(ys) != m:
        raise SizeMismatch(f"sample sizes {m} and {len(ys)} differ")
    if m < 2:
        raise SizeMismatch("need m >= 2")
    k = _pooled_gram(kernel, xs, ys)
    return _mmd2_from_gram(k, list(range(m)), list(range(m, 2 * m)))


def mmd_linear(kernel: Kernel, x, y, level: float = 0.05) -> TestResult:
    """Linear-time statistic (2/m) sum_i h(z_{2i-1}, z_{2i}) with Gaussian threshold.

    The threshold is the one-sided normal quantile z_{1-level} times the
    plug-in standard error sqrt(var(h-terms) / (m/2)).  Pairs follow sample
    order; rejection requires the statistic to exceed the threshold strictly.
    """
    xs, ys = _as_matrices(x), _as_matrices(y)
    m = len(xs)
    if len(ys) != m:
        raise SizeMismatch(f"sample sizes {m} and {len(ys)} differ")
    if m % 2 != 0:
        raise OddSampleSize(f"linear statistic needs even m, got {m}")
    if m < 4:
        raise SizeMismatch("need m >= 4")
    if not (0 < level < 1):
        raise ValueError("level must lie in (0, 1)")
    h = np.empty(m // 2)
    for i in range(m // 2):
        a, b = 2 * i, 2 * i + 1
        h[i] = (kernel(xs[a], xs[b]) - kernel(xs[a], ys[b])
                - kernel(xs[b], ys[a]) + kernel(ys[a], ys[b]))
    stat = float(h.mean())
    z = statistics.NormalDist().inv_cdf(1.0 - level)
    sigma = float(np.sqrt(h.var(ddof=1) / (m // 2)))
    threshold = z * sigma
    return TestResult(statistic=stat, threshold=threshold,
                      reject=bool(stat > threshold), level=level,
                      method="linear_asymptotic")


def permutation_test(kernel: Kernel, x, y, n_perm: int = 200,
                     level: float = 0.05, seed=0) -> TestResult:
    """Quadratic test calibrated by label permutations of the pooled sample.

    The threshold is the (1 - level) empirical quantile of the unbiased
    statistic over n_perm random relabelings; the pooled Gram matrix is
    computed once.
    """
    xs, ys = _as_matrices(x), _as_matrices(y)
    m = len(xs)
    if len(ys) != m:
        raise SizeMismatch(f"sample sizes {m} and {len(ys)} differ")
    if n_perm < 100:
        raise ValueError("need n_perm >= 100")
    if not (0 < level < 1):
        raise ValueError("level must lie in (0, 1)")
    k = _pooled_gram(kernel, xs, ys)
    stat = _mmd2_from_gram(k, list(range(m)), list(range(m, 2 * m)))
    rng = np.random.default_rng(seed)
    null = np.empty(n_perm)
    for p in range(n_perm):
        perm = rng.permutation(2 * m)
        null[p] = _mmd2_from_gram(k, perm[:m], perm[m:])
    threshold = float(np.quantile(null, 1.0 - level, method="higher"))
    return TestResult(statistic=stat, threshold=threshold,
                      reject=bool(stat > threshold), level=level,
                      method="quadratic_permutation")


# ---------------------------------------------------------------------------
# The spectral-scaling experiment
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    """Rejection-rate sweep over spectral scaling factors.

    For each factor r the null sample has eigenvalues uniform on
    [base, base+1] and the alternative uniform on [r*base, r*base+1];
    eigenvectors are Haar orthogonal, all draws independent.
    """
    n: int = 3
    m: int = 100
    base: float = 30.0
    r_list: tuple = (0.1, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0)
    trials: int = 50
    level: float = 0.05
    kernel: str = "betaprime:alpha=3"
    method: str = "linear"
    seed: int = 0

    def __post_init__(self):
        if any(r <= 0 for r in self.r_list):
            raise ValueError("scaling factors must be positive")
        if not (0 < self.level < 1):
            raise ValueError("level must lie in (0, 1)")

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            obj = json.load(fh)
        if "r_list" in obj:
            obj["r_list"] = tuple(obj["r_list"])
        return cls(**obj)


@dataclass
class ExperimentRow:
    r: float
    rejections: int
    trials: int

    @property
    def rate(self) -> float:
        return self.rejections / self.trials


def _run_trial(cfg: ExperimentConfig, kernel: Kernel, r: float, rng) -> bool:
    xs = sample_spd(cfg.n, cfg.base, cfg.base + 1.0, cfg.m,
                    field="real", seed=rng)
    ys = sample_spd(cfg.n, r * cfg.base, r * cfg.base + 1.0, cfg.m,
                    field="real", seed=rng)
    if cfg.method == "linear":
        res = mmd_linear(kernel, xs, ys, level=cfg.level)
    elif cfg.method == "quadratic":
        res = permutation_test(kernel, xs, ys, level=cfg.level,
                               seed=rng.integers(2**63))
    else:
        raise ValueError(f"unknown test method {cfg.method!r}")
    return res.reject


def two_sample_experiment(cfg: ExperimentConfig) -> list[ExperimentRow]:
    """Rejection fraction per scaling factor; one RNG stream per (factor, trial)."""
    kernel = parse_kernel(cfg.kernel)
    rows = []
    for k, r in enumerate(cfg.r_list):
        rejections = 0
        for trial in range(cfg.trials):
            rng = np.random.default_rng([int(cfg.seed), k, trial])
            if _run_trial(cfg, kernel, float(r), rng):
                rejections += 1
        rows.append(ExperimentRow(r=float(r), rejections=rejections,
                                  trials=cfg.trials))
    return rows


def experiment_to_csv(rows: list[ExperimentRow], fh=None) -> str:
    buf = fh or io.StringIO()
    w = csv.writer(buf)
    w.writerow(["r", "rejections", "trials", "rate"])
    for row in rows:
        w.writerow([repr(row.r), row.rejections, row.trials, repr(row.rate)])
    return buf.getvalue() if fh is None else ""
