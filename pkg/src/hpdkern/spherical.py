"""Spherical functions on the HPD manifold and their relatives.

Closed-form determinantal evaluation of the spherical functions, a Haar
Monte-Carlo oracle, Schur and zonal polynomials, Gaussian integrals, and the
radial Laplace-Beltrami operator.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import NumericalInstability, StepTooLarge
from .gammafn import gamma_m  # noqa: F401  (re-exported: part of this module's surface)
from .hpd_core import (
    as_rng,
    eigenvalues,
    haar_unitary_batch,
    log_vandermonde,
    vandermonde,
)

GAP_REL = 1e-5     # pairwise-gap threshold that triggers confluent handling
EPS_REL = 3e-2     # perturbation amplitude for the confluent limit


def delta_vector(n: int) -> np.ndarray:
    """The half-integer shift delta_k = (2k - N - 1)/2, k = 1..N."""
    return (2.0 * np.arange(1, n + 1) - n - 1) / 2.0


def log_factorial_prefactor(n: int) -> float:
    """log prod_{k=1}^{N-1} k!"""
    return sum(math.lgamma(k + 1) for k in range(1, n))


# ---------------------------------------------------------------------------
# Alternant determinants and the confluent limit
# ---------------------------------------------------------------------------

def _alternant_over_vr(rho: np.ndarray, s: np.ndarray) -> complex:
    """det[rho_k^{s_l}] / V(rho) for distinct positive rho, complex exponents s.

    Rows are rescaled by their largest magnitude before the LU determinant so
    spread-out spectra do not overflow.
    """
    logr = np.log(rho)
    a = np.exp(np.multiply.outer(logr, np.asarray(s, dtype=complex)))
    rowmax = np.abs(a).max(axis=1)
    sign, logabs = np.linalg.slogdet(a / rowmax[:, None])
    if sign == 0:
        return 0.0 + 0.0j
    logdet = np.log(sign) + logabs + np.log(rowmax).sum()
    return complex(np.exp(logdet - log_vandermonde(rho)))


def _min_gap(v: np.ndarray) -> float:
    n = len(v)
    if n < 2:
        return np.inf
    return min(abs(v[l] - v[k]) for k in range(n) for l in range(k + 1, n))


def _clusters(v: np.ndarray, gap: float) -> list[list[int]]:
    order = np.argsort(v.real + 1e-9 * v.imag) if np.iscomplexobj(v) else np.argsort(v)
    groups = []
    current = [order[0]]
    for idx in order[1:]:
        if abs(v[idx] - v[current[-1]]) < gap:
            current.append(idx)
        else:
            groups.append(current)
            current = [idx]
    groups.append(current)
    return groups


def _snap_and_spread(v: np.ndarray, eps: float, gap: float,
                     multiplicative: bool) -> np.ndarray:
    """Snap clustered entries to their mean, then spread by symmetric offsets.

    The snap keeps the error O(gap^2) (the function is symmetric in the
    cluster, so first-order deviations cancel); the symmetric offsets make
    the perturbed value an even function of eps, which Richardson
    extrapolation then exploits.  Positive spectra are spread
    multiplicatively so they stay positive.
    """
    v = np.array(v)
    out = v.astype(complex) if np.iscomplexobj(v) else v.astype(float)
    for grp in _clusters(v, gap):
        c = len(grp)
        if c == 1:
            continue
        center = np.mean(v[grp])
        for i, idx in enumerate(grp):
            off = eps * (i - (c - 1) / 2.0)
            out[idx] = center * (1.0 + off) if multiplicative else center + off
    return out


def confluent_eval(func, vectors, kinds=None, rel_tol=3e-3):
    """Evaluate func(*vectors) in the confluent limit by perturbation.

    Each vector whose minimum pairwise gap falls below GAP_REL * scale has
    its clusters snapped to their means and spread by symmetric offsets at
    amplitudes eps, eps/2, eps/4; a two-stage Richardson combination leaves
    an O(eps^6) error.  func must be permutation-symmetric in each vector
    and analytic near the inputs.  kinds marks each vector "positive"
    (multiplicative spread) or "complex" (additive spread).
    """
    vectors = [np.asarray(v) for v in vectors]
    if kinds is None:
        kinds = ["complex" if np.iscomplexobj(v) else "positive" for v in vectors]
    scales = [max(np.abs(v).max(), 1.0) for v in vectors]
    needs = []
    for v, sc, kind in zip(vectors, scales, kinds):
        gap = GAP_REL * (1.0 if kind == "positive" else sc)
        needs.append(_min_gap(v) < gap if kind == "complex" else
                     _relative_min_gap(v) < GAP_REL)
    if not any(needs):
        return func(*vectors)

    def at(eps):
        pert = []
        for v, sc, kind, need in zip(vectors, scales, kinds, needs):
            if not need:
                pert.append(v)
            elif kind == "positive":
                pert.append(_snap_and_spread(v, eps, _abs_gap_for(v), True))
            else:
                pert.append(_snap_and_spread(v, eps * sc, GAP_REL * sc, False))
        return func(*pert)

    f1 = at(EPS_REL)
    f2 = at(EPS_REL / 2.0)
    f3 = at(EPS_REL / 4.0)
    r1 = (4.0 * f2 - f1) / 3.0
    r2 = (4.0 * f3 - f2) / 3.0
    val = (16.0 * r2 - r1) / 15.0
    resid = abs(r1 - r2) / max(abs(val), 1e-300)
    if resid > rel_tol:
        raise NumericalInstability(
            f"confluent-limit residual {resid:.2e} exceeds {rel_tol:.0e}"
        )
    return val


def _relative_min_gap(v: np.ndarray) -> float:
    """Minimum pairwise gap of a positive vector, relative to the pair mean."""
    n = len(v)
    if n < 2:
        return np.inf
    return min(
        abs(v[l] - v[k]) / max(abs(v[l] + v[k]) / 2.0, 1e-300)
        for k in range(n) for l in range(k + 1, n)
    )


def _abs_gap_for(v: np.ndarray) -> float:
    """Clustering threshold for a positive vector (relative gap GAP_REL)."""
    return GAP_REL * float(np.abs(v).max())


# ---------------------------------------------------------------------------
# Spherical functions
# ---------------------------------------------------------------------------

def spherical_function(lam, rho) -> complex:
    """Closed determinantal form of the spherical function Phi_lambda.

    Phi_lambda(rho) = prod_{k<N} k! * det[rho_k^{lam_l + (N-1)/2}]
                      / (V(lam) V(rho)),
    symmetric under permutations of lam and of rho, equal to 1 at the
    identity spectrum.  Confluent lam or rho are handled by perturbation.
    """
    lam = np.asarray(lam, dtype=complex)
    rho = np.asarray(rho, dtype=float)
    n = len(rho)
    if len(lam) != n:
        raise ValueError("lam and rho must have the same length")
    if n == 1:
        return complex(rho[0] ** lam[0])
    if np.ptp(rho) <= 1e-12 * rho.mean():
        # scalar multiple of the identity: exactly rho^(sum lam), since the
        # power function is homogeneous of degree sum(s) and sum(delta) = 0
        return complex(rho.mean() ** np.sum(lam))
    pref = math.exp(log_factorial_prefactor(n))

    def base(lam_, rho_):
        s = lam_ + (n - 1) / 2.0
        return pref * _alternant_over_vr(rho_, s) / np.exp(log_vandermonde(lam_))

    return complex(confluent_eval(base, [lam, rho]))


def monte_carlo_spherical(lam, x, samples: int, seed=0,
                          chunk: int = 20000) -> tuple[complex, float]:
    """Haar Monte-Carlo estimate of Phi_lambda(x) with a standard error.

    Averages Delta_{lam+delta}(u . x) over Haar unitary draws.  The power
    function is evaluated from batched leading principal minors.
    """
    lam = np.asarray(lam, dtype=complex)
    x = np.asarray(x)
    n = x.shape[0]
    s = lam + delta_vector(n)
    diff = s - np.append(s[1:], 0.0)
    rng = as_rng(seed)
    vals = np.empty(samples, dtype=complex)
    done = 0
    while done < samples:
        b = min(chunk, samples - done)
        u = haar_unitary_batch(n, b, rng)
        y = u @ x @ u.conj().transpose(0, 2, 1)
        # log of leading principal minors, batched (minors of HPD are > 0)
        logm = np.empty((b, n))
        for k in range(1, n + 1):
            sub = y[:, :k, :k]
            sgn, logabs = np.linalg.slogdet(sub)
            logm[:, k - 1] = logabs
        vals[done:done + b] = np.exp(logm @ diff)
        done += b
    mean = vals.mean()
    if samples > 1:
        var = np.var(vals.real, ddof=1) + np.var(vals.imag, ddof=1)
        stderr = math.sqrt(var / samples)
    else:
        stderr = float("inf")
    return complex(mean), float(stderr)


def schur_polynomial(m, rho) -> float:
    """Schur polynomial S_m(rho) via the bialternant formula.

    S_m = det[rho_k^{m_l + N - l}] / det[rho_k^{N - l}]; confluent rho are
    handled by perturbation.  Matches the semistandard-tableau definition.
    """
    m = np.asarray(m, dtype=float)
    rho = np.asarray(rho, dtype=float)
    n = len(rho)
    if len(m) != n:
        raise ValueError("partition and spectrum must have the same length")
    exps = m + n - np.arange(1, n + 1)
    sign = (-1.0) ** (n * (n - 1) // 2)  # det[rho^{N-l}] = sign * V(rho)

    def base(rho_):
        return sign * _alternant_over_vr(rho_, exps)

    val = confluent_eval(base, [rho])
    return float(np.real(val))


def spherical_via_schur(m, rho) -> float:
    """Phi_{m - delta}(rho) through the Schur special case.

    Phi = prod k! * S_m(rho) / Pi(lam) with lam = m - delta and
    Pi(mu) = prod_{k<l} (mu_k - mu_l).
    """
    m = np.asarray(m, dtype=float)
    rho = np.asarray(rho, dtype=float)
    n = len(rho)
    if n == 1:
        return float(rho[0] ** m[0])
    lam = m - delta_vector(n)
    pi_lam = vandermonde(lam) * (-1.0) ** (n * (n - 1) // 2)
    pref = math.exp(log_factorial_prefactor(n))
    return pref * schur_polynomial(m, rho) / float(np.real(pi_lam))


# ---------------------------------------------------------------------------
# Zonal polynomials
# ---------------------------------------------------------------------------

def partitions_of(n: int, max_parts: int) -> list[tuple[int, ...]]:
    """Partitions of n into at most max_parts parts, zero-padded, lex order."""
    out = []

    def rec(remaining, most, acc):
        if remaining == 0:
            out.append(tuple(acc) + (0,) * (max_parts - len(acc)))
            return
        if len(acc) == max_parts:
            return
        for p in range(min(most, remaining), 0, -1):
            rec(remaining - p, p, acc + [p])

    rec(n, n, [])
    out.sort(reverse=True)
    return out


def standard_tableau_count(m) -> int:
    """Number of standard Young tableaux of shape m (hook length formula)."""
    shape = [int(v) for v in m if v > 0]
    n = sum(shape)
    num = math.factorial(n)
    den = 1
    for i, row in enumerate(shape):
        for j in range(row):
            arm = row - j - 1
            leg = sum(1 for r in shape[i + 1:] if r > j)
            den *= arm + leg + 1
    return num // den


def zonal_constants_by_solve(n_vars: int, weight: int) -> dict[tuple[int, ...], float]:
    """Normalization constants from the defining identity as a linear system.

    Solves sum_{[m]=n} c_m S_m(rho) = (sum rho)^n at random spectra.  The
    system grows badly conditioned with the weight; usable as a cross-check
    up to weight ~10.
    """
    parts = partitions_of(weight, n_vars)
    p = len(parts)
    rng = np.random.default_rng(987654321 + 1000 * n_vars + weight)
    a = np.empty((p, p))
    b = np.empty(p)
    for i in range(p):
        rho = rng.uniform(0.5, 2.0, n_vars)
        for j, m in enumerate(parts):
            a[i, j] = schur_polynomial(m, rho)
        b[i] = rho.sum() ** weight
    c = np.linalg.solve(a, b)
    return {m: float(ci) for m, ci in zip(parts, c)}


@lru_cache(maxsize=None)
def _zonal_constants(n_vars: int, weight: int) -> dict[tuple[int, ...], int]:
    """Normalization constants c_m with sum_{[m]=n} c_m S_m = (sum rho)^n.

    The constants equal the standard-tableau counts of the shapes (exact
    integers); the defining identity is validated at random spectra to
    1e-10 relative.
    """
    parts = partitions_of(weight, n_vars)
    consts = {m: standard_tableau_count(m) for m in parts}
    rng = np.random.default_rng(987654321 + 1000 * n_vars + weight)
    for _ in range(3):
        rho = rng.uniform(0.5, 2.0, n_vars)
        lhs = sum(c * schur_polynomial(m, rho) for m, c in consts.items())
        target = rho.sum() ** weight
        if abs(lhs - target) > 1e-10 * abs(target):
            raise NumericalInstability(
                f"zonal identity residual {abs(lhs - target) / abs(target):.2e} "
                f"at weight {weight}"
            )
    return consts


def zonal_polynomial(m, rho) -> float:
    """Complex zonal polynomial Z_m(rho) = c_m S_m(rho).

    The constants c_m are fixed by the defining identity
    (tr x)^n = sum_{[m]=n} Z_m(rho).
    """
    m = tuple(int(v) for v in m)
    rho = np.asarray(rho, dtype=float)
    weight = sum(m)
    if weight == 0:
        return 1.0
    c = _zonal_constants(len(rho), weight)[m]
    return c * schur_polynomial(m, rho)


# ---------------------------------------------------------------------------
# Gaussian integrals
# ---------------------------------------------------------------------------

def _sch(a):
    """sinh(a)/a, regular at 0 (complex-safe)."""
    a = complex(a)
    if abs(a) < 1e-5:
        a2 = a * a
        return 1.0 + a2 / 6.0 + a2 * a2 / 120.0
    return np.sinh(a) / a


def gauss_Z(sigma: float, lam, form: str = "product") -> complex:
    """The Gaussian integral Z(sigma, lambda), up to an N-dependent constant.

    Product form: sigma^{N^2} e^{(sigma^2/2)((lam,lam)+(delta,delta))}
                  prod_{k<l} sch((sigma^2/2)(lam_l - lam_k)).
    Determinant form: det[sigma e^{(sigma^2/2)(delta_k + lam_l)^2}] / V(lam);
    the two agree up to one N-dependent constant.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    lam = np.asarray(lam, dtype=complex)
    n = len(lam)
    d = delta_vector(n)
    if form == "product":
        acc = sigma ** (n * n) * np.exp(
            (sigma**2 / 2.0) * (np.sum(lam * lam) + np.sum(d * d))
        )
        for k in range(n):
            for l in range(k + 1, n):
                acc *= _sch((sigma**2 / 2.0) * (lam[l] - lam[k]))
        return complex(acc)
    if form == "determinant":
        v = vandermonde(lam)
        if v == 0:
            raise ValueError("determinant form requires distinct lam")
        a = sigma * np.exp((sigma**2 / 2.0) * np.add.outer(d, lam) ** 2)
        return complex(np.linalg.det(a) / v)
    raise ValueError(f"unknown form {form!r}")


def gauss_spherical_transform(sigma: float, t) -> float:
    """Closed-form spherical transform of the Gaussian radial function.

    sigma^{N^2} e^{(sigma^2/2)((delta,delta)-(t,t))}
    prod_{k<l} sc((sigma^2/2)(t_l - t_k)), with sc(a) = sin(a)/a.
    The N-dependent normalization constant is omitted (see calibrate_constant).
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    t = np.asarray(t, dtype=float)
    n = len(t)
    d = delta_vector(n)
    acc = sigma ** (n * n) * math.exp(
        (sigma**2 / 2.0) * (np.sum(d * d) - np.sum(t * t))
    )
    for k in range(n):
        for l in range(k + 1, n):
            acc *= np.sinc((sigma**2 / 2.0) * (t[l] - t[k]) / math.pi)
    return float(acc)


# ---------------------------------------------------------------------------
# Radial Laplace-Beltrami operator
# ---------------------------------------------------------------------------

def _laplace_once(f_o, rho: np.ndarray, h: np.ndarray):
    n = len(rho)
    f0 = f_o(rho)
    d1 = np.empty(n, dtype=complex)
    d2 = np.empty(n, dtype=complex)
    for k in range(n):
        e = np.zeros(n)
        e[k] = h[k]
        fp = f_o(rho + e)
        fm = f_o(rho - e)
        d1[k] = (fp - fm) / (2.0 * h[k])
        d2[k] = (fp - 2.0 * f0 + fm) / h[k] ** 2
    acc = np.sum(rho**2 * d2) + n * np.sum(rho * d1)
    for k in range(n):
        for l in range(k + 1, n):
            acc += 2.0 * rho[k] * rho[l] / (rho[k] - rho[l]) * (d1[k] - d1[l])
    return acc


def laplace_beltrami_radial(f_o, rho, h_rel: float = 1e-4,
                            check_tol: float = 1e-4):
    """Radial Laplace-Beltrami operator by central finite differences.

    L f = sum rho_k^2 d2f + 2 sum_{k<l} rho_k rho_l/(rho_k - rho_l)
          (d1f_k - d1f_l) + N sum rho_k d1f_k,
    with relative step h = h_rel * rho_k.  Raises StepTooLarge when the
    h-vs-h/2 Richardson estimate indicates relative error above check_tol.
    Spherical functions Phi_lambda are eigenfunctions with eigenvalue
    (lam,lam) - (delta,delta).
    """
    rho = np.asarray(rho, dtype=float)
    h = h_rel * rho
    if _min_gap(rho) <= 10.0 * h.max():
        raise ValueError("spectrum entries too close for the finite-difference step")
    v1 = _laplace_once(f_o, rho, h)
    v2 = _laplace_once(f_o, rho, h / 2.0)
    est = abs(v1 - v2) / max(abs(v2), 1e-300)
    if est > check_tol:
        raise StepTooLarge(f"Richardson estimate {est:.2e} exceeds {check_tol:.0e}")
    val = (4.0 * v2 - v1) / 3.0
    if abs(np.imag(val)) == 0:
        return float(np.real(val))
    return complex(val)
