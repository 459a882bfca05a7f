"""Primitives on the manifold of Hermitian positive definite (HPD) matrices.

An HPD matrix is represented as a plain numpy array that has passed
:func:`validate_hpd`.  All operations here are pure; samplers are pure given
their seed.  Eigenvalues are sorted ascending everywhere.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import (
    DimensionMismatch,
    NotHermitian,
    NotPositiveDefinite,
    SingularMatrix,
)

HERMITIAN_TOL = 1e-10
SINGULAR_TOL = 1e-12


def as_rng(seed) -> np.random.Generator:
    """Accept an int seed, a SeedSequence, or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def validate_hpd(entries, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Check Hermitian symmetry and positive definiteness of a square matrix.

    Returns the (exactly symmetrized) matrix.  Raises :class:`NotHermitian`
    or :class:`NotPositiveDefinite` otherwise.
    """
    x = np.asarray(entries)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {x.shape}")
    scale = max(np.abs(x).max(), 1e-300)
    asym = np.abs(x - x.conj().T).max()
    if asym > tol * scale:
        raise NotHermitian(f"asymmetry {asym:.3e} exceeds {tol:.1e} * {scale:.3e}")
    x = 0.5 * (x + x.conj().T)
    w = np.linalg.eigvalsh(x)
    if w[0] <= 0:
        raise NotPositiveDefinite(f"smallest eigenvalue {w[0]:.3e} <= 0")
    return x


def check_invertible(g, tol: float = SINGULAR_TOL) -> np.ndarray:
    g = np.asarray(g)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {g.shape}")
    s = np.linalg.svd(g, compute_uv=False)
    if s[-1] <= tol * max(s[0], 1e-300):
        raise SingularMatrix("matrix is singular within tolerance")
    return g


def eigenvalues(x) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix."""
    return np.linalg.eigvalsh(x)


def group_action(g, x) -> np.ndarray:
    """g . x = g x g^dagger."""
    g = np.asarray(g)
    x = np.asarray(x)
    if g.shape != x.shape:
        raise DimensionMismatch(f"shapes {g.shape} and {x.shape} do not match")
    return g @ x @ g.conj().T


def hpd_power(x, p: float) -> np.ndarray:
    """x**p through the spectral decomposition (x HPD, p real)."""
    w, v = np.linalg.eigh(np.asarray(x))
    if w[0] <= 0:
        raise NotPositiveDefinite(f"smallest eigenvalue {w[0]:.3e} <= 0")
    return (v * w**p) @ v.conj().T


def congruence_normalize(x, y) -> np.ndarray:
    """y^{-1/2} x y^{-1/2}; its spectrum equals the spectrum of y^{-1} x."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise DimensionMismatch(f"shapes {x.shape} and {y.shape} do not match")
    yinvh = hpd_power(y, -0.5)
    return yinvh @ x @ yinvh


def relative_spectrum(x, y) -> np.ndarray:
    """Ascending eigenvalues of y^{-1/2} x y^{-1/2}.

    Solved as the definite generalized eigenproblem x v = rho y v, which
    avoids forming matrix square roots.
    """
    import scipy.linalg

    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise DimensionMismatch(f"shapes {x.shape} and {y.shape} do not match")
    return scipy.linalg.eigvalsh(x, y)


def riemannian_distance(x, y) -> float:
    """Affine-invariant distance sqrt(sum_k log^2 rho_k) of the relative spectrum."""
    rho = relative_spectrum(x, y)
    if rho[0] <= 0:
        raise NotPositiveDefinite("relative spectrum is not positive")
    return float(np.sqrt(np.sum(np.log(rho) ** 2)))


def vandermonde(v):
    """prod_{k<l} (v_l - v_k), ascending-index convention."""
    v = np.asarray(v)
    n = len(v)
    out = v.dtype.type(1) if v.dtype.kind in "fc" else 1.0
    for k in range(n):
        for l in range(k + 1, n):
            out = out * (v[l] - v[k])
    return out


def log_vandermonde(v) -> complex:
    """Principal-branch log of the Vandermonde product (complex)."""
    v = np.asarray(v, dtype=complex)
    n = len(v)
    acc = 0.0 + 0.0j
    for k in range(n):
        for l in range(k + 1, n):
            acc += np.log(v[l] - v[k])
    return acc


def leading_minors(x) -> np.ndarray:
    """The N leading principal minors of an HPD matrix (all positive).

    Computed from the Cholesky factor: Delta_k = prod_{j<=k} |L_jj|^2.
    """
    L = np.linalg.cholesky(np.asarray(x))
    d = np.abs(np.diagonal(L)) ** 2
    return np.cumprod(d)


def log_leading_minors(x) -> np.ndarray:
    L = np.linalg.cholesky(np.asarray(x))
    return 2.0 * np.cumsum(np.log(np.abs(np.diagonal(L))))


def power_function(s, x) -> complex:
    """Delta_s(x) = prod_k Delta_k(x)^(s_k - s_{k+1}) with s_{N+1} = 0.

    Evaluated in the log domain; the minors of an HPD matrix are positive.
    """
    s = np.asarray(s, dtype=complex)
    logm = log_leading_minors(x)
    diff = s - np.append(s[1:], 0.0)
    return complex(np.exp(np.sum(diff * logm)))


def logdet_hpd(x) -> float:
    """log det of an HPD matrix via Cholesky."""
    L = np.linalg.cholesky(np.asarray(x))
    return float(2.0 * np.sum(np.log(np.abs(np.diagonal(L)))))


def haar_unitary(n: int, seed=0) -> np.ndarray:
    """Haar-distributed n x n unitary matrix (QR with phase correction)."""
    rng = as_rng(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_orthogonal(n: int, seed=0) -> np.ndarray:
    """Haar-distributed n x n real orthogonal matrix."""
    rng = as_rng(seed)
    z = rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * np.sign(np.diagonal(r))


def haar_unitary_batch(n: int, count: int, rng) -> np.ndarray:
    """Stacked Haar unitaries, shape (count, n, n)."""
    rng = as_rng(rng)
    z = (rng.standard_normal((count, n, n)) + 1j * rng.standard_normal((count, n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    return q * (d / np.abs(d))[:, None, :]


def sample_spd(n: int, eig_low: float, eig_high: float, count: int,
               field: str = "real", seed=0) -> list[np.ndarray]:
    """Random HPD matrices u diag(xi) u^dagger.

    Eigenvalues are i.i.d. uniform on [eig_low, eig_high]; eigenvectors are
    Haar (orthogonal when field="real", unitary when field="complex").
    Eigenvalue and eigenvector draws are independent across samples.
    """
    if not (0 < eig_low < eig_high):
        raise ValueError("need 0 < eig_low < eig_high")
    if field not in ("real", "complex"):
        raise ValueError(f"unknown field {field!r}")
    rng = as_rng(seed)
    out = []
    for _ in range(count):
        u = haar_unitary(n, rng) if field == "complex" else haar_orthogonal(n, rng)
        xi = rng.uniform(eig_low, eig_high, n)
        x = (u * xi) @ u.conj().T
        out.append(0.5 * (x + x.conj().T))
    return out


# ---------------------------------------------------------------------------
# Matrix JSON format
# ---------------------------------------------------------------------------

def matrix_to_obj(x) -> dict:
    x = np.asarray(x)
    n = x.shape[0]
    if np.iscomplexobj(x) and np.abs(x.imag).max() > 0:
        entries = [[[float(x[i, j].real), float(x[i, j].imag)] for j in range(n)]
                   for i in range(n)]
        field = "complex"
    else:
        entries = [[float(np.real(x[i, j])) for j in range(n)] for i in range(n)]
        field = "real"
    return {"dim": n, "field": field, "entries": entries}


def matrix_from_obj(obj: dict) -> np.ndarray:
    n = obj["dim"]
    entries = obj["entries"]
    if obj["field"] == "complex":
        x = np.array([[complex(e[0], e[1]) for e in row] for row in entries])
    else:
        x = np.array(entries, dtype=float)
    if x.shape != (n, n):
        raise DimensionMismatch(f"entries shape {x.shape} does not match dim {n}")
    return x


def save_matrix(path, x) -> None:
    with open(path, "w") as fh:
        json.dump(matrix_to_obj(x), fh)


def load_matrix(path) -> np.ndarray:
    with open(path) as fh:
        return matrix_from_obj(json.load(fh))


def save_samples(path, xs) -> None:
    with open(path, "w") as fh:
        json.dump([matrix_to_obj(x) for x in xs], fh)


def load_samples(path) -> list[np.ndarray]:
    with open(path) as fh:
        return [matrix_from_obj(o) for o in json.load(fh)]
