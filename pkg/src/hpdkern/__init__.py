"""Invariant positive definite kernels on Hermitian positive definite matrices.

Spherical-transform machinery (closed forms and quadrature), closed-form
kernel families (Beta-prime, heat, Cauchy), Gram-matrix tooling, and
kernel-MMD two-sample testing, with a CLI front end (`hpdkern`).
"""

from .errors import HpdKernError
from .hpd_core import (
    group_action,
    load_matrix,
    load_samples,
    relative_spectrum,
    riemannian_distance,
    sample_spd,
    save_matrix,
    save_samples,
    validate_hpd,
)
from .kernels import (
    BetaPrimeKernel,
    CauchyKernel,
    GramMatrix,
    HeatKernel,
    RadialKernel,
    bench_gram,
    gram,
    kernel_eval,
    parse_kernel,
    psd_check,
)
from .mmd import (
    ExperimentConfig,
    SampleSet,
    TestResult,
    mmd2_unbiased,
    mmd_linear,
    permutation_test,
    two_sample_experiment,
)
from .ramanujan import (
    PsiFunction,
    binomial_series_check,
    psi_positivity_scan,
    ramanujan_transform,
    spherical_series,
)
from .spherical import (
    gauss_Z,
    gauss_spherical_transform,
    monte_carlo_spherical,
    schur_polynomial,
    spherical_function,
    zonal_polynomial,
)
from .transform import (
    QuadratureGrid,
    RadialFunction,
    SpectralDensity,
    calibrate_constant,
    cauchy_family,
    forward_transform,
    gaussian_radial,
    godement_check,
    heat_kernel_radial,
    inverse_transform,
    pd_from_gamma_product,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
