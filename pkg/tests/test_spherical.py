import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hpdkern import spherical
from hpdkern.errors import StepTooLarge
from hpdkern.hpd_core import group_action, haar_unitary, sample_spd


def schur_by_tableaux(m, rho):
    """Semistandard-tableau sum, independent of the bialternant route.

    Enumerates column-strict fillings by brute force; only viable for tiny
    shapes, which is the point.
    """
    shape = [int(v) for v in m if v > 0]
    n = len(rho)
    if not shape:
        return 1.0
    cells = [(i, j) for i, row in enumerate(shape) for j in range(row)]
    total = 0.0
    for fill in itertools.product(range(n), repeat=len(cells)):
        t = {c: v for c, v in zip(cells, fill)}
        ok = True
        for (i, j), v in t.items():
            if (i, j + 1) in t and t[(i, j + 1)] < v:
                ok = False
                break
            if (i + 1, j) in t and t[(i + 1, j)] <= v:
                ok = False
                break
        if ok:
            total += np.prod([rho[v] for v in fill])
    return total


class TestSphericalFunction:
    def test_identity_normalization(self):
        for n in (2, 3):
            lam = np.array([0.5 + 1.0j] + [0.2 * k - 1.0j for k in range(1, n)])
            val = spherical.spherical_function(lam, np.ones(n))
            assert val == pytest.approx(1.0, abs=1e-8)

    def test_minus_delta_is_constant_one(self):
        rng = np.random.default_rng(0)
        for n in (2, 3):
            lam = -spherical.delta_vector(n).astype(complex)
            for _ in range(4):
                rho = rng.uniform(0.3, 3.0, n)
                assert spherical.spherical_function(lam, rho) == pytest.approx(
                    1.0, abs=1e-8)

    def test_scalar_case_is_power(self):
        lam = np.array([1.5 + 0.5j])
        rho = np.array([2.0])
        assert spherical.spherical_function(lam, rho) == pytest.approx(
            2.0 ** (1.5 + 0.5j), rel=1e-12)

    def test_permutation_symmetry_in_rho(self):
        lam = np.array([1j, 2j, -0.5j])
        rho = np.array([0.4, 1.1, 2.6])
        a = spherical.spherical_function(lam, rho)
        b = spherical.spherical_function(lam, rho[[2, 0, 1]])
        assert a == pytest.approx(b, rel=1e-10)

    def test_permutation_symmetry_in_lambda(self):
        lam = np.array([0.3 + 1j, -0.2 + 2j])
        rho = np.array([0.7, 1.9])
        a = spherical.spherical_function(lam, rho)
        b = spherical.spherical_function(lam[::-1], rho)
        assert a == pytest.approx(b, rel=1e-10)

    def test_confluent_rho_continuity(self):
        lam = np.array([1j, -1j, 0.5j])
        near = spherical.spherical_function(lam, np.array([1.0, 1.0 + 1e-9, 3.0]))
        flat = spherical.spherical_function(lam, np.array([1.0, 1.0, 3.0]))
        assert near == pytest.approx(flat, rel=1e-6)

    def test_against_monte_carlo(self):
        lam = np.array([0.7j, -0.3j])
        x = sample_spd(2, 0.5, 2.0, 1, field="complex", seed=1)[0]
        closed = spherical.spherical_function(lam, np.linalg.eigvalsh(x))
        mc, stderr = spherical.monte_carlo_spherical(lam, x, samples=40000, seed=2)
        assert abs(mc - closed) < 4 * stderr + 1e-12

    def test_unitary_invariance_of_mc_target(self):
        # the MC integrand is an average over U, so conjugating x is a no-op
        lam = np.array([1j, 0.2j])
        x = sample_spd(2, 0.5, 2.0, 1, field="complex", seed=3)[0]
        u = haar_unitary(2, seed=4)
        a, sa = spherical.monte_carlo_spherical(lam, x, samples=20000, seed=5)
        b, sb = spherical.monte_carlo_spherical(lam, group_action(u, x),
                                                samples=20000, seed=5)
        assert abs(a - b) < 4 * (sa + sb)


class TestSchurAndZonal:
    @pytest.mark.parametrize("m,n", [((1, 0), 2), ((2, 0), 2), ((2, 1), 2),
                                     ((2, 1, 0), 3), ((3, 1, 0), 3)])
    def test_schur_matches_tableaux(self, m, n):
        rng = np.random.default_rng(6)
        rho = rng.uniform(0.3, 2.0, n)
        assert spherical.schur_polynomial(m, rho) == pytest.approx(
            schur_by_tableaux(m, rho), rel=1e-10)

    def test_schur_at_confluent_spectrum(self):
        # S_m(1,...,1) equals the number of SSYT with entries in 1..N
        val = spherical.schur_polynomial((2, 1), np.array([1.0, 1.0]))
        assert val == pytest.approx(schur_by_tableaux((2, 1), np.ones(2)),
                                    rel=1e-8)

    def test_spherical_via_schur_consistent(self):
        m = (3, 1)
        rho = np.array([0.6, 1.7])
        lam = np.asarray(m, dtype=float) - spherical.delta_vector(2)
        direct = spherical.spherical_function(lam.astype(complex), rho)
        bridged = spherical.spherical_via_schur(m, rho)
        assert direct.real == pytest.approx(bridged, rel=1e-8)

    def test_partition_enumeration(self):
        parts = spherical.partitions_of(4, 2)
        assert parts == [(4, 0), (3, 1), (2, 2)]
        assert len(spherical.partitions_of(6, 3)) == 7

    def test_hook_length_counts(self):
        assert spherical.standard_tableau_count((1, 0)) == 1
        assert spherical.standard_tableau_count((2, 1)) == 2
        assert spherical.standard_tableau_count((2, 2)) == 2
        assert spherical.standard_tableau_count((3, 1, 1)) == 6

    def test_solve_route_matches_hook_counts(self):
        solved = spherical.zonal_constants_by_solve(2, 5)
        exact = {m: spherical.standard_tableau_count(m)
                 for m in spherical.partitions_of(5, 2)}
        for m, c in exact.items():
            assert solved[m] == pytest.approx(c, rel=1e-8)

    @pytest.mark.parametrize("n_vars", [2, 3])
    def test_zonal_sum_identity(self, n_vars):
        rng = np.random.default_rng(7)
        for weight in range(1, 6):
            rho = rng.uniform(0.3, 2.0, n_vars)
            total = sum(spherical.zonal_polynomial(m, rho)
                        for m in spherical.partitions_of(weight, n_vars))
            assert total == pytest.approx(rho.sum() ** weight, rel=1e-10)


class TestGaussZ:
    @pytest.mark.parametrize("n", [2, 3])
    def test_forms_agree_up_to_constant(self, n):
        lam = np.arange(1, n + 1) * 0.3 + 0.0j
        ratios = [spherical.gauss_Z(s, lam, form="determinant")
                  / spherical.gauss_Z(s, lam, form="product")
                  for s in (0.5, 1.0, 2.0)]
        spread = (max(np.abs(ratios)) - min(np.abs(ratios))) / abs(ratios[0])
        assert spread <= 1e-9

    def test_scalar_case(self):
        # N=1: Z = sigma e^{sigma^2 lam^2 / 2} in both forms
        for form in ("product", "determinant"):
            val = spherical.gauss_Z(0.8, np.array([0.4 + 0j]), form=form)
            assert val == pytest.approx(0.8 * math.exp(0.32 * 0.16), rel=1e-10)

    def test_rejects_bad_form(self):
        with pytest.raises(ValueError):
            spherical.gauss_Z(1.0, np.array([0.0 + 0j]), form="simpson")


class TestGaussSphericalTransform:
    def test_witness_negative(self):
        assert spherical.gauss_spherical_transform(
            1.0, np.array([0.0, 3 * math.pi])) < 0

    def test_symmetric_in_t(self):
        t = np.array([0.4, 1.9])
        a = spherical.gauss_spherical_transform(1.0, t)
        b = spherical.gauss_spherical_transform(1.0, t[::-1])
        assert a == pytest.approx(b, rel=1e-12)

    @given(st.floats(0.3, 2.0), st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
    @settings(max_examples=40, deadline=None)
    def test_positive_in_main_lobe(self, sigma, t1, t2):
        # all sc factors positive while |arg| < pi
        t = np.array([t1, t2])
        if abs(sigma**2 / 2 * (t2 - t1)) < math.pi - 1e-6:
            assert spherical.gauss_spherical_transform(sigma, t) > 0


class TestLaplaceBeltrami:
    def test_eigenfunction_property(self):
        rng = np.random.default_rng(8)
        dd = float(np.sum(spherical.delta_vector(2) ** 2))
        for _ in range(3):
            t = rng.uniform(-1.5, 1.5, 2)
            rho = rng.uniform(0.6, 1.8, 2)
            lam = (1j * t).astype(complex)

            def f_o(r):
                return spherical.spherical_function(lam, r)

            lap = spherical.laplace_beltrami_radial(f_o, rho)
            ratio = lap / spherical.spherical_function(lam, rho)
            assert ratio.real == pytest.approx(-(t @ t + dd), abs=1e-3)

    def test_constant_function_in_kernel(self):
        val = spherical.laplace_beltrami_radial(lambda r: 1.0 + 0j,
                                                np.array([0.7, 1.6]))
        assert abs(val) < 1e-8

    def test_close_spectrum_rejected(self):
        with pytest.raises((StepTooLarge, ValueError)):
            spherical.laplace_beltrami_radial(lambda r: float(np.sum(r)),
                                              np.array([1.0, 1.0 + 1e-9]))
