import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hpdkern import hpd_core
from hpdkern.errors import (
    DimensionMismatch,
    NotHermitian,
    NotPositiveDefinite,
    SingularMatrix,
)


def random_hpd(n, seed, field="complex", low=0.5, high=2.0):
    return hpd_core.sample_spd(n, low, high, 1, field=field, seed=seed)[0]


class TestValidateHpd:
    def test_accepts_identity(self):
        x = hpd_core.validate_hpd(np.eye(3))
        assert np.allclose(x, np.eye(3))

    def test_rejects_nonsquare(self):
        with pytest.raises(DimensionMismatch):
            hpd_core.validate_hpd(np.ones((2, 3)))

    def test_rejects_asymmetric(self):
        with pytest.raises(NotHermitian):
            hpd_core.validate_hpd(np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_rejects_indefinite(self):
        with pytest.raises(NotPositiveDefinite):
            hpd_core.validate_hpd(np.diag([1.0, -1.0]))

    def test_symmetrizes_roundoff(self):
        x = random_hpd(4, seed=0)
        y = hpd_core.validate_hpd(x + 1e-14 * np.triu(np.ones((4, 4))))
        assert np.abs(y - y.conj().T).max() == 0


class TestSpectra:
    def test_relative_spectrum_matches_congruence(self):
        x = random_hpd(3, seed=1)
        y = random_hpd(3, seed=2)
        a = hpd_core.relative_spectrum(x, y)
        b = np.linalg.eigvalsh(hpd_core.congruence_normalize(x, y))
        assert np.allclose(a, b, rtol=1e-10)

    def test_distance_to_self_is_zero(self):
        x = random_hpd(3, seed=3)
        assert hpd_core.riemannian_distance(x, x) < 1e-7

    def test_distance_symmetry(self):
        x = random_hpd(2, seed=4)
        y = random_hpd(2, seed=5)
        d1 = hpd_core.riemannian_distance(x, y)
        d2 = hpd_core.riemannian_distance(y, x)
        assert d1 == pytest.approx(d2, rel=1e-10)

    def test_distance_invariance(self):
        rng = np.random.default_rng(6)
        x = random_hpd(3, seed=7)
        y = random_hpd(3, seed=8)
        g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        d1 = hpd_core.riemannian_distance(x, y)
        d2 = hpd_core.riemannian_distance(hpd_core.group_action(g, x),
                                          hpd_core.group_action(g, y))
        assert d1 == pytest.approx(d2, rel=1e-9)

    def test_diagonal_distance_closed_form(self):
        # d(diag(a), id) = sqrt(sum log^2 a)
        a = np.array([0.5, 1.0, 4.0])
        d = hpd_core.riemannian_distance(np.diag(a), np.eye(3))
        assert d == pytest.approx(np.sqrt(np.sum(np.log(a) ** 2)), rel=1e-12)


class TestPowersAndMinors:
    def test_hpd_power_roundtrip(self):
        x = random_hpd(3, seed=9)
        assert np.allclose(hpd_core.hpd_power(hpd_core.hpd_power(x, 0.5), 2.0),
                           x, rtol=1e-10)

    def test_leading_minors_against_dets(self):
        x = random_hpd(4, seed=10)
        minors = hpd_core.leading_minors(x)
        for k in range(4):
            assert minors[k] == pytest.approx(
                np.linalg.det(x[:k + 1, :k + 1]).real, rel=1e-10)

    def test_power_function_at_identity(self):
        s = np.array([1.5 + 0.5j, -0.5, 2.0])
        assert hpd_core.power_function(s, np.eye(3)) == pytest.approx(1.0)

    def test_logdet_matches_slogdet(self):
        x = random_hpd(5, seed=11)
        assert hpd_core.logdet_hpd(x) == pytest.approx(
            np.linalg.slogdet(x)[1], rel=1e-12)

    def test_check_invertible_rejects_singular(self):
        with pytest.raises(SingularMatrix):
            hpd_core.check_invertible(np.diag([1.0, 0.0]))


class TestVandermonde:
    def test_small_cases(self):
        assert hpd_core.vandermonde(np.array([1.0, 3.0])) == 2.0
        assert hpd_core.vandermonde(np.array([1.0, 2.0, 4.0])) == 1 * 3 * 2

    def test_log_vandermonde_exponentiates(self):
        v = np.array([0.3, 1.1, 2.7, 5.0])
        lv = hpd_core.log_vandermonde(v)
        assert np.exp(lv) == pytest.approx(hpd_core.vandermonde(v), rel=1e-12)

    @given(st.lists(st.floats(0.1, 10.0), min_size=2, max_size=5))
    @settings(max_examples=50, deadline=None)
    def test_antisymmetric_under_swap(self, vals):
        v = np.array(vals)
        w = v.copy()
        w[0], w[1] = w[1], w[0]
        assert hpd_core.vandermonde(w) == pytest.approx(
            -hpd_core.vandermonde(v), abs=1e-12 * max(1, abs(hpd_core.vandermonde(v))))


class TestHaarSampling:
    def test_unitary_is_unitary(self):
        u = hpd_core.haar_unitary(4, seed=12)
        assert np.allclose(u @ u.conj().T, np.eye(4), atol=1e-12)

    def test_orthogonal_is_orthogonal(self):
        q = hpd_core.haar_orthogonal(4, seed=13)
        assert np.allclose(q @ q.T, np.eye(4), atol=1e-12)
        assert np.abs(q.imag).max() if np.iscomplexobj(q) else True

    def test_batch_matches_unitarity(self):
        us = hpd_core.haar_unitary_batch(3, 10, rng=14)
        prod = us @ np.conj(np.transpose(us, (0, 2, 1)))
        assert np.allclose(prod, np.eye(3)[None], atol=1e-12)

    def test_sample_spd_eigenvalue_range(self):
        for x in hpd_core.sample_spd(3, 1.0, 2.0, 5, field="real", seed=15):
            w = np.linalg.eigvalsh(x)
            assert w.min() > 1.0 - 1e-9 and w.max() < 2.0 + 1e-9

    def test_sample_spd_deterministic(self):
        a = hpd_core.sample_spd(2, 0.5, 1.5, 3, field="complex", seed=16)
        b = hpd_core.sample_spd(2, 0.5, 1.5, 3, field="complex", seed=16)
        for x, y in zip(a, b):
            assert np.array_equal(x, y)


class TestJsonRoundTrip:
    def test_real_matrix(self, tmp_path):
        x = random_hpd(3, seed=17, field="real")
        path = tmp_path / "m.json"
        hpd_core.save_matrix(path, x)
        assert np.allclose(hpd_core.load_matrix(path), x, atol=1e-15)

    def test_complex_matrix(self, tmp_path):
        x = random_hpd(2, seed=18, field="complex")
        path = tmp_path / "m.json"
        hpd_core.save_matrix(path, x)
        y = hpd_core.load_matrix(path)
        assert np.allclose(y, x, atol=1e-15)

    def test_sample_list(self, tmp_path):
        xs = hpd_core.sample_spd(2, 0.5, 2.0, 4, field="complex", seed=19)
        path = tmp_path / "s.json"
        hpd_core.save_samples(path, xs)
        ys = hpd_core.load_samples(path)
        assert len(ys) == 4
        for x, y in zip(xs, ys):
            assert np.allclose(x, y, atol=1e-15)

    def test_dim_mismatch_rejected(self):
        with pytest.raises(DimensionMismatch):
            hpd_core.matrix_from_obj({"dim": 3, "field": "real",
                                      "entries": [[1.0, 0.0], [0.0, 1.0]]})
