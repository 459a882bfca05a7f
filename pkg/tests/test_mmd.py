import itertools
import math

import numpy as np
import pytest

from hpdkern import mmd
from hpdkern.errors import DimensionMismatch, OddSampleSize, SizeMismatch
from hpdkern.hpd_core import group_action, sample_spd
from hpdkern.kernels import BetaPrimeKernel, HeatKernel


KER = HeatKernel(0.5)


def spd_pair(m, seed, n=2, lo=0.5, hi=2.0):
    xs = sample_spd(n, lo, hi, m, field="complex", seed=seed)
    ys = sample_spd(n, lo, hi, m, field="complex", seed=seed + 1000)
    return xs, ys


class TestSampleSet:
    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            mmd.SampleSet([])

    def test_rejects_mixed_shapes(self):
        with pytest.raises(DimensionMismatch):
            mmd.SampleSet([np.eye(2), np.eye(3)])

    def test_length(self):
        xs, _ = spd_pair(3, 0)
        assert len(mmd.SampleSet(xs, label="x")) == 3


class TestUnbiasedQuadratic:
    def test_identical_samples_give_zero(self):
        xs, _ = spd_pair(5, 1)
        assert mmd.mmd2_unbiased(KER, xs, xs) == pytest.approx(0.0, abs=1e-14)

    def test_exchange_symmetry(self):
        xs, ys = spd_pair(6, 2)
        a = mmd.mmd2_unbiased(KER, xs, ys)
        b = mmd.mmd2_unbiased(KER, ys, xs)
        assert a == pytest.approx(b, rel=1e-12)

    def test_matches_direct_double_sum(self):
        xs, ys = spd_pair(4, 3)
        got = mmd.mmd2_unbiased(KER, xs, ys)
        m = 4
        total = 0.0
        for i in range(m):
            for j in range(m):
                if i == j:
                    continue
                total += (KER(xs[i], xs[j]) - KER(xs[i], ys[j])
                          - KER(xs[j], ys[i]) + KER(ys[i], ys[j]))
        assert got == pytest.approx(total / (m * (m - 1)), rel=1e-12)

    def test_unbiased_over_discrete_distribution(self):
        # Exact expectation by enumerating all draws of two iid pairs from a
        # three-point distribution, compared to the population MMD^2.
        atoms_p = [np.diag([0.5, 1.0]), np.diag([1.5, 0.8]), np.diag([2.0, 2.0])]
        atoms_q = [np.diag([0.7, 1.2]), np.diag([1.1, 0.9]), np.diag([2.5, 1.7])]
        k = len(atoms_p)

        def kxy(a, b):
            return KER(a, b)

        # population value: E k(x,x') - 2 E k(x,y) + E k(y,y'), independent draws
        exx = np.mean([[kxy(a, b) for b in atoms_p] for a in atoms_p])
        eyy = np.mean([[kxy(a, b) for b in atoms_q] for a in atoms_q])
        exy = np.mean([[kxy(a, b) for b in atoms_q] for a in atoms_p])
        population = exx - 2 * exy + eyy

        # expectation of the m=2 estimator over all (x1,x2,y1,y2) draws
        total = 0.0
        for i1, i2, j1, j2 in itertools.product(range(k), repeat=4):
            xs = [atoms_p[i1], atoms_p[i2]]
            ys = [atoms_q[j1], atoms_q[j2]]
            total += mmd.mmd2_unbiased(KER, xs, ys)
        assert total / k**4 == pytest.approx(population, rel=1e-10)

    def test_invariant_under_common_group_action(self):
        xs, ys = spd_pair(4, 4)
        base = mmd.mmd2_unbiased(KER, xs, ys)
        rng = np.random.default_rng(5)
        g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        moved = mmd.mmd2_unbiased(KER, [group_action(g, x) for x in xs],
                                  [group_action(g, y) for y in ys])
        assert moved == pytest.approx(base, rel=1e-9)

    def test_size_mismatch(self):
        xs, ys = spd_pair(4, 6)
        with pytest.raises(SizeMismatch):
            mmd.mmd2_unbiased(KER, xs, ys[:3])
        with pytest.raises(SizeMismatch):
            mmd.mmd2_unbiased(KER, xs[:1], ys[:1])

    def test_accepts_sample_sets(self):
        xs, ys = spd_pair(4, 7)
        a = mmd.mmd2_unbiased(KER, mmd.SampleSet(xs), mmd.SampleSet(ys))
        assert a == pytest.approx(mmd.mmd2_unbiased(KER, xs, ys), rel=1e-12)


class TestLinearStatistic:
    def test_threshold_uses_normal_quantile(self):
        xs, ys = spd_pair(20, 8)
        res = mmd.mmd_linear(KER, xs, ys, level=0.05)
        h = np.empty(10)
        for i in range(10):
            a, b = 2 * i, 2 * i + 1
            h[i] = (KER(xs[a], xs[b]) - KER(xs[a], ys[b])
                    - KER(xs[b], ys[a]) + KER(ys[a], ys[b]))
        z = 1.6448536269514722
        want = z * math.sqrt(h.var(ddof=1) / 10)
        assert res.statistic == pytest.approx(h.mean(), rel=1e-12)
        assert res.threshold == pytest.approx(want, rel=1e-10)
        assert res.reject == (res.statistic > res.threshold)

    def test_odd_sample_size_rejected(self):
        xs, ys = spd_pair(5, 9)
        with pytest.raises(OddSampleSize):
            mmd.mmd_linear(KER, xs, ys)

    def test_needs_four_samples(self):
        xs, ys = spd_pair(2, 10)
        with pytest.raises(SizeMismatch):
            mmd.mmd_linear(KER, xs, ys)

    def test_level_validated(self):
        xs, ys = spd_pair(4, 11)
        with pytest.raises(ValueError):
            mmd.mmd_linear(KER, xs, ys, level=1.5)

    def test_separated_samples_reject(self):
        xs = sample_spd(2, 0.5, 1.0, 30, field="real", seed=12)
        ys = sample_spd(2, 20.0, 21.0, 30, field="real", seed=13)
        res = mmd.mmd_linear(BetaPrimeKernel(3.0), xs, ys)
        assert res.reject

    def test_result_serializes(self):
        xs, ys = spd_pair(4, 14)
        obj = mmd.mmd_linear(KER, xs, ys).to_obj()
        assert obj["method"] == "linear_asymptotic"
        assert isinstance(obj["reject"], bool)


class TestPermutationTest:
    def test_null_usually_accepts(self):
        xs = sample_spd(2, 1.0, 2.0, 15, field="real", seed=15)
        ys = sample_spd(2, 1.0, 2.0, 15, field="real", seed=16)
        res = mmd.permutation_test(KER, xs, ys, n_perm=200, seed=0)
        assert not res.reject

    def test_alternative_rejects(self):
        xs = sample_spd(2, 0.5, 1.0, 15, field="real", seed=17)
        ys = sample_spd(2, 10.0, 11.0, 15, field="real", seed=18)
        res = mmd.permutation_test(BetaPrimeKernel(3.0), xs, ys,
                                   n_perm=200, seed=1)
        assert res.reject

    def test_deterministic_in_seed(self):
        xs, ys = spd_pair(8, 19)
        a = mmd.permutation_test(KER, xs, ys, n_perm=120, seed=7)
        b = mmd.permutation_test(KER, xs, ys, n_perm=120, seed=7)
        assert a.threshold == b.threshold and a.statistic == b.statistic

    def test_min_permutations_enforced(self):
        xs, ys = spd_pair(6, 20)
        with pytest.raises(ValueError):
            mmd.permutation_test(KER, xs, ys, n_perm=50)


class TestExperiment:
    def test_config_validation(self):
        with pytest.raises(ValueError):
            mmd.ExperimentConfig(r_list=(1.0, -0.5))
        with pytest.raises(ValueError):
            mmd.ExperimentConfig(level=0.0)

    def test_config_json_roundtrip(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text('{"n": 2, "m": 8, "trials": 2, "r_list": [1.0, 2.0]}')
        cfg = mmd.ExperimentConfig.from_json(p)
        assert cfg.n == 2 and cfg.r_list == (1.0, 2.0)
        assert cfg.kernel == "betaprime:alpha=3"

    def test_small_run_shape_and_determinism(self):
        cfg = mmd.ExperimentConfig(n=2, m=8, trials=3, r_list=(1.0, 4.0),
                                   kernel="heat:kappa=0.5", seed=5)
        rows1 = mmd.two_sample_experiment(cfg)
        rows2 = mmd.two_sample_experiment(cfg)
        assert [r.r for r in rows1] == [1.0, 4.0]
        assert all(r.trials == 3 for r in rows1)
        assert [(r.rejections, r.r) for r in rows1] == \
            [(r.rejections, r.r) for r in rows2]

    def test_power_at_large_separation(self):
        cfg = mmd.ExperimentConfig(n=2, m=40, trials=4, r_list=(4.0,),
                                   kernel="betaprime:alpha=3", seed=3)
        rows = mmd.two_sample_experiment(cfg)
        assert rows[0].rate == 1.0

    def test_csv_format(self):
        rows = [mmd.ExperimentRow(r=1.0, rejections=2, trials=40),
                mmd.ExperimentRow(r=2.0, rejections=40, trials=40)]
        text = mmd.experiment_to_csv(rows)
        lines = text.strip().splitlines()
        assert lines[0] == "r,rejections,trials,rate"
        assert lines[1].startswith("1.0,2,40,")
        assert float(lines[1].split(",")[3]) == pytest.approx(0.05)

    def test_unknown_method_rejected(self):
        cfg = mmd.ExperimentConfig(n=2, m=4, trials=1, r_list=(1.0,),
                                   method="bootstrap")
        with pytest.raises(ValueError):
            mmd.two_sample_experiment(cfg)
