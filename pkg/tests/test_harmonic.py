import math

import numpy as np
import pytest

from conftest import two_disk
from nacifs.conformal import ConformalMap, DomainSpec, Word, autonomous
from nacifs.errors import ConfigError, DegenerateFactor, InsufficientDepth, WalkerStalled
from nacifs.harmonic.approximation import DiskApproximation
from nacifs.harmonic.estimate import (
    FactorizedEstimator,
    MeasureEstimate,
    WalkerConfig,
    asi_report_harmonic,
    estimate_direct,
    interior_measure,
    lower_bound_checks,
)
from wos_oracle import harmonic_hits


def collinear():
    dom = DomainSpec(0.05)
    return autonomous(dom, [ConformalMap.similarity(0.09, c) for c in (-0.6, 0.0, 0.6)], horizon=20)


class TestConfig:
    def test_invariants(self, symmetric):
        with pytest.raises(ConfigError):
            WalkerConfig(r_launch=8, r_out=8)
        with pytest.raises(ConfigError):
            WalkerConfig(eps_abs=0)
        with pytest.raises(ConfigError):
            estimate_direct(symmetric, 0, 4, 1, WalkerConfig(walkers=10, r_launch=1.05, r_out=2))


class TestDirect:
    def test_symmetric_half(self, symmetric):
        est = estimate_direct(symmetric, 0, 5, 1, WalkerConfig(walkers=100_000, seed=2))
        assert est.counts.sum() == est.total
        assert abs(est.value((0,)) - 0.5) <= 3 * est.stderr((0,))
        assert est.values.sum() == 1.0

    def test_mirror_symmetry(self, symmetric):
        est = estimate_direct(symmetric, 0, 7, 3, WalkerConfig(walkers=100_000, seed=4))
        for w in est.words():
            mirror = Word(0, tuple(1 - x for x in w.branches))
            se = math.hypot(est.stderr(w), est.stderr(mirror))
            assert abs(est.value(w) - est.value(mirror)) <= 4 * se

    def test_collinear_against_oracle(self):
        sys_ = collinear()
        est = estimate_direct(sys_, 0, 3, 1, WalkerConfig(walkers=10_000, seed=1))
        tree = DiskApproximation.build(sys_, 0, 3)
        c, r = tree.disks()
        hits = harmonic_hits(c, r, 100_000, seed=99)
        ref = np.bincount(hits // 9, minlength=3) / len(hits)
        ref_se = np.sqrt(ref * (1 - ref) / len(hits))
        for k in range(3):
            assert abs(est.values[k] - ref[k]) <= 3 * math.hypot(est.stderrs[k], ref_se[k])
        assert ref[1] < ref[0] and ref[1] < ref[2]
        assert est.values[1] < min(est.values[0], est.values[2])
        assert abs(ref[0] - ref[2]) <= 3 * math.sqrt(2) * ref_se[0]

    def test_refinement_consistency(self, quadratic):
        cfg = WalkerConfig(walkers=20_000, seed=5)
        fine = estimate_direct(quadratic, 0, 7, 4, cfg)
        coarse = estimate_direct(quadratic, 0, 7, 3, cfg)
        np.testing.assert_array_equal(fine.aggregate(3).counts, coarse.counts)

    def test_thread_invariance(self, quadratic):
        cfg = WalkerConfig(walkers=20_000, seed=6)
        a = estimate_direct(quadratic, 0, 7, 3, cfg, threads=1)
        b = estimate_direct(quadratic, 0, 7, 3, cfg, threads=4)
        assert a.to_csv() == b.to_csv()

    def test_shifted_system(self):
        from conftest import periodic

        sys_ = periodic([0.25, 1 / 9])
        e1 = estimate_direct(sys_, 1, 5, 1, WalkerConfig(walkers=20_000, seed=1))
        e3 = estimate_direct(sys_, 3, 5, 1, WalkerConfig(walkers=20_000, seed=1))
        np.testing.assert_array_equal(e1.counts, e3.counts)  # same shifted system by periodicity

    def test_stalled(self, symmetric):
        with pytest.raises(WalkerStalled):
            estimate_direct(symmetric, 0, 5, 1, WalkerConfig(walkers=100, max_steps=3))

    def test_depth_checks(self, symmetric):
        with pytest.raises(InsufficientDepth):
            estimate_direct(symmetric, 0, 3, 4, WalkerConfig(walkers=10))
        with pytest.raises(InsufficientDepth):
            estimate_direct(symmetric, 38, 5, 1, WalkerConfig(walkers=10))

    def test_csv_roundtrip(self, quadratic):
        est = estimate_direct(quadratic, 2, 6, 3, WalkerConfig(walkers=5000, seed=3))
        back = MeasureEstimate.from_csv(est.to_csv(), est.manifest())
        np.testing.assert_array_equal(back.counts, est.counts)
        assert back.offset == 2 and back.degrees == est.degrees
        assert MeasureEstimate.from_csv(est.to_csv()).to_csv() == est.to_csv()


class TestFactorized:
    def test_full_buffer_is_direct(self, quadratic):
        cfg = WalkerConfig(walkers=20_000, seed=8)
        fac = FactorizedEstimator(quadratic, 3, cfg)
        direct = estimate_direct(quadratic, 0, 3 + 1 + 4, 3, cfg)
        for w in direct.words():
            assert fac(w).value == direct.value(w)

    def test_symmetric_extreme_words(self, symmetric):
        # conditionals are not 1/2 (outer sub-cylinders are favoured), so the
        # oracle is the direct estimator; the mirror word must agree too
        fac = FactorizedEstimator(symmetric, 3, WalkerConfig(walkers=50_000, seed=9))
        direct = estimate_direct(symmetric, 0, 10, 6, WalkerConfig(walkers=200_000, seed=10))
        zeros, ones = fac((0,) * 6), fac((1,) * 6)
        assert len(zeros.factors) == 4
        for r, w in ((zeros, (0,) * 6), (ones, (1,) * 6)):
            se = math.hypot(r.error_model, direct.stderr(w) / direct.value(w))
            assert abs(math.log(r.value / direct.value(w))) <= 3 * se
        assert abs(math.log(zeros.value / ones.value)) <= 3 * math.hypot(zeros.error_model, ones.error_model)
        assert zeros.value > 0.5**6

    def test_bias_term(self, symmetric):
        fac = FactorizedEstimator(symmetric, 2, WalkerConfig(walkers=20_000, seed=9), asi_fit=(0.3, 0.5))
        r = fac((1, 0, 1, 1))
        assert r.bias == pytest.approx(4 * 0.3 * 0.25)
        assert r.error_model == pytest.approx(r.log_stderr + r.bias)

    def test_degenerate(self, symmetric):
        fac = FactorizedEstimator(symmetric, 3, WalkerConfig(walkers=500, seed=1))
        with pytest.raises(DegenerateFactor):
            fac((0, 1, 1, 0, 1))

    def test_short_word(self, symmetric):
        with pytest.raises(ValueError):
            FactorizedEstimator(symmetric, 3, WalkerConfig(walkers=10))((0,))


class TestAsiHarmonic:
    def test_asymmetric_decay(self):
        rep = asi_report_harmonic(two_disk(0.25, 0.35), [1, 2, 3], WalkerConfig(walkers=200_000, seed=1))
        assert rep.betas[0] > rep.betas[1]
        assert rep.betas[0] > rep.noise_floor[0]
        assert rep.params["approx_depth"] == 9

    def test_reuses_estimate(self, symmetric):
        est = estimate_direct(symmetric, 0, 8, 4, WalkerConfig(walkers=20_000, seed=1))
        rep = asi_report_harmonic(symmetric, [1, 2], WalkerConfig(walkers=20_000), estimate=est)
        assert len(rep.betas) == 2 and rep.samples == [4, 8]


class TestLowerBounds:
    def test_outer_circle_zero(self, symmetric):
        assert interior_measure(symmetric, 1.05j, WalkerConfig(walkers=100)) == (0.0, 0.0)

    def test_report(self, symmetric):
        lb = lower_bound_checks(symmetric, WalkerConfig(walkers=4000, seed=3))
        assert lb.c_hat > 0
        assert lb.slope > 0
        assert np.all(lb.values > 0.9)

    def test_symmetric_points(self, symmetric):
        cfg = WalkerConfig(walkers=20_000, seed=2)
        a, sa = interior_measure(symmetric, 0.3 + 0.8j, cfg)
        b, sb = interior_measure(symmetric, -0.3 - 0.8j, cfg.with_(seed=3))
        assert abs(a - b) <= 3 * math.hypot(sa, sb)
