import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import DOMAIN, periodic, quadratic_system, shipped
from nacifs.conformal import ConformalMap, GenerationSpec, Mode, SystemSpec, all_words
from nacifs.errors import NonMeasure, OutOfRange
from nacifs.harmonic.estimate import WalkerConfig, estimate_direct
from nacifs.symbolic import BernoulliMeasure, DenseTable, DerivProxyDiameter, EstimatedMeasure, UniformMeasure
from nacifs.thermo import (
    dimension_report,
    endpoint_words,
    pointwise_arrays,
    pointwise_samples,
    pressure_record,
    sample_words,
)

H_BERN = -(0.6 * math.log(0.6) + 0.4 * math.log(0.4))


class FakeEstimate:
    def __init__(self, counts, degrees):
        self.offset, self.degrees = 0, tuple(degrees)
        self.assign_depth = len(degrees)
        self.counts = np.asarray(counts)
        self.total = int(self.counts.sum())


class TestPressure:
    def test_moran(self):
        sys_ = shipped("ratio_quarter")
        for n in (1, 5, 12):
            r = pressure_record(UniformMeasure(sys_), DerivProxyDiameter(sys_), n)
            assert r.H == pytest.approx(math.log(2), abs=1e-14)
            assert r.chi == pytest.approx(math.log(4), abs=1e-14)
            assert r.t == pytest.approx(0.5, abs=1e-14)

    def test_point_mass(self, symmetric):
        leaves = np.zeros(8)
        leaves[5] = 1.0
        mu = DenseTable.from_leaves([2, 2, 2], leaves)
        r = pressure_record(mu, DerivProxyDiameter(symmetric), 3)
        assert r.H == 0 and r.t == 0 and r.coverage == pytest.approx(1 / 8)

    def test_bernoulli(self):
        sys_ = shipped("ratio_quarter")
        r = pressure_record(BernoulliMeasure([0.6, 0.4]), DerivProxyDiameter(sys_), 7)
        assert r.H == pytest.approx(H_BERN, abs=1e-13)
        assert r.t == pytest.approx(H_BERN / math.log(4), abs=1e-13)
        assert r.t == pytest.approx(0.4855, abs=1e-4)

    def test_non_measure(self, symmetric):
        nu = DenseTable.from_values([2], [[1.0], [0.5, 0.6]])
        with pytest.raises(NonMeasure):
            pressure_record(nu, DerivProxyDiameter(symmetric), 1)

    def test_depth_zero(self, symmetric):
        with pytest.raises(OutOfRange):
            pressure_record(UniformMeasure(symmetric), DerivProxyDiameter(symmetric), 0)

    def test_affine_pressure(self, quadratic):
        r = pressure_record(UniformMeasure(quadratic), DerivProxyDiameter(quadratic), 6)
        grid = np.linspace(0, 2, 41)
        P = r.pressure(grid)
        np.testing.assert_allclose(np.diff(P, 2), 0, atol=1e-14)
        slope = (P[-1] - P[0]) / (grid[-1] - grid[0])
        assert -P[0] / slope == pytest.approx(r.t, rel=1e-12)

    @pytest.mark.parametrize("name", ["symmetric_two_disk", "asymmetric_two_disk", "quadratic_two_branch",
                                      "periodic_quarter_ninth", "seeded_three_branch"])
    def test_lipschitz_and_entropy_bounds(self, name):
        sys_ = shipped(name)
        eta = sys_.domain.eta
        mu, s = UniformMeasure(sys_), DerivProxyDiameter(sys_)
        for n in range(1, 7):
            r = pressure_record(mu, s, n)
            for t, h in [(0.0, 0.5), (0.3, 0.1), (1.0, 1.0)]:
                drop = r.pressure(t) - r.pressure(t + h)
                assert -h * math.log(1 - eta) <= drop + 1e-13
                assert drop <= -h * math.log(eta) + 1e-13
            D = np.prod(sys_.degrees(0, n), dtype=float)
            assert 0 <= r.H <= math.log(D) / n + 1e-13
            mass = np.exp(s.log_level(n)).sum()
            assert r.H - r.chi <= math.log(mass) / n + 1e-12

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10**6), st.integers(1, 5))
    def test_entropy_bounds_random(self, seed, n):
        rng = np.random.default_rng(seed)
        mu = DenseTable.from_leaves([2] * 5, rng.dirichlet(np.full(32, 0.3)))
        s = DerivProxyDiameter(quadratic_system())
        r = pressure_record(mu, s, n)
        assert -1e-15 <= r.H <= math.log(2) + 1e-13
        assert r.H - r.chi <= math.log(np.exp(s.log_level(n)).sum()) / n + 1e-12


class TestDeltaMethod:
    def test_standard_errors_match_resampling(self, quadratic):
        rng = np.random.default_rng(0)
        p = rng.dirichlet(np.ones(16))
        s = DerivProxyDiameter(quadratic)
        N = 5000
        recs = [pressure_record(EstimatedMeasure(FakeEstimate(rng.multinomial(N, p), [2] * 4)), s, 4)
                for _ in range(600)]
        for field in ("H", "chi", "t"):
            spread = np.std([getattr(r, field) for r in recs])
            predicted = np.mean([getattr(r, field + "_se") for r in recs])
            assert predicted == pytest.approx(spread, rel=0.15)


class TestReport:
    def test_bernoulli_exact(self):
        sys_ = shipped("ratio_quarter")
        rep = dimension_report(BernoulliMeasure([0.6, 0.4]), DerivProxyDiameter(sys_), range(1, 11), 4)
        assert rep.hd_estimate == pytest.approx(H_BERN / math.log(4), abs=1e-12)
        assert rep.pd_estimate == pytest.approx(H_BERN / math.log(4), abs=1e-12)

    def test_periodic(self):
        sys_ = periodic([0.25, 1 / 9])
        rep = dimension_report(UniformMeasure(sys_), DerivProxyDiameter(sys_), range(1, 13), 4)
        limit = math.log(2) / math.log(6)
        # oracle: t_n computed directly from the ratio sequence
        for r in rep.records:
            chi = sum(math.log(4) if k % 2 == 0 else math.log(9) for k in range(r.n)) / r.n
            assert r.t == pytest.approx(math.log(2) / chi, rel=1e-13)
        assert abs(rep.hd_estimate - limit) < 1e-3
        assert rep.hd_estimate <= rep.pd_estimate

    def test_oscillating(self):
        ratios, j = [], 0
        while len(ratios) < 16:
            ratios += [0.25 if j % 2 == 0 else 1 / 9] * 2**j
            j += 1
        gens = [GenerationSpec((ConformalMap.similarity(r, -0.5), ConformalMap.similarity(r, 0.5))) for r in ratios[:16]]
        sys_ = SystemSpec(domain=DOMAIN, mode=Mode.EXPLICIT, prefix=tuple(gens), horizon=16)
        rep = dimension_report(UniformMeasure(sys_), DerivProxyDiameter(sys_), range(1, 17), 10)
        t = [n * math.log(2) / -sum(math.log(r) for r in ratios[:n]) for n in range(1, 17)]
        np.testing.assert_allclose(rep.t, t, rtol=1e-13)
        assert rep.hd_estimate == pytest.approx(min(t[-10:])) and rep.pd_estimate == pytest.approx(max(t[-10:]))
        assert rep.pd_estimate - rep.hd_estimate > 0.05

    def test_exports(self):
        sys_ = shipped("ratio_quarter")
        rep = dimension_report(UniformMeasure(sys_), DerivProxyDiameter(sys_), range(1, 5), 2)
        lines = rep.to_csv().splitlines()
        assert lines[0] == "n,H,chi,t,H_se,chi_se,t_se,coverage" and len(lines) == 5
        import json

        summary = json.loads(rep.to_json())
        assert summary["window_ns"] == [3, 4] and summary["hd_se"] is None

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6), st.integers(1, 6))
    def test_hd_le_pd(self, seed, window):
        rng = np.random.default_rng(seed)
        mu = DenseTable.from_leaves([2] * 6, rng.dirichlet(np.ones(64)))
        rep = dimension_report(mu, DerivProxyDiameter(quadratic_system()), range(1, 7), window)
        assert rep.hd_estimate <= rep.pd_estimate
        assert 0 <= rep.hd_estimate <= 2


class TestPointwise:
    def test_uniform_zero_variance(self, symmetric):
        words = all_words([2] * 8)
        h, chi, ratio = pointwise_arrays(UniformMeasure(symmetric), DerivProxyDiameter(symmetric), words, 8)
        assert np.all(h == h[0]) and h[0] == pytest.approx(math.log(2))

    def test_bernoulli_clt(self):
        sys_ = shipped("ratio_quarter")
        mu = BernoulliMeasure([0.6, 0.4])
        words = sample_words(mu, 10, 10_000, seed=1)
        h = np.array([x[0] for x in pointwise_samples(mu, DerivProxyDiameter(sys_), words, 10)])
        assert abs(h.mean() - H_BERN) <= 3 * h.std(ddof=1) / math.sqrt(len(h))

    def test_estimated_endpoints(self, quadratic):
        est = estimate_direct(quadratic, 0, 10, 6, WalkerConfig(walkers=50_000, seed=2))
        mu, s = EstimatedMeasure(est), DerivProxyDiameter(quadratic)
        words = endpoint_words(est)
        assert len(words) == est.total
        h, chi, ratio = pointwise_arrays(mu, s, words, 6)
        rec = pressure_record(mu, s, 6)
        assert h.mean() == pytest.approx(rec.H, rel=1e-12)
        se = math.hypot(ratio.std(ddof=1) / math.sqrt(len(ratio)), rec.t_se)
        assert abs(ratio.mean() - rec.t) <= 3 * se

    def test_short_word(self, symmetric):
        with pytest.raises(OutOfRange):
            pointwise_samples(UniformMeasure(symmetric), DerivProxyDiameter(symmetric), [(0, 1)], 3)
