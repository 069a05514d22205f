import numpy as np
import pytest

from conftest import quadratic_system, shipped, two_disk
from nacifs.harmonic import kernel
from nacifs.harmonic.approximation import DiskApproximation
from nacifs.harmonic.estimate import reentry_chi2
from nacifs.rng import derive_seed, splitmix64, splitmix64_array, uniform_array, walker_keys
from nacifs.errors import InsufficientDepth

BACKENDS = kernel.available_backends()
needs_compiled = pytest.mark.skipif("compiled" not in BACKENDS, reason="compiled kernel not built")


class TestRng:
    def test_splitmix_reference(self):
        # first outputs of SplitMix64 seeded with 0
        assert splitmix64(0) == 0xE220A8397B1DCDAF
        assert splitmix64(0x9E3779B97F4A7C15) == 0x6E789E6AA1B965F4

    def test_array_matches_scalar(self):
        xs = np.array([0, 1, 2**63, 2**64 - 1, 12345], dtype=np.uint64)
        assert [int(v) for v in splitmix64_array(xs)] == [splitmix64(int(x)) for x in xs]

    def test_uniform_range(self):
        keys = walker_keys(3, np.arange(1000))
        u = uniform_array(keys, np.zeros(1000, dtype=np.uint64))
        assert u.min() >= 0 and u.max() < 1
        assert abs(u.mean() - 0.5) < 0.05

    def test_derive_seed_stable(self):
        assert derive_seed(1, "row", 0) == derive_seed(1, "row", 0)
        assert derive_seed(1, "row", 0) != derive_seed(1, "row", 1)
        assert 0 <= derive_seed(2**70, "x") < 2**63


class TestApproximation:
    def test_structure(self, quadratic):
        tree = DiskApproximation.build(quadratic, 0, 6)
        assert tree.n_leaves == 64
        assert tree.leaves_disjoint() and tree.nested()
        leaves = np.arange(64)
        np.testing.assert_array_equal(tree.ancestor(leaves, 1), leaves // 32)
        np.testing.assert_array_equal(tree.ancestor(leaves, 6), leaves)

    def test_hull_bounds_descendants(self, quadratic):
        tree = DiskApproximation.build(quadratic, 2, 5)
        c, r = tree.disks()
        for n in range(5):
            sl = tree.level(n)
            width = 2 ** (5 - n)
            for k, node in enumerate(range(sl.start, sl.stop)):
                cc, rr = c[k * width:(k + 1) * width], r[k * width:(k + 1) * width]
                center = tree.cx[node] + 1j * tree.cy[node]
                assert (np.abs(cc - center) + rr).max() <= tree.hull[node]

    def test_depth_limits(self, symmetric):
        with pytest.raises(InsufficientDepth):
            DiskApproximation.build(symmetric, 35, 10)
        with pytest.raises(ValueError):
            DiskApproximation.build(symmetric, 0, 0)


def _run(tree, n, seed, backend, **kw):
    args = dict(launch=True, r_launch=8.0, r_out=16.0, eps_abs=1e-3, max_steps=100_000)
    args.update(kw)
    return kernel.run(tree, n, seed, backend=backend, **args)


class TestBackends:
    @needs_compiled
    @pytest.mark.parametrize("name,depth", [("symmetric_two_disk", 5), ("quadratic_two_branch", 6),
                                            ("seeded_three_branch", 4)])
    def test_launch_bit_identical(self, name, depth):
        tree = DiskApproximation.build(shipped(name), 0, depth)
        a = _run(tree, 3000, 17, "compiled")
        b = _run(tree, 3000, 17, "python")
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])

    @needs_compiled
    def test_interior_bit_identical(self, symmetric):
        tree = DiskApproximation.build(symmetric, 0, 5)
        # start at 0: equidistant from both halves, exercising the tie rule
        for start in (0j, 0.3 + 0.9j):
            a = _run(tree, 2000, 5, "compiled", launch=False, start=start, outer_radius=1.05)
            b = _run(tree, 2000, 5, "python", launch=False, start=start, outer_radius=1.05)
            np.testing.assert_array_equal(a[0], b[0])
            np.testing.assert_array_equal(a[1], b[1])

    @needs_compiled
    def test_reentry_bit_identical(self):
        a = kernel.reentry_samples(20 + 3j, 8.0, 5000, 9, "compiled")
        b = kernel.reentry_samples(20 + 3j, 8.0, 5000, 9, "python")
        np.testing.assert_array_equal(a, b)

    def test_reentry_on_circle(self):
        w = kernel.reentry_samples(-30j, 8.0, 1000, 1)
        np.testing.assert_allclose(np.abs(w), 8.0, rtol=1e-12)

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_thread_invariance(self, backend, quadratic):
        tree = DiskApproximation.build(quadratic, 0, 5)
        n = kernel.CHUNK * 2 + 123
        a = _run(tree, n, 3, backend, threads=1)
        b = _run(tree, n, 3, backend, threads=3)
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])

    def test_walker_streams_independent_of_count(self, symmetric):
        tree = DiskApproximation.build(symmetric, 0, 5)
        a = _run(tree, 500, 8, None)
        b = _run(tree, 2000, 8, None)
        np.testing.assert_array_equal(a[0], b[0][:500])

    def test_stalled_label(self, symmetric):
        tree = DiskApproximation.build(symmetric, 0, 5)
        labels, steps = _run(tree, 100, 1, None, max_steps=2)
        assert (labels == -2).any() and steps.max() == 2

    def test_backend_switch(self):
        before = kernel.get_backend()
        try:
            kernel.set_backend("python")
            assert kernel.get_backend() == "python"
            with pytest.raises(ValueError):
                kernel.set_backend("fortran")
        finally:
            kernel.set_backend(before)


class TestReentryLaw:
    def test_chi_square(self):
        res = reentry_chi2(point=20 + 0j, radius=8.0, n=100_000, bins=64, seed=3)
        assert res["p_value"] > 0.01
        assert res["p_exact"] > 0.01

    def test_detects_wrong_law(self):
        # uniform re-entry is visibly wrong from a nearby point
        from scipy import stats

        w = np.angle(kernel.reentry_samples(9.0 + 0j, 8.0, 50_000, 4))
        h, _ = np.histogram(w, np.linspace(-np.pi, np.pi, 65))
        assert stats.chisquare(h).pvalue < 1e-6


def test_fallback_when_extension_missing():
    import subprocess
    import sys

    code = (
        "import sys; sys.modules['nacifs.harmonic._wos_core'] = None\n"
        "from nacifs.harmonic import kernel, available_backends, get_backend\n"
        "assert available_backends() == ['python'] and get_backend() == 'python'\n"
        "from nacifs.conformal import autonomous, ConformalMap, DomainSpec\n"
        "from nacifs.harmonic.estimate import estimate_direct, WalkerConfig\n"
        "s = autonomous(DomainSpec(0.1), [ConformalMap.similarity(0.3, -0.5), ConformalMap.similarity(0.3, 0.5)])\n"
        "e = estimate_direct(s, 0, 5, 1, WalkerConfig(walkers=200))\n"
        "print(e.total)\n"
    )
    proc = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.strip() == "200"
