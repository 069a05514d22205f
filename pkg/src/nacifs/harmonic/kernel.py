"""Walker kernel dispatch: compiled core when importable, numpy fallback otherwise."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _wos_py

try:
    from . import _wos_core as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _wos_py}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled

_active = "compiled" if _compiled is not None else "python"

# Work unit for threading; results never depend on it.
CHUNK = 8192


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def get_backend() -> str:
    return _active


def set_backend(name: str) -> None:
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {available_backends()}")
    _active = name


def _module(backend):
    return _BACKENDS[backend or _active]


def run(tree, n_walkers: int, seed: int, *, launch: bool, start: complex = 0j,
        r_launch: float = 8.0, r_out: float = 16.0, outer_radius: float = 0.0,
        eps_abs: float = 1e-3, max_steps: int = 100_000, threads: int = 1,
        backend: str | None = None):
    """Run ``n_walkers`` walkers against ``tree``; returns ``(labels, steps)``.

    Walker ``i`` draws from its own counter-based stream keyed by
    ``(seed, i)``, so the split into chunks and threads is invisible.
    """
    mod = _module(backend)
    labels = np.empty(n_walkers, dtype=np.int64)
    steps = np.empty(n_walkers, dtype=np.int64)

    def work(lo):
        hi = min(lo + CHUNK, n_walkers)
        mod.run_walkers(
            tree.cx, tree.cy, tree.hull, tree.radius, tree.first_child, tree.n_child,
            tree.leaf_start, tree.max_stack, int(launch), float(start.real), float(start.imag),
            float(r_launch), float(r_out), float(outer_radius), float(eps_abs), int(max_steps),
            int(seed) & 0xFFFFFFFFFFFFFFFF, lo, hi - lo, labels[lo:hi], steps[lo:hi],
        )

    starts = range(0, n_walkers, CHUNK)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, starts))
    else:
        for lo in starts:
            work(lo)
    return labels, steps


def reentry_samples(point: complex, radius: float, n: int, seed: int, backend: str | None = None) -> np.ndarray:
    """Re-entry points on ``|w| = radius`` for a walker at ``point`` (``|point| > radius``)."""
    mod = _module(backend)
    outx = np.empty(n)
    outy = np.empty(n)
    mod.reentry_samples(float(point.real), float(point.imag), float(radius),
                        int(seed) & 0xFFFFFFFFFFFFFFFF, 0, n, outx, outy)
    return outx + 1j * outy
