"""Monte Carlo estimators of the harmonic measure at infinity on cylinders."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache

import numpy as np

from ..conformal import SystemSpec, Word, all_words, as_word, word_index
from ..errors import ConfigError, DegenerateFactor, InsufficientDepth, WalkerStalled
from ..rng import derive_seed
from ..symbolic import AsiReport
from . import kernel
from .approximation import DiskApproximation

DEFAULT_EXTRA_DEPTH = 4
DEGENERATE_FLOOR = 100


@dataclass(frozen=True)
class WalkerConfig:
    walkers: int = 100_000
    seed: int = 0
    r_launch: float = 8.0
    r_out: float = 16.0
    eps_abs: float = 1e-3
    max_steps: int = 100_000

    def __post_init__(self):
        if self.r_out <= self.r_launch:
            raise ConfigError("r_out must exceed r_launch")
        if self.eps_abs <= 0:
            raise ConfigError("eps_abs must be positive")
        if self.walkers < 1:
            raise ConfigError("need at least one walker")

    def check(self, system: SystemSpec) -> None:
        if self.r_launch <= system.domain.v_factor:
            raise ConfigError("r_launch must exceed 1 + eta")

    def with_(self, **kw) -> "WalkerConfig":
        return replace(self, **kw)


@lru_cache(maxsize=64)
def approximation(system: SystemSpec, offset: int, depth: int) -> DiskApproximation:
    return DiskApproximation.build(system, offset, depth)


@dataclass
class MeasureEstimate:
    """Hit counts of the depth-``assign_depth`` cylinders of the system shifted
    by ``offset``."""

    offset: int
    assign_depth: int
    degrees: tuple
    counts: np.ndarray
    total: int
    approx_depth: int | None = None
    total_steps: int = 0
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        self.degrees = tuple(int(d) for d in self.degrees)

    def words(self):
        return [Word(self.offset, tuple(int(x) for x in d)) for d in all_words(self.degrees)]

    def _index(self, word) -> int:
        word = as_word(word, self.offset)
        if word.offset != self.offset or len(word) > self.assign_depth:
            raise InsufficientDepth(f"word {word} not covered by this estimate")
        return word_index(word.branches, self.degrees), len(word)

    def count(self, word) -> int:
        idx, n = self._index(word)
        return int(self.aggregate(n).counts[idx])

    def value(self, word) -> float:
        return self.count(word) / self.total

    def stderr(self, word) -> float:
        p = self.value(word)
        return math.sqrt(p * (1 - p) / self.total)

    @property
    def values(self) -> np.ndarray:
        return self.counts / self.total

    @property
    def stderrs(self) -> np.ndarray:
        p = self.values
        return np.sqrt(p * (1 - p) / self.total)

    def aggregate(self, n: int) -> "MeasureEstimate":
        """Counts of the length-``n`` prefixes (same walkers)."""
        if n > self.assign_depth:
            raise InsufficientDepth(f"cannot refine depth {self.assign_depth} to {n}")
        counts = self.counts
        for d in reversed(self.degrees[n:]):
            counts = counts.reshape(-1, d).sum(axis=1)
        return replace(self, assign_depth=n, degrees=self.degrees[:n], counts=counts)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["offset", "word", "count", "value", "stderr"])
        for word, c, v, s in zip(self.words(), self.counts, self.values, self.stderrs):
            w.writerow([self.offset, word.label(), int(c), repr(float(v)), repr(float(s))])
        return buf.getvalue()

    def manifest(self) -> dict:
        return {
            "offset": self.offset,
            "assign_depth": self.assign_depth,
            "approx_depth": self.approx_depth,
            "degrees": list(self.degrees),
            "total": self.total,
            "total_steps": self.total_steps,
            "config": self.config,
        }

    @classmethod
    def from_csv(cls, text: str, manifest: dict | None = None) -> "MeasureEstimate":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty estimate")
        words = [Word.parse(r["word"], int(r["offset"])) for r in rows]
        n = len(words[0])
        if manifest is not None:
            degrees = tuple(manifest["degrees"])
        else:
            degrees = tuple(1 + max(w.branches[j] for w in words) for j in range(n))
        counts = np.zeros(int(np.prod(degrees, dtype=np.int64)) if degrees else 1, dtype=np.int64)
        for w, r in zip(words, rows):
            counts[word_index(w.branches, degrees)] = int(r["count"])
        m = manifest or {}
        return cls(words[0].offset, n, degrees, counts, int(counts.sum()), m.get("approx_depth"),
                   m.get("total_steps", 0), m.get("config", {}))


def estimate_direct(system: SystemSpec, offset: int, approx_depth: int, assign_depth: int,
                    cfg: WalkerConfig, threads: int = 1, backend: str | None = None) -> MeasureEstimate:
    """Walk-on-spheres estimate of ``omega_offset`` on the depth-``assign_depth``
    cylinders, absorbing on the depth-``approx_depth`` disk approximation.

    Walkers start uniformly on ``|z| = r_launch``; past ``r_out`` they re-enter
    on the launch circle through the exterior Poisson kernel. A walker that
    exceeds ``max_steps`` invalidates the run.
    """
    if assign_depth > approx_depth:
        raise InsufficientDepth("assign_depth must not exceed approx_depth")
    cfg.check(system)
    tree = approximation(system, offset, approx_depth)
    labels, steps = kernel.run(
        tree, cfg.walkers, cfg.seed, launch=True, r_launch=cfg.r_launch, r_out=cfg.r_out,
        eps_abs=cfg.eps_abs, max_steps=cfg.max_steps, threads=threads, backend=backend,
    )
    stalled = int(np.count_nonzero(labels < 0))
    if stalled:
        raise WalkerStalled(f"{stalled} walkers exceeded {cfg.max_steps} steps")
    anc = tree.ancestor(labels, assign_depth)
    size = int(np.prod(tree.degrees[:assign_depth], dtype=np.int64))
    counts = np.bincount(anc, minlength=size)
    return MeasureEstimate(
        offset=offset, assign_depth=assign_depth, degrees=tree.degrees[:assign_depth],
        counts=counts, total=cfg.walkers, approx_depth=approx_depth,
        total_steps=int(steps.sum()), config=asdict(cfg),
    )


# -- buffered factorization -------------------------------------------------------

@dataclass
class FactorizedEstimate:
    value: float
    log_stderr: float
    bias: float
    error_model: float
    factors: list


class FactorizedEstimator:
    """Deep-cylinder estimates from shallow conditionals of shifted systems.

    For a word ``a_1..a_n`` and buffer ``b``::

        omega(a_1..a_n) ~ omega_0(a_1..a_b)
            * prod_{j=b+1..n} omega_{j-1-b}(a_{j-b}..a_j) / omega_{j-1-b}(a_{j-b}..a_{j-1})

    One estimate per offset (assign depth ``b+1``) is cached and reused across
    words. ``asi_fit = (C, q)`` adds the bias term ``n C q**b``; the error
    model is in log space.
    """

    def __init__(self, system: SystemSpec, buffer: int, cfg: WalkerConfig, approx_depth: int | None = None,
                 asi_fit: tuple[float, float] | None = None, floor: int = DEGENERATE_FLOOR,
                 threads: int = 1, backend: str | None = None):
        self.system, self.buffer, self.cfg = system, buffer, cfg
        self.approx_depth = approx_depth if approx_depth is not None else buffer + 1 + DEFAULT_EXTRA_DEPTH
        self.asi_fit, self.floor = asi_fit, floor
        self.threads, self.backend = threads, backend
        self._cache: dict[int, MeasureEstimate] = {}

    @staticmethod
    def factor_seed(seed: int, offset: int) -> int:
        return seed if offset == 0 else derive_seed(seed, "factor", offset)

    def estimate_at(self, offset: int) -> MeasureEstimate:
        est = self._cache.get(offset)
        if est is None:
            cfg = self.cfg.with_(seed=self.factor_seed(self.cfg.seed, offset))
            est = estimate_direct(self.system, offset, self.approx_depth, self.buffer + 1, cfg,
                                  self.threads, self.backend)
            self._cache[offset] = est
        return est

    def __call__(self, word) -> FactorizedEstimate:
        word = as_word(word)
        b, n = self.buffer, len(word)
        if word.offset != 0:
            raise ValueError("factorized estimates are for words at offset 0")
        if n < b:
            raise ValueError(f"word length {n} shorter than buffer {b}")
        letters = word.branches
        head = self.estimate_at(0).aggregate(b)
        c0 = head.count(Word(0, letters[:b]))
        if c0 < self.floor:
            raise DegenerateFactor(f"head factor has {c0} hits (< {self.floor})")
        p0 = c0 / head.total
        value = p0
        var = (1 - p0) / c0
        factors = [(0, c0, head.total)]
        for j in range(b + 1, n + 1):
            k = j - 1 - b
            est = self.estimate_at(k)
            num = est.count(Word(k, letters[j - b - 1:j]))
            den = est.aggregate(b).count(Word(k, letters[j - b - 1:j - 1]))
            if den < self.floor or num == 0:
                raise DegenerateFactor(f"factor at offset {k}: {num}/{den} hits")
            p = num / den
            value *= p
            var += (1 - p) / num
            factors.append((k, num, den))
        bias = 0.0
        if self.asi_fit is not None:
            C, q = self.asi_fit
            bias = n * C * q**b
        se = math.sqrt(var)
        return FactorizedEstimate(value, se, bias, se + bias, factors)


def estimate_factorized(system: SystemSpec, word, buffer: int, per_factor_cfg: WalkerConfig,
                        **kwargs) -> FactorizedEstimate:
    return FactorizedEstimator(system, buffer, per_factor_cfg, **kwargs)(word)


# -- ASI of the harmonic measure -----------------------------------------------------

def asi_report_harmonic(system: SystemSpec, k_range, cfg: WalkerConfig, x_len: int = 1, z_len: int = 1,
                        approx_extra: int = DEFAULT_EXTRA_DEPTH, threads: int = 1,
                        backend: str | None = None, estimate: MeasureEstimate | None = None) -> AsiReport:
    """Sibling discrepancy of estimated conditional harmonic measures.

    All quadruples with ``|X| = |X'| = x_len``, ``|Y| = k``, ``|Z| = z_len``
    are enumerated from one direct estimate. ``noise_floor[k]`` is three
    times the largest propagated log standard error among the quadruples;
    a discrepancy at or below it is noise-limited.
    """
    k_range = list(k_range)
    depth = x_len + max(k_range) + z_len
    if estimate is None:
        estimate = estimate_direct(system, 0, depth + approx_extra, depth, cfg, threads, backend)
    degs = estimate.degrees
    betas, floors, samples = [], [], []
    for k in k_range:
        c_xy = estimate.aggregate(x_len + k).counts.astype(float)
        c_xyz = estimate.aggregate(x_len + k + z_len).counts.astype(float)
        nx = int(np.prod(degs[:x_len]))
        nz = int(np.prod(degs[x_len + k:x_len + k + z_len]))
        c_xy = c_xy.reshape(nx, -1, 1)
        c_xyz = c_xyz.reshape(nx, -1, nz)
        with np.errstate(divide="ignore", invalid="ignore"):
            p = c_xyz / c_xy
            logp = np.log(p)
            se2 = (1 - p) / c_xyz
        bad = ~np.isfinite(logp) | ~np.isfinite(se2)
        logp = np.where(bad, np.nan, logp)
        se2 = np.where(bad, np.inf, se2)
        diff = np.abs(logp[:, None] - logp[None, :])
        comb = np.sqrt(se2[:, None] + se2[None, :])
        off = ~np.eye(nx, dtype=bool)
        diff, comb = diff[off], comb[off]
        if np.isnan(diff).any():
            betas.append(math.inf)
            floors.append(math.inf)
        else:
            betas.append(float(diff.max()))
            floors.append(float(3.0 * comb.max()))
        samples.append(int(diff.size // 2))
    params = {"x_len": x_len, "z_len": z_len, "walkers": cfg.walkers, "seed": cfg.seed,
              "approx_depth": estimate.approx_depth}
    return AsiReport(k_range, betas, samples, noise_floor=floors, params=params)


# -- localization checks ------------------------------------------------------------

def interior_measure(system: SystemSpec, point: complex, cfg: WalkerConfig, approx_depth: int = 6,
                     threads: int = 1, backend: str | None = None) -> tuple[float, float]:
    """``omega(point, X, D_gamma \\ X)``: fraction of walkers from ``point``
    absorbed on the disk approximation before reaching ``|z| = gamma``."""
    gamma = system.domain.gamma
    if abs(point) >= gamma * (1 - cfg.eps_abs):
        return 0.0, 0.0
    tree = approximation(system, 0, approx_depth)
    labels, _ = kernel.run(tree, cfg.walkers, cfg.seed, launch=False, start=complex(point),
                           outer_radius=gamma, eps_abs=cfg.eps_abs, max_steps=cfg.max_steps,
                           threads=threads, backend=backend)
    if np.any(labels == -2):
        raise WalkerStalled("walker exceeded max_steps in the localization domain")
    p = float(np.mean(labels >= 0))
    return p, math.sqrt(p * (1 - p) / cfg.walkers)


@dataclass
class LowerBoundReport:
    circle_angles: np.ndarray
    circle_values: np.ndarray
    circle_stderr: np.ndarray
    c_hat: float
    distances: np.ndarray
    values: np.ndarray
    slope: float
    intercept: float


def lower_bound_checks(system: SystemSpec, cfg: WalkerConfig, n_circle: int = 16,
                       distances=None, approx_depth: int = 6, threads: int = 1,
                       backend: str | None = None) -> LowerBoundReport:
    """Empirical constants of the two localization bounds.

    On ``|x| = 1`` the minimum of ``omega(x, X, D_gamma \\ X)`` estimates the
    uniform lower bound ``c``. Along the outward normal of the largest leaf
    disk, ``log(1 - omega)`` is regressed on ``log dist(x, X)``; a positive
    slope is the empirical Holder exponent.
    """
    angles = 2 * np.pi * np.arange(n_circle) / n_circle
    vals, errs = [], []
    for i, t in enumerate(angles):
        c = cfg.with_(seed=derive_seed(cfg.seed, "circle", i))
        v, e = interior_measure(system, complex(math.cos(t), math.sin(t)), c, approx_depth, threads, backend)
        vals.append(v)
        errs.append(e)
    tree = approximation(system, 0, approx_depth)
    centers, radii = tree.disks()
    j = int(np.argmax(radii))
    center, r = centers[j], float(radii[j])
    direction = center / abs(center) if abs(center) > 0 else 1.0
    if distances is None:
        distances = r * np.geomspace(0.02, 0.5, 6)
    distances = np.asarray(distances, dtype=float)
    near = []
    for i, dist in enumerate(distances):
        c = cfg.with_(seed=derive_seed(cfg.seed, "normal", i))
        near.append(interior_measure(system, center + direction * (r + dist), c, approx_depth, threads, backend)[0])
    near = np.asarray(near)
    escape = 1.0 - near
    ok = escape > 0
    if ok.sum() >= 2:
        slope, intercept = np.polyfit(np.log(distances[ok]), np.log(escape[ok]), 1)
    else:
        slope = intercept = math.nan
    vals = np.asarray(vals)
    return LowerBoundReport(angles, vals, np.asarray(errs), float(vals.min()), distances, near,
                            float(slope), float(intercept))


# -- re-entry diagnostics --------------------------------------------------------------

def poisson_exterior_density(theta: np.ndarray, point: complex, radius: float) -> np.ndarray:
    """Density in angle of the hitting point on ``|w| = radius`` from ``point`` outside."""
    rho2 = abs(point) ** 2
    w = radius * np.exp(1j * theta)
    return (rho2 - radius**2) / (2 * np.pi * np.abs(point - w) ** 2)


def brute_force_hits(point: complex, radius: float, n: int, seed: int, far: float = 1e6,
                     eps: float = 1e-9) -> np.ndarray:
    """Hitting points on ``|w| = radius`` by an explicit walk from ``point``.

    Each step jumps to a uniform point on the largest circle around the
    walker that does not cross the target circle (mean value property only;
    no kernel formula). Walkers that wander past ``far * radius`` are given
    a uniform angle, which is the limit law from infinity.
    """
    rng = np.random.default_rng(seed)
    z = np.full(n, complex(point))
    out = np.empty(n, dtype=complex)
    active = np.arange(n)
    while active.size:
        za = z[active]
        gap = np.abs(za) - radius
        hit = gap < eps * radius
        lost = np.abs(za) > far * radius
        out[active[hit]] = radius * za[hit] / np.abs(za[hit])
        th = rng.uniform(0, 2 * np.pi, lost.sum())
        out[active[lost]] = radius * np.exp(1j * th)
        move = ~(hit | lost)
        th = rng.uniform(0, 2 * np.pi, move.sum())
        z[active[move]] = za[move] + gap[move] * np.exp(1j * th)
        active = active[move]
    return out


def reentry_chi2(point: complex = 20.0 + 0j, radius: float = 8.0, n: int = 100_000, bins: int = 64,
                 seed: int = 0, backend: str | None = None) -> dict:
    """Two-sample chi-square test of kernel re-entry angles against the
    brute-force walk; also a goodness-of-fit test against the exact density."""
    from scipy import stats

    ref = np.angle(point)
    a = np.mod(np.angle(kernel.reentry_samples(point, radius, n, seed, backend)) - ref, 2 * np.pi)
    b = np.mod(np.angle(brute_force_hits(point, radius, n, seed + 1)) - ref, 2 * np.pi)
    edges = np.linspace(0, 2 * np.pi, bins + 1)
    ha, _ = np.histogram(a, edges)
    hb, _ = np.histogram(b, edges)
    chi2, p_two, dof, _ = stats.chi2_contingency(np.vstack([ha, hb]))
    cdf = np.array([_wrapped_cauchy_cdf(e, abs(point), radius) for e in edges])
    expected = n * np.diff(cdf)
    chi2_fit, p_fit = stats.chisquare(ha, expected)
    return {"chi2": float(chi2), "p_value": float(p_two), "dof": int(dof),
            "chi2_exact": float(chi2_fit), "p_exact": float(p_fit), "bins": bins, "samples": n}


def _wrapped_cauchy_cdf(theta: float, rho: float, radius: float) -> float:
    # CDF on [0, 2pi) of the exterior Poisson kernel centred at angle 0.
    r = radius / rho
    k = (1 + r) / (1 - r)
    if theta <= 0:
        return 0.0
    if theta >= 2 * np.pi:
        return 1.0
    half = theta / 2
    if half < np.pi / 2:
        return math.atan(k * math.tan(half)) / np.pi
    if half == np.pi / 2:
        return 0.5
    return 1.0 + math.atan(k * math.tan(half)) / np.pi
