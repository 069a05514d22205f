"""Entropy, Lyapunov exponent, pressure and finite-depth dimension estimates."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .conformal import Word, all_words
from .errors import NonMeasure, OutOfRange
from .jsonutil import json_safe
from .symbolic import EstimatedMeasure, Functional

NORMALIZATION_TOL = 1e-9


@dataclass
class PressureRecord:
    """Depth-``n`` entropy ``H``, Lyapunov exponent ``chi`` and their ratio
    ``t`` (the root of the affine pressure ``H - t chi``), in nats.

    Standard errors are ``nan`` for exact measures; ``coverage`` is the
    fraction of depth-``n`` cylinders with positive mass.
    """

    n: int
    H: float
    chi: float
    t: float
    H_se: float = math.nan
    chi_se: float = math.nan
    t_se: float = math.nan
    coverage: float = 1.0

    def pressure(self, t):
        return self.H - np.asarray(t, dtype=float) * self.chi


def _masses(mu: Functional, n: int) -> tuple[np.ndarray, np.ndarray]:
    logp = np.asarray(mu.log_level(n), dtype=float)
    p = np.exp(logp)
    total = math.fsum(p)
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise NonMeasure(f"masses at depth {n} sum to {total!r}")
    return p, logp


def pressure_record(mu: Functional, diam: Functional, n: int) -> PressureRecord:
    """Cylinder-averaged ``H_n``, ``chi_n`` and ``t_n = H_n / chi_n``.

    Cylinders with zero mass contribute nothing (``0 log 0 = 0``). For an
    :class:`EstimatedMeasure` the delta method gives standard errors from the
    multinomial walker counts.
    """
    if n < 1:
        raise OutOfRange("depth must be at least 1")
    p, logp = _masses(mu, n)
    logd = np.asarray(diam.log_level(n), dtype=float)
    if logd.shape != p.shape:
        raise OutOfRange("measure and diameter disagree on the number of cylinders")
    pos = p > 0
    H = -math.fsum(p[pos] * logp[pos]) / n
    chi = -math.fsum(p[pos] * logd[pos]) / n
    t = H / chi
    rec = PressureRecord(n, H, chi, t, coverage=float(pos.mean()))
    if isinstance(mu, EstimatedMeasure):
        N = mu.total
        u = -logp[pos]
        v = -logd[pos]
        w = p[pos]
        mu_u, mu_v = float(w @ u), float(w @ v)
        var_u = float(w @ (u - mu_u) ** 2)
        var_v = float(w @ (v - mu_v) ** 2)
        cov = float(w @ ((u - mu_u) * (v - mu_v)))
        scale = 1.0 / (N * n * n)
        vH, vC, cHC = var_u * scale, var_v * scale, cov * scale
        gH, gC = 1.0 / chi, -H / chi**2
        vt = gH * gH * vH + gC * gC * vC + 2 * gH * gC * cHC
        rec.H_se, rec.chi_se, rec.t_se = math.sqrt(vH), math.sqrt(vC), math.sqrt(max(vt, 0.0))
    return rec


@dataclass
class DimensionReport:
    """Window minimum and maximum of ``t_n`` as proxies for the lower and
    upper limits, with the slope of ``t_n`` against ``1/n`` as a trend hint."""

    records: list
    window: int
    hd_estimate: float
    pd_estimate: float
    hd_se: float = math.nan
    pd_se: float = math.nan
    slope: float = math.nan
    intercept: float = math.nan
    params: dict = field(default_factory=dict)

    @property
    def t(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    @property
    def ns(self) -> list[int]:
        return [r.n for r in self.records]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "H", "chi", "t", "H_se", "chi_se", "t_se", "coverage"])
        for r in self.records:
            w.writerow([r.n] + [repr(float(x)) for x in (r.H, r.chi, r.t, r.H_se, r.chi_se, r.t_se, r.coverage)])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "window": self.window,
            "window_ns": self.ns[-self.window:],
            "hd_estimate": self.hd_estimate,
            "pd_estimate": self.pd_estimate,
            "hd_se": self.hd_se,
            "pd_se": self.pd_se,
            "trend_slope_vs_inv_n": self.slope,
            "trend_intercept": self.intercept,
            **self.params,
        }

    def to_json(self) -> str:
        return json.dumps(json_safe(self.summary()), indent=2, sort_keys=True)


def dimension_report(mu: Functional, diam: Functional, n_range, window: int = 4) -> DimensionReport:
    records = [pressure_record(mu, diam, n) for n in n_range]
    if not records:
        raise OutOfRange("empty depth range")
    window = max(1, min(window, len(records)))
    tail = records[-window:]
    ts = [r.t for r in tail]
    lo, hi = int(np.argmin(ts)), int(np.argmax(ts))
    slope = intercept = math.nan
    if len(records) >= 2:
        inv = np.array([1.0 / r.n for r in records])
        slope, intercept = (float(x) for x in np.polyfit(inv, [r.t for r in records], 1))
    return DimensionReport(records, window, ts[lo], ts[hi], tail[lo].t_se, tail[hi].t_se, slope, intercept)


# -- pointwise forms ------------------------------------------------------------------

def _digits(words, n: int) -> np.ndarray:
    if isinstance(words, np.ndarray) and words.ndim == 2:
        if words.shape[1] < n:
            raise OutOfRange(f"sample words shorter than {n}")
        return words[:, :n]
    rows = []
    for w in words:
        br = w.branches if isinstance(w, Word) else tuple(w)
        if len(br) < n:
            raise OutOfRange(f"sample word of length {len(br)} shorter than {n}")
        rows.append(br[:n])
    return np.asarray(rows, dtype=np.int64).reshape(-1, n)


def pointwise_arrays(mu: Functional, diam: Functional, words, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(h, chi, h/chi)`` along each sample word's length-``n`` prefix."""
    digits = _digits(words, n)
    degs = mu.degrees(0, n)
    for j, d in enumerate(degs):
        if digits.size and (digits[:, j].min() < 0 or digits[:, j].max() >= d):
            raise OutOfRange(f"letter out of range at position {j}")
    idx = np.zeros(len(digits), dtype=np.int64)
    for j, d in enumerate(degs):
        idx = idx * d + digits[:, j]
    h = -np.asarray(mu.log_level(n))[idx] / n
    chi = -np.asarray(diam.log_level(n))[idx] / n
    return h, chi, h / chi


def pointwise_samples(mu: Functional, diam: Functional, sample_words, n: int) -> list[tuple[float, float, float]]:
    h, chi, r = pointwise_arrays(mu, diam, sample_words, n)
    return list(zip(h.tolist(), chi.tolist(), r.tolist()))


def sample_words(mu: Functional, n: int, size: int, seed: int = 0) -> np.ndarray:
    """``size`` length-``n`` words drawn from ``mu`` (rows of letters)."""
    p, _ = _masses(mu, n)
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(p), size=size, p=p / p.sum())
    return all_words(mu.degrees(0, n))[idx]


def endpoint_words(estimate) -> np.ndarray:
    """One word per absorbed walker, expanded from a hit-count table."""
    words = all_words(estimate.degrees)
    return np.repeat(words, np.asarray(estimate.counts, dtype=np.int64), axis=0)
