"""Positive functionals on cylinders and the quantities built from them.

A functional assigns a positive number to every word at a fixed offset
(measures, diameters, ...). Everything is computed on log values. Words at
one depth are enumerated in lexicographic order, so a depth-``n`` level is a
flat array and the extensions ``X.Y`` of a word ``X`` form a contiguous
block of the next levels.

Suprema over infinitely many cylinders are truncated: every function here
takes an explicit depth, horizon or sample budget.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .conformal import (
    SystemSpec,
    Word,
    all_words,
    as_word,
    cylinder_diameter,
    fold_words,
    limit_set_sample,
    word_index,
)
from .errors import InsufficientDepth, OutOfRange
from .jsonutil import json_safe


def _prod(xs) -> int:
    out = 1
    for x in xs:
        out *= int(x)
    return out


def _branches(word, offset: int) -> tuple:
    if isinstance(word, Word):
        return word.branches
    return tuple(word)


class Functional:
    """Base class. Subclasses implement :meth:`_log_block` at least.

    ``offset`` is the generation of the first letter; ``is_measure`` marks
    functionals whose children sum to the parent.
    """

    is_measure = False
    max_depth: int | None = None

    def __init__(self, offset: int = 0):
        self.offset = offset

    # -- structure -------------------------------------------------------
    def degree(self, position: int) -> int:
        raise NotImplementedError

    def degrees(self, start: int, count: int) -> list[int]:
        return [self.degree(start + j) for j in range(count)]

    def count(self, start: int, n: int) -> int:
        return _prod(self.degrees(start, n))

    def _check_depth(self, depth: int) -> None:
        if self.max_depth is not None and depth > self.max_depth:
            raise OutOfRange(f"depth {depth} beyond the functional's range {self.max_depth}")

    def index(self, word) -> int:
        br = _branches(word, self.offset)
        degs = self.degrees(0, len(br))
        for letter, d in zip(br, degs):
            if not 0 <= letter < d:
                raise OutOfRange(f"letter {letter} not in alphabet of size {d}")
        return word_index(br, degs)

    # -- values ----------------------------------------------------------
    def _log_block(self, base: tuple, n: int) -> np.ndarray:
        """Absolute ``log nu(base.Y)`` for every ``|Y| = n``."""
        raise NotImplementedError

    def log_level(self, n: int) -> np.ndarray:
        self._check_depth(n)
        return self._log_block((), n)

    def log_value(self, word) -> float:
        br = _branches(word, self.offset)
        self._check_depth(len(br))
        self.index(br)
        return float(self._log_block(br, 0)[0])

    def value(self, word) -> float:
        return math.exp(self.log_value(word))

    def log_relative(self, base, n: int) -> np.ndarray:
        """``log nu_base(Y)`` for all ``|Y| = n``, lexicographic."""
        br = _branches(base, self.offset)
        self._check_depth(len(br) + n)
        self.index(br)
        return self._log_block(br, n) - self._log_block(br, 0)[0]

    def log_relative_word(self, base, ext) -> float:
        base = _branches(base, self.offset)
        ext = _branches(ext, self.offset)
        self._check_depth(len(base) + len(ext))
        return self.log_value(base + ext) - self.log_value(base)

    def log_rel(self, depth: int, n: int) -> np.ndarray:
        """Matrix of ``log nu_X(Y)``: rows ``|X| = depth``, columns ``|Y| = n``."""
        self._check_depth(depth + n)
        top = self.log_level(depth)
        full = self.log_level(depth + n).reshape(len(top), -1)
        return full - top[:, None]


class DenseTable(Functional):
    """Explicit log values for every word up to ``len(levels) - 1`` letters."""

    def __init__(self, degrees: Sequence[int], log_levels: Sequence[np.ndarray], offset: int = 0, is_measure: bool = False):
        super().__init__(offset)
        self._degrees = [int(d) for d in degrees]
        self.levels = [np.asarray(lv, dtype=float) for lv in log_levels]
        if len(self.levels) > len(self._degrees) + 1:
            raise ValueError("more levels than degrees")
        for n, lv in enumerate(self.levels):
            if lv.shape != (_prod(self._degrees[:n]),):
                raise ValueError(f"level {n} has shape {lv.shape}, expected {_prod(self._degrees[:n])}")
        self.max_depth = len(self.levels) - 1
        self.is_measure = is_measure

    def degree(self, position: int) -> int:
        if position >= len(self._degrees):
            raise OutOfRange(f"position {position} beyond table degrees")
        return self._degrees[position]

    def _log_block(self, base, n):
        depth = len(base) + n
        self._check_depth(depth)
        width = self.count(len(base), n)
        start = self.index(base) * width
        return self.levels[depth][start:start + width]

    @classmethod
    def from_values(cls, degrees, levels, offset=0, is_measure=False) -> "DenseTable":
        with np.errstate(divide="ignore"):
            return cls(degrees, [np.log(np.asarray(v, dtype=float)) for v in levels], offset, is_measure)

    @classmethod
    def from_leaves(cls, degrees, leaf_values, offset=0, is_measure=True) -> "DenseTable":
        """Aggregate leaf masses upwards (children sum to the parent)."""
        levels = [np.asarray(leaf_values, dtype=float)]
        for d in reversed(degrees):
            levels.append(levels[-1].reshape(-1, d).sum(axis=1))
        return cls.from_values(degrees, levels[::-1], offset, is_measure)

    @classmethod
    def from_conditionals(cls, degrees, conditionals, root: float = 1.0, offset: int = 0) -> "DenseTable":
        """Measure from conditional probabilities; ``conditionals[n]`` has shape
        ``(D_n, d_n)`` and rows summing to one."""
        levels = [np.array([math.log(root)])]
        for n, d in enumerate(degrees):
            cond = np.asarray(conditionals[n], dtype=float)
            levels.append((levels[-1][:, None] + np.log(cond)).reshape(-1))
        return cls(degrees, levels, offset, is_measure=True)

    @classmethod
    def from_functional(cls, nu: Functional, depth: int) -> "DenseTable":
        levels = [nu.log_level(n) for n in range(depth + 1)]
        return cls(nu.degrees(0, depth), levels, nu.offset, nu.is_measure)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["offset", "word", "log_value"])
        for n, lv in enumerate(self.levels):
            for digits, val in zip(all_words(self._degrees[:n]), lv):
                w.writerow([self.offset, "-".join(map(str, digits)), repr(float(val))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, degrees: Sequence[int] | None = None, is_measure: bool = False) -> "DenseTable":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty table")
        offsets = {int(r["offset"]) for r in rows}
        if len(offsets) != 1:
            raise ValueError("a dense table has a single offset")
        words = {tuple(int(x) for x in r["word"].split("-")) if r["word"] else (): float(r["log_value"]) for r in rows}
        depth = max(len(w) for w in words)
        if degrees is None:
            degrees = [1 + max(w[j] for w in words if len(w) > j) for j in range(depth)]
        levels = []
        for n in range(depth + 1):
            try:
                levels.append(np.array([words[tuple(d)] for d in all_words(degrees[:n])]))
            except KeyError as exc:
                raise ValueError(f"missing word {exc}") from None
        return cls(degrees, levels, offsets.pop(), is_measure)


class _SystemDegrees:
    system: SystemSpec

    def degree(self, position: int) -> int:
        return self.system.degree(self.offset + position)


class UniformMeasure(_SystemDegrees, Functional):
    """``1 / (d_1 ... d_n)``."""

    is_measure = True

    def __init__(self, system: SystemSpec, offset: int = 0):
        super().__init__(offset)
        self.system = system

    def _log_block(self, base, n):
        lb = -sum(math.log(d) for d in self.degrees(0, len(base)))
        ly = -sum(math.log(d) for d in self.degrees(len(base), n))
        return np.full(self.count(len(base), n), lb + ly)

    def log_relative(self, base, n):
        k = len(_branches(base, self.offset))
        return np.full(self.count(k, n), -sum(math.log(d) for d in self.degrees(k, n)))


class BernoulliMeasure(Functional):
    """Independent letters; ``probs[g % len(probs)]`` is the law of generation ``g``."""

    is_measure = True

    def __init__(self, probs: Sequence[Sequence[float]], offset: int = 0, system: SystemSpec | None = None):
        super().__init__(offset)
        if probs and np.isscalar(probs[0]):
            probs = [probs]
        self.probs = [np.asarray(p, dtype=float) for p in probs]
        for p in self.probs:
            if np.any(p <= 0) or abs(p.sum() - 1.0) > 1e-12:
                raise ValueError(f"invalid probability vector {p}")
        self._logp = [np.array([math.log(x) for x in p]) for p in self.probs]
        self.system = system
        if system is not None:
            for g in range(min(system.depth_limit, 64)):
                if system.degree(g) != len(self.probs[g % len(self.probs)]):
                    raise ValueError(f"generation {g}: degree {system.degree(g)} does not match probabilities")

    def degree(self, position: int) -> int:
        return len(self.probs[(self.offset + position) % len(self.probs)])

    def _letters_log(self, start: int, n: int) -> np.ndarray:
        """``sum log p`` over letters at positions ``start..start+n-1`` for all words."""
        out = np.zeros(1)
        for j in range(n):
            lp = self._logp[(self.offset + start + j) % len(self._logp)]
            out = (out[:, None] + lp[None, :]).reshape(-1)
        return out

    def _log_block(self, base, n):
        lb = 0.0
        for j, letter in enumerate(base):
            lb += self._logp[(self.offset + j) % len(self._logp)][letter]
        return lb + self._letters_log(len(base), n)

    def log_relative(self, base, n):
        k = len(_branches(base, self.offset))
        return self._letters_log(k, n)

    def log_relative_word(self, base, ext):
        k = len(_branches(base, self.offset))
        out = 0.0
        for j, letter in enumerate(_branches(ext, self.offset)):
            out += self._logp[(self.offset + k + j) % len(self._logp)][letter]
        return out

    def log_rel(self, depth, n):
        rel = self._letters_log(depth, n)
        return np.broadcast_to(rel, (self.count(0, depth), len(rel)))


class DerivProxyDiameter(_SystemDegrees, Functional):
    """``|psi_X'(0)|``, the derivative proxy for the diameter of cylinder ``X``.

    Relative values use the chain rule
    ``s_X(Y) = |psi_Y'(0)| |psi_X'(psi_Y(0))| / |psi_X'(0)|`` letter by letter,
    so constant-derivative letters cancel exactly.
    """

    def __init__(self, system: SystemSpec, offset: int = 0):
        super().__init__(offset)
        self.system = system

    def _log_block(self, base, n):
        ext = all_words(self.degrees(len(base), n))
        digits = np.hstack([np.tile(np.asarray(base, dtype=np.int64), (len(ext), 1)), ext])
        _, logd, _ = fold_words(self.system, self.offset, digits)
        return logd

    def _rel(self, base_digits: np.ndarray, ext_digits: np.ndarray) -> np.ndarray:
        # base_digits: (m, k) rows paired with ext_digits: (m, n)
        k = base_digits.shape[1]
        z, logd, _ = fold_words(self.system, self.offset + k, ext_digits)
        z0 = np.zeros_like(z)
        for j in range(k - 1, -1, -1):
            gen = self.system.generation(self.offset + j)
            dig = base_digits[:, j]
            a, b, c = gen._a[dig], gen._b[dig], gen._c[dig]
            ratio = np.abs(a + 2.0 * c * z) / np.abs(a + 2.0 * c * z0)
            logd = logd + np.log(ratio)
            z = a * z + b + c * z * z
            z0 = a * z0 + b + c * z0 * z0
        return logd

    def log_relative(self, base, n):
        br = np.asarray(_branches(base, self.offset), dtype=np.int64)
        ext = all_words(self.degrees(len(br), n))
        return self._rel(np.tile(br, (len(ext), 1)), ext)

    def log_relative_word(self, base, ext):
        br = np.asarray([_branches(base, self.offset)], dtype=np.int64).reshape(1, -1)
        ex = np.asarray([_branches(ext, self.offset)], dtype=np.int64).reshape(1, -1)
        return float(self._rel(br, ex)[0])

    def log_rel(self, depth, n):
        xs = all_words(self.degrees(0, depth))
        ys = all_words(self.degrees(depth, n))
        bx = np.repeat(xs, len(ys), axis=0)
        ey = np.tile(ys, (len(xs), 1))
        return self._rel(bx, ey).reshape(len(xs), len(ys))


class SampleImageDiameter(_SystemDegrees, Functional):
    """Diameter of ``psi_X`` applied to the depth-``sample_depth`` centres of
    the shifted limit set."""

    def __init__(self, system: SystemSpec, offset: int = 0, sample_depth: int = 4):
        super().__init__(offset)
        self.system = system
        self.sample_depth = sample_depth
        self._cached = lru_cache(maxsize=None)(self._compute)

    def _compute(self, br: tuple) -> float:
        return math.log(cylinder_diameter(self.system, Word(self.offset, br), "sample", self.sample_depth))

    def _log_block(self, base, n):
        ext = all_words(self.degrees(len(base), n))
        return np.array([self._cached(tuple(base) + tuple(int(x) for x in e)) for e in ext])


class EstimatedMeasure(Functional):
    """Measure read from a Monte Carlo hit table.

    ``estimate`` needs ``offset``, ``assign_depth``, ``degrees`` and a
    lexicographic ``counts`` array over depth-``assign_depth`` words, plus
    ``total``. Cylinders with no hits get log value ``-inf``.
    """

    is_measure = True

    def __init__(self, estimate):
        super().__init__(estimate.offset)
        self.estimate = estimate
        self.max_depth = estimate.assign_depth
        self.total = int(estimate.total)
        counts = np.asarray(estimate.counts, dtype=float)
        self._counts = [counts]
        for d in reversed(list(estimate.degrees)):
            self._counts.append(self._counts[-1].reshape(-1, d).sum(axis=1))
        self._counts.reverse()

    def degree(self, position: int) -> int:
        if position >= len(self.estimate.degrees):
            raise OutOfRange(f"position {position} beyond assign depth")
        return int(self.estimate.degrees[position])

    def counts(self, n: int) -> np.ndarray:
        self._check_depth(n)
        return self._counts[n]

    def _log_block(self, base, n):
        depth = len(base) + n
        self._check_depth(depth)
        width = self.count(len(base), n)
        start = self.index(base) * width
        with np.errstate(divide="ignore"):
            return np.log(self._counts[depth][start:start + width] / self.total)

    def log_relative(self, base, n):
        br = _branches(base, self.offset)
        block = self._log_block(br, n)
        head = self._log_block(br, 0)[0]
        with np.errstate(invalid="ignore"):
            return block - head


class Scaled(Functional):
    """``factor * nu``."""

    def __init__(self, inner: Functional, factor: float):
        super().__init__(inner.offset)
        self.inner, self.logf = inner, math.log(factor)
        self.max_depth = inner.max_depth

    def degree(self, position):
        return self.inner.degree(position)

    def _log_block(self, base, n):
        return self.inner._log_block(base, n) + self.logf

    def log_relative(self, base, n):
        return self.inner.log_relative(base, n)

    def log_relative_word(self, base, ext):
        return self.inner.log_relative_word(base, ext)

    def log_rel(self, depth, n):
        return self.inner.log_rel(depth, n)


class Power(Functional):
    """``nu ** exponent``; ``Power(mu, -1)`` is the entropy functional ``1/mu``."""

    def __init__(self, inner: Functional, exponent: float):
        super().__init__(inner.offset)
        self.inner, self.exponent = inner, float(exponent)
        self.max_depth = inner.max_depth

    def degree(self, position):
        return self.inner.degree(position)

    def _log_block(self, base, n):
        return self.exponent * self.inner._log_block(base, n)

    def log_relative(self, base, n):
        return self.exponent * self.inner.log_relative(base, n)

    def log_relative_word(self, base, ext):
        return self.exponent * self.inner.log_relative_word(base, ext)

    def log_rel(self, depth, n):
        return self.exponent * self.inner.log_rel(depth, n)


class Product(Functional):
    """Pointwise product of functionals sharing an offset and alphabet."""

    def __init__(self, *factors: Functional):
        super().__init__(factors[0].offset)
        self.factors = factors
        depths = [f.max_depth for f in factors if f.max_depth is not None]
        self.max_depth = min(depths) if depths else None

    def degree(self, position):
        return self.factors[0].degree(position)

    def _log_block(self, base, n):
        return sum(f._log_block(base, n) for f in self.factors)

    def log_relative(self, base, n):
        return sum(f.log_relative(base, n) for f in self.factors)

    def log_relative_word(self, base, ext):
        return sum(f.log_relative_word(base, ext) for f in self.factors)

    def log_rel(self, depth, n):
        return sum(np.asarray(f.log_rel(depth, n)) for f in self.factors)


# -- brackets, mass, Jensen ---------------------------------------------------

def relative(nu: Functional, X, Y) -> float:
    """``nu_X(Y) = nu(XY) / nu(X)``."""
    return math.exp(nu.log_relative_word(X, Y))


def _values(f, base, n) -> np.ndarray:
    if isinstance(f, Functional):
        return np.exp(f.log_relative(base, n))
    if callable(f):
        return np.asarray(f(base, n), dtype=float)
    return np.asarray(f, dtype=float)


def bracket(nu, nu_p, n: int, base=()) -> float:
    """``<nu_base, nu'_base>_n``: sum over all length-``n`` extensions of the
    product of relativized values.

    Either argument may be a :class:`Functional`, an array over the
    extensions, a scalar, or a callable ``(base, n) -> array``.
    """
    v = _values(nu, base, n)
    w = _values(nu_p, base, n)
    prod = v * w
    if np.ndim(prod) == 0:
        prod = np.full(_count_like(nu, nu_p, base, n), float(prod))
    return float(np.sum(prod))


def _count_like(nu, nu_p, base, n) -> int:
    for f in (nu, nu_p):
        if isinstance(f, Functional):
            return f.count(len(_branches(base, f.offset)), n)
    raise ValueError("cannot infer the number of extensions from scalars")


def mass(nu: Functional, n: int, base=()) -> float:
    return bracket(nu, 1.0, n, base)


@dataclass(frozen=True)
class JensenResult:
    lhs: float
    rhs: float
    holds: bool
    equality: bool


def jensen_check(nu: Functional, nu_p: Functional, n: int, base=None) -> JensenResult:
    """Compare ``<nu, log(nu'/nu)>_n`` with ``m_n(nu) log(m_n(nu') / m_n(nu))``.

    Uses the depth-``n`` values themselves; with ``base`` given, the
    relativized functionals ``nu_base`` and ``nu'_base`` instead.
    """
    if base is None:
        lv, lw = nu.log_level(n), nu_p.log_level(n)
    else:
        lv, lw = nu.log_relative(base, n), nu_p.log_relative(base, n)
    v = np.exp(lv)
    lhs = float(np.sum(v * (lw - lv)))
    m, m_p = float(v.sum()), float(np.exp(lw).sum())
    rhs = m * math.log(m_p / m)
    return JensenResult(lhs, rhs, lhs <= rhs + 1e-12, abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs)))


def telescoping_sides(nu: Functional, s: Functional, base, n: int, p: int) -> tuple[float, float]:
    """Both sides of ``<nu_X, log s_X>_{n+p} = <nu_X, log s_X>_n +
    sum_Y nu_X(Y) <nu_XY, log s_XY>_p``."""
    base = _branches(base, nu.offset)
    lhs = float(np.sum(np.exp(nu.log_relative(base, n + p)) * s.log_relative(base, n + p)))
    first = float(np.sum(np.exp(nu.log_relative(base, n)) * s.log_relative(base, n)))
    weights = np.exp(nu.log_relative(base, n))
    rest = 0.0
    for w, ext in zip(weights, all_words(nu.degrees(len(base), n))):
        xy = base + tuple(int(x) for x in ext)
        rest += w * float(np.sum(np.exp(nu.log_relative(xy, p)) * s.log_relative(xy, p)))
    return lhs, first + rest


# -- distances and ASI ----------------------------------------------------------

def dcal_distance(nu: Functional, nu_p: Functional, horizon: int) -> float:
    """Truncated ``D(nu, nu')``: the largest ``|log(nu_X(a) / nu'_X(a))|`` over
    ``|X| <= horizon`` and single letters ``a``. A lower bound for the
    untruncated distance."""
    if nu.offset != nu_p.offset:
        raise ValueError("functionals live at different offsets")
    best = 0.0
    for depth in range(horizon + 1):
        diff = np.abs(np.asarray(nu.log_rel(depth, 1)) - np.asarray(nu_p.log_rel(depth, 1)))
        if diff.size:
            best = max(best, float(np.max(diff)))
    return best


def asi_discrepancy(
    nu: Functional,
    k: int,
    tail: int = 1,
    sample_budget: int = 1000,
    rng_seed: int = 0,
    horizon: int | None = None,
    exhaustive: bool = False,
) -> float:
    """Largest ``|log(nu_XY(Z) / nu_X'Y(Z))|`` seen over sibling quadruples.

    ``|X| = |X'|`` ranges over ``1..horizon-k-tail``, ``|Y| = k`` and
    ``1 <= |Z| <= tail``. Sampling is uniform at every level and a pure
    function of ``rng_seed``; ``exhaustive=True`` enumerates every quadruple
    instead.
    """
    if horizon is None:
        horizon = k + tail + 3
    max_x = horizon - k - tail
    if max_x < 1:
        raise InsufficientDepth(f"horizon {horizon} too small for k={k}, tail={tail}")
    if nu.max_depth is not None and horizon > nu.max_depth:
        raise InsufficientDepth(f"functional covers depth {nu.max_depth} < horizon {horizon}")
    if exhaustive:
        best = 0.0
        for lx in range(1, max_x + 1):
            for lz in range(1, tail + 1):
                m = np.asarray(nu.log_rel(lx + k, lz))
                m = m.reshape(nu.count(0, lx), -1)
                with np.errstate(invalid="ignore"):
                    spread = m.max(axis=0) - m.min(axis=0)
                best = max(best, float(np.max(spread)))
        return best
    rng = np.random.default_rng([rng_seed & 0xFFFFFFFF, k, tail, horizon])
    best = 0.0
    for _ in range(sample_budget):
        lx = int(rng.integers(1, max_x + 1))
        lz = int(rng.integers(1, tail + 1))
        degs = nu.degrees(0, lx + k + lz)
        x = tuple(int(rng.integers(d)) for d in degs[:lx])
        x2 = tuple(int(rng.integers(d)) for d in degs[:lx])
        y = tuple(int(rng.integers(d)) for d in degs[lx:lx + k])
        z = tuple(int(rng.integers(d)) for d in degs[lx + k:])
        val = abs(nu.log_relative_word(x + y, z) - nu.log_relative_word(x2 + y, z))
        best = max(best, val)
    return best


@dataclass
class DecayFit:
    C: float
    q: float
    residual: float
    degenerate: bool


def fit_decay(ks: Sequence[int], betas: Sequence[float], use: Sequence[bool] | None = None) -> DecayFit:
    """Least-squares fit of ``log beta_k = log C + k log q``.

    Only positive betas (and, when given, entries with ``use[i]``) enter the
    fit; fewer than two points or ``q > 1`` marks the fit degenerate.
    """
    ks = np.asarray(ks, dtype=float)
    betas = np.asarray(betas, dtype=float)
    mask = betas > 0
    if use is not None:
        mask &= np.asarray(use, dtype=bool)
    if mask.sum() < 2:
        return DecayFit(math.nan, math.nan, math.nan, True)
    slope, intercept = np.polyfit(ks[mask], np.log(betas[mask]), 1)
    resid = np.log(betas[mask]) - (intercept + slope * ks[mask])
    q = math.exp(slope)
    return DecayFit(math.exp(intercept), q, float(np.sqrt(np.mean(resid**2))), not 0 < q <= 1)


@dataclass
class AsiReport:
    ks: list
    betas: list
    samples: list
    noise_floor: list | None = None
    params: dict = field(default_factory=dict)
    fit: DecayFit | None = None

    def __post_init__(self):
        if self.fit is None:
            self.fit = fit_decay(self.ks, self.betas, None if self.noise_floor is None else self.above_floor())

    def above_floor(self) -> list[bool]:
        if self.noise_floor is None:
            return [True] * len(self.ks)
        return [b > f for b, f in zip(self.betas, self.noise_floor)]

    @property
    def noise_limited(self) -> list[bool]:
        return [not x for x in self.above_floor()]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["k", "beta_hat", "samples"]
        if self.noise_floor is not None:
            header += ["noise_floor", "noise_limited"]
        w.writerow(header)
        for i, k in enumerate(self.ks):
            row = [k, repr(float(self.betas[i])), self.samples[i]]
            if self.noise_floor is not None:
                row += [repr(float(self.noise_floor[i])), int(self.noise_limited[i])]
            w.writerow(row)
        return buf.getvalue()

    def fit_json(self) -> str:
        f = self.fit
        return json.dumps(
            json_safe({"C": f.C, "q": f.q, "residual": f.residual, "degenerate": f.degenerate, "params": self.params}),
            indent=2, sort_keys=True,
        )


def asi_report(nu: Functional, k_range: Sequence[int], tail: int = 1, sample_budget: int = 1000,
               rng_seed: int = 0, horizon: int | None = None, exhaustive: bool = False) -> AsiReport:
    betas, samples = [], []
    for k in k_range:
        h = horizon if horizon is not None else k + tail + 3
        betas.append(asi_discrepancy(nu, k, tail, sample_budget, rng_seed, h, exhaustive))
        samples.append(-1 if exhaustive else sample_budget)
    params = {"tail": tail, "sample_budget": sample_budget, "rng_seed": rng_seed,
              "horizon": horizon, "exhaustive": exhaustive}
    return AsiReport(list(k_range), betas, samples, params=params)


# -- uniformity and compatibility ----------------------------------------------

@dataclass
class AlphaDiagnostic:
    alpha: float
    per_depth: list
    g_tables: list


def alpha_diagnostic(nu: Functional, s: Functional, n: int, k_max: int) -> AlphaDiagnostic:
    """Truncated ``alpha_n = sup_k (max_{|X|=k} g_n(X) - min_{|X|=k} g_n(X))``
    with ``g_n(X) = <nu_X, log s_X>_n`` and ``k <= k_max``."""
    spreads, tables = [], []
    for k in range(k_max + 1):
        w = np.exp(np.asarray(nu.log_rel(k, n)))
        ls = np.asarray(s.log_rel(k, n))
        with np.errstate(invalid="ignore"):
            terms = np.where(w > 0, w * ls, 0.0)
        g = terms.sum(axis=1)
        tables.append(g)
        spreads.append(float(g.max() - g.min()))
    return AlphaDiagnostic(max(spreads), spreads, tables)


@dataclass
class CompatibilityWitness:
    """Pairing of a growth sequence ``gamma`` with a decay sequence ``beta``
    through ``p_n = floor(sqrt(n))`` and ``c_n = max(gamma_{p_n}, gamma_n beta_{p_n})``."""

    gamma: Callable[[int], float]
    beta: Callable[[int], float]

    @classmethod
    def linear(cls, slope: float, beta) -> "CompatibilityWitness":
        return cls(lambda n: slope * n, beta if callable(beta) else (lambda n: beta[n]))

    @classmethod
    def table(cls, gammas: Sequence[float], betas: Sequence[float]) -> "CompatibilityWitness":
        return cls(lambda n: gammas[n], lambda n: betas[n])

    @staticmethod
    def p(n: int) -> int:
        return math.isqrt(n)

    def c(self, n: int) -> float:
        pn = self.p(n)
        return max(self.gamma(pn), self.gamma(n) * self.beta(pn))

    def ratios(self, n_max: int) -> np.ndarray:
        return np.array([self.c(n) / n for n in range(1, n_max + 1)])

    def converging(self, n_max: int) -> bool:
        """Finite-range check: the tail half of ``c_n / n`` stays below the
        head half and ends below where it started."""
        r = self.ratios(n_max)
        half = len(r) // 2
        return bool(r[half:].max() <= r[:half].max() and r[-1] < r[0])
