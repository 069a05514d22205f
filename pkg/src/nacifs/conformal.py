"""Conformal maps, generations and non-autonomous systems.

Maps come from the family ``psi(z) = a*z + b + c*z**2`` (a similarity when
``c == 0``). A system is a sequence of generations, each an ordered list of
maps. Generations are indexed from 0; a :class:`Word` at offset ``p`` picks
one branch in each of the generations ``p, p+1, ...``.

Cylinder maps are never inverted: ``psi_X = psi_{x_1} o ... o psi_{x_n}`` is
evaluated by folding the forward maps from the innermost letter outwards.
"""
from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ConfigError,
    IncompatibleSystems,
    InsufficientDepth,
    InvalidWord,
    ValidationFailure,
)

CIRCLE_SAMPLES = 1024


class MapKind(str, Enum):
    SIMILARITY = "similarity"
    QUADRATIC = "quadratic"


class Mode(str, Enum):
    EXPLICIT = "explicit"
    PERIODIC = "periodic"
    SEEDED = "seeded"


@dataclass(frozen=True)
class DomainSpec:
    """The unit disk ``U``, its neighbourhood ``V = (1+eta) U`` and the
    localization radius ``gamma`` (default ``1 + eta/2``)."""

    eta: float
    gamma: float | None = None
    unit_radius: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0:
            raise ConfigError(f"eta must lie in (0, 1), got {self.eta}")
        if self.gamma is None:
            object.__setattr__(self, "gamma", 1.0 + self.eta / 2.0)
        if not 1.0 < self.gamma < 1.0 + self.eta:
            raise ConfigError(f"gamma must lie in (1, 1+eta), got {self.gamma}")
        if self.unit_radius != 1.0:
            raise ConfigError("only the unit disk is supported")

    @property
    def v_factor(self) -> float:
        return 1.0 + self.eta


@dataclass(frozen=True)
class ConformalMap:
    kind: MapKind
    a: complex
    b: complex = 0j
    c: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "kind", MapKind(self.kind))
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if self.a == 0:
            raise ConfigError("linear coefficient must be non-zero")
        if self.kind is MapKind.SIMILARITY and self.c != 0:
            raise ConfigError("a similarity has no quadratic term")

    @classmethod
    def similarity(cls, a, b=0j) -> "ConformalMap":
        return cls(MapKind.SIMILARITY, a, b)

    @classmethod
    def quadratic(cls, a, b=0j, c=0j) -> "ConformalMap":
        return cls(MapKind.QUADRATIC, a, b, c)

    def __call__(self, z):
        return evaluate(self, z)

    def derivative(self, z):
        return self.a + 2.0 * self.c * z

    def derivative_bounds(self, radius: float) -> tuple[float, float]:
        """Exact min and max of ``|psi'|`` over the closed disk of ``radius``."""
        spread = 2.0 * abs(self.c) * radius
        return max(abs(self.a) - spread, 0.0), abs(self.a) + spread

    def enclosure(self, radius: float, center: complex = 0j) -> tuple[complex, float]:
        """Disk containing the image of the disk ``D(center, radius)``.

        Uses ``sup |psi'| <= |a + 2 c center| + 2 |c| radius``; exact for
        similarities.
        """
        sup = abs(self.a + 2.0 * self.c * center) + 2.0 * abs(self.c) * radius
        return evaluate(self, center), radius * sup

    def to_dict(self) -> dict:
        out = {"kind": self.kind.value, "a": [self.a.real, self.a.imag], "b": [self.b.real, self.b.imag]}
        if self.kind is MapKind.QUADRATIC:
            out["c"] = [self.c.real, self.c.imag]
        return out


def evaluate(psi: ConformalMap, z):
    """``a*z + b + c*z**2``; works on scalars and numpy arrays."""
    return psi.a * z + psi.b + psi.c * z * z


@dataclass(frozen=True)
class GenerationSpec:
    maps: tuple

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(self.maps))
        if not self.maps:
            raise ConfigError("a generation needs at least one map")
        a = np.array([m.a for m in self.maps], dtype=complex)
        b = np.array([m.b for m in self.maps], dtype=complex)
        c = np.array([m.c for m in self.maps], dtype=complex)
        # Per-map constants reused by every vectorized fold; the log table keeps
        # constant-derivative letters bit-identical wherever they appear.
        object.__setattr__(self, "_a", a)
        object.__setattr__(self, "_b", b)
        object.__setattr__(self, "_c", c)
        object.__setattr__(self, "_linear", c == 0)
        object.__setattr__(self, "_loga", np.array([math.log(abs(m.a)) for m in self.maps]))

    def __len__(self):
        return len(self.maps)

    @property
    def degree(self) -> int:
        return len(self.maps)

    def to_list(self) -> list:
        return [m.to_dict() for m in self.maps]


@dataclass(frozen=True)
class ValidationReport:
    degree_ok: bool
    bc_ok: bool
    osc_ok: bool
    ac_ok: bool
    deriv_min: float
    deriv_max: float
    bc_margin: float
    osc_margin: float
    ac_margin: float

    @property
    def ok(self) -> bool:
        return self.degree_ok and self.bc_ok and self.osc_ok and self.ac_ok

    def summary(self) -> str:
        flags = []
        for name in ("degree", "bc", "osc", "ac"):
            flags.append(f"{name.upper()}={'pass' if getattr(self, name + '_ok') else 'FAIL'}")
        return " ".join(flags)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__} | {"ok": self.ok}


def validate_generation(gen: GenerationSpec, domain: DomainSpec, degree_cap: int | None = None) -> ValidationReport:
    """Check bounded contraction, open set and annulus conditions.

    BC uses the exact derivative range of each map on the closed disk of
    radius ``1+eta``. OSC and AC use the image enclosures
    ``D(b, r(|a| + 2|c| r))`` with ``r = 1+eta``. Failures are reported, not
    raised.
    """
    eta = domain.eta
    r = domain.v_factor
    d = gen.degree
    degree_ok = d >= 2 and (degree_cap is None or d <= degree_cap)

    lows, highs = zip(*(m.derivative_bounds(r) for m in gen.maps))
    deriv_min, deriv_max = min(lows), max(highs)
    bc_margin = min(deriv_min - eta, (1.0 - eta) - deriv_max)

    encl = [m.enclosure(r) for m in gen.maps]
    gaps = [
        abs(encl[i][0] - encl[j][0]) - encl[i][1] - encl[j][1]
        for i in range(d)
        for j in range(i + 1, d)
    ]
    osc_margin = min(gaps) if gaps else math.inf
    ac_margin = min((1.0 - eta) - (abs(cen) + rad) for cen, rad in encl)
    return ValidationReport(
        degree_ok=degree_ok,
        bc_ok=bc_margin > 0,
        osc_ok=osc_margin > 0,
        ac_ok=ac_margin >= 0,
        deriv_min=deriv_min,
        deriv_max=deriv_max,
        bc_margin=bc_margin,
        osc_margin=osc_margin,
        ac_margin=ac_margin,
    )


@dataclass(frozen=True)
class SeedParams:
    """Boxes for seeded generations: degrees, ``|a|``, ``|c|`` and the radius
    of the circle on which the branch centres are placed."""

    degrees: tuple = (2, 2)
    a_modulus: tuple = (0.2, 0.3)
    c_modulus: tuple = (0.0, 0.0)
    center_radius: tuple = (0.45, 0.55)
    max_tries: int = 1000

    @classmethod
    def from_dict(cls, data: dict) -> "SeedParams":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown generator keys: {sorted(unknown)}")
        kw = {k: tuple(v) if isinstance(v, list) else v for k, v in data.items()}
        return cls(**kw)

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in self.__dict__.items()}


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """A non-autonomous conformal IFS.

    Generation ``n`` is ``prefix[n]`` when ``n < len(prefix)``; afterwards the
    tail rule applies: ``period`` repeated (periodic mode), a deterministic
    draw from ``(seed, n)`` (seeded mode) or nothing (explicit mode).
    Generations at or beyond ``horizon`` are never materialized.
    """

    domain: DomainSpec
    mode: Mode = Mode.PERIODIC
    prefix: tuple = ()
    period: tuple = ()
    seed: int = 0
    generator: SeedParams | None = None
    horizon: int = 64
    degree_cap: int = 8
    _cache: dict = field(default_factory=dict, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "period", tuple(self.period))
        if self.horizon < 1:
            raise ConfigError("horizon must be positive")
        if self.mode is Mode.PERIODIC and not self.period:
            raise ConfigError("periodic mode needs a non-empty period")
        if self.mode is Mode.SEEDED and self.generator is None:
            object.__setattr__(self, "generator", SeedParams())
        for i, gen in enumerate(self.prefix + self.period):
            rep = validate_generation(gen, self.domain, self.degree_cap)
            if not rep.ok:
                label = i if i < len(self.prefix) else f"period[{i - len(self.prefix)}]"
                raise ValidationFailure(label, rep)

    # -- generations -----------------------------------------------------
    def generation(self, n: int) -> GenerationSpec:
        if n < 0:
            raise InvalidWord(f"negative generation {n}")
        if n >= self.horizon:
            raise InsufficientDepth(f"generation {n} beyond horizon {self.horizon}")
        if n < len(self.prefix):
            return self.prefix[n]
        if self.mode is Mode.PERIODIC:
            return self.period[(n - len(self.prefix)) % len(self.period)]
        if self.mode is Mode.SEEDED:
            gen = self._cache.get(n)
            if gen is None:
                with self._lock:
                    gen = self._cache.get(n)
                    if gen is None:
                        gen = _draw_generation(self, n)
                        self._cache[n] = gen
            return gen
        raise InsufficientDepth(f"explicit system defines only {len(self.prefix)} generations")

    @property
    def depth_limit(self) -> int:
        """Number of generations that can be materialized."""
        if self.mode is Mode.EXPLICIT:
            return min(len(self.prefix), self.horizon)
        return self.horizon

    def degree(self, n: int) -> int:
        return self.generation(n).degree

    def degrees(self, start: int, count: int) -> list[int]:
        return [self.degree(start + j) for j in range(count)]

    def check_word(self, word: "Word") -> None:
        for j, letter in enumerate(word.branches):
            d = self.degree(word.offset + j)
            if not 0 <= letter < d:
                raise InvalidWord(f"branch {letter} invalid in generation {word.offset + j} (d={d})")

    def is_autonomous(self) -> bool:
        return self.mode is Mode.PERIODIC and not self.prefix and len(self.period) == 1

    def replace_prefix(self, prefix: Sequence[GenerationSpec]) -> "SystemSpec":
        return SystemSpec(
            domain=self.domain, mode=self.mode, prefix=tuple(prefix), period=self.period,
            seed=self.seed, generator=self.generator, horizon=self.horizon,
            degree_cap=self.degree_cap,
        )

    # -- serialization ---------------------------------------------------
    def to_dict(self) -> dict:
        out = {
            "domain": {"eta": self.domain.eta, "gamma": self.domain.gamma},
            "mode": self.mode.value,
            "prefix": [g.to_list() for g in self.prefix],
            "period": [g.to_list() for g in self.period],
            "seed": self.seed,
            "horizon": self.horizon,
            "degree_cap": self.degree_cap,
        }
        if self.mode is Mode.SEEDED:
            out["generator"] = self.generator.to_dict()
        return out


def _draw_generation(system: SystemSpec, n: int) -> GenerationSpec:
    p = system.generator
    for sub in range(p.max_tries):
        rng = np.random.default_rng([system.seed & 0xFFFFFFFF, n, sub])
        d = int(rng.integers(p.degrees[0], p.degrees[1] + 1))
        rho = rng.uniform(*p.center_radius)
        rot = rng.uniform(0, 2 * math.pi)
        maps = []
        for i in range(d):
            center = rho * complex(math.cos(rot + 2 * math.pi * i / d), math.sin(rot + 2 * math.pi * i / d))
            a = rng.uniform(*p.a_modulus) * complex(math.cos(t := rng.uniform(0, 2 * math.pi)), math.sin(t))
            cmod = rng.uniform(*p.c_modulus)
            if cmod > 0:
                c = cmod * complex(math.cos(t := rng.uniform(0, 2 * math.pi)), math.sin(t))
                maps.append(ConformalMap.quadratic(a, center, c))
            else:
                maps.append(ConformalMap.similarity(a, center))
        gen = GenerationSpec(tuple(maps))
        if validate_generation(gen, system.domain, system.degree_cap).ok:
            return gen
    raise ConfigError(f"seeded generation {n}: no valid draw after {p.max_tries} tries")


@dataclass(frozen=True)
class Word:
    """A cylinder address: ``branches`` picked in generations ``offset, offset+1, ...``."""

    offset: int = 0
    branches: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(int(x) for x in self.branches))
        if self.offset < 0:
            raise InvalidWord("offset must be non-negative")

    def __len__(self):
        return len(self.branches)

    def __add__(self, other) -> "Word":
        if isinstance(other, Word):
            if other.offset != self.offset + len(self):
                raise InvalidWord(f"cannot append a word at offset {other.offset} to one ending at {self.offset + len(self)}")
            other = other.branches
        return Word(self.offset, self.branches + tuple(other))

    def tail(self, start: int) -> "Word":
        return Word(self.offset + start, self.branches[start:])

    def prefix(self, n: int) -> "Word":
        return Word(self.offset, self.branches[:n])

    def label(self) -> str:
        return "-".join(str(x) for x in self.branches)

    @classmethod
    def parse(cls, text: str, offset: int = 0) -> "Word":
        text = text.strip()
        return cls(offset, tuple(int(x) for x in text.split("-")) if text else ())


def as_word(word, offset: int = 0) -> Word:
    if isinstance(word, Word):
        return word
    return Word(offset, tuple(word))


@dataclass(frozen=True)
class ComposedMapInfo:
    word: Word
    center: complex
    deriv0: complex
    radius_bound: float


def compose_word(system: SystemSpec, word) -> ComposedMapInfo:
    """Centre ``psi_X(0)``, derivative ``psi_X'(0)`` and an enclosing radius
    of ``psi_X(closed unit disk)``."""
    word = as_word(word)
    system.check_word(word)
    z, deriv, center, radius = 0j, 1 + 0j, 0j, 1.0
    for j in range(len(word) - 1, -1, -1):
        psi = system.generation(word.offset + j).maps[word.branches[j]]
        deriv *= psi.derivative(z)
        z = evaluate(psi, z)
        center, radius = psi.enclosure(radius, center)
    return ComposedMapInfo(word, z, deriv, radius)


# -- vectorized helpers ------------------------------------------------------

def all_words(degrees: Sequence[int]) -> np.ndarray:
    """Digits of every word over the given per-position degrees, in
    lexicographic order; shape ``(prod(degrees), len(degrees))``."""
    degrees = list(degrees)
    if not degrees:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices(degrees).reshape(len(degrees), -1)
    return np.ascontiguousarray(grids.T, dtype=np.int64)


def word_index(branches: Sequence[int], degrees: Sequence[int]) -> int:
    idx = 0
    for letter, d in zip(branches, degrees):
        idx = idx * d + letter
    return idx


def fold_words(system: SystemSpec, offset: int, digits: np.ndarray, z0=0j):
    """Evaluate many cylinder maps at once.

    Returns ``(psi_X(z0), log|psi_X'(z0)|, radius)`` arrays, where ``radius``
    encloses ``psi_X`` of the closed unit disk (only meaningful for
    ``z0 == 0``).
    """
    count, n = digits.shape
    z = np.full(count, z0, dtype=complex)
    center = np.zeros(count, dtype=complex)
    radius = np.ones(count)
    logd = np.zeros(count)
    for j in range(n - 1, -1, -1):
        gen = system.generation(offset + j)
        dig = digits[:, j]
        a, b, c = gen._a[dig], gen._b[dig], gen._c[dig]
        lin = gen._linear[dig]
        with np.errstate(divide="ignore"):
            logd += np.where(lin, gen._loga[dig], np.log(np.abs(a + 2.0 * c * z)))
        z = a * z + b + c * z * z
        sup = np.abs(a + 2.0 * c * center) + 2.0 * np.abs(c) * radius
        center = a * center + b + c * center * center
        radius = radius * sup
    return z, logd, radius


def limit_set_sample(system: SystemSpec, offset: int, depth: int) -> np.ndarray:
    """Centres ``psi_Y(0)`` of the depth-``depth`` cylinders at ``offset``."""
    digits = all_words(system.degrees(offset, depth))
    z, _, _ = fold_words(system, offset, digits)
    return z


def _diameter(points: np.ndarray) -> float:
    if len(points) < 2:
        return 0.0
    diff = points[:, None] - points[None, :]
    return float(np.abs(diff).max())


class DiameterMethod(str, Enum):
    DERIV_PROXY = "deriv"
    SAMPLE_IMAGE = "sample"


def cylinder_diameter(system: SystemSpec, word, method="deriv", sample_depth: int = 4) -> float:
    """Size of the cylinder ``word``.

    ``"deriv"`` returns ``|psi_X'(0)|``; ``"sample"`` returns the diameter of
    ``psi_X`` applied to the depth-``sample_depth`` centres of the shifted
    limit set (the empty word uses the offset's own sample).
    """
    word = as_word(word)
    method = DiameterMethod(method)
    info = compose_word(system, word)
    if method is DiameterMethod.DERIV_PROXY:
        return abs(info.deriv0)
    pts = limit_set_sample(system, word.offset + len(word), sample_depth)
    for j in range(len(word) - 1, -1, -1):
        pts = evaluate(system.generation(word.offset + j).maps[word.branches[j]], pts)
    return _diameter(pts)


def distortion_ratio(psi: ConformalMap, region_radius: float, samples: int = 512) -> float:
    """Largest ``|psi'(x)| / |psi'(y)|`` over samples of the disk ``|z| <= region_radius``.

    ``|psi'|`` is the modulus of an affine function, so its extremes sit on
    the boundary circle; the samples are the centre plus ``samples`` evenly
    spaced boundary points.
    """
    if not 0 <= region_radius < 1:
        raise ConfigError("region_radius must lie in [0, 1)")
    theta = 2 * np.pi * np.arange(samples) / samples
    pts = np.concatenate([[0j], region_radius * np.exp(1j * theta)])
    mods = np.abs(psi.derivative(pts))
    return float(mods.max() / mods.min())


def system_distance(sys_a: SystemSpec, sys_b: SystemSpec, horizon: int) -> float:
    """``sup_n max_i sup_{|z| <= gamma} |psi - psi~|`` over generations ``< horizon``.

    The difference of two maps is a polynomial, so its sup over the disk is
    taken on the circle ``|z| = gamma`` (1024 samples).
    """
    r = sys_a.domain.gamma
    z = r * np.exp(2j * np.pi * np.arange(CIRCLE_SAMPLES) / CIRCLE_SAMPLES)
    rv = sys_a.domain.v_factor
    best = 0.0
    for n in range(horizon):
        ga, gb = sys_a.generation(n), sys_b.generation(n)
        if ga.degree != gb.degree:
            raise IncompatibleSystems(f"generation {n}: degrees {ga.degree} and {gb.degree}")
        encl_a = [m.enclosure(rv) for m in ga.maps]
        encl_b = [m.enclosure(rv) for m in gb.maps]
        for i, (ca, ra) in enumerate(encl_a):
            for j, (cb, rb) in enumerate(encl_b):
                meets = abs(ca - cb) < ra + rb
                if meets != (i == j):
                    raise IncompatibleSystems(f"generation {n}: branches {i} and {j} break compatibility")
        for ma, mb in zip(ga.maps, gb.maps):
            da, db, dc = ma.a - mb.a, ma.b - mb.b, ma.c - mb.c
            if da == db == dc == 0:
                continue
            best = max(best, float(np.abs(da * z + db + dc * z * z).max()))
    return best


# -- JSON ---------------------------------------------------------------------

_TOP_KEYS = {"domain", "mode", "prefix", "period", "seed", "horizon", "degree_cap", "generator"}
_MAP_KEYS = {"kind", "a", "b", "c"}


def _complex(value, what) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value):
        return complex(value[0], value[1])
    raise ConfigError(f"{what}: expected [re, im], got {value!r}")


def map_from_dict(data: dict) -> ConformalMap:
    if not isinstance(data, dict):
        raise ConfigError(f"map must be an object, got {data!r}")
    unknown = set(data) - _MAP_KEYS
    if unknown:
        raise ConfigError(f"unknown map keys: {sorted(unknown)}")
    try:
        kind = MapKind(data["kind"])
        a = _complex(data["a"], "a")
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad map {data!r}: {exc}") from None
    b = _complex(data.get("b", [0.0, 0.0]), "b")
    c = _complex(data.get("c", [0.0, 0.0]), "c")
    return ConformalMap(kind, a, b, c)


def _generations(data, what) -> tuple:
    if not isinstance(data, list):
        raise ConfigError(f"{what} must be an array of generations")
    return tuple(GenerationSpec(tuple(map_from_dict(m) for m in gen)) for gen in data)


def system_from_dict(data: dict, validate: bool = True) -> SystemSpec:
    """Build a system from the JSON document layout. Unknown keys are rejected."""
    if not isinstance(data, dict):
        raise ConfigError("system document must be a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown keys: {sorted(unknown)}")
    dom = data.get("domain")
    if not isinstance(dom, dict) or "eta" not in dom or set(dom) - {"eta", "gamma"}:
        raise ConfigError("domain must be an object with 'eta' and optional 'gamma'")
    domain = DomainSpec(float(dom["eta"]), None if dom.get("gamma") is None else float(dom["gamma"]))
    try:
        mode = Mode(data.get("mode", "periodic"))
    except ValueError:
        raise ConfigError(f"unknown mode {data.get('mode')!r}") from None
    generator = SeedParams.from_dict(data["generator"]) if "generator" in data else None
    kwargs = dict(
        domain=domain,
        mode=mode,
        prefix=_generations(data.get("prefix", []), "prefix"),
        period=_generations(data.get("period", []), "period"),
        seed=int(data.get("seed", 0)),
        generator=generator,
        horizon=int(data.get("horizon", 64)),
        degree_cap=int(data.get("degree_cap", 8)),
    )
    if validate:
        return SystemSpec(**kwargs)
    return _unvalidated(**kwargs)


class _UnvalidatedSystem(SystemSpec):
    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.mode is Mode.SEEDED and self.generator is None:
            object.__setattr__(self, "generator", SeedParams())


def _unvalidated(**kwargs) -> SystemSpec:
    return _UnvalidatedSystem(**kwargs)


def load_system(source, validate: bool = True) -> SystemSpec:
    """Load a system from a path, a JSON string or an already-parsed dict."""
    if isinstance(source, dict):
        return system_from_dict(source, validate)
    path = Path(source)
    if not path.exists() and not str(source).lstrip().startswith("{"):
        raise ConfigError(f"no such system document: {source}")
    try:
        text = path.read_text() if path.exists() else str(source)
        data = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read system document: {exc}") from None
    return system_from_dict(data, validate)


def dump_system(system: SystemSpec) -> str:
    return json.dumps(system.to_dict(), indent=2)


def autonomous(domain: DomainSpec, maps: Iterable[ConformalMap], horizon: int = 64) -> SystemSpec:
    return SystemSpec(domain=domain, mode=Mode.PERIODIC, period=(GenerationSpec(tuple(maps)),), horizon=horizon)


def validation_reports(system: SystemSpec, horizon: int | None = None) -> list[tuple[int, ValidationReport]]:
    """Report for each generation below ``horizon`` (default: all materializable)."""
    limit = system.depth_limit if horizon is None else min(horizon, system.depth_limit)
    return [(n, validate_generation(system.generation(n), system.domain, system.degree_cap)) for n in range(limit)]
