"""Perturbations of a system and continuity experiments."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from .conformal import (
    ConformalMap,
    GenerationSpec,
    MapKind,
    SystemSpec,
    system_distance,
    validate_generation,
)
from .errors import ConfigError, DomainError, PerturbationInfeasible
from .harmonic.estimate import WalkerConfig, estimate_direct
from .rng import derive_seed
from .symbolic import DerivProxyDiameter, EstimatedMeasure, SampleImageDiameter, dcal_distance
from .jsonutil import json_safe
from .thermo import dimension_report


def alpha_exponent(eta: float) -> float:
    """``log(1 - eta) / log(eta (1 - eta))``: Holder exponent of the diameter
    functionals in the system distance."""
    if not 0.0 < eta < 1.0:
        raise DomainError(f"eta must lie in (0, 1), got {eta}")
    return math.log(1.0 - eta) / math.log(eta * (1.0 - eta))


class PerturbMode(str, Enum):
    TRANSLATE_B = "translate_b"
    SCALE_A = "scale_a"
    JIGGLE_C = "jiggle_c"


@dataclass(frozen=True)
class PerturbationPlan:
    """``translate_b``: ``b += eps u``; ``scale_a``: ``a *= 1 + eps``;
    ``jiggle_c``: ``c += eps * c_scale * u``. Unit directions ``u`` are drawn
    per (generation, branch) from ``seed``.

    Maps whose perturbed generation fails validation or compatibility get
    their own ``eps`` multiplied by ``shrink``, at most ``max_shrinks`` times.
    Only generations below ``horizon`` (default: the system's) are touched.
    """

    epsilon: float
    mode: PerturbMode = PerturbMode.TRANSLATE_B
    seed: int = 0
    horizon: int | None = None
    c_scale: float = 0.1
    shrink: float = 0.5
    max_shrinks: int = 10

    def __post_init__(self):
        object.__setattr__(self, "mode", PerturbMode(self.mode))

    def direction(self, generation: int, branch: int) -> complex:
        rng = np.random.default_rng([self.seed & 0xFFFFFFFF, generation, branch])
        return complex(np.exp(2j * np.pi * rng.random()))

    def bound(self, gamma: float) -> float:
        """A priori bound on the system distance for this plan."""
        e = abs(self.epsilon)
        if self.mode is PerturbMode.TRANSLATE_B:
            return e
        if self.mode is PerturbMode.SCALE_A:
            return e * gamma
        return e * self.c_scale * gamma**2

    def to_dict(self) -> dict:
        out = asdict(self)
        out["mode"] = self.mode.value
        return out


def _perturb_map(psi: ConformalMap, eps: float, plan: PerturbationPlan, n: int, i: int) -> ConformalMap:
    if eps == 0:
        return psi
    if plan.mode is PerturbMode.TRANSLATE_B:
        return ConformalMap(psi.kind, psi.a, psi.b + eps * plan.direction(n, i), psi.c)
    if plan.mode is PerturbMode.SCALE_A:
        return ConformalMap(psi.kind, psi.a * (1 + eps), psi.b, psi.c)
    return ConformalMap(MapKind.QUADRATIC, psi.a, psi.b, psi.c + eps * plan.c_scale * plan.direction(n, i))


def _culprits(base: GenerationSpec, gen: GenerationSpec, system: SystemSpec) -> set[int]:
    """Indices of maps implicated in a validation or compatibility failure."""
    dom = system.domain
    r, eta = dom.v_factor, dom.eta
    bad = set()
    encl = [m.enclosure(r) for m in gen.maps]
    base_encl = [m.enclosure(r) for m in base.maps]
    for i, m in enumerate(gen.maps):
        lo, hi = m.derivative_bounds(r)
        if not (lo > eta and hi < 1 - eta):
            bad.add(i)
        c, rad = encl[i]
        if abs(c) + rad > 1 - eta:
            bad.add(i)
        bc, br = base_encl[i]
        if abs(c - bc) >= rad + br:
            bad.add(i)
    d = len(encl)
    for i in range(d):
        for j in range(d):
            if i == j:
                continue
            gap_self = abs(encl[i][0] - encl[j][0]) - encl[i][1] - encl[j][1]
            gap_cross = abs(encl[i][0] - base_encl[j][0]) - encl[i][1] - base_encl[j][1]
            if gap_self <= 0 or gap_cross <= 0:
                bad.update((i, j))
    return bad


@dataclass
class PerturbationResult:
    system: SystemSpec
    epsilons: list  # effective eps per generation and branch
    shrinks: int


def perturb_system_detailed(base: SystemSpec, plan: PerturbationPlan) -> PerturbationResult:
    horizon = min(plan.horizon or base.horizon, base.depth_limit)
    prefix, effective, shrinks = [], [], 0
    for n in range(horizon):
        gen = base.generation(n)
        eps = [plan.epsilon] * gen.degree
        count = [0] * gen.degree
        while True:
            maps, bad = [], set()
            for i, (m, e) in enumerate(zip(gen.maps, eps)):
                try:
                    maps.append(_perturb_map(m, e, plan, n, i))
                except ConfigError:  # e.g. a vanishing linear coefficient
                    bad.add(i)
                    maps.append(m)
            new = GenerationSpec(tuple(maps))
            rep = validate_generation(new, base.domain, base.degree_cap)
            bad |= _culprits(gen, new, base)
            if rep.ok and not bad:
                break
            if not bad:  # a generation-wide failure; shrink everything
                bad = set(range(gen.degree))
            for i in bad:
                count[i] += 1
                if count[i] > plan.max_shrinks:
                    raise PerturbationInfeasible(
                        f"generation {n}, branch {i}: still invalid after {plan.max_shrinks} shrinks")
                eps[i] *= plan.shrink
                shrinks += 1
        prefix.append(new)
        effective.append(eps)
    return PerturbationResult(base.replace_prefix(prefix), effective, shrinks)


def perturb_system(base: SystemSpec, plan: PerturbationPlan) -> SystemSpec:
    """The base system with every generation below the plan horizon perturbed."""
    return perturb_system_detailed(base, plan).system


# -- continuity experiment ------------------------------------------------------------

@dataclass
class ContinuityRow:
    epsilon: float
    d_hat: float
    dcal_diam: float
    dcal_deriv: float
    dcal_omega: float
    dcal_omega_floor: float
    hd: float
    hd_se: float
    pd: float
    pd_se: float
    hd_diff: float
    hd_diff_se: float
    shrinks: int = 0


COLUMNS = [f for f in ContinuityRow.__dataclass_fields__]


@dataclass
class ContinuityTable:
    rows: list
    base_hd: float
    base_hd_se: float
    base_pd: float
    base_pd_se: float
    alpha: float
    c_hat: float
    bound_ok: list
    slope: float
    params: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS + ["dcal_bound_ok"])
        for r, ok in zip(self.rows, self.bound_ok):
            vals = [getattr(r, c) for c in COLUMNS]
            w.writerow([v if isinstance(v, int) else repr(float(v)) for v in vals] + [int(ok)])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "base_hd": self.base_hd, "base_hd_se": self.base_hd_se,
            "base_pd": self.base_pd, "base_pd_se": self.base_pd_se,
            "alpha": self.alpha, "c_hat": self.c_hat, "loglog_slope": self.slope,
            "dcal_bound_ok": all(self.bound_ok), **self.params,
        }

    def to_json(self) -> str:
        return json.dumps(json_safe(self.summary()), indent=2, sort_keys=True, default=str)

    def harmonic_monotone(self, k: float = 3.0) -> list[bool]:
        """Each ``|hd_eps - hd_0|`` (rows sorted by decreasing eps) is at most
        the previous one plus ``k`` combined standard errors."""
        order = sorted(range(len(self.rows)), key=lambda i: -self.rows[i].epsilon)
        out = [True]
        for prev, cur in zip(order, order[1:]):
            p, c = self.rows[prev], self.rows[cur]
            out.append(c.hd_diff <= p.hd_diff + k * math.hypot(c.hd_diff_se, p.hd_diff_se))
        return out


def _omega_floor(a: EstimatedMeasure, b: EstimatedMeasure, depth: int) -> float:
    floor = 0.0
    for k in range(depth + 1):
        s2 = []
        for est in (a, b):
            parent = est.counts(k)
            child = est.counts(k + 1).reshape(len(parent), -1)
            with np.errstate(divide="ignore", invalid="ignore"):
                p = child / parent[:, None]
                s2.append(np.where(child > 0, (1 - p) / child, np.inf))
        floor = max(floor, 3.0 * float(np.sqrt(s2[0] + s2[1]).max()))
    return floor


def continuity_experiment(base: SystemSpec, epsilons, mode=PerturbMode.TRANSLATE_B, cfg: WalkerConfig | None = None,
                          seed: int = 0, assign_depth: int = 8, approx_depth: int | None = None,
                          omega_depth: int = 2, diam_horizon: int = 5, sample_depth: int = 4,
                          window: int = 3, threads: int = 1, backend: str | None = None) -> ContinuityTable:
    """One row per ``eps``: system distance, diameter and harmonic-measure
    distances, and dimension estimates of the perturbed harmonic measure.

    Each row draws walkers from its own stream ``derive_seed(seed, "row", i)``;
    the base system uses ``derive_seed(seed, "base")``. ``dcal_diam`` compares
    sampled-image diameters (exact, no Monte Carlo); ``dcal_deriv`` compares
    derivative-at-centre diameters. The constant ``c_hat`` is fitted from the
    largest-``eps`` row and ``bound_ok`` checks ``dcal_diam <= c_hat d^alpha``
    on every row.
    """
    cfg = cfg or WalkerConfig()
    approx_depth = approx_depth if approx_depth is not None else assign_depth + 4
    horizon = approx_depth + 1
    plan_seed = derive_seed(seed, "plan")

    def harmonic(system, stream):
        est = estimate_direct(system, 0, approx_depth, assign_depth, cfg.with_(seed=stream), threads, backend)
        mu = EstimatedMeasure(est)
        rep = dimension_report(mu, DerivProxyDiameter(system), range(1, assign_depth + 1), window)
        return mu, rep

    base_mu, base_rep = harmonic(base, derive_seed(seed, "base"))
    base_diam = SampleImageDiameter(base, sample_depth=sample_depth)
    base_deriv = DerivProxyDiameter(base)
    rows = []
    for i, eps in enumerate(epsilons):
        plan = PerturbationPlan(float(eps), mode, plan_seed, horizon)
        res = perturb_system_detailed(base, plan)
        pert = res.system
        d_hat = system_distance(base, pert, horizon)
        dcal_diam = dcal_distance(base_diam, SampleImageDiameter(pert, sample_depth=sample_depth), diam_horizon)
        dcal_deriv = dcal_distance(base_deriv, DerivProxyDiameter(pert), diam_horizon)
        mu, rep = harmonic(pert, derive_seed(seed, "row", i))
        dcal_omega = dcal_distance(base_mu, mu, omega_depth)
        floor = _omega_floor(base_mu, mu, omega_depth)
        diff_se = math.hypot(rep.hd_se, base_rep.hd_se)
        rows.append(ContinuityRow(float(eps), d_hat, dcal_diam, dcal_deriv, dcal_omega, floor,
                                  rep.hd_estimate, rep.hd_se, rep.pd_estimate, rep.pd_se,
                                  abs(rep.hd_estimate - base_rep.hd_estimate), diff_se, res.shrinks))
    alpha = alpha_exponent(base.domain.eta)
    c_hat, bound_ok, slope = _holder_fit(rows, alpha)
    params = {"mode": PerturbMode(mode).value, "seed": seed, "assign_depth": assign_depth,
              "approx_depth": approx_depth, "omega_depth": omega_depth, "diam_horizon": diam_horizon,
              "sample_depth": sample_depth, "window": window, "walker_config": asdict(cfg)}
    return ContinuityTable(rows, base_rep.hd_estimate, base_rep.hd_se, base_rep.pd_estimate, base_rep.pd_se,
                           alpha, c_hat, bound_ok, slope, params)


def _holder_fit(rows, alpha: float) -> tuple[float, list, float]:
    live = [r for r in rows if r.d_hat > 0]
    if not live:
        return 0.0, [r.dcal_diam == 0 for r in rows], math.nan
    top = max(live, key=lambda r: r.epsilon)
    c_hat = top.dcal_diam / top.d_hat**alpha
    ok = [r.dcal_diam <= c_hat * r.d_hat**alpha * (1 + 1e-12) + 1e-15 for r in rows]
    pos = [r for r in live if r.dcal_diam > 0]
    slope = math.nan
    if len(pos) >= 2:
        slope = float(np.polyfit(np.log([r.d_hat for r in pos]), np.log([r.dcal_diam for r in pos]), 1)[0])
    return c_hat, ok, slope
