"""Nonatomic congestion models with piecewise-linear resource costs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InfeasibleDistribution, ValidationError
from .set_systems import GroundSet, SetSystem

BIG_M = 1e6
FEAS_TOL = 1e-9


@dataclass(frozen=True)
class CostFunction:
    """Nondecreasing, nonnegative piecewise-linear cost.

    ``breakpoints`` are ``(load, value)`` pairs starting at load 0; the
    function interpolates linearly between them and continues with
    ``final_slope`` after the last one.
    """

    breakpoints: tuple[tuple[float, float], ...]
    final_slope: float = 0.0

    def __post_init__(self):
        bps = tuple((float(t), float(v)) for t, v in self.breakpoints)
        slope = float(self.final_slope)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "final_slope", slope)
        if not bps:
            raise ValidationError("cost function needs at least one breakpoint")
        for k, (t, v) in enumerate(bps):
            if not (math.isfinite(t) and math.isfinite(v)):
                raise ValidationError(f"breakpoint {k} is not finite")
            if v < 0:
                raise ValidationError(f"breakpoint {k}: cost values must be non-negative")
        if bps[0][0] != 0.0:
            raise ValidationError("first breakpoint must sit at load 0")
        for k in range(1, len(bps)):
            if bps[k][0] <= bps[k - 1][0]:
                raise ValidationError(f"breakpoint {k}: loads must be strictly increasing")
            if bps[k][1] < bps[k - 1][1]:
                raise ValidationError(
                    f"breakpoint {k}: cost values must be nondecreasing "
                    "(costs are non-negative, continuous and nondecreasing)"
                )
        if not math.isfinite(slope) or slope < 0:
            raise ValidationError(
                "final_slope must be finite and >= 0 (costs are nondecreasing)"
            )

    @classmethod
    def constant(cls, value: float) -> CostFunction:
        return cls(((0.0, value),), 0.0)

    @classmethod
    def affine(cls, slope: float, offset: float = 0.0) -> CostFunction:
        return cls(((0.0, offset),), slope)

    @classmethod
    def hinge(cls, threshold: float, slope: float = 1.0) -> CostFunction:
        """Zero up to ``threshold``, then rising with ``slope``."""
        return cls(((0.0, 0.0), (threshold, 0.0)), slope)

    @property
    def loads(self) -> np.ndarray:
        return np.array([t for t, _ in self.breakpoints])

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.breakpoints])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        ts, vs = self.loads, self.values
        out = np.interp(t, ts, vs)
        beyond = t > ts[-1]
        out = np.where(beyond, vs[-1] + self.final_slope * (t - ts[-1]), out)
        return out if out.ndim else float(out)

    def integral(self, t):
        """Closed-form ``integral_0^t c(s) ds`` for ``t >= 0``."""
        arr = np.asarray(t, dtype=float)
        out = _CostTable([self]).integrals(arr[..., None])[..., 0]
        return out if out.ndim else float(out)

    def scaled(self, factor: float) -> CostFunction:
        return CostFunction(tuple((t, v * factor) for t, v in self.breakpoints), self.final_slope * factor)

    def shifted_down(self, delta: float) -> CostFunction:
        """``max(c(t) - delta, 0)`` as a new piecewise-linear cost."""
        if delta <= 0:
            return self
        bps = list(self.breakpoints)
        out: list[tuple[float, float]] = []
        # Find where c crosses delta; before that the shifted cost is 0.
        if bps[0][1] >= delta:
            return CostFunction(tuple((t, v - delta) for t, v in bps), self.final_slope)
        for k, (t, v) in enumerate(bps):
            if v >= delta:
                tp, vp = bps[k - 1]
                t0 = tp + (delta - vp) * (t - tp) / (v - vp)
                out.append((0.0, 0.0))
                out.append((t0, 0.0))
                out.extend((tt, vv - delta) for tt, vv in bps[k:] if tt > t0)
                return CostFunction(tuple(out), self.final_slope)
        tl, vl = bps[-1]
        if self.final_slope == 0:
            return CostFunction.constant(0.0)
        t0 = tl + (delta - vl) / self.final_slope
        return CostFunction(((0.0, 0.0), (t0, 0.0)), self.final_slope)


class _CostTable:
    """Vectorized evaluation of many piecewise-linear costs.

    Each cost is written as ``v0 + sum_k s_k * clip(t - t_k, 0, w_k)``; the
    last segment has infinite width and slope ``final_slope``.
    """

    def __init__(self, costs: Sequence[CostFunction]):
        width = max(len(c.breakpoints) for c in costs)
        m = len(costs)
        self.v0 = np.array([c.breakpoints[0][1] for c in costs])
        self.starts = np.zeros((m, width))
        self.widths = np.full((m, width), np.inf)
        self.slopes = np.zeros((m, width))
        kinks = []
        for r, c in enumerate(costs):
            bps = c.breakpoints
            n = len(bps)
            for k in range(n - 1):
                (t0, v0), (t1, v1) = bps[k], bps[k + 1]
                self.starts[r, k] = t0
                self.widths[r, k] = t1 - t0
                self.slopes[r, k] = (v1 - v0) / (t1 - t0)
            self.starts[r, n - 1] = bps[-1][0]
            self.slopes[r, n - 1] = c.final_slope
            # Padding segments start at +inf so they never activate.
            self.starts[r, n:] = np.inf
            self.widths[r, n:] = 0.0
            kinks.append([t for t, _ in bps[1:]])
        self.kinks = kinks
        self.finite_width = np.where(np.isfinite(self.widths), self.widths, 0.0)

    def values(self, t: np.ndarray) -> np.ndarray:
        """Costs at loads ``t``; trailing axis indexes resources."""
        t = np.asarray(t, dtype=float)
        u = np.clip(t[..., None] - self.starts, 0.0, self.widths)
        return self.v0 + np.sum(self.slopes * u, axis=-1)

    def integrals(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        rel = t[..., None] - self.starts
        u = np.clip(rel, 0.0, self.widths)
        tail = np.maximum(rel - self.widths, 0.0)
        tail = np.where(np.isfinite(self.widths), tail, 0.0)
        seg = self.slopes * (0.5 * u * u + self.finite_width * tail)
        return self.v0 * np.maximum(t, 0.0) + np.sum(seg, axis=-1)


@dataclass(frozen=True)
class Population:
    id: str
    demand: float
    strategies: SetSystem

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ValidationError("population id must be a nonempty string")
        d = float(self.demand)
        if not math.isfinite(d) or d < 0:
            raise ValidationError(f"population {self.id!r}: demand must be finite and >= 0")
        object.__setattr__(self, "demand", d)


@dataclass(frozen=True)
class CongestionModel:
    """Resources, populations and one cost function per resource.

    ``costs`` is aligned with ``ground.resources``; a mapping keyed by
    resource id is also accepted at construction.
    """

    ground: GroundSet
    populations: tuple[Population, ...]
    costs: tuple[CostFunction, ...]

    def __post_init__(self):
        pops = tuple(self.populations)
        costs = self.costs
        if isinstance(costs, Mapping):
            missing = [r for r in self.ground if r not in costs]
            if missing:
                raise ValidationError(f"resource {missing[0]!r} has no cost function")
            extra = [r for r in costs if r not in self.ground._index]
            if extra:
                raise ValidationError(f"cost given for unknown resource {extra[0]!r}")
            costs = tuple(costs[r] for r in self.ground)
        costs = tuple(costs)
        if len(costs) != len(self.ground):
            raise ValidationError("need exactly one cost function per resource")
        if not pops:
            raise ValidationError("model needs at least one population")
        ids = [p.id for p in pops]
        if len(set(ids)) != len(ids):
            raise ValidationError("population ids must be unique")
        for p in pops:
            if p.strategies.ground != self.ground:
                raise ValidationError(f"population {p.id!r} uses a different ground set")
        object.__setattr__(self, "populations", pops)
        object.__setattr__(self, "costs", costs)

    @cached_property
    def cost_table(self) -> _CostTable:
        return _CostTable(self.costs)

    def population(self, pid: str) -> Population:
        for p in self.populations:
            if p.id == pid:
                return p
        raise KeyError(pid)

    def cost_of(self, resource: str) -> CostFunction:
        return self.costs[self.ground.index(resource)]

    @property
    def demands(self) -> np.ndarray:
        return np.array([p.demand for p in self.populations])

    def resource_costs(self, loads) -> np.ndarray:
        x = loads.load if isinstance(loads, LoadVector) else np.asarray(loads, dtype=float)
        return self.cost_table.values(x)

    def replace(self, *, costs=None, demands: Mapping[str, float] | None = None,
                populations=None) -> CongestionModel:
        pops = self.populations if populations is None else populations
        if demands:
            pops = tuple(
                Population(p.id, demands.get(p.id, p.demand), p.strategies) for p in pops
            )
        return CongestionModel(self.ground, pops, self.costs if costs is None else costs)


@dataclass(frozen=True)
class StrategyDistribution:
    """Mass per strategy, one array per population aligned with its strategies."""

    mass: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "mass", tuple(np.asarray(a, dtype=float) for a in self.mass))

    @classmethod
    def pure(cls, model: CongestionModel, choice: Sequence[int]) -> StrategyDistribution:
        """All of each population's demand on strategy ``choice[i]``."""
        out = []
        for p, k in zip(model.populations, choice):
            a = np.zeros(len(p.strategies))
            a[k] = p.demand
            out.append(a)
        return cls(tuple(out))

    @classmethod
    def uniform(cls, model: CongestionModel) -> StrategyDistribution:
        return cls(tuple(np.full(len(p.strategies), p.demand / len(p.strategies))
                         for p in model.populations))


@dataclass(frozen=True)
class LoadVector:
    load: np.ndarray
    per_population: np.ndarray | None = field(default=None)


def check_feasible(m: CongestionModel, x: StrategyDistribution, tol: float = FEAS_TOL) -> None:
    if len(x.mass) != len(m.populations):
        raise InfeasibleDistribution("distribution has the wrong number of populations")
    for p, a in zip(m.populations, x.mass):
        if a.shape != (len(p.strategies),):
            raise InfeasibleDistribution(f"population {p.id!r}: expected {len(p.strategies)} masses")
        if np.any(a < -tol) or not np.all(np.isfinite(a)):
            raise InfeasibleDistribution(f"population {p.id!r}: negative or non-finite mass")
        if abs(a.sum() - p.demand) > tol * max(1.0, p.demand):
            raise InfeasibleDistribution(
                f"population {p.id!r}: masses sum to {a.sum()!r}, demand is {p.demand!r}"
            )


def incidence(s: SetSystem) -> np.ndarray:
    """0/1 matrix with one row per member and one column per resource."""
    A = np.zeros((len(s), len(s.ground)))
    for r, members in enumerate(s.sets):
        A[r, list(members)] = 1.0
    return A


def project_loads(m: CongestionModel, x: StrategyDistribution) -> LoadVector:
    check_feasible(m, x)
    per_pop = np.vstack([incidence(p.strategies).T @ a for p, a in zip(m.populations, x.mass)])
    return LoadVector(per_pop.sum(axis=0), per_pop)


def _subset_indices(m: CongestionModel, s) -> list[int]:
    return [k if isinstance(k, (int, np.integer)) else m.ground.index(k) for k in s]


def private_cost(m: CongestionModel, loads: LoadVector, s: Iterable) -> float:
    """Sum of resource costs over ``s`` (resource ids or indices) at ``loads``."""
    idx = _subset_indices(m, s)
    return float(m.resource_costs(loads)[idx].sum()) if idx else 0.0


def beckmann_potential(m: CongestionModel, loads: LoadVector | np.ndarray) -> float:
    """Sum over resources of the integral of the cost up to the resource load."""
    x = loads.load if isinstance(loads, LoadVector) else np.asarray(loads, dtype=float)
    return float(m.cost_table.integrals(x).sum())


def pointwise_leq(c1: CostFunction, c2: CostFunction) -> bool:
    """Exact test of ``c1(t) <= c2(t)`` for every ``t >= 0``.

    Both functions are linear between consecutive points of the merged
    breakpoint grid and beyond its last point, so comparing values on the
    grid and the final slopes decides the question.
    """
    grid = np.union1d(c1.loads, c2.loads)
    if np.any(np.asarray(c1(grid)) > np.asarray(c2(grid))):
        return False
    return c1.final_slope <= c2.final_slope
