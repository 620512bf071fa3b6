"""Wardrop equilibria by minimizing the Beckmann potential.

The feasible region is a product of scaled simplices, one per population,
whose vertices are explicit strategies.  :func:`solve` runs Frank-Wolfe
with away steps over this product and an exact line search along each
direction: the directional derivative ``<c(x + t d), d>`` is piecewise
linear and nondecreasing in ``t``, so its root is located by scanning the
cost breakpoints crossed by the segment and interpolating.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotConverged
from .games import (
    CongestionModel,
    LoadVector,
    StrategyDistribution,
    check_feasible,
    incidence,
    project_loads,
)
from .set_systems import is_matroid_base_family, minimal_clutter

MASS_REL_TOL = 1e-7


@dataclass(frozen=True)
class SolverConfig:
    gap_tolerance: float = 1e-8
    max_iterations: int = 200_000
    line_search_tolerance: float = 1e-12
    away_steps: bool = True
    seed: int = 0

    def __post_init__(self):
        if not (self.gap_tolerance > 0 and self.line_search_tolerance > 0):
            raise ValueError("solver tolerances must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass
class WardropResult:
    model: CongestionModel
    distribution: StrategyDistribution
    loads: LoadVector
    resource_costs: np.ndarray
    population_costs: np.ndarray
    gap: float
    potential: float
    iterations: int
    converged: bool
    config: SolverConfig = field(default_factory=SolverConfig)

    @property
    def total_cost(self) -> float:
        """Social cost ``sum_i d_i * pi_i``."""
        return float(self.model.demands @ self.population_costs)

    def used_strategies(self):
        """``(population id, strategy index, mass)`` for masses above ``1e-7 * d_i``."""
        out = []
        for p, a in zip(self.model.populations, self.distribution.mass):
            for k, v in enumerate(a):
                if v > MASS_REL_TOL * p.demand:
                    out.append((p.id, k, float(v)))
        return out


class _Problem:
    """Flat view of a model: all strategies stacked, populations contiguous.

    Within each population strategies are ordered lexicographically so the
    first argmin is the lexicographic tie-break.
    """

    def __init__(self, model: CongestionModel):
        self.model = model
        self.table = model.cost_table
        blocks, perms, offsets = [], [], [0]
        for p in model.populations:
            perm = sorted(range(len(p.strategies)), key=lambda k: p.strategies.sets[k])
            perms.append(np.array(perm, dtype=int))
            blocks.append(incidence(p.strategies)[perm])
            offsets.append(offsets[-1] + len(perm))
        self.A = np.vstack(blocks)
        self.perms = perms
        self.offsets = offsets
        self.demands = model.demands
        kink_loads = np.where(np.isfinite(self.table.starts), self.table.starts, np.nan)[:, 1:]
        self.kink_loads = kink_loads

    def slices(self):
        for i in range(len(self.perms)):
            yield i, slice(self.offsets[i], self.offsets[i + 1])

    def to_flat(self, x: StrategyDistribution) -> np.ndarray:
        return np.concatenate([a[perm] for a, perm in zip(x.mass, self.perms)])

    def to_distribution(self, flat: np.ndarray) -> StrategyDistribution:
        out = []
        for (i, sl), perm in zip(self.slices(), self.perms):
            a = np.empty(len(perm))
            a[perm] = flat[sl]
            out.append(a)
        return StrategyDistribution(tuple(out))

    def start(self, which: str) -> np.ndarray:
        x = np.zeros(self.A.shape[0])
        for i, sl in self.slices():
            k = sl.start if which == "first" else sl.stop - 1
            x[k] = self.demands[i]
        return x

    def derivative(self, loads, dl, gammas):
        pts = loads + np.multiply.outer(gammas, dl)
        return self.table.values(pts) @ dl

    def line_search(self, loads, dl, gmax):
        """Minimizer of the potential along ``loads + t * dl`` for ``t`` in ``[0, gmax]``."""
        d0 = self.derivative(loads, dl, np.array([0.0]))[0]
        if d0 >= 0:
            return 0.0
        dmax = self.derivative(loads, dl, np.array([gmax]))[0]
        if dmax <= 0:
            return gmax
        moving = dl != 0
        with np.errstate(invalid="ignore", divide="ignore"):
            g = (self.kink_loads[moving] - loads[moving, None]) / dl[moving, None]
        g = g[np.isfinite(g)]
        g = g[(g > 0) & (g < gmax)]
        pts = np.unique(np.concatenate(([0.0], g, [gmax])))
        ders = self.derivative(loads, dl, pts)
        j = int(np.argmax(ders >= 0))
        p0, p1, v0, v1 = pts[j - 1], pts[j], ders[j - 1], ders[j]
        if v1 == v0:
            return p1
        return float(p0 + (p1 - p0) * (-v0) / (v1 - v0))


def _evaluate(prob: _Problem, x: np.ndarray):
    loads = prob.A.T @ x
    c = prob.table.values(loads)
    sc = prob.A @ c
    return loads, c, sc


def solve(model: CongestionModel, cfg: SolverConfig | None = None, *,
          start: str = "first", strict: bool = True, callback=None) -> WardropResult:
    """Compute a Wardrop equilibrium.

    Starts with each population's whole demand on its lexicographically
    first strategy (``start="last"`` uses the last one).  Stops once the
    Wardrop gap is at most ``cfg.gap_tolerance``.  On hitting the iteration
    cap the best iterate is returned with ``converged=False``, or wrapped in
    :class:`NotConverged` when ``strict``.  ``callback(iteration,
    distribution)`` is called on every iterate, for diagnostics.
    """
    cfg = cfg or SolverConfig()
    prob = _Problem(model)
    x = prob.start(start)
    best_x, best_gap = x.copy(), np.inf
    converged = False
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        if callback is not None:
            callback(it, prob.to_distribution(x))
        loads, c, sc = _evaluate(prob, x)
        direction = np.zeros_like(x)
        gap = 0.0
        gmax = np.inf
        drops = []
        for i, sl in prob.slices():
            d = prob.demands[i]
            if d == 0:
                continue
            xs, cs = x[sl], sc[sl]
            kb = int(np.argmin(cs))
            fw_gain = float(xs @ (cs - cs[kb]))
            gap += fw_gain
            away_gain = 0.0
            if cfg.away_steps:
                active = np.flatnonzero(xs > 0)
                kw = int(active[np.argmax(cs[active])])
                away_gain = float(xs @ (cs[kw] - cs))
            if away_gain > fw_gain and xs[kw] < d:
                blk = xs.copy()
                blk[kw] -= d
                direction[sl] = blk
                lim = xs[kw] / (d - xs[kw])
                if lim <= gmax:
                    if lim < gmax:
                        drops = []
                    gmax = lim
                    drops.append(sl.start + kw)
            elif fw_gain > 0:
                blk = -xs
                blk[kb] += d
                direction[sl] = blk
                if 1.0 < gmax:
                    gmax, drops = 1.0, []
        if gap < best_gap:
            best_gap, best_x = gap, x.copy()
        if gap <= cfg.gap_tolerance:
            converged = True
            break
        if not np.isfinite(gmax):
            break
        dl = prob.A.T @ direction
        step = prob.line_search(loads, dl, gmax)
        if step <= 0:
            # No descent along the chosen direction at working precision.
            break
        x = x + step * direction
        if step >= gmax:
            x[drops] = 0.0
        np.maximum(x, 0.0, out=x)
        for i, sl in prob.slices():
            s = x[sl].sum()
            if s > 0:
                x[sl] *= prob.demands[i] / s

    result = _result(prob, best_x, best_gap, it, converged, cfg)
    if not converged and strict:
        raise NotConverged(
            f"Wardrop gap {best_gap:.3e} above tolerance {cfg.gap_tolerance:.1e} "
            f"after {it} iterations",
            result=result,
        )
    return result


def _result(prob, x, gap, iterations, converged, cfg) -> WardropResult:
    model = prob.model
    loads, c, sc = _evaluate(prob, x)
    per_pop = np.vstack([prob.A[sl].T @ x[sl] for _, sl in prob.slices()])
    pop_costs = np.array([sc[sl].min() for _, sl in prob.slices()])
    gap = float(sum(x[sl] @ (sc[sl] - sc[sl].min()) for _, sl in prob.slices()))
    return WardropResult(
        model=model,
        distribution=prob.to_distribution(x),
        loads=LoadVector(loads, per_pop),
        resource_costs=c,
        population_costs=pop_costs,
        gap=gap,
        potential=float(prob.table.integrals(loads).sum()),
        iterations=iterations,
        converged=converged,
        config=cfg,
    )


def _greedy_basis(masks, weights) -> int:
    order = np.lexsort((np.arange(len(weights)), weights))
    target = max(bin(B).count("1") for B in masks)
    chosen = 0
    for k in order:
        cand = chosen | (1 << int(k))
        if any(cand & B == cand for B in masks):
            chosen = cand
            if bin(chosen).count("1") == target:
                break
    return chosen


def best_response(m: CongestionModel, i: int | str, loads: LoadVector | np.ndarray):
    """Cheapest strategy of population ``i`` at ``loads`` as ``(index, cost)``.

    Matroid populations (by their minimal clutter) use the greedy
    minimum-weight basis; others enumerate all strategies, ties going to the
    lexicographically smallest.
    """
    pop = m.populations[i] if isinstance(i, int) else m.population(i)
    c = m.resource_costs(loads)
    S = pop.strategies
    clut = minimal_clutter(S)
    if is_matroid_base_family(clut):
        B = _greedy_basis(clut.masks, c)
        k = S.masks.index(B)
    else:
        costs = [c[list(s)].sum() for s in S.sets]
        k = min(range(len(S)), key=lambda j: (costs[j], S.sets[j]))
    return k, float(c[list(S.sets[k])].sum())


def _strategy_costs(m: CongestionModel, loads: LoadVector):
    c = m.resource_costs(loads)
    return [incidence(p.strategies) @ c for p in m.populations]


def wardrop_gap(m: CongestionModel, x: StrategyDistribution) -> float:
    """``sum_i sum_S x_S (cost(S) - min cost of i)``; zero exactly at equilibria."""
    loads = project_loads(m, x)
    total = 0.0
    for a, sc in zip(x.mass, _strategy_costs(m, loads)):
        total += float(a @ (sc - sc.min()))
    return max(total, 0.0)


def check_equilibrium(m: CongestionModel, x: StrategyDistribution, tol: float = 1e-6) -> bool:
    check_feasible(m, x)
    loads = project_loads(m, x)
    for p, a, sc in zip(m.populations, x.mass, _strategy_costs(m, loads)):
        used = a > MASS_REL_TOL * p.demand
        if np.any(sc[used] > sc.min() + tol):
            return False
    return True
