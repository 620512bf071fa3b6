"""Cost/demand reductions, Braess-paradox detection and counterexample synthesis."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .equilibrium import SolverConfig, WardropResult, solve
from .errors import (
    BigMTooSmall,
    EmptySystem,
    InvalidReduction,
    NeedThreePopulations,
    NotANonMatroid,
    NotConverged,
    ValidationError,
)
from .games import BIG_M, CongestionModel, CostFunction, Population, pointwise_leq
from .generators import random_cost_reduction, random_matroid_model
from .set_systems import (
    GroundSet,
    NonMatroidWitness,
    SetSystem,
    is_matroid_base_family,
    minimal_clutter,
    nonmatroid_witness,
    set_system,
)

PARADOX_TOL = 1e-4


@dataclass(frozen=True)
class Reduction:
    cost_overrides: Mapping[str, CostFunction] = field(default_factory=dict)
    demand_overrides: Mapping[str, float] = field(default_factory=dict)


def validate_reduction(m: CongestionModel, r: Reduction) -> None:
    for rid, c in r.cost_overrides.items():
        if rid not in m.ground._index:
            raise InvalidReduction(f"cost override for unknown resource {rid!r}")
        if not pointwise_leq(c, m.cost_of(rid)):
            raise InvalidReduction(f"cost override for resource {rid!r} exceeds the original cost somewhere")
    ids = {p.id: p for p in m.populations}
    for pid, d in r.demand_overrides.items():
        if pid not in ids:
            raise InvalidReduction(f"demand override for unknown population {pid!r}")
        if not (0 <= d <= ids[pid].demand):
            raise InvalidReduction(
                f"demand override for population {pid!r} must lie in [0, {ids[pid].demand}], got {d}"
            )


def apply_reduction(m: CongestionModel, r: Reduction) -> CongestionModel:
    """Reduced model: same strategy systems, overridden costs and demands."""
    validate_reduction(m, r)
    costs = tuple(r.cost_overrides.get(rid, c) for rid, c in zip(m.ground, m.costs))
    return m.replace(costs=costs, demands=dict(r.demand_overrides))


@dataclass
class ParadoxReport:
    """Outcome of comparing equilibria before and after a reduction.

    ``weak`` holds ``(resource, cost before, cost after)`` for resources whose
    equilibrium cost rose by more than ``tol``; ``strong`` holds
    ``(population, private cost before, after)`` likewise.
    """

    weak: list[tuple[str, float, float]]
    strong: list[tuple[str, float, float]]
    gaps: tuple[float, float]
    total_cost: tuple[float, float]
    tol: float
    zero_demand_populations: list[str] = field(default_factory=list)
    reliable: bool = True
    before: WardropResult | None = None
    after: WardropResult | None = None

    @property
    def verdict_weak(self) -> bool:
        return bool(self.weak)

    @property
    def verdict_strong(self) -> bool:
        return bool(self.strong)


def compare_equilibria(before: WardropResult, after: WardropResult, tol: float = PARADOX_TOL) -> ParadoxReport:
    m, mb = before.model, after.model
    weak = [
        (rid, float(c0), float(c1))
        for rid, c0, c1 in zip(m.ground, before.resource_costs, after.resource_costs)
        if c1 > c0 + tol
    ]
    strong = []
    zero = []
    for p, pb, c0, c1 in zip(m.populations, mb.populations, before.population_costs, after.population_costs):
        if pb.demand == 0:
            zero.append(p.id)
            continue
        if c1 > c0 + tol:
            strong.append((p.id, float(c0), float(c1)))
    return ParadoxReport(
        weak=weak,
        strong=strong,
        gaps=(before.gap, after.gap),
        total_cost=(before.total_cost, after.total_cost),
        tol=tol,
        zero_demand_populations=zero,
        reliable=before.converged and after.converged,
        before=before,
        after=after,
    )


def detect_paradox(m: CongestionModel, r: Reduction, cfg: SolverConfig | None = None,
                   tol: float = PARADOX_TOL) -> ParadoxReport:
    """Solve the model and its reduction and list strict cost increases.

    Populations with reduced demand 0 are left out of the strong comparison.
    Raises :class:`NotConverged` carrying the (unreliable) report if either
    solve misses its gap tolerance.
    """
    reduced = apply_reduction(m, r)
    before = solve(m, cfg, strict=False)
    after = solve(reduced, cfg, strict=False)
    report = compare_equilibria(before, after, tol)
    if not report.reliable:
        raise NotConverged("equilibrium solve did not converge; paradox report unreliable",
                           result=before if not before.converged else after, report=report)
    return report


# -- sensitivity harnesses ---------------------------------------------------

@dataclass
class SensitivityReport:
    kind: str
    trials: int
    violations: list[tuple[int, str, float, float]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


Generator = Callable[[np.random.Generator], "tuple[CongestionModel, Reduction]"]


def _check_caps(max_resources, max_populations):
    if max_resources > 8 or max_populations > 3:
        raise ValueError("sensitivity harness caps: at most 8 resources and 3 populations")


def random_cost_trial(rng, max_resources=8, max_populations=3):
    m = random_matroid_model(rng, max_resources, max_populations)
    overrides = {}
    for rid, c in zip(m.ground, m.costs):
        if rng.random() < 0.6:
            overrides[rid] = random_cost_reduction(rng, c)
    return m, Reduction(cost_overrides=overrides)


def random_demand_trial(rng, max_resources=8, max_populations=3):
    m = random_matroid_model(rng, max_resources, max_populations)
    j = int(rng.integers(len(m.populations)))
    p = m.populations[j]
    return m, Reduction(demand_overrides={p.id: float(rng.uniform(0.0, p.demand))})


def _run_harness(kind, trials, seed, generator, tol, cfg) -> SensitivityReport:
    report = SensitivityReport(kind, trials)
    for t, ss in enumerate(np.random.SeedSequence(seed).spawn(trials)):
        m, r = generator(np.random.default_rng(ss))
        reduced = apply_reduction(m, r)
        before = solve(m, cfg)
        after = solve(reduced, cfg)
        for rid, c0, c1 in zip(m.ground, before.resource_costs, after.resource_costs):
            if c1 > c0 + tol:
                report.violations.append((t, rid, float(c0), float(c1)))
    return report


def verify_cost_sensitivity(trials: int = 200, seed: int = 42, max_resources: int = 8,
                            max_populations: int = 3, generator: Generator | None = None,
                            tol: float = PARADOX_TOL, cfg: SolverConfig | None = None) -> SensitivityReport:
    """Check that cost reductions never raise an equilibrium resource cost.

    The default generator draws uniform, partition and graphic matroid
    models with random pointwise cost reductions; each trial gets its own
    seed spawned from ``seed``.
    """
    _check_caps(max_resources, max_populations)
    gen = generator or (lambda rng: random_cost_trial(rng, max_resources, max_populations))
    return _run_harness("cost", trials, seed, gen, tol, cfg)


def verify_demand_sensitivity(trials: int = 200, seed: int = 7, max_resources: int = 8,
                              max_populations: int = 3, generator: Generator | None = None,
                              tol: float = PARADOX_TOL, cfg: SolverConfig | None = None) -> SensitivityReport:
    """Same as :func:`verify_cost_sensitivity` for a single-population demand cut."""
    _check_caps(max_resources, max_populations)
    gen = generator or (lambda rng: random_demand_trial(rng, max_resources, max_populations))
    return _run_harness("demand", trials, seed, gen, tol, cfg)


# -- counterexample synthesis ------------------------------------------------

@dataclass(frozen=True)
class SynthesizedCounterexample:
    base_model: CongestionModel
    reduction: Reduction
    embedding: tuple[dict[str, str], ...]
    witness: NonMatroidWitness
    marked: tuple[str, str, str]
    big_m_resources: tuple[str, ...] = ()

    @property
    def reduced_model(self) -> CongestionModel:
        return apply_reduction(self.base_model, self.reduction)


def _as_system(s) -> SetSystem:
    if isinstance(s, SetSystem):
        return s
    s = [list(x) for x in s]
    if not s or any(not x for x in s):
        raise EmptySystem("every set system must be nonempty with nonempty members")
    return set_system(s)


def _support_names(s: SetSystem) -> list[str]:
    return [s.ground.resources[k] for k in s.support]


def _pinned_strategy(s: SetSystem) -> tuple[str, ...]:
    """Minimum-cardinality clutter member, ties broken lexicographically."""
    clut = minimal_clutter(s)
    best = min(clut.sets, key=lambda t: (len(t), t))
    return s.ground.names(best)


class _Builder:
    """Accumulates the fresh ground set, costs and populations of an embedding."""

    def __init__(self):
        self.names: list[str] = []
        self.costs: dict[str, CostFunction] = {}
        self.embedding: list[dict[str, str]] = []
        self.big_m: list[str] = []

    def embed(self, i: int, s: SetSystem, shared: Mapping[str, str] = {}) -> dict[str, str]:
        tau = {}
        for r in _support_names(s):
            if r in shared:
                tau[r] = shared[r]
            else:
                tau[r] = f"{i + 1}.{r}"
                self.names.append(tau[r])
        self.embedding.append(tau)
        return tau

    def set_cost(self, rid: str, c: CostFunction, big_m: bool = False):
        self.costs[rid] = c
        if big_m:
            self.big_m.append(rid)

    def pad(self, target: int):
        j = 0
        while len(self.names) < target:
            j += 1
            self.names.append(f"spare{j}")
            self.costs[self.names[-1]] = CostFunction.constant(0.0)

    def model(self, systems, demands) -> CongestionModel:
        ground = GroundSet(tuple(self.names))
        pops = []
        for i, (s, tau, d) in enumerate(zip(systems, self.embedding, demands)):
            sets = [[tau[r] for r in member] for member in s.named()]
            pops.append(Population(f"p{i + 1}", d, SetSystem.from_names(ground, sets)))
        return CongestionModel(ground, tuple(pops), self.costs)


def _prepare(family, need: int):
    systems = [_as_system(s) for s in family]
    if len(systems) < need:
        if need >= 3:
            raise NeedThreePopulations("demand-reduction counterexamples need at least three populations")
        raise ValidationError("counterexample synthesis needs at least two set systems")
    clut = minimal_clutter(systems[0])
    if is_matroid_base_family(clut):
        raise NotANonMatroid(
            "the first clutter is a matroid base family, so the family is immune"
        )
    return systems, nonmatroid_witness(clut)


def _embed_population_one(b: _Builder, s1: SetSystem, w: NonMatroidWitness, costs, big_m):
    tau1 = b.embed(0, s1)
    inside = set(w.X) | set(w.Y)
    for r, img in tau1.items():
        if r in costs:
            b.set_cost(img, costs[r])
        elif r in inside:
            b.set_cost(img, CostFunction.constant(0.0))
        else:
            b.set_cost(img, CostFunction.constant(big_m), big_m=True)
    return tau1


def _check_big_m(cx: SynthesizedCounterexample, cfg):
    for model in (cx.base_model, cx.reduced_model):
        res = solve(model, cfg)
        for rid in cx.big_m_resources:
            if res.loads.load[model.ground.index(rid)] > 1e-9:
                raise BigMTooSmall(f"big-M resource {rid!r} carries flow; increase big_m")


def synthesize_counterexample(family: Sequence, big_m: float = BIG_M, *, check: bool = True,
                              cfg: SolverConfig | None = None) -> SynthesizedCounterexample:
    """Embed a non-matroid family into a game with a strong paradox under a cost cut.

    Population 1 gets the witness resources ``e = a`` (cost 1), ``f = b``
    (cost ``t``), ``g = c`` (cost 3); other resources of ``X | Y`` cost 0 and
    the rest of its support costs ``big_m``.  Population 2's cheapest-size
    strategy is routed through ``f`` and its other resources cost 2.  Both
    have demand 1/2; later populations get fresh resources and demand 0.
    The reduction lowers ``g`` from 3 to 0.
    """
    systems, w = _prepare(family, 2)
    b = _Builder()
    roles = {w.a: CostFunction.constant(1.0), w.b: CostFunction.affine(1.0), w.c: CostFunction.constant(3.0)}
    tau1 = _embed_population_one(b, systems[0], w, roles, big_m)
    e, f, g = tau1[w.a], tau1[w.b], tau1[w.c]

    pinned = _pinned_strategy(systems[1])
    tau2 = b.embed(1, systems[1], shared={pinned[0]: f})
    for r, img in tau2.items():
        if img != f:
            b.set_cost(img, CostFunction.constant(2.0))
    for i, s in enumerate(systems[2:], start=2):
        for img in b.embed(i, s).values():
            b.set_cost(img, CostFunction.constant(0.0))
    b.pad(sum(len(s.support) for s in systems))

    demands = [0.5, 0.5] + [0.0] * (len(systems) - 2)
    cx = SynthesizedCounterexample(
        base_model=b.model(systems, demands),
        reduction=Reduction(cost_overrides={g: CostFunction.constant(0.0)}),
        embedding=tuple(b.embedding),
        witness=w,
        marked=(e, f, g),
        big_m_resources=tuple(b.big_m),
    )
    if check:
        _check_big_m(cx, cfg)
    return cx


def synthesize_demand_counterexample(family: Sequence, big_m: float = BIG_M, threshold: float = 10.0, *,
                                     check: bool = True,
                                     cfg: SolverConfig | None = None) -> SynthesizedCounterexample:
    """Embed a non-matroid family into a game with a strong paradox under a demand cut.

    The first three populations reproduce the two-route demand example:
    population 1 chooses between ``e = a`` (cost 2) and the pair
    ``f = b`` (cost ``t``), ``g = c`` (cost ``max(0, t - threshold)``);
    population 2 (demand 2) is pinned onto ``f`` and population 3 (demand
    ``threshold``) onto ``g``.  The reduction cuts population 2's demand to 0.
    """
    systems, w = _prepare(family, 3)
    b = _Builder()
    roles = {w.a: CostFunction.constant(2.0), w.b: CostFunction.affine(1.0),
             w.c: CostFunction.hinge(threshold)}
    tau1 = _embed_population_one(b, systems[0], w, roles, big_m)
    e, f, g = tau1[w.a], tau1[w.b], tau1[w.c]

    for i, target in ((1, f), (2, g)):
        pinned = _pinned_strategy(systems[i])
        tau = b.embed(i, systems[i], shared={pinned[0]: target})
        for r, img in tau.items():
            if img == target:
                continue
            if r in pinned:
                b.set_cost(img, CostFunction.constant(0.0))
            else:
                b.set_cost(img, CostFunction.constant(big_m), big_m=True)
    for i, s in enumerate(systems[3:], start=3):
        for img in b.embed(i, s).values():
            b.set_cost(img, CostFunction.constant(0.0))
    b.pad(sum(len(s.support) for s in systems))

    demands = [1.0, 2.0, threshold] + [0.0] * (len(systems) - 3)
    cx = SynthesizedCounterexample(
        base_model=b.model(systems, demands),
        reduction=Reduction(demand_overrides={"p2": 0.0}),
        embedding=tuple(b.embedding),
        witness=w,
        marked=(e, f, g),
        big_m_resources=tuple(b.big_m),
    )
    if check:
        _check_big_m(cx, cfg)
    return cx
