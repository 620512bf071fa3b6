"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` or ``python tests/test_acceptance.py``.
"""

import sys
import time

import numpy as np
import pytest
from scipy.integrate import quad

from braess_lab import instances
from braess_lab.braess import Reduction, apply_reduction, detect_paradox, synthesize_counterexample
from braess_lab.equilibrium import solve
from braess_lab.games import (
    CongestionModel,
    Population,
    StrategyDistribution,
    beckmann_potential,
    project_loads,
)
from braess_lab.generators import (
    all_antichains,
    random_clutter,
    random_cost,
    random_cost_reduction,
    random_matroid_model,
    random_model,
)
from braess_lab.polymatroid import WeightedRankSum, certify_optimality
from braess_lab.set_systems import (
    SetSystem,
    is_matroid_base_family,
    is_matroid_oracle_bruteforce,
    minimal_clutter,
    nonmatroid_witness,
    verify_witness,
)

TOL = 1e-3
PARADOX_TOL = 1e-4


def _report(n, title, ok, detail, elapsed):
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {n:>2}: {title} ({detail}; {elapsed:.2f}s)", flush=True)


def _near(a, b, tol=TOL):
    return abs(a - b) <= tol


# -- criteria ----------------------------------------------------------------

def criterion_1():
    m = instances.fig1()
    before = solve(m)
    used = [k for _, k, _ in before.used_strategies()]
    costs = before.model.cost_table.values(before.loads.load)
    path_costs = [sum(costs[j] for j in m.populations[0].strategies.sets[k]) for k in used]
    after = solve(apply_reduction(m, instances.fig1_reduction()))
    ok = (all(_near(c, 1.5) for c in path_costs) and _near(before.total_cost, 1.5)
          and _near(after.population_costs[0], 2.0) and _near(after.total_cost, 2.0))
    return ok, f"used path costs {np.round(path_costs, 6).tolist()}, after {after.total_cost:.6f}", 1.0


def criterion_2():
    m = instances.fig2(10.0)
    before = solve(m)
    after = solve(apply_reduction(m, instances.fig2_reduction()))
    ok = _near(before.total_cost, 6.0) and _near(after.total_cost, 12.0)
    return ok, f"total cost {before.total_cost:.6f} -> {after.total_cost:.6f}", 1.0


def criterion_3():
    m = instances.fig3()
    before = solve(m)
    after = solve(apply_reduction(m, instances.fig3_reduction()))
    c0, c1 = before.population_costs[1], after.population_costs[1]
    return _near(c0, 0.5) and _near(c1, 1.0), f"population 2 cost {c0:.6f} -> {c1:.6f}", 1.0


def criterion_4():
    weak = 0
    kinds = 0
    for ss in np.random.SeedSequence(2024).spawn(300):
        rng = np.random.default_rng(ss)
        m = random_matroid_model(rng, max_resources=8, max_populations=3)
        costs = {rid: random_cost_reduction(rng, c) for rid, c in zip(m.ground, m.costs) if rng.random() < 0.6}
        p = m.populations[int(rng.integers(len(m.populations)))]
        reductions = (Reduction(cost_overrides=costs),
                      Reduction(demand_overrides={p.id: float(rng.uniform(0.0, p.demand))}))
        for r in reductions:
            kinds += 1
            if detect_paradox(m, r, tol=PARADOX_TOL).verdict_weak:
                weak += 1
    return weak == 0, f"{weak} weak verdicts over {kinds} reductions of 300 instances", 300.0


def _nonmatroid_clutter(rng, max_m=7):
    while True:
        f = random_clutter(rng, int(rng.integers(2, max_m + 1)))
        if not is_matroid_base_family(f):
            return f


def criterion_5():
    rng = np.random.default_rng(5)
    bad = []
    for k in range(50):
        f = _nonmatroid_clutter(rng)
        other = random_clutter(rng, int(rng.integers(1, 5)))
        cx = synthesize_counterexample([f, other])
        rep = detect_paradox(cx.base_model, cx.reduction)
        inc = {p: b - a for p, a, b in rep.strong}.get("p2")
        if not (rep.verdict_strong and inc is not None and _near(inc, 0.5)):
            bad.append(k)
    return not bad, f"{50 - len(bad)}/50 strong with population 2 rising by 0.5", 120.0


_CORPUS = []


def _corpus():
    if not _CORPUS:
        for m in range(1, 6):
            _CORPUS.extend(all_antichains(m))
        rng = np.random.default_rng(6)
        _CORPUS.extend(random_clutter(rng, int(rng.integers(1, 8)), max_sets=8) for _ in range(500))
    return _CORPUS


def criterion_6():
    corpus = _corpus()
    exhaustive = len(corpus) - 500
    disagree = sum(is_matroid_base_family(f) != is_matroid_oracle_bruteforce(f) for f in corpus)
    ok = disagree == 0 and exhaustive >= 5000
    return ok, f"{disagree} disagreements on {exhaustive} antichains + 500 random", 180.0


def criterion_7():
    checked = failed = 0
    for f in _corpus():
        if not is_matroid_base_family(f):
            checked += 1
            failed += not verify_witness(f, nonmatroid_witness(f))
    return failed == 0 and checked > 0, f"{failed} invalid witnesses among {checked} non-matroids", None


def criterion_8():
    failed = 0
    for ss in np.random.SeedSequence(8).spawn(100):
        m = random_matroid_model(np.random.default_rng(ss), max_populations=1)
        p = m.populations[0]
        ws = WeightedRankSum.single(minimal_clutter(p.strategies), p.demand)
        res = solve(m)
        failed += not certify_optimality(ws, res.loads.load, m.costs, tol=1e-4).optimal
    return failed == 0, f"{failed}/100 games with violations", None


def _random_feasible(model, rng):
    return StrategyDistribution(tuple(rng.dirichlet(np.ones(len(p.strategies))) * p.demand
                                      for p in model.populations))


def criterion_9():
    rng = np.random.default_rng(9)
    quad_err = 0.0
    for _ in range(100):
        c = random_cost(rng)
        t = float(rng.uniform(0.0, 5.0))
        pts = [p for p in c.loads if 0 < p < t]
        exact, _ = quad(c, 0.0, t, points=pts or None, epsabs=1e-13, epsrel=1e-13, limit=200)
        quad_err = max(quad_err, abs(c.integral(t) - exact))

    models = [random_model(rng, max_resources=6, max_populations=3) for _ in range(20)]
    fd_err = 0.0
    h = 1e-7
    for k in range(100):
        m = models[k % len(models)]
        a = project_loads(m, _random_feasible(m, rng)).load
        d = project_loads(m, _random_feasible(m, rng)).load - a
        # one-sided difference against the right derivative (costs may kink at a)
        right = float(m.cost_table.values(a + 1e-12 * d) @ d)
        numeric = (beckmann_potential(m, a + h * d) - beckmann_potential(m, a)) / h
        fd_err = max(fd_err, abs(numeric - right) / max(1.0, abs(right)))

    convex_err = 0.0
    for k in range(10_000):
        m = models[k % len(models)]
        a = project_loads(m, _random_feasible(m, rng)).load
        b = project_loads(m, _random_feasible(m, rng)).load
        lam = rng.uniform()
        gap = beckmann_potential(m, lam * a + (1 - lam) * b) - (
            lam * beckmann_potential(m, a) + (1 - lam) * beckmann_potential(m, b))
        convex_err = max(convex_err, gap)
    ok = quad_err <= 1e-8 and fd_err <= 1e-6 and convex_err <= 1e-9
    return ok, f"quad {quad_err:.1e}, finite diff {fd_err:.1e}, convexity {convex_err:.1e}", None


def _with_supersets(m, rng):
    pops = []
    n = len(m.ground)
    for p in m.populations:
        sets = list(p.strategies.sets)
        for s in list(sets):
            rest = [k for k in range(n) if k not in s]
            if rest and rng.random() < 0.7:
                add = rng.choice(rest, size=int(rng.integers(1, len(rest) + 1)), replace=False)
                extra = tuple(sorted(s + tuple(add.tolist())))
                if extra not in sets:
                    sets.append(extra)
        pops.append(Population(p.id, p.demand, SetSystem(m.ground, tuple(sets))))
    return CongestionModel(m.ground, tuple(pops), m.costs)


def criterion_10():
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(100):
        big = _with_supersets(random_model(rng, max_resources=6, max_populations=3), rng)
        reduced = CongestionModel(big.ground, tuple(
            Population(p.id, p.demand, minimal_clutter(p.strategies)) for p in big.populations), big.costs)
        worst = max(worst, float(np.max(np.abs(solve(big).resource_costs - solve(reduced).resource_costs))))
    return worst <= 1e-4, f"max resource-cost difference {worst:.1e}", None


CRITERIA = [
    (1, "fig1 network: 1.5 before, 2 after", criterion_1),
    (2, "fig2 demand example: 6 before, 12 after", criterion_2),
    (3, "fig3 cost example: population 2 pays 0.5 then 1", criterion_3),
    (4, "matroid immunity on 300 random instances", criterion_4),
    (5, "synthesizer completeness on 50 non-matroid clutters", criterion_5),
    (6, "exchange test agrees with the independence oracle", criterion_6),
    (7, "witness validity", criterion_7),
    (8, "certificate consistency on 100 matroid games", criterion_8),
    (9, "numerics of the potential", criterion_9),
    (10, "minimal clutter gives the same equilibrium costs", criterion_10),
]


def run(n, title, fn):
    t0 = time.perf_counter()
    ok, detail, limit = fn()
    elapsed = time.perf_counter() - t0
    if limit is not None and elapsed >= limit:
        ok = False
        detail += f", over the {limit:g}s limit"
    _report(n, title, ok, detail, elapsed)
    return ok, detail


@pytest.mark.parametrize("n,title,fn", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(n, title, fn, capsys):
    with capsys.disabled():
        print()
        ok, detail = run(n, title, fn)
    assert ok, detail


if __name__ == "__main__":
    results = [run(*c)[0] for c in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria passed")
    sys.exit(0 if all(results) else 1)
