"""Random and exhaustive instance generators.

Used by the sensitivity harnesses and by the test suite.  Every function
takes an explicit ``numpy.random.Generator``.
"""

from __future__ import annotations

import itertools
from typing import Iterator

import numpy as np

from .games import CongestionModel, CostFunction, Population
from .set_systems import Clutter, GroundSet, SetSystem, minimal_clutter


def resource_names(m: int) -> tuple[str, ...]:
    return tuple(f"r{k}" for k in range(m))


def uniform_matroid(ground: GroundSet, support, k: int) -> Clutter:
    """Bases of the rank-``k`` uniform matroid on ``support``."""
    return Clutter(ground, tuple(itertools.combinations(sorted(support), k)))


def partition_matroid(ground: GroundSet, blocks, caps) -> Clutter:
    """Bases picking exactly ``caps[j]`` elements from each block."""
    per_block = [list(itertools.combinations(sorted(b), c)) for b, c in zip(blocks, caps)]
    sets = tuple(tuple(sorted(sum(choice, ()))) for choice in itertools.product(*per_block))
    return Clutter(ground, sets)


def _is_forest(edges) -> bool:
    parent: dict = {}

    def find(v):
        while parent.setdefault(v, v) != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
    return True


def spanning_forests(edges) -> list[tuple[int, ...]]:
    """Index sets of the maximal forests of a multigraph given as an edge list."""
    n = len(edges)
    for size in range(n, -1, -1):
        found = [c for c in itertools.combinations(range(n), size)
                 if _is_forest([edges[k] for k in c])]
        if found:
            return found
    return [()]


def graphic_matroid(ground: GroundSet, edge_resources, edges) -> Clutter:
    """Bases of the cycle matroid of ``edges``; edge ``k`` is resource ``edge_resources[k]``."""
    forests = spanning_forests(edges)
    sets = tuple(tuple(sorted(edge_resources[k] for k in f)) for f in forests)
    return Clutter(ground, sets)


def complete_graph_edges(n: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(n), 2))


def random_matroid(rng: np.random.Generator, ground: GroundSet, kind: str | None = None) -> Clutter:
    """A uniform, partition or graphic matroid on a random part of ``ground``."""
    m = len(ground)
    kind = kind or rng.choice(["uniform", "partition", "graphic"])
    if kind == "uniform":
        size = int(rng.integers(1, m + 1))
        support = rng.choice(m, size=size, replace=False)
        k = int(rng.integers(1, size + 1))
        return uniform_matroid(ground, support, k)
    if kind == "partition":
        size = int(rng.integers(1, m + 1))
        support = rng.permutation(m)[:size]
        nblocks = int(rng.integers(1, min(3, size) + 1))
        cuts = np.sort(rng.choice(np.arange(1, size), size=nblocks - 1, replace=False)) if nblocks > 1 else []
        blocks = [b for b in np.split(support, cuts) if len(b)]
        caps = [int(rng.integers(1, len(b) + 1)) for b in blocks]
        return partition_matroid(ground, blocks, caps)
    nodes = int(rng.integers(2, 5))
    all_edges = complete_graph_edges(nodes)
    n_edges = int(rng.integers(1, m + 1))
    # Sampling with replacement gives multigraphs; parallel edges are fine.
    edges = [all_edges[int(rng.integers(len(all_edges)))] for _ in range(n_edges)]
    res = rng.choice(m, size=n_edges, replace=False)
    return graphic_matroid(ground, [int(r) for r in res], edges)


def random_cost(rng: np.random.Generator, max_pieces: int = 3, strictly: bool = False) -> CostFunction:
    """Random nondecreasing piecewise-linear cost with up to ``max_pieces`` breakpoints."""
    n = int(rng.integers(1, max_pieces + 1))
    loads = np.concatenate(([0.0], np.sort(rng.uniform(0.1, 3.0, size=n - 1))))
    loads = np.unique(loads)
    incs = rng.uniform(0.0, 2.0, size=loads.size)
    if not strictly:
        incs[rng.random(loads.size) < 0.3] = 0.0
    values = np.cumsum(incs)
    slope = float(rng.uniform(0.05 if strictly else 0.0, 2.0))
    return CostFunction(tuple(zip(loads.tolist(), values.tolist())), slope)


def random_cost_reduction(rng: np.random.Generator, c: CostFunction) -> CostFunction:
    """A cost pointwise below ``c``."""
    kind = rng.integers(4)
    if kind == 0:
        return c
    if kind == 1:
        return c.scaled(float(rng.uniform(0.0, 1.0)))
    if kind == 2:
        return c.shifted_down(float(rng.uniform(0.0, 2.0)))
    return c.scaled(float(rng.uniform(0.3, 1.0))).shifted_down(float(rng.uniform(0.0, 1.0)))


def random_matroid_model(rng: np.random.Generator, max_resources: int = 8,
                         max_populations: int = 3, strictly: bool = False) -> CongestionModel:
    m = int(rng.integers(2, max_resources + 1))
    ground = GroundSet(resource_names(m))
    n = int(rng.integers(1, max_populations + 1))
    pops = tuple(
        Population(f"p{i + 1}", float(rng.uniform(0.2, 2.0)), random_matroid(rng, ground))
        for i in range(n)
    )
    costs = tuple(random_cost(rng, strictly=strictly) for _ in range(m))
    return CongestionModel(ground, pops, costs)


def random_set_system(rng: np.random.Generator, ground: GroundSet, max_sets: int = 5,
                      max_size: int | None = None) -> SetSystem:
    m = len(ground)
    max_size = max_size or m
    sets: set[tuple[int, ...]] = set()
    for _ in range(int(rng.integers(1, max_sets + 1))):
        size = int(rng.integers(1, max_size + 1))
        sets.add(tuple(sorted(rng.choice(m, size=size, replace=False).tolist())))
    return SetSystem(ground, tuple(sorted(sets)))


def random_clutter(rng: np.random.Generator, m: int, max_sets: int = 6) -> Clutter:
    ground = GroundSet(resource_names(m))
    return minimal_clutter(random_set_system(rng, ground, max_sets=max_sets))


def random_model(rng: np.random.Generator, max_resources: int = 6, max_populations: int = 2,
                 max_sets: int = 4, strictly: bool = False) -> CongestionModel:
    """Model with arbitrary (not necessarily matroid) strategy systems."""
    m = int(rng.integers(2, max_resources + 1))
    ground = GroundSet(resource_names(m))
    n = int(rng.integers(1, max_populations + 1))
    pops = tuple(
        Population(f"p{i + 1}", float(rng.uniform(0.2, 2.0)),
                   random_set_system(rng, ground, max_sets=max_sets))
        for i in range(n)
    )
    return CongestionModel(ground, pops, tuple(random_cost(rng, strictly=strictly) for _ in range(m)))


def all_antichains(m: int) -> Iterator[Clutter]:
    """Every nonempty antichain of nonempty subsets of an ``m``-element ground set."""
    ground = GroundSet(resource_names(m))
    subsets = list(range(1, 1 << m))

    def rec(start, chosen):
        if chosen:
            yield chosen
        for k in range(start, len(subsets)):
            s = subsets[k]
            if all(s & t != s and s & t != t for t in chosen):
                yield from rec(k + 1, chosen + [s])

    for masks in rec(0, []):
        sets = tuple(tuple(j for j in range(m) if s >> j & 1) for s in masks)
        yield Clutter(ground, sets)
