"""Built-in instances: the three classic paradox networks, an MST game and a queueing game."""

from __future__ import annotations

import itertools

import numpy as np

from .braess import Reduction
from .games import BIG_M, CongestionModel, CostFunction, Population
from .generators import spanning_forests
from .set_systems import GroundSet, SetSystem

QUEUE_SEGMENTS = 64
QUEUE_SPAN = 0.9  # fit 1/(mu - x) on [0, 0.9 mu]


def fig1(big_m: float = BIG_M) -> CongestionModel:
    """Four-arc network with a middle arc ``u -> v``; the middle arc is blocked by ``big_m``."""
    g = GroundSet(("su", "sv", "uv", "ut", "vt"))
    paths = SetSystem.from_names(g, [["su", "ut"], ["sv", "vt"], ["su", "uv", "vt"]])
    x, one = CostFunction.affine(1.0), CostFunction.constant(1.0)
    return CongestionModel(g, (Population("p1", 1.0, paths),),
                           (x, one, CostFunction.constant(big_m), one, x))


def fig1_reduction() -> Reduction:
    return Reduction(cost_overrides={"uv": CostFunction.constant(0.0)})


def fig2(threshold: float = 10.0) -> CongestionModel:
    """Three populations; population 1 picks the direct arc or the two-arc detour."""
    g = GroundSet(("s1-t1", "s1-t2", "t2-t1"))
    pops = (
        Population("p1", 1.0, SetSystem.from_names(g, [["s1-t1"], ["s1-t2", "t2-t1"]])),
        Population("p2", 2.0, SetSystem.from_names(g, [["s1-t2"]])),
        Population("p3", threshold, SetSystem.from_names(g, [["t2-t1"]])),
    )
    costs = (CostFunction.constant(2.0), CostFunction.affine(1.0), CostFunction.hinge(threshold))
    return CongestionModel(g, pops, costs)


def fig2_reduction() -> Reduction:
    return Reduction(demand_overrides={"p2": 0.0})


def fig3() -> CongestionModel:
    g = GroundSet(("s1-t", "s2-t", "s1-s2"))
    pops = (
        Population("p1", 0.5, SetSystem.from_names(g, [["s1-t"], ["s1-s2", "s2-t"]])),
        Population("p2", 0.5, SetSystem.from_names(g, [["s2-t"]])),
    )
    costs = (CostFunction.constant(1.0), CostFunction.affine(1.0), CostFunction.constant(3.0))
    return CongestionModel(g, pops, costs)


def fig3_reduction() -> Reduction:
    return Reduction(cost_overrides={"s1-s2": CostFunction.constant(0.0)})


def mst_k4() -> CongestionModel:
    """Spanning-tree game on K4 plus a second population on the triangle 1-2-3."""
    edges = list(itertools.combinations((1, 2, 3, 4), 2))
    names = tuple(f"{u}{v}" for u, v in edges)
    g = GroundSet(names)
    trees = [[names[k] for k in t] for t in spanning_forests(edges)]
    tri = [k for k, (u, v) in enumerate(edges) if v <= 3]
    tri_trees = [[names[tri[k]] for k in t] for t in spanning_forests([edges[k] for k in tri])]
    pops = (
        Population("p1", 1.0, SetSystem.from_names(g, trees)),
        Population("p2", 0.5, SetSystem.from_names(g, tri_trees)),
    )
    slopes = (1.0, 2.0, 0.5, 1.5, 1.0, 3.0)
    offsets = (0.5, 0.0, 1.0, 0.2, 0.8, 0.1)
    costs = tuple(CostFunction.affine(s, o) for s, o in zip(slopes, offsets))
    return CongestionModel(g, pops, costs)


def mst_k4_reduction() -> Reduction:
    return Reduction(cost_overrides={"13": CostFunction.affine(0.2, 0.0),
                                     "24": CostFunction.affine(1.0, 0.0)})


def queue_cost(mu: float, segments: int = QUEUE_SEGMENTS, span: float = QUEUE_SPAN) -> CostFunction:
    """Piecewise-linear interpolant of ``1/(mu - x)`` on ``[0, span * mu]``.

    Beyond the last node the cost continues with the derivative there; the
    exact delay is unbounded at ``mu`` and cannot be represented.
    """
    t = np.linspace(0.0, span * mu, segments + 1)
    v = 1.0 / (mu - t)
    return CostFunction(tuple(zip(t.tolist(), v.tolist())), 1.0 / (mu - t[-1]) ** 2)


def queue_fit_error(mu: float, segments: int = QUEUE_SEGMENTS, span: float = QUEUE_SPAN,
                    samples: int = 20001) -> float:
    """Largest relative gap between the interpolant and ``1/(mu - x)`` on the fitted range."""
    t = np.linspace(0.0, span * mu, samples)
    exact = 1.0 / (mu - t)
    return float(np.max(np.abs(queue_cost(mu, segments, span)(t) - exact) / exact))


QUEUE_RATES = {"q1": 2.0, "q2": 1.5, "q3": 2.5}


def queue() -> CongestionModel:
    """Two packet streams, each routed to one of two admissible queues."""
    g = GroundSet(tuple(QUEUE_RATES))
    pops = (
        Population("p1", 1.0, SetSystem.from_names(g, [["q1"], ["q2"]])),
        Population("p2", 1.2, SetSystem.from_names(g, [["q2"], ["q3"]])),
    )
    return CongestionModel(g, pops, tuple(queue_cost(mu) for mu in QUEUE_RATES.values()))


def queue_reduction() -> Reduction:
    """Speed up the server of ``q2``."""
    return Reduction(cost_overrides={"q2": queue_cost(2.0)})


EXAMPLES = {
    "fig1": (fig1, fig1_reduction),
    "fig2": (fig2, fig2_reduction),
    "fig3": (fig3, fig3_reduction),
    "mst-k4": (mst_k4, mst_k4_reduction),
    "queue": (queue, queue_reduction),
}
