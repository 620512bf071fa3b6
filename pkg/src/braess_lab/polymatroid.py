"""Weighted matroid-rank sums and their base polytopes.

All routines that quantify over subsets enumerate the full power set of
the ground set, so they are limited to :data:`MAX_GROUND` resources.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import GroundSetTooLarge, NotAMatroid, ValidationError
from .games import CostFunction, _CostTable
from .set_systems import Clutter, GroundSet, is_matroid_base_family, rank_table

MAX_GROUND = 20
FEAS_TOL = 1e-9


def _check_size(m: int):
    if m > MAX_GROUND:
        raise GroundSetTooLarge(f"{m} resources exceeds the enumeration cap {MAX_GROUND}")


def _subset_sums(x: np.ndarray) -> np.ndarray:
    """``x(U)`` for every bitmask ``U``."""
    m = x.size
    sums = np.zeros(1 << m)
    for k in range(m):
        half = 1 << k
        sums[half : 2 * half] = sums[:half] + x[k]
    return sums


@dataclass(frozen=True)
class WeightedRankSum:
    """``rho(U) = sum_i d_i * rk_i(U)`` over matroids sharing ``ground``."""

    ground: GroundSet
    terms: tuple[tuple[float, Clutter], ...]

    def __post_init__(self):
        terms = tuple((float(d), f) for d, f in self.terms)
        for d, f in terms:
            if d < 0:
                raise ValidationError("rank-sum weights must be nonnegative")
            if f.ground != self.ground:
                raise ValidationError("every term must live on the shared ground set")
            if not is_matroid_base_family(f):
                raise NotAMatroid("every term of a rank sum must be a matroid base family")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def single(cls, f: Clutter, weight: float = 1.0) -> WeightedRankSum:
        return cls(f.ground, ((weight, f),))

    @cached_property
    def table(self) -> np.ndarray:
        """``rho`` of every subset, indexed by bitmask."""
        m = len(self.ground)
        _check_size(m)
        out = np.zeros(1 << m)
        for d, f in self.terms:
            out += d * rank_table(f)
        return out


def _mask(ground: GroundSet, u: Iterable) -> int:
    m = 0
    for r in u:
        k = r if isinstance(r, (int, np.integer)) else ground.index(r)
        m |= 1 << int(k)
    return m


def rho(ws: WeightedRankSum, u: Iterable) -> float:
    """Evaluate the rank sum on a subset given as resource ids or indices."""
    u = _mask(ws.ground, u)
    total = 0.0
    for d, f in ws.terms:
        total += d * max(bin(B & u).count("1") for B in f.masks)
    return total


def in_base_polytope(ws: WeightedRankSum, x, tol: float = FEAS_TOL) -> bool:
    x = np.asarray(x, dtype=float)
    _check_size(x.size)
    if np.any(x < -tol):
        return False
    table = ws.table
    sums = _subset_sums(x)
    if abs(sums[-1] - table[-1]) > tol:
        return False
    return bool(np.all(sums <= table + tol))


@dataclass(frozen=True)
class ExchangeCapacity:
    source: str
    target: str
    capacity: float


def exchange_capacity(ws: WeightedRankSum, x, e, f) -> ExchangeCapacity:
    """Largest step moving mass from ``e`` to ``f`` while staying in the polytope.

    Equal to ``min(x_e, min{rho(U) - x(U) : f in U, e not in U})``, found by
    scanning every subset.
    """
    x = np.asarray(x, dtype=float)
    _check_size(x.size)
    g = ws.ground
    ie = e if isinstance(e, (int, np.integer)) else g.index(e)
    jf = f if isinstance(f, (int, np.integer)) else g.index(f)
    if ie == jf:
        raise ValueError("exchange needs two distinct resources")
    masks = np.arange(1 << x.size)
    sel = ((masks >> jf) & 1).astype(bool) & ~((masks >> ie) & 1).astype(bool)
    slack = (ws.table - _subset_sums(x))[sel].min()
    cap = max(0.0, min(float(x[ie]), float(slack)))
    return ExchangeCapacity(g.resources[ie], g.resources[jf], cap)


def greedy_min_base(ws: WeightedRankSum, weights) -> np.ndarray:
    """Vertex of the base polytope minimizing ``<weights, x>``.

    Resources are taken by ascending weight (ties in ground order) and each
    gets the marginal rank-sum increase of its prefix.
    """
    w = np.asarray(weights, dtype=float)
    if w.shape != (len(ws.ground),) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be a finite vector over the ground set")
    order = np.lexsort((np.arange(w.size), w))
    x = np.zeros(w.size)
    prefix = []
    prev = 0.0
    for k in order:
        prefix.append(int(k))
        cur = rho(ws, prefix)
        x[k] = cur - prev
        prev = cur
    return x


@dataclass
class CertificateReport:
    """Improving exchanges found at a base vector; empty means optimal."""

    violations: list[tuple[str, str, float, float, float]] = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return not self.violations


def certify_optimality(ws: WeightedRankSum, x, costs: Sequence[CostFunction],
                       tol: float = 1e-9) -> CertificateReport:
    """List pairs ``(e, f)`` where moving mass from ``e`` to ``f`` is feasible and cheaper.

    Each violation is ``(e, f, capacity, c_e(x_e), c_f(x_f))``.
    """
    x = np.asarray(x, dtype=float)
    c = _CostTable(list(costs)).values(x)
    report = CertificateReport()
    names = ws.ground.resources
    for i in range(x.size):
        for j in range(x.size):
            if i == j or c[i] <= c[j] + tol:
                continue
            cap = exchange_capacity(ws, x, i, j).capacity
            if cap > tol:
                report.violations.append((names[i], names[j], cap, float(c[i]), float(c[j])))
    return report
