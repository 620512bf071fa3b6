"""Ground sets, set systems, clutters and matroid recognition.

Subsets are stored as sorted tuples of indices into a :class:`GroundSet`;
the ground-set order is the canonical order for iteration, serialization
and every tie-break.  Internally most routines work on integer bitmasks
(bit ``k`` set iff resource ``k`` is a member).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Iterable, Sequence

import numpy as np

from .errors import GroundSetTooLarge, NotAMatroid, ValidationError, WitnessNotFound

# Hard caps for exhaustive routines.
MAX_CLOSURE_GROUND = 20
MAX_ENUMERATION_GROUND = 20


@dataclass(frozen=True)
class GroundSet:
    resources: tuple[str, ...]

    def __post_init__(self):
        res = tuple(self.resources)
        object.__setattr__(self, "resources", res)
        if not res:
            raise ValidationError("ground set must contain at least one resource")
        for r in res:
            if not isinstance(r, str) or not r:
                raise ValidationError(f"resource ids must be nonempty strings, got {r!r}")
        if len(set(res)) != len(res):
            dup = next(r for r in res if res.count(r) > 1)
            raise ValidationError(f"duplicate resource id {dup!r}")

    def __len__(self):
        return len(self.resources)

    def __iter__(self):
        return iter(self.resources)

    @cached_property
    def _index(self) -> dict[str, int]:
        return {r: k for k, r in enumerate(self.resources)}

    def index(self, resource: str) -> int:
        try:
            return self._index[resource]
        except KeyError:
            raise ValidationError(f"unknown resource {resource!r}") from None

    def indices(self, subset: Iterable[str]) -> tuple[int, ...]:
        return tuple(sorted({self.index(r) for r in subset}))

    def names(self, indices: Iterable[int]) -> tuple[str, ...]:
        return tuple(self.resources[k] for k in sorted(indices))

    def mask(self, subset: Iterable[str]) -> int:
        m = 0
        for r in subset:
            m |= 1 << self.index(r)
        return m


def _mask_of(indices: Iterable[int]) -> int:
    m = 0
    for k in indices:
        m |= 1 << k
    return m


def _indices_of(mask: int) -> tuple[int, ...]:
    out = []
    k = 0
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return tuple(out)


@dataclass(frozen=True)
class SetSystem:
    """A nonempty family of nonempty subsets of ``ground``.

    ``sets`` keeps the caller's member order; each member is a sorted
    index tuple.
    """

    ground: GroundSet
    sets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        m = len(self.ground)
        members = []
        for s in self.sets:
            t = tuple(sorted(int(k) for k in s))
            if not t:
                raise ValidationError("set systems may not contain the empty set")
            if len(set(t)) != len(t):
                raise ValidationError(f"member {t} repeats a resource")
            if t[0] < 0 or t[-1] >= m:
                raise ValidationError(f"member {t} references a resource outside the ground set")
            members.append(t)
        if not members:
            raise ValidationError("set system must contain at least one member")
        if len(set(members)) != len(members):
            raise ValidationError("set system contains duplicate members")
        object.__setattr__(self, "sets", tuple(members))

    @classmethod
    def from_names(cls, ground: GroundSet | Sequence[str], sets: Iterable[Iterable[str]]):
        if not isinstance(ground, GroundSet):
            ground = GroundSet(tuple(ground))
        return cls(ground, tuple(ground.indices(s) for s in sets))

    def __len__(self):
        return len(self.sets)

    def __iter__(self):
        return iter(self.sets)

    @cached_property
    def masks(self) -> tuple[int, ...]:
        return tuple(_mask_of(s) for s in self.sets)

    def named(self) -> list[tuple[str, ...]]:
        return [self.ground.names(s) for s in self.sets]

    @property
    def support(self) -> tuple[int, ...]:
        """Resources occurring in at least one member."""
        return tuple(sorted(set().union(*self.sets)))


@dataclass(frozen=True)
class Clutter(SetSystem):
    """A set system in which no member properly contains another."""

    def __post_init__(self):
        super().__post_init__()
        masks = self.masks
        for p, q in itertools.permutations(masks, 2):
            if p & q == p:
                raise ValidationError(
                    f"clutter members {_indices_of(p)} and {_indices_of(q)} are nested"
                )


def set_system(sets: Iterable[Iterable[Hashable]], ground: Sequence[Hashable] | None = None) -> SetSystem:
    """Build a :class:`SetSystem` from plain labels.

    Labels are converted with ``str``.  Without ``ground`` the ground set is
    the labels in order of first appearance.
    """
    sets = [[str(r) for r in s] for s in sets]
    if ground is None:
        seen: dict[str, None] = {}
        for s in sets:
            for r in s:
                seen.setdefault(r, None)
        ground = list(seen)
    return SetSystem.from_names(GroundSet(tuple(str(r) for r in ground)), sets)


def clutter(sets, ground=None) -> Clutter:
    s = set_system(sets, ground)
    return Clutter(s.ground, s.sets)


@dataclass(frozen=True)
class NonMatroidWitness:
    """Members ``X``, ``Y`` of a clutter and resources ``a``, ``b``, ``c``.

    Every clutter member inside ``X | Y`` contains ``a`` or both ``b`` and ``c``.
    """

    X: tuple[str, ...]
    Y: tuple[str, ...]
    a: str
    b: str
    c: str


def minimal_clutter(s: SetSystem) -> Clutter:
    """Members of ``s`` with no proper subset in ``s``, in their original order."""
    masks = s.masks
    keep = [
        t
        for t, p in zip(s.sets, masks)
        if not any(q != p and q & p == q for q in masks)
    ]
    return Clutter(s.ground, tuple(keep))


def _exchange_violations(f: SetSystem):
    """Yield ``(X, Y, e)`` masks/index with no ``g`` in ``Y - X`` making ``X - e + g`` a member."""
    members = set(f.masks)
    order = sorted(f.masks, key=_indices_of)
    for X in order:
        for Y in order:
            if X == Y:
                continue
            diff_y = _indices_of(Y & ~X)
            for e in _indices_of(X & ~Y):
                base = X & ~(1 << e)
                if not any((base | (1 << g)) in members for g in diff_y):
                    yield X, Y, e


def is_matroid_base_family(f: SetSystem) -> bool:
    """Basis-exchange test: for all X, Y and e in X - Y some g in Y - X has X - e + g in f."""
    return next(_exchange_violations(f), None) is None


def nonmatroid_witness(f: Clutter) -> NonMatroidWitness:
    """Construct ``(X, Y, a, b, c)`` for a clutter failing basis exchange.

    Among violating triples ``(X, Y, e)`` one with ``|Y - X|`` minimal is
    chosen, ties broken by the lexicographically smallest ``(X, Y, e)``.
    If ``Y - X = {a}``, ``b`` and ``c`` are the two smallest elements of
    ``X - Y``; otherwise ``a = e`` and ``b``, ``c`` are the two smallest
    elements of ``Y - X``.
    """
    best = None
    for X, Y, e in _exchange_violations(f):
        key = (bin(Y & ~X).count("1"), _indices_of(X), _indices_of(Y), e)
        if best is None or key < best[0]:
            best = (key, X, Y, e)
    if best is None:
        raise WitnessNotFound("clutter satisfies basis exchange; it is a matroid base family")
    _, X, Y, e = best
    y_only = _indices_of(Y & ~X)
    x_only = _indices_of(X & ~Y)
    if len(y_only) == 1:
        a = y_only[0]
        b, c = x_only[:2]
    else:
        a = e
        b, c = y_only[:2]
    names = f.ground.resources
    return NonMatroidWitness(
        X=f.ground.names(_indices_of(X)),
        Y=f.ground.names(_indices_of(Y)),
        a=names[a],
        b=names[b],
        c=names[c],
    )


def verify_witness(f: SetSystem, w: NonMatroidWitness) -> bool:
    """Check a witness by enumerating every member of ``f`` inside ``X | Y``."""
    g = f.ground
    X, Y = g.mask(w.X), g.mask(w.Y)
    members = set(f.masks)
    if X not in members or Y not in members:
        return False
    a, b, c = (1 << g.index(w.a)), (1 << g.index(w.b)), (1 << g.index(w.c))
    if len({a, b, c}) != 3:
        return False
    sym = X ^ Y
    if (a | b | c) & ~sym:
        return False
    union = X | Y
    for Z in members:
        if Z & ~union:
            continue
        if not (Z & a or (Z & (b | c)) == (b | c)):
            return False
    return True


def rank(f: SetSystem, u: Iterable[str]) -> int:
    """Matroid rank of ``u``: the largest intersection of ``u`` with a basis."""
    if not is_matroid_base_family(f):
        raise NotAMatroid("rank requires a matroid base family")
    return _rank_mask(f.masks, f.ground.mask(u))


def _rank_mask(bases: Sequence[int], u: int) -> int:
    return max(bin(B & u).count("1") for B in bases)


def rank_table(f: SetSystem) -> np.ndarray:
    """Rank of every subset, indexed by bitmask."""
    m = len(f.ground)
    if m > MAX_ENUMERATION_GROUND:
        raise GroundSetTooLarge(f"{m} resources exceeds the enumeration cap {MAX_ENUMERATION_GROUND}")
    all_masks = np.arange(1 << m, dtype=np.int64)
    bases = np.asarray(f.masks, dtype=np.int64)
    out = np.zeros(1 << m, dtype=np.int64)
    for B in bases:
        np.maximum(out, np.bitwise_count(all_masks & B), out=out)
    return out


def _downward_closure(masks: Sequence[int]) -> np.ndarray:
    closure: set[int] = set()
    for B in masks:
        sub = B
        while True:
            closure.add(sub)
            if sub == 0:
                break
            sub = (sub - 1) & B
    return np.array(sorted(closure), dtype=np.int64)


def is_matroid_oracle_bruteforce(f: SetSystem) -> bool:
    """Independent check via the independence axioms on the downward closure.

    Builds every subset of every member, checks augmentation over all
    pairs of independent sets, then checks that the maximal independent
    sets are exactly the members of ``f``.
    """
    m = len(f.ground)
    if m > MAX_CLOSURE_GROUND:
        raise GroundSetTooLarge(f"{m} resources exceeds the closure cap {MAX_CLOSURE_GROUND}")
    indep = _downward_closure(f.masks)
    is_indep = np.zeros(1 << m, dtype=bool)
    is_indep[indep] = True
    sizes = np.bitwise_count(indep)
    for X, size_x in zip(indep, sizes):
        Ys = indep[sizes < size_x]
        if Ys.size == 0:
            continue
        can_augment = np.zeros(Ys.size, dtype=bool)
        for k in range(m):
            bit = np.int64(1 << k)
            if not X & bit:
                continue
            can_augment |= ((Ys & bit) == 0) & is_indep[Ys | bit]
        if not can_augment.all():
            return False
    maximal = {
        int(X)
        for X in indep
        if not any(is_indep[X | (1 << k)] for k in range(m) if not X & (1 << k))
    }
    return maximal == set(f.masks)
