"""JSON documents for models, reductions, families, results and reports.

Every document carries ``"version": "braess-lab/1"``.  Parsing is strict:
unknown keys, NaN/Infinity and booleans-as-numbers are rejected, and error
messages name the offending field.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any

from .braess import ParadoxReport, Reduction, SynthesizedCounterexample, validate_reduction
from .equilibrium import WardropResult
from .errors import InvalidReduction, ValidationError
from .games import CongestionModel, CostFunction, Population
from .set_systems import GroundSet, NonMatroidWitness, SetSystem, set_system

VERSION = "braess-lab/1"


class DocumentError(ValidationError):
    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


def _reject_constant(name):
    raise ValueError(f"non-finite number {name} is not allowed")


def loads_json(text: str, source: str = "<document>") -> Any:
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except ValueError as exc:
        raise DocumentError(source, f"invalid JSON: {exc}") from None


def read_json(path) -> Any:
    return loads_json(Path(path).read_text(), str(path))


def dumps_json(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def write_atomic(path, text: str) -> None:
    """Write to a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, doc) -> None:
    write_atomic(path, dumps_json(doc))


# -- field helpers -----------------------------------------------------------

def _obj(doc, where, required, optional=()):
    if not isinstance(doc, dict):
        raise DocumentError(where, "expected an object")
    unknown = set(doc) - set(required) - set(optional)
    if unknown:
        raise DocumentError(where, f"unknown field {sorted(unknown)[0]!r}")
    for k in required:
        if k not in doc:
            raise DocumentError(where, f"missing field {k!r}")
    return doc


def _version(doc, where):
    if doc.get("version") != VERSION:
        raise DocumentError(f"{where}.version", f"expected {VERSION!r}, got {doc.get('version')!r}")


def _number(v, where) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise DocumentError(where, f"expected a number, got {v!r}")
    if not math.isfinite(v):
        raise DocumentError(where, "number must be finite")
    return float(v)


def _str(v, where) -> str:
    if not isinstance(v, str) or not v:
        raise DocumentError(where, f"expected a nonempty string, got {v!r}")
    return v


def _list(v, where) -> list:
    if not isinstance(v, list):
        raise DocumentError(where, "expected a list")
    return v


# -- costs -------------------------------------------------------------------

def cost_to_doc(c: CostFunction) -> dict:
    return {"breakpoints": [[t, v] for t, v in c.breakpoints], "final_slope": c.final_slope}


def cost_from_doc(doc, where="cost") -> CostFunction:
    _obj(doc, where, ("breakpoints",), ("final_slope",))
    bps = []
    for k, bp in enumerate(_list(doc["breakpoints"], f"{where}.breakpoints")):
        w = f"{where}.breakpoints[{k}]"
        if not isinstance(bp, list) or len(bp) != 2:
            raise DocumentError(w, "expected a [load, cost] pair")
        bps.append((_number(bp[0], f"{w}[0]"), _number(bp[1], f"{w}[1]")))
    slope = _number(doc.get("final_slope", 0.0), f"{where}.final_slope")
    try:
        return CostFunction(tuple(bps), slope)
    except ValidationError as exc:
        raise DocumentError(where, str(exc)) from None


# -- models ------------------------------------------------------------------

def model_to_doc(m: CongestionModel) -> dict:
    return {
        "version": VERSION,
        "resources": list(m.ground.resources),
        "costs": {rid: cost_to_doc(c) for rid, c in zip(m.ground, m.costs)},
        "populations": [
            {"id": p.id, "demand": p.demand, "strategies": [list(s) for s in p.strategies.named()]}
            for p in m.populations
        ],
    }


def model_from_doc(doc) -> CongestionModel:
    _obj(doc, "model", ("version", "resources", "costs", "populations"))
    _version(doc, "model")
    names = [_str(r, f"resources[{k}]") for k, r in enumerate(_list(doc["resources"], "resources"))]
    try:
        ground = GroundSet(tuple(names))
    except ValidationError as exc:
        raise DocumentError("resources", str(exc)) from None
    costs_doc = doc["costs"]
    if not isinstance(costs_doc, dict):
        raise DocumentError("costs", "expected an object keyed by resource id")
    for rid in costs_doc:
        if rid not in ground._index:
            raise DocumentError(f"costs.{rid}", "cost given for a resource not listed in 'resources'")
    costs = {}
    for rid in ground:
        if rid not in costs_doc:
            raise DocumentError(f"costs.{rid}", "missing cost function")
        costs[rid] = cost_from_doc(costs_doc[rid], f"costs.{rid}")
    pops = []
    for k, pd in enumerate(_list(doc["populations"], "populations")):
        w = f"populations[{k}]"
        _obj(pd, w, ("id", "demand", "strategies"))
        pid = _str(pd["id"], f"{w}.id")
        demand = _number(pd["demand"], f"{w}.demand")
        if demand < 0:
            raise DocumentError(f"{w}.demand", "demand must be >= 0")
        strategies = []
        for j, s in enumerate(_list(pd["strategies"], f"{w}.strategies")):
            sw = f"{w}.strategies[{j}]"
            members = [_str(r, f"{sw}[{q}]") for q, r in enumerate(_list(s, sw))]
            for q, r in enumerate(members):
                if r not in ground._index:
                    raise DocumentError(f"{sw}[{q}]", f"unknown resource {r!r}")
            strategies.append(members)
        try:
            pops.append(Population(pid, demand, SetSystem.from_names(ground, strategies)))
        except ValidationError as exc:
            raise DocumentError(f"{w}.strategies", str(exc)) from None
    try:
        return CongestionModel(ground, tuple(pops), costs)
    except ValidationError as exc:
        raise DocumentError("model", str(exc)) from None


# -- reductions --------------------------------------------------------------

def reduction_to_doc(r: Reduction) -> dict:
    return {
        "version": VERSION,
        "cost_overrides": {rid: cost_to_doc(c) for rid, c in r.cost_overrides.items()},
        "demand_overrides": dict(r.demand_overrides),
    }


def reduction_from_doc(doc, model: CongestionModel | None = None) -> Reduction:
    _obj(doc, "reduction", ("version",), ("cost_overrides", "demand_overrides"))
    _version(doc, "reduction")
    cost_doc = doc.get("cost_overrides", {})
    dem_doc = doc.get("demand_overrides", {})
    if not isinstance(cost_doc, dict):
        raise DocumentError("cost_overrides", "expected an object")
    if not isinstance(dem_doc, dict):
        raise DocumentError("demand_overrides", "expected an object")
    costs = {rid: cost_from_doc(c, f"cost_overrides.{rid}") for rid, c in cost_doc.items()}
    demands = {pid: _number(d, f"demand_overrides.{pid}") for pid, d in dem_doc.items()}
    r = Reduction(costs, demands)
    if model is not None:
        try:
            validate_reduction(model, r)
        except InvalidReduction as exc:
            raise DocumentError("reduction", str(exc)) from None
    return r


# -- families ----------------------------------------------------------------

def family_to_doc(systems) -> dict:
    return {
        "version": VERSION,
        "systems": [
            {"resources": list(s.ground.resources), "strategies": [list(t) for t in s.named()]}
            for s in systems
        ],
    }


def family_from_doc(doc) -> list[SetSystem]:
    _obj(doc, "family", ("version", "systems"))
    _version(doc, "family")
    out = []
    for k, sd in enumerate(_list(doc["systems"], "systems")):
        w = f"systems[{k}]"
        _obj(sd, w, ("strategies",), ("resources",))
        sets = []
        for j, s in enumerate(_list(sd["strategies"], f"{w}.strategies")):
            sets.append([_str(r, f"{w}.strategies[{j}][{q}]") for q, r in enumerate(_list(s, f"{w}.strategies[{j}]"))])
        ground = None
        if "resources" in sd:
            ground = [_str(r, f"{w}.resources[{q}]") for q, r in enumerate(_list(sd["resources"], f"{w}.resources"))]
        if not sets:
            raise DocumentError(f"{w}.strategies", "set system must be nonempty")
        try:
            out.append(set_system(sets, ground))
        except ValidationError as exc:
            raise DocumentError(w, str(exc)) from None
    return out


# -- outputs -----------------------------------------------------------------

def result_to_doc(res: WardropResult) -> dict:
    m = res.model
    cfg = res.config
    return {
        "version": VERSION,
        "converged": res.converged,
        "gap": res.gap,
        "potential": res.potential,
        "iterations": res.iterations,
        "total_cost": res.total_cost,
        "loads": dict(zip(m.ground, map(float, res.loads.load))),
        "resource_costs": dict(zip(m.ground, map(float, res.resource_costs))),
        "population_costs": {p.id: float(c) for p, c in zip(m.populations, res.population_costs)},
        "strategies": [
            {"population": pid, "strategy": list(m.population(pid).strategies.named()[k]), "mass": mass}
            for pid, k, mass in res.used_strategies()
        ],
        "solver": {
            "gap_tolerance": cfg.gap_tolerance,
            "max_iterations": cfg.max_iterations,
            "line_search_tolerance": cfg.line_search_tolerance,
            "away_steps": cfg.away_steps,
            "seed": cfg.seed,
        },
    }


def report_to_doc(rep: ParadoxReport) -> dict:
    doc = {
        "version": VERSION,
        "verdict_weak": rep.verdict_weak,
        "verdict_strong": rep.verdict_strong,
        "reliable": rep.reliable,
        "tolerance": rep.tol,
        "weak": [{"resource": r, "before": a, "after": b} for r, a, b in rep.weak],
        "strong": [{"population": p, "before": a, "after": b} for p, a, b in rep.strong],
        "gaps": list(rep.gaps),
        "total_cost": {"before": rep.total_cost[0], "after": rep.total_cost[1]},
        "zero_demand_populations": list(rep.zero_demand_populations),
    }
    if rep.before is not None and rep.after is not None:
        doc["population_costs"] = {
            p.id: {"before": float(a), "after": float(b)}
            for p, a, b in zip(rep.before.model.populations, rep.before.population_costs,
                               rep.after.population_costs)
        }
    return doc


def witness_to_doc(w: NonMatroidWitness) -> dict:
    return {"X": list(w.X), "Y": list(w.Y), "a": w.a, "b": w.b, "c": w.c}


def counterexample_summary(cx: SynthesizedCounterexample) -> dict:
    return {
        "version": VERSION,
        "witness": witness_to_doc(cx.witness),
        "marked": dict(zip(("e", "f", "g"), cx.marked)),
        "embedding": [dict(tau) for tau in cx.embedding],
        "big_m_resources": list(cx.big_m_resources),
    }
