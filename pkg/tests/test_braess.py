import numpy as np
import pytest
from hypothesis import given, strategies as st

from braess_lab import instances
from braess_lab.braess import (
    Reduction,
    apply_reduction,
    detect_paradox,
    random_cost_trial,
    random_demand_trial,
    synthesize_counterexample,
    synthesize_demand_counterexample,
    validate_reduction,
    verify_cost_sensitivity,
    verify_demand_sensitivity,
)
from braess_lab.equilibrium import SolverConfig
from braess_lab.errors import (
    BigMTooSmall,
    EmptySystem,
    InvalidReduction,
    NeedThreePopulations,
    NotANonMatroid,
    NotConverged,
    ValidationError,
)
from braess_lab.games import CostFunction
from braess_lab.generators import complete_graph_edges, graphic_matroid, random_clutter, resource_names
from braess_lab.set_systems import GroundSet, is_matroid_base_family, minimal_clutter, set_system, \
    verify_witness

FIG1_PATHS = [["su", "ut"], ["sv", "vt"], ["su", "uv", "vt"]]


# -- reductions --------------------------------------------------------------

def test_reduction_must_lower_costs_and_demands(fig1, fig2):
    with pytest.raises(InvalidReduction):
        validate_reduction(fig1, Reduction(cost_overrides={"uv": CostFunction.constant(2e6)}))
    with pytest.raises(InvalidReduction):
        validate_reduction(fig1, Reduction(cost_overrides={"nope": CostFunction.constant(0.0)}))
    with pytest.raises(InvalidReduction):
        validate_reduction(fig2, Reduction(demand_overrides={"p2": 3.0}))
    with pytest.raises(InvalidReduction):
        validate_reduction(fig2, Reduction(demand_overrides={"p9": 0.0}))
    with pytest.raises(InvalidReduction):
        validate_reduction(fig1, Reduction(cost_overrides={"su": CostFunction.affine(2.0, 0.0)}))


def test_apply_reduction_keeps_strategies(fig2):
    m = apply_reduction(fig2, instances.fig2_reduction())
    assert m.population("p2").demand == 0.0
    assert m.population("p1").strategies == fig2.population("p1").strategies
    assert fig2.population("p2").demand == 2.0


@pytest.mark.parametrize("name", sorted(instances.EXAMPLES))
def test_shipped_reductions_are_valid(name):
    build, red = instances.EXAMPLES[name]
    validate_reduction(build(), red())


# -- detection ---------------------------------------------------------------

def test_fig1_middle_arc_raises_everything(fig1):
    rep = detect_paradox(fig1, instances.fig1_reduction())
    assert rep.verdict_strong and rep.verdict_weak
    assert rep.total_cost == pytest.approx((1.5, 2.0), abs=1e-6)
    assert {r for r, _, _ in rep.weak} == {"su", "vt"}


def test_fig2_demand_cut_doubles_the_total(fig2):
    rep = detect_paradox(fig2, instances.fig2_reduction())
    assert rep.total_cost == pytest.approx((6.0, 12.0), abs=1e-6)
    assert rep.verdict_strong
    assert rep.zero_demand_populations == ["p2"]
    assert "p2" not in [p for p, _, _ in rep.strong]


def test_fig3_population_two_pays_more(fig3):
    rep = detect_paradox(fig3, instances.fig3_reduction())
    p2 = {p: (a, b) for p, a, b in rep.strong}["p2"]
    assert p2 == pytest.approx((0.5, 1.0), abs=1e-6)


@pytest.mark.parametrize("name", ["mst-k4", "queue"])
def test_matroid_examples_show_no_paradox(name):
    build, red = instances.EXAMPLES[name]
    rep = detect_paradox(build(), red())
    assert not rep.verdict_weak and not rep.verdict_strong


def test_detect_paradox_reports_non_convergence(fig1):
    with pytest.raises(NotConverged) as info:
        detect_paradox(fig1, instances.fig1_reduction(), SolverConfig(max_iterations=1))
    assert info.value.report is not None and not info.value.report.reliable


@given(st.integers(0, 10_000))
def test_strong_implies_weak(seed):
    rng = np.random.default_rng(seed)
    m, r = random_cost_trial(rng) if seed % 2 else random_demand_trial(rng)
    rep = detect_paradox(m, r)
    if rep.verdict_strong:
        assert rep.verdict_weak


def test_strong_implies_weak_on_the_paradox_examples():
    for name in ("fig1", "fig2", "fig3"):
        build, red = instances.EXAMPLES[name]
        rep = detect_paradox(build(), red())
        assert rep.verdict_strong and rep.verdict_weak


# -- sensitivity harnesses ---------------------------------------------------

def test_cost_sensitivity_on_matroid_games():
    rep = verify_cost_sensitivity(trials=200, seed=42)
    assert rep.trials == 200 and rep.ok, rep.violations[:5]


def test_demand_sensitivity_on_matroid_games():
    rep = verify_demand_sensitivity(trials=200, seed=7)
    assert rep.trials == 200 and rep.ok, rep.violations[:5]


def test_harness_catches_the_classic_examples():
    rep = verify_cost_sensitivity(trials=3, generator=lambda rng: (instances.fig1(), instances.fig1_reduction()))
    assert len(rep.violations) > 0
    rep = verify_demand_sensitivity(trials=2, generator=lambda rng: (instances.fig2(), instances.fig2_reduction()))
    assert len(rep.violations) > 0


def test_harness_caps():
    with pytest.raises(ValueError):
        verify_cost_sensitivity(trials=1, max_resources=9)
    with pytest.raises(ValueError):
        verify_demand_sensitivity(trials=1, max_populations=4)


# -- synthesis ---------------------------------------------------------------

def _mst_family():
    edges = complete_graph_edges(4)
    g = GroundSet(resource_names(6))
    return graphic_matroid(g, list(range(6)), edges)


def test_synthesis_rejects_matroids_and_short_families():
    with pytest.raises(NotANonMatroid):
        synthesize_counterexample([_mst_family(), [["x"]]])
    with pytest.raises(ValidationError):
        synthesize_counterexample([FIG1_PATHS])
    with pytest.raises(NeedThreePopulations):
        synthesize_demand_counterexample([FIG1_PATHS, [["x"]]])
    with pytest.raises(EmptySystem):
        synthesize_counterexample([FIG1_PATHS, []])


def test_big_m_too_small_is_detected():
    # X = {a,b}, Y = {c,d}; the outside member {e} is cheap unless big_m is large
    fam = [[["a", "b"], ["c", "d"], ["e"]], [["x"]]]
    cx = synthesize_counterexample(fam, check=False)
    assert cx.big_m_resources
    with pytest.raises(BigMTooSmall):
        synthesize_counterexample(fam, big_m=0.1)


def _check_embedding(cx, family):
    m = cx.base_model
    systems = [set_system(s) if not hasattr(s, "ground") else s for s in family]
    assert len(m.ground) == sum(len(s.support) for s in systems)
    for s, tau, p in zip(systems, cx.embedding, m.populations):
        images = list(tau.values())
        assert len(set(images)) == len(images)   # injective
        assert sorted(p.strategies.named()) == sorted(tuple(sorted((tau[r] for r in t), key=m.ground.index))
                                                      for t in s.named())


def test_cost_counterexample_for_the_fig1_paths():
    fam = [FIG1_PATHS, [["x"], ["y", "z"]]]
    cx = synthesize_counterexample(fam)
    _check_embedding(cx, fam)
    assert verify_witness(set_system(FIG1_PATHS), cx.witness)
    rep = detect_paradox(cx.base_model, cx.reduction)
    costs = {p: (a, b) for p, a, b in rep.strong}
    assert costs["p2"][1] - costs["p2"][0] == pytest.approx(0.5, abs=1e-3)


def test_demand_counterexample_doubles_population_one():
    fam = [FIG1_PATHS, [["x"], ["y", "z"]], [["w"]]]
    cx = synthesize_demand_counterexample(fam)
    _check_embedding(cx, fam)
    rep = detect_paradox(cx.base_model, cx.reduction)
    assert rep.verdict_strong
    assert rep.total_cost == pytest.approx((6.0, 12.0), abs=1e-3)


@pytest.mark.parametrize("seed", range(15))
def test_random_nonmatroid_clutters_yield_strong_paradoxes(seed):
    rng = np.random.default_rng(seed)
    while True:
        f = random_clutter(rng, int(rng.integers(2, 8)))
        if not is_matroid_base_family(f):
            break
    other = minimal_clutter(random_clutter(rng, int(rng.integers(1, 5))))
    fam = [f, other, random_clutter(rng, 3)]
    cx = synthesize_counterexample(fam)
    _check_embedding(cx, fam)
    rep = detect_paradox(cx.base_model, cx.reduction)
    p2 = {p: (a, b) for p, a, b in rep.strong}["p2"]
    assert p2[1] - p2[0] == pytest.approx(0.5, abs=1e-3)
    # later populations have demand 0 and are excluded from the strong test
    assert rep.zero_demand_populations == ["p3"]
    cxd = synthesize_demand_counterexample(fam)
    _check_embedding(cxd, fam)
    assert detect_paradox(cxd.base_model, cxd.reduction).verdict_strong


def test_singleton_versus_pair_gives_the_two_population_network():
    cx = synthesize_counterexample([[["a"], ["b", "c"]], [["x"]]])
    w = cx.witness
    assert (w.a, w.b, w.c) == ("a", "b", "c")
    m = cx.base_model
    e, f, g = cx.marked
    assert m.cost_of(e)(0.7) == 1.0 and m.cost_of(f)(0.7) == 0.7 and m.cost_of(g)(0.7) == 3.0
    assert [len(p.strategies) for p in m.populations] == [2, 1]
    assert m.population("p2").strategies.named() == [(f,)]
    rep = detect_paradox(m, cx.reduction)
    assert {p: (a, b) for p, a, b in rep.strong}["p2"] == pytest.approx((0.5, 1.0), abs=1e-6)


def test_cost_embedding_shares_exactly_the_resource_f():
    cx = synthesize_counterexample([FIG1_PATHS, [["x", "y"], ["z"]], [["u"]]])
    t1, t2, t3 = (set(t.values()) for t in cx.embedding)
    assert t1 & t2 == {cx.marked[1]}
    assert not (t3 & (t1 | t2))
