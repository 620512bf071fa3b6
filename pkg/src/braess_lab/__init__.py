"""Wardrop equilibria, matroid recognition and Braess-paradox detection
for nonatomic congestion games on arbitrary set systems."""

from .braess import (
    ParadoxReport,
    Reduction,
    SensitivityReport,
    SynthesizedCounterexample,
    apply_reduction,
    detect_paradox,
    synthesize_counterexample,
    synthesize_demand_counterexample,
    verify_cost_sensitivity,
    verify_demand_sensitivity,
)
from .equilibrium import (
    SolverConfig,
    WardropResult,
    best_response,
    check_equilibrium,
    solve,
    wardrop_gap,
)
from .games import (
    BIG_M,
    CongestionModel,
    CostFunction,
    LoadVector,
    Population,
    StrategyDistribution,
    beckmann_potential,
    pointwise_leq,
    private_cost,
    project_loads,
)
from .polymatroid import (
    WeightedRankSum,
    certify_optimality,
    exchange_capacity,
    greedy_min_base,
    in_base_polytope,
    rho,
)
from .set_systems import (
    Clutter,
    GroundSet,
    NonMatroidWitness,
    SetSystem,
    clutter,
    is_matroid_base_family,
    is_matroid_oracle_bruteforce,
    minimal_clutter,
    nonmatroid_witness,
    rank,
    set_system,
    verify_witness,
)

__version__ = "0.1.0"
