"""Redundancy scheduling in multi-queue systems with bi-modal service times."""

from redsim.designs import (
    Design,
    DifferenceSet,
    bibd_order,
    build_design,
    develop_design,
    find_planar_difference_set,
    verify_bibd,
)
from redsim.errors import (
    DegenerateOverlap,
    InvalidParameter,
    NoDesignAvailable,
    RedsimError,
    SimulationUnderrun,
    UnsupportedParameters,
)
from redsim.indicators import (
    IndicatorSet,
    OverlapPmf,
    indicators_from_pmf,
    lbf_exact_cyclic,
    lbf_random_asymptotic,
    overlap_pmf_bibd,
    overlap_pmf_random,
    overlap_pmf_round_robin,
    policy_indicators,
    table1_row,
)
from redsim.policies import PolicyKind, PolicyState, new_policy
from redsim.simqueue import SimConfig, SimMetrics, preset_config, preset_lambdas, run_sim, sweep
from redsim.urnball import OccupancyStats, OverlapSamples, empirical_indicators, run_experiment1

__version__ = "0.1.0"
