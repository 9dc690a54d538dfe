"""Monte Carlo for the only-arrival system: T rounds of drawing r urns of n.

Each round is one job dispatched to a frozen system; urn loads stand in for
queue lengths, and the overlap of every later round with the first round's
urns gives the sample of ``X``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from redsim.designs import Design
from redsim.errors import DegenerateOverlap, InvalidParameter, RedsimError
from redsim.indicators import (
    IndicatorSet,
    expected_max_load_asymptotic,
    expected_min_load_asymptotic,
    lbf_random_asymptotic,
    policy_indicators,
)
from redsim.policies import PolicyKind, new_policy


@dataclass
class OccupancyStats:
    n: int
    r: int
    T: int
    replications: int
    mean_min: float
    mean_max: float
    per_urn_mean: np.ndarray

    @property
    def lbf_emp(self) -> float:
        return self.mean_min / self.mean_max


@dataclass
class OverlapSamples:
    """Overlap of rounds 2..T with round 1, pooled over replications."""

    samples: np.ndarray

    @property
    def ex_emp(self) -> float:
        return float(self.samples.mean())

    @property
    def ex2_emp(self) -> float:
        return float(np.mean(self.samples.astype(np.float64) ** 2))

    def histogram(self, r: int) -> np.ndarray:
        return np.bincount(self.samples, minlength=r + 1)


def run_experiment1(
    kind: PolicyKind | str,
    n: int,
    r: int,
    T: int,
    replications: int = 1,
    seed: int = 0,
    design: Design | None = None,
) -> tuple[OccupancyStats, OverlapSamples]:
    """Run ``replications`` independent only-arrival experiments of ``T`` rounds.

    Replication ``j`` uses a fresh policy state seeded with ``seed + j``, so
    results do not depend on the order replications are run in. Order
    statistics are averaged per replication (mean of minima, mean of maxima).
    """
    kind = PolicyKind.parse(kind)
    if not (1 <= r <= n):
        raise InvalidParameter(f"need 1 <= r <= n, got n={n}, r={r}")
    if T < math.ceil(n / r) or T < 2:
        raise InvalidParameter(f"T={T} too small: need T >= max(2, ceil(n/r))")
    if replications < 1:
        raise InvalidParameter("replications must be >= 1")

    mins = np.empty(replications)
    maxs = np.empty(replications)
    load_sum = np.zeros(n)
    overlaps = np.empty((replications, T - 1), dtype=np.uint8)
    for rep in range(replications):
        policy = new_policy(kind, n, r, seed=seed + rep, design=design)
        sel = policy.draw(T)
        loads = np.bincount(sel.ravel(), minlength=n)
        mins[rep] = loads.min()
        maxs[rep] = loads.max()
        load_sum += loads
        initial = np.zeros(n, dtype=bool)
        initial[sel[0]] = True
        overlaps[rep] = initial[sel[1:]].sum(axis=1)

    occ = OccupancyStats(
        n=n,
        r=r,
        T=T,
        replications=replications,
        mean_min=float(mins.mean()),
        mean_max=float(maxs.mean()),
        per_urn_mean=load_sum / replications,
    )
    return occ, OverlapSamples(overlaps.ravel())


def empirical_indicators(occ: OccupancyStats, ov: OverlapSamples) -> IndicatorSet:
    if ov.samples.size == 0:
        raise InvalidParameter("no overlap samples")
    ex, ex2 = ov.ex_emp, ov.ex2_emp
    if ex == 0:
        raise DegenerateOverlap("every sampled overlap is zero")
    return IndicatorSet(lbf=occ.lbf_emp, rof=1 / ex, rdf=1 / ex2, ex=ex, ex2=ex2)


def analytic_indicators(kind: PolicyKind | str, n: int, r: int, T: int) -> IndicatorSet | None:
    """Closed-form counterpart of an experiment, or None where none applies."""
    kind = PolicyKind.parse(kind)
    if kind is not PolicyKind.RANDOM and T % n:
        T = None
    try:
        return policy_indicators(kind, n, r, T)
    except RedsimError:
        return None


CURVE_COLUMNS = (
    "policy", "n", "r", "T", "reps", "seed",
    "mean_min", "mean_max", "lbf_emp",
    "min_analytic", "max_analytic", "lbf_analytic",
)


def occupancy_curves(
    kind: PolicyKind | str,
    n_list: list[int],
    r_range: list[int] | None = None,
    T: int = 50,
    replications: int = 200,
    seed: int = 0,
) -> list[dict]:
    """Sweep ``r`` for every ``n``: empirical min/max loads and LBF.

    ``r_range=None`` sweeps ``1..n`` for each n. A cell that fails keeps its
    row with empty measurement fields so the table stays rectangular.
    The analytic columns are the large-n random-selection approximations.
    """
    kind = PolicyKind.parse(kind)
    rows = []
    for n in n_list:
        for r in r_range if r_range is not None else range(1, n + 1):
            row = dict.fromkeys(CURVE_COLUMNS, "")
            row.update(policy=kind.value, n=n, r=r, T=T, reps=replications, seed=seed)
            try:
                occ, _ = run_experiment1(kind, n, r, T, replications, seed)
                row.update(mean_min=occ.mean_min, mean_max=occ.mean_max, lbf_emp=occ.lbf_emp)
                row.update(
                    min_analytic=expected_min_load_asymptotic(n, r, T),
                    max_analytic=expected_max_load_asymptotic(n, r, T),
                    lbf_analytic=lbf_random_asymptotic(n, r, T),
                )
            except RedsimError:
                pass
            rows.append(row)
    return rows
