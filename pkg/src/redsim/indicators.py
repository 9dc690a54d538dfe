"""Closed-form load-balancing and overlap indicators for the three policies.

The overlap ``X`` is the number of servers a job's selection shares with the
first job's selection. ROF and RDF are ``1/E[X]`` and ``1/E[X^2]``; LBF is the
ratio of expected minimum to expected maximum urn load.

Probabilities are exact ``Fraction`` values for ``n <= EXACT_LIMIT`` and
floats above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real

from redsim.designs import bibd_order
from redsim.errors import DegenerateOverlap, InvalidParameter, UnsupportedParameters
from redsim.policies import PolicyKind

EXACT_LIMIT = 64


def _ratio(num: int, den: int, exact: bool) -> Real:
    return Fraction(num, den) if exact else num / den


@dataclass(frozen=True)
class OverlapPmf:
    n: int
    r: int
    probs: dict[int, Real]

    def __post_init__(self):
        total = sum(self.probs.values())
        if abs(total - 1) > 1e-12:
            raise InvalidParameter(f"overlap pmf sums to {float(total)!r}, not 1")
        for k, p in self.probs.items():
            if not 0 <= k <= self.r:
                raise InvalidParameter(f"overlap {k} outside 0..{self.r}")
            if p < 0:
                raise InvalidParameter(f"negative probability {float(p)} at k={k}")

    def moment(self, order: int) -> Real:
        return sum(p * k**order for k, p in self.probs.items())

    @property
    def mean(self) -> Real:
        return self.moment(1)

    @property
    def second_moment(self) -> Real:
        return self.moment(2)


@dataclass(frozen=True)
class IndicatorSet:
    lbf: Real
    rof: Real
    rdf: Real
    ex: Real
    ex2: Real

    def as_floats(self) -> dict[str, float]:
        return {k: float(getattr(self, k)) for k in ("lbf", "rof", "rdf", "ex", "ex2")}


def _check_nr(n: int, r: int) -> None:
    if not (1 <= r <= n):
        raise InvalidParameter(f"need 1 <= r <= n, got n={n}, r={r}")


def overlap_pmf_random(n: int, r: int) -> OverlapPmf:
    """Hypergeometric overlap of two independent uniform r-subsets."""
    _check_nr(n, r)
    exact = n <= EXACT_LIMIT
    total = math.comb(n, r)
    probs = {}
    for k in range(r + 1):
        ways = math.comb(r, k) * math.comb(n - r, r - k)
        if ways:
            probs[k] = _ratio(ways, total, exact)
    return OverlapPmf(n, r, probs)


def _check_period(n: int, T: int | None) -> None:
    if T is not None and (T < n or T % n):
        raise InvalidParameter(f"T must be a positive multiple of n={n}, got {T}")


def overlap_pmf_round_robin(n: int, r: int, T: int | None = None) -> OverlapPmf:
    """Overlap pmf for cyclic windows; ``T=None`` gives the long-run limit.

    Only valid when ``gcd(n, r) == 1`` (the windows visit every starting
    phase) and ``n >= 2r - 1`` (some window is disjoint from the first).
    Other cases are refused rather than approximated.
    """
    _check_nr(n, r)
    if math.gcd(n, r) != 1 or n < 2 * r - 1:
        raise UnsupportedParameters(
            f"round-robin closed form needs gcd(n, r) = 1 and n >= 2r-1 (n={n}, r={r}); "
            "measure empirically"
        )
    _check_period(n, T)
    exact = n <= EXACT_LIMIT
    inv_n = _ratio(1, n, exact)
    inv_t = 0 if T is None else _ratio(1, T, exact)
    probs = {0: 1 - (2 * r - 1) * inv_n + r * inv_t}
    for k in range(1, r):
        probs[k] = 2 * inv_n - inv_t
    probs[r] = probs.get(r, 0) + inv_n - inv_t
    return OverlapPmf(n, r, {k: p for k, p in probs.items() if p != 0})


def overlap_pmf_bibd(n: int, r: int, T: int | None = None) -> OverlapPmf:
    """Overlap pmf for block cycling over an (n, r, 1) design.

    Distinct blocks meet in exactly one point, so the limit has support {1, r}.
    With finite ``T`` the repeat mass drops by ``1/T``; that deficit is put on
    ``k = 0`` to keep the pmf normalised.
    """
    if r < 2 or n != bibd_order(r):
        raise InvalidParameter(f"bibd pmf needs n = r(r-1)+1, got n={n}, r={r}")
    _check_period(n, T)
    exact = n <= EXACT_LIMIT
    probs = {1: _ratio(n - 1, n, exact), r: _ratio(1, n, exact)}
    if T is not None:
        probs[r] -= _ratio(1, T, exact)
        probs[0] = _ratio(1, T, exact)
    return OverlapPmf(n, r, {k: p for k, p in sorted(probs.items()) if p != 0})


def indicators_from_pmf(pmf: OverlapPmf, lbf: Real) -> IndicatorSet:
    ex, ex2 = pmf.mean, pmf.second_moment
    if ex == 0:
        raise DegenerateOverlap("E[X] = 0: no overlap with the initial set")
    return IndicatorSet(lbf=lbf, rof=1 / ex, rdf=1 / ex2, ex=ex, ex2=ex2)


def _load_deviation(n: int, r: int, T: int) -> float:
    return math.sqrt(2 * T * r * (n - r) * math.log(n) / n**2)


def expected_max_load_asymptotic(n: int, r: int, T: int) -> float:
    """Large-n approximation of the expected maximum urn load under random selection."""
    _check_nr(n, r)
    return T * r / n + _load_deviation(n, r, T)


def expected_min_load_asymptotic(n: int, r: int, T: int) -> float:
    """Large-n approximation of the expected minimum urn load, clipped at 0.

    The lower tail uses the same CLT deviation as the maximum; it has no
    separate proof and should be read as an approximation.
    """
    _check_nr(n, r)
    return max(0.0, T * r / n - _load_deviation(n, r, T))


def lbf_random_asymptotic(n: int, r: int, T: int) -> float:
    """``max{0, (Tr/n - s) / (Tr/n + s)}`` with ``s = sqrt(2Tr(n-r) ln n / n^2)``."""
    _check_nr(n, r)
    if T < 1:
        raise InvalidParameter(f"T must be >= 1, got {T}")
    mean = T * r / n
    s = _load_deviation(n, r, T)
    return max(0.0, (mean - s) / (mean + s))


def lbf_exact_cyclic(kind: PolicyKind | str) -> int:
    """LBF of round-robin and BIBD when n divides T: every urn ends with Tr/n balls."""
    kind = PolicyKind.parse(kind)
    if kind is PolicyKind.RANDOM:
        raise InvalidParameter("random selection has no exact LBF; use lbf_random_asymptotic")
    return 1


def policy_indicators(kind: PolicyKind | str, n: int, r: int, T: int | None = None) -> IndicatorSet:
    """General-form indicators for one policy at (n, r).

    Random LBF needs ``T``; without it the LBF is NaN. For the cyclic
    policies ``T`` (if given) selects the finite-horizon pmf.
    """
    kind = PolicyKind.parse(kind)
    if kind is PolicyKind.RANDOM:
        lbf = float("nan") if T is None else lbf_random_asymptotic(n, r, T)
        return indicators_from_pmf(overlap_pmf_random(n, r), lbf)
    if kind is PolicyKind.ROUND_ROBIN:
        return indicators_from_pmf(overlap_pmf_round_robin(n, r, T), lbf_exact_cyclic(kind))
    return indicators_from_pmf(overlap_pmf_bibd(n, r, T), lbf_exact_cyclic(kind))


def table1_row(policy: PolicyKind | str, r: int, T: int | None = None) -> IndicatorSet:
    """Indicators with ``n = (r-1)^2 + r`` substituted, in closed form.

    Random rows need ``T`` for the LBF column.
    """
    policy = PolicyKind.parse(policy)
    if r < 2:
        raise InvalidParameter(f"r must be >= 2, got {r}")
    m = (r - 1) ** 2 + r
    rof = Fraction(m, r**2)
    if policy is PolicyKind.RANDOM:
        if T is None:
            raise InvalidParameter("random LBF needs the number of rounds T")
        mean = T * r / m
        dev = math.sqrt(2 * T * r * (r - 1) ** 2 * math.log(m) / m**2)
        lbf = max(0.0, (mean - dev) / (mean + dev))
        rdf = Fraction(m, r * (2 * r - 1))
    elif policy is PolicyKind.ROUND_ROBIN:
        lbf = 1
        rdf = Fraction(3 * m, r * (2 * r**2 + 1))
    else:
        lbf = 1
        rdf = Fraction(m, r * (2 * r - 1))
    return IndicatorSet(lbf=lbf, rof=rof, rdf=rdf, ex=1 / rof, ex2=1 / rdf)
