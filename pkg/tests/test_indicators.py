import math
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import block_cycle_overlap_pmf, moments, random_overlap_pmf, round_robin_overlap_pmf
from redsim.designs import build_design
from redsim.errors import DegenerateOverlap, InvalidParameter, UnsupportedParameters
from redsim.indicators import (
    OverlapPmf,
    expected_max_load_asymptotic,
    expected_min_load_asymptotic,
    indicators_from_pmf,
    lbf_exact_cyclic,
    lbf_random_asymptotic,
    overlap_pmf_bibd,
    overlap_pmf_random,
    overlap_pmf_round_robin,
    policy_indicators,
    table1_row,
)

# Random-selection LBF value at (21, 5, 50), evaluated with mpmath at 40 digits.
LBF_21_5_50 = 0.23133097687852722995
# 2 (n/r - 1) ln n at (21, 5).
THRESHOLD_21_5 = 19.484943601429907178


def test_random_pmf_7_3():
    pmf = overlap_pmf_random(7, 3)
    assert pmf.probs == {0: F(4, 35), 1: F(18, 35), 2: F(12, 35), 3: F(1, 35)}
    assert pmf.probs == random_overlap_pmf(7, 3)
    assert pmf.mean == F(9, 7)


@pytest.mark.parametrize("n", [1, 4, 9])
def test_random_pmf_full_overlap(n):
    assert overlap_pmf_random(n, n).probs == {n: 1}


def test_random_pmf_rejects_r_above_n():
    with pytest.raises(InvalidParameter):
        overlap_pmf_random(3, 4)


def test_round_robin_pmf_limit_7_3():
    pmf = overlap_pmf_round_robin(7, 3)
    assert pmf.probs == {0: F(2, 7), 1: F(2, 7), 2: F(2, 7), 3: F(1, 7)}
    assert pmf.probs == round_robin_overlap_pmf(7, 3)
    assert pmf.mean == F(9, 7)
    assert pmf.second_moment == F(19, 7) == F(2 * 27 + 3, 3 * 7)


def test_round_robin_pmf_finite_T_counts():
    # Over rounds 2..T: T/n - 1 repeats, 2T/n - 1 windows per partial overlap.
    n, r, T = 7, 3, 70
    pmf = overlap_pmf_round_robin(n, r, T)
    assert pmf.probs[r] == F(1, n) - F(1, T)
    assert pmf.probs[1] == F(2, n) - F(1, T)
    assert pmf.probs[0] == 1 - F(2 * r - 1, n) + F(r, T)


@pytest.mark.parametrize("n,r", [(6, 2), (9, 3), (7, 5)])
def test_round_robin_pmf_refuses_unsupported(n, r):
    with pytest.raises(UnsupportedParameters):
        overlap_pmf_round_robin(n, r)


def test_round_robin_unsupported_case_really_differs():
    # n=6, r=2: the windows never overlap in exactly one urn.
    from oracles import cyclic_windows

    windows = cyclic_windows(6, 2, 6)
    assert all(len(windows[0] & w) != 1 for w in windows)


def test_round_robin_pmf_rejects_bad_T():
    with pytest.raises(InvalidParameter):
        overlap_pmf_round_robin(7, 3, 10)


def test_bibd_pmf_limit_7_3():
    pmf = overlap_pmf_bibd(7, 3)
    assert pmf.probs == {1: F(6, 7), 3: F(1, 7)}
    assert pmf.probs == block_cycle_overlap_pmf(build_design(3).blocks)
    assert pmf.mean == F(9, 7)
    assert pmf.second_moment == F(15, 7)


def test_bibd_pmf_finite_T():
    pmf = overlap_pmf_bibd(7, 3, 700)
    assert pmf.probs == {0: F(1, 700), 1: F(6, 7), 3: F(1, 7) - F(1, 700)}


def test_bibd_pmf_rejects_wrong_n():
    with pytest.raises(InvalidParameter):
        overlap_pmf_bibd(8, 3)


def test_indicators_from_pmf_values():
    rand = indicators_from_pmf(overlap_pmf_random(7, 3), 0)
    assert (rand.rof, rand.rdf) == (F(7, 9), F(7, 15))
    bibd = indicators_from_pmf(overlap_pmf_bibd(7, 3), 1)
    assert (bibd.rof, bibd.rdf) == (F(7, 9), F(7, 15))
    rr = indicators_from_pmf(overlap_pmf_round_robin(7, 3), 1)
    assert rr.rdf == F(7, 19)
    assert float(rr.rdf) == pytest.approx(0.3684, abs=1e-4)


def test_indicators_degenerate():
    with pytest.raises(DegenerateOverlap):
        indicators_from_pmf(OverlapPmf(5, 2, {0: F(1)}), 1)


def test_pmf_validation():
    with pytest.raises(InvalidParameter):
        OverlapPmf(5, 2, {0: F(1, 2)})
    with pytest.raises(InvalidParameter):
        OverlapPmf(5, 2, {3: F(1)})


@pytest.mark.parametrize("n", range(2, 51))
def test_random_closed_forms(n):
    for r in range(1, n + 1):
        ind = indicators_from_pmf(overlap_pmf_random(n, r), 0)
        assert abs(ind.rof - F(n, r * r)) <= 1e-12
        assert abs(ind.rdf - F(n * (n - 1), r * r * (n + r * (r - 2)))) <= 1e-12


def test_random_pmf_float_mode_above_exact_limit():
    pmf = overlap_pmf_random(100, 7)
    assert isinstance(pmf.mean, float)
    assert pmf.mean == pytest.approx(49 / 100, rel=1e-12)


@given(n=st.integers(2, 64), data=st.data())
def test_moment_identities(n, data):
    r = data.draw(st.integers(1, n))
    assert overlap_pmf_random(n, r).mean == F(r * r, n)
    ex2 = overlap_pmf_random(n, r).second_moment
    assert ex2 >= overlap_pmf_random(n, r).mean ** 2
    if math.gcd(n, r) == 1 and n >= 2 * r - 1:
        pmf = overlap_pmf_round_robin(n, r)
        assert pmf.probs == round_robin_overlap_pmf(n, r)
        assert pmf.mean == F(r * r, n)
        assert pmf.second_moment == F(2 * r**3 + r, 3 * n)


@pytest.mark.parametrize("r", range(2, 11))
def test_summary_row_identities(r):
    n = r * (r - 1) + 1
    rand, rr, bibd = (policy_indicators(k, n, r) for k in ("random", "round-robin", "bibd"))
    assert abs(rand.rof - rr.rof) <= 1e-12 and abs(rr.rof - bibd.rof) <= 1e-12
    assert abs(rand.rdf - bibd.rdf) <= 1e-12
    assert rr.rdf <= bibd.rdf
    assert abs(bibd.ex - F(n + r - 1, n)) <= 1e-12


@pytest.mark.parametrize("r", range(2, 11))
@pytest.mark.parametrize("policy", ["random", "round-robin", "bibd"])
def test_summary_row_matches_general_form(policy, r):
    n = r * (r - 1) + 1
    T = 50 * n
    row = table1_row(policy, r, T)
    gen = policy_indicators(policy, n, r, T if policy == "random" else None)
    assert abs(row.rof - gen.rof) <= 1e-12
    assert abs(row.rdf - gen.rdf) <= 1e-12
    assert abs(row.lbf - gen.lbf) <= 1e-12


def test_summary_row_examples():
    assert table1_row("random", 4, 50).rof == F(13, 16)
    assert table1_row("round-robin", 3).rdf == F(21, 57) == F(7, 19)
    assert table1_row("bibd", 3).rof == F(7, 9)


def test_summary_row_errors():
    with pytest.raises(InvalidParameter):
        table1_row("bibd", 1)
    with pytest.raises(InvalidParameter):
        table1_row("random", 3)


def test_lbf_random_value():
    assert lbf_random_asymptotic(21, 5, 50) == pytest.approx(LBF_21_5_50, abs=1e-12)


@pytest.mark.parametrize("n,T", [(5, 1), (21, 7), (100, 3)])
def test_lbf_full_selection(n, T):
    assert lbf_random_asymptotic(n, n, T) == 1


def test_lbf_threshold():
    assert 2 * (21 / 5 - 1) * math.log(21) == pytest.approx(THRESHOLD_21_5, abs=1e-12)
    assert lbf_random_asymptotic(21, 5, 19) == 0
    assert lbf_random_asymptotic(21, 5, 20) > 0


@given(n=st.integers(2, 200), data=st.data())
def test_lbf_zero_exactly_below_threshold(n, data):
    r = data.draw(st.integers(1, n - 1))
    T = data.draw(st.integers(1, 2000))
    threshold = 2 * (n / r - 1) * math.log(n)
    value = lbf_random_asymptotic(n, r, T)
    assert 0 <= value < 1
    if T < threshold * (1 - 1e-9):
        assert value == 0
    elif T > threshold * (1 + 1e-9):
        assert value > 0


@given(n=st.integers(2, 100), data=st.data())
def test_lbf_monotone_in_T(n, data):
    r = data.draw(st.integers(1, n - 1))
    values = [lbf_random_asymptotic(n, r, T) for T in range(1, 400, 7)]
    assert all(a <= b for a, b in zip(values, values[1:]))


def test_lbf_tends_to_one():
    assert lbf_random_asymptotic(21, 5, 10**9) > 0.999


def test_load_approximations_bracket_mean():
    lo, hi = expected_min_load_asymptotic(21, 5, 50), expected_max_load_asymptotic(21, 5, 50)
    assert lo <= 50 * 5 / 21 <= hi
    assert lo / hi == pytest.approx(LBF_21_5_50, abs=1e-12)


@pytest.mark.parametrize("kind", ["round-robin", "bibd"])
def test_lbf_exact_cyclic(kind):
    assert lbf_exact_cyclic(kind) == 1


def test_lbf_exact_cyclic_random_rejected():
    with pytest.raises(InvalidParameter):
        lbf_exact_cyclic("random")
