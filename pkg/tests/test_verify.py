import numpy as np
import pytest

from pmult.core import PrimeSet, SignSequence
from pmult.general import build_levels
from pmult.small import construct_p23, construct_p235
from pmult.verify import (check_bounded, check_condition_V, check_multiplicativity,
                          check_telescoping, dyadic_windows,
                          telescoping_chains)


def test_multiplicativity_pass_and_threads():
    seq = construct_p23(6000)
    assert check_multiplicativity(seq).passed
    assert check_multiplicativity(seq, threads=8).to_json() == check_multiplicativity(seq).to_json()


def test_multiplicativity_flip_v4():
    seq = construct_p23(60)
    seq.values[4] *= -1
    rep = check_multiplicativity(seq)
    assert not rep.passed
    w = rep.first_violation
    assert (w["p"], w["m"], w["n"]) == (2, 2, 4)


def test_all_ones_multiplicative():
    seq = SignSequence.from_values([1] * 100, PrimeSet((2, 3)), {2: 1, 3: 1})
    assert check_multiplicativity(seq).passed


def test_bounded_p23_windows():
    seq = construct_p23(10**5)
    rep = check_bounded(seq, windows=[(1, 10**3), (10**3, 10**5)])
    assert rep.passed and rep.checks[0].detail["sups"] == [2, 2]


def test_bounded_all_ones_fails():
    seq = SignSequence.from_values([1] * 1000, PrimeSet((2,)), {2: 1})
    rep = check_bounded(seq)
    assert not rep.passed and rep.first_violation["n"] == 501


def test_bounded_p235_plateau():
    assert check_bounded(construct_p235(1920 * 256)).passed


def test_bounded_explicit_bound():
    seq = construct_p23(600)
    assert check_bounded(seq, bound=2).passed
    assert not check_bounded(seq, bound=1).passed


def test_dyadic_windows():
    assert dyadic_windows(10) == [(1, 1), (2, 3), (4, 7), (8, 10)]


def test_condition_V_base_level(levels235):
    rep = check_condition_V(levels235[0], PrimeSet((2, 3, 5)), trials=100, horizon=30 * 50)
    assert rep.passed


@pytest.mark.parametrize("primes", [(2, 3, 5), (3, 5, 7), (2, 3, 5, 7)])
def test_condition_V_exact(primes):
    P = PrimeSet(primes)
    for lvl in build_levels(P):
        assert check_condition_V(lvl, P, exact=True, horizon=3 * lvl.modulus).passed


def test_condition_V_vacuous(levels235):
    assert check_condition_V(levels235[-1], PrimeSet((2, 3, 5)), trials=0).passed


def test_condition_V_deterministic(levels235):
    a = check_condition_V(levels235[-1], PrimeSet((2, 3, 5)), trials=5, seed=3, drop=40)
    b = check_condition_V(levels235[-1], PrimeSet((2, 3, 5)), trials=5, seed=3, drop=40)
    assert a.to_json() == b.to_json()


@pytest.mark.parametrize("drop", [0, 5, 17, 60])
def test_condition_V_mutation(levels235, drop):
    P = PrimeSet((2, 3, 5))
    lvl = levels235[0]
    rep = check_condition_V(lvl, P, trials=20, drop=drop, horizon=30 * 10)
    assert not rep.passed
    assert not check_condition_V(lvl, P, exact=True, drop=drop, horizon=30 * 10).passed


def test_condition_V_mutation_refined(levels235):
    P = PrimeSet((2, 3, 5))
    lvl = levels235[-1]
    n_block0 = len(lvl.block0)
    rep = check_condition_V(lvl, P, trials=20, drop=n_block0 + 3, horizon=3 * lvl.modulus)
    assert not rep.passed


def test_telescoping(general235, levels235):
    _, seq = general235
    rep = check_telescoping(seq, levels235[-1])
    assert rep.passed and rep.checks[0].detail["chains"] > 0


def test_telescoping_detects_corruption(general235, levels235):
    _, seq = general235
    bad = seq.copy()
    lvl = levels235[-1]
    nprime, s, m, t = telescoping_chains(lvl, seq.horizon)
    i = int(np.flatnonzero(s % 2)[0])
    bad.values[int(lvl.prime ** s[i] * (lvl.parent.modulus * m[i] + t[i]))] *= -1
    assert not check_telescoping(bad, lvl).passed


def test_report_json_shape():
    seq = construct_p23(60)
    seq.values[4] *= -1
    import json
    rows = json.loads(check_multiplicativity(seq).to_json())
    assert set(rows[0]) == {"check", "status", "sup_abs", "first_violation", "nodes_explored"}
    assert rows[0]["status"] == "fail" and rows[0]["first_violation"]["n"] == 4
