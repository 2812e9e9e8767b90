import itertools

import numpy as np
import pytest

from pmult.core import prefix_sums
from pmult.errors import CaseFiveViolation, RelationConflict
from pmult.small import (BLOCK235, J_LIST, ODD_PAIRS, J_LIST_WITH_45, P235, Program235,
                         block23_relation_holds, check_program235, choose_block23,
                         construct_p23, construct_p235)
from pmult.verify import check_multiplicativity


def test_p23_first_blocks():
    seq = construct_p23(12)
    assert seq.values[1:7].tolist() == [1, 1, -1, 1, -1, -1]
    assert seq.values[7:13].tolist() == [-1, 1, 1, -1, 1, -1]
    assert prefix_sums(seq).S(6) == 0 and prefix_sums(seq).S(12) == 0


def test_case_table_exhaustive():
    # every predetermined quadruple except the all-equal one has a valid choice
    for a, b, c, d in itertools.product((-1, 1), repeat=4):
        if a == b == c == d:
            with pytest.raises(CaseFiveViolation):
                choose_block23(a, b, c, d)
            continue
        x1, x5, _ = choose_block23(a, b, c, d)
        lo, hi = x1 + a + b, c + x5 + d
        assert lo in (-1, 1) and lo == -hi


def test_p23_blocks_and_sums(seq23):
    prof = prefix_sums(seq23)
    assert (prof.sums[6::6] == 0).all()
    assert all(block23_relation_holds(seq23, N) for N in range(seq23.horizon // 6))
    assert prof.sup_abs == 2
    assert check_multiplicativity(seq23).passed


def test_p23_trace_covers_every_choice():
    trace = []
    seq = construct_p23(600, trace=trace)
    targets = [t for t, _, _ in trace]
    assert targets == sorted(targets)
    assert set(targets) == {n for n in range(7, 601) if n % 6 in (1, 5)}
    for t, src, rule in trace:
        if rule in ("case1", "case2", "case3"):
            assert seq.values[t] == -seq.values[src]


def test_p23_rejects_bad_seeds():
    with pytest.raises(ValueError):
        construct_p23(60, f2=1, f3=1)
    with pytest.raises(ValueError):
        construct_p23(5)


def test_p235_odd_values_at_m0(seq235):
    got = {k: int(seq235.values[k]) for k in (1, 7, 11, 13, 19, 23, 29)}
    assert got == {1: 1, 7: -1, 11: -1, 13: 1, 19: -1, 23: -1, 29: 1}


def test_p235_program_and_sums(seq235):
    assert check_program235(seq235) == []
    prof = prefix_sums(seq235)
    assert (prof.sums[BLOCK235::BLOCK235] == 0).all()
    assert check_multiplicativity(seq235).passed


def test_p235_odd_block_identity(seq235):
    v = seq235.values.astype(int)
    for m in range(seq235.horizon // 30):
        odd = sum(v[30 * m + 2 * n - 1] for n in range(1, 16))
        assert odd == v[30 * m + 17]


def test_p235_first_block_sum():
    assert prefix_sums(construct_p235(1920)).S(1920) == 0


def test_j_list_shape():
    assert len(J_LIST) == 21 and J_LIST[0] == 3 and J_LIST[-1] == 63
    # each j is odd, below 64 and not already fixed by the 64m+1, 8m+5, 32m+17 rules
    for j in J_LIST:
        assert j % 2 == 1 and j != 1 and j % 8 != 5 and j % 32 != 17
    assert sorted(set(J_LIST) | {1, 17, 49} | {j for j in range(64) if j % 8 == 5}) == list(range(1, 64, 2))


def test_j_list_with_45_collides():
    assert 45 in J_LIST_WITH_45 and 45 % 8 == 5
    assert 43 not in J_LIST_WITH_45
    with pytest.raises(RelationConflict):
        construct_p235(1920 * 2, Program235(j_list=J_LIST_WITH_45))


def test_l16_pairing_breaks_block_sums():
    seq = construct_p235(1920 * 8, Program235(l_count=16))
    sums = prefix_sums(seq).sums[BLOCK235::BLOCK235]
    assert (sums != 0).any()


def test_f17_is_free():
    for f17 in (-1, 1):
        seq = construct_p235(1920 * 4, Program235(f17=f17))
        assert seq.values[17] == f17
        assert (prefix_sums(seq).sums[BLOCK235::BLOCK235] == 0).all()


def test_program_needs_f2_negative():
    with pytest.raises(RelationConflict):
        Program235(prime_signs={2: 1, 3: -1, 5: 1})


def test_odd_pairs_cover_residues():
    assert sorted(set(ODD_PAIRS) | {17}) == [r for r in range(30) if np.gcd(r, 30) == 1]


def test_p235_trace_sources_precede_targets():
    trace = []
    construct_p235(1920 * 2, trace=trace)
    for t, src, _ in trace:
        if src is not None and t != 1:
            assert P235.is_rough(t)
