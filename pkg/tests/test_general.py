import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pmult.core import PrimeSet, prefix_sums
from pmult.errors import RelationConflict
from pmult.general import (STEP_LIFT, STEP_SHIFT, STEP_SURPLUS, alternating_count, base_step,
                           build_levels, condition_failures, construct_general, finalize,
                           level_rows, materialize, min_exponent, refine_level, seed_indices)
from pmult.verify import check_multiplicativity


def brute_base_block(primes, M):
    """U_M, V_M and their pairing straight from the set definitions."""
    P = math.prod(primes)
    Pp = math.prod(primes[:-2])
    block = range(P * M + 1, P * (M + 1) + 1)
    U = [n for n in block if math.gcd(n, P) == 1]
    V = [n for n in block if math.gcd(n, Pp) == 1 and (n % primes[-1] == 0 or n % primes[-2] == 0)]
    return U, V, list(zip(V, U))


def test_base_step_example_235():
    lvl = base_step(PrimeSet((2, 3, 5)))
    pairs = lvl.relations_in_block(1).tolist()
    assert [tuple(p) for p in pairs] == [(33, 31), (35, 37), (39, 41), (45, 43), (51, 47),
                                         (55, 49), (57, 53)]
    assert lvl.free_in_block(1).tolist() == [59]
    U, V, oracle = brute_base_block((2, 3, 5), 1)
    assert len(U) == 8 and len(V) == 7
    assert [tuple(p) for p in pairs] == oracle


@pytest.mark.parametrize("primes", [(2, 3, 5), (3, 5, 7), (2, 3, 5, 7)])
def test_base_step_matches_oracle(primes):
    lvl = base_step(PrimeSet(primes))
    for M in (1, 2, 7):
        U, V, oracle = brute_base_block(primes, M)
        assert [tuple(p) for p in lvl.relations_in_block(M).tolist()] == oracle
        assert lvl.free_in_block(M).tolist() == U[len(V):]


def test_base_step_counts_357():
    lvl = base_step(PrimeSet((3, 5, 7)))
    assert lvl.stats["U"] == 48 and lvl.stats["U"] > lvl.stats["V"]


@pytest.mark.parametrize("primes", [(2, 3, 5), (3, 5, 7), (2, 5, 7), (2, 3, 5, 7)])
def test_u_is_totient(primes):
    P = math.prod(primes)
    phi = P
    for p in primes:
        phi = phi // p * (p - 1)
    assert base_step(PrimeSet(primes)).stats["U"] == phi


def test_base_step_needs_three_primes():
    with pytest.raises(ValueError):
        base_step(PrimeSet((2, 3)))


@pytest.mark.parametrize("B, p, b, a", [(20, 3, 30, 1), (1, 3, 30, 4), (1, 2, 30, 6)])
def test_min_exponent_examples(B, p, b, a):
    assert min_exponent(B, p, b) == a


def test_min_exponent_rejects_zero():
    with pytest.raises(ValueError):
        min_exponent(0, 3, 30)


@given(st.integers(1, 500), st.sampled_from([2, 3, 5, 7]), st.integers(2, 10**5))
def test_min_exponent_is_minimal(B, p, b):
    a = min_exponent(B, p, b)
    assert B * alternating_count(p, a) * p > b
    assert a == 1 or B * alternating_count(p, a - 1) * p <= b


@pytest.mark.parametrize("primes", [(2, 3, 5), (3, 5, 7), (2, 3, 5, 7), (3, 5, 7, 11)])
def test_level_chain_moduli(primes):
    P = PrimeSet(primes)
    levels = build_levels(P)
    assert levels[0].modulus == P.product
    for lvl in levels[1:]:
        parent = lvl.parent
        assert lvl.modulus == lvl.prime ** lvl.exponent * parent.modulus
        assert lvl.exponent == min_exponent(parent.B, lvl.prime, parent.modulus)
        assert condition_failures(lvl, 3 * lvl.modulus) == []


def test_known_moduli():
    assert build_levels(PrimeSet((2, 3, 5)))[-1].modulus == 1920
    assert build_levels(PrimeSet((3, 5, 7)))[-1].modulus == 945
    assert [l.modulus for l in build_levels(PrimeSet((2, 3, 5, 7)))] == [210, 5670, 181440]


def test_surplus_count_is_b_over_p(levels235):
    lvl = levels235[-1]
    n_surplus = int((lvl.kinds == STEP_SURPLUS).sum())
    assert n_surplus == lvl.parent.modulus // lvl.prime


def test_shift_targets_same_block(levels235):
    lvl = levels235[-1]
    b = lvl.modulus
    for M in (1, 2, 5):
        pairs = lvl.relations_in_block(M)
        assert ((pairs[:, 0] - 1) // b == M).all() and ((pairs[:, 1] - 1) // b == M).all()
    shift = lvl.pattern[lvl.kinds == STEP_SHIFT]
    assert shift.size and ((shift[:, 1] - shift[:, 0]) == lvl.parent.modulus).all()


def test_lift_pairs_shape(levels235):
    lvl = levels235[-1]
    p, bj = lvl.prime, lvl.parent.modulus
    lift = lvl.pattern[lvl.kinds == STEP_LIFT] + lvl.modulus
    x, y = lift[:, 0], lift[:, 1]
    # (p (b m + t), p b m + t)
    t = y % bj
    assert ((y - t) % (p * bj) == 0).all()
    assert (x == p * ((y - t) // p + t)).all()


def test_relation_targets_distinct_and_disjoint(general235):
    prog, _ = general235
    rel_y = prog.relations[:, 1]
    chain_y = prog.chain[:, 1]
    assert np.unique(rel_y).size == rel_y.size
    assert np.intersect1d(rel_y, chain_y).size == 0


def test_materialized_relations_hold(general235):
    prog, seq = general235
    v = seq.values
    pairs = np.concatenate([prog.relations, prog.chain])
    pairs = pairs[(pairs <= seq.horizon).all(axis=1)]
    assert (v[pairs[:, 1]] == -v[pairs[:, 0]]).all()
    assert v[1] == 1
    assert check_multiplicativity(seq).passed


def test_chain_alternates(general235):
    prog, seq = general235
    a = np.concatenate([prog.chain[:1, 0], prog.chain[:, 1]])
    vals = seq.values[a]
    assert (vals[1:] == -vals[:-1]).all()


def test_seeds_are_rough_head(general235):
    prog, _ = general235
    P = prog.primes.product
    rough = [n for n in range(1, P + 1) if math.gcd(n, P) == 1]
    assert sorted(prog.seeds)[: len(rough)] == rough
    assert len(prog.seeds) == len(rough) + 1


@pytest.mark.parametrize("seed", range(10))
def test_random_seeds_stay_bounded(seed):
    P = PrimeSet((2, 3, 5))
    rng = np.random.default_rng(seed)
    signs = {p: int(s) for p, s in zip(P, rng.choice((-1, 1), size=3))}
    prog, seq = construct_general(P, 1920 * 12, prime_signs=signs, rng=rng)
    S = prefix_sums(seq).sums
    marks = S[1920::1920]
    # constant block-boundary sums bound |S| by |S(b_1)| + b_1 at every horizon
    assert (marks == marks[0]).all()
    assert np.abs(S).max() <= abs(marks[0]) + 1920


def test_block_boundary_sums_constant(general357):
    _, seq = general357
    S = prefix_sums(seq).sums
    # S(b_1 M) takes at most two values once M >= 1
    assert len(set(S[945::945].tolist())) <= 2


def test_materialize_needs_every_seed(levels235):
    prog = finalize(levels235[-1], PrimeSet((2, 3, 5)), horizon=1920 * 2)
    del prog.seeds[7]
    with pytest.raises(RelationConflict):
        materialize(prog)


def test_program_csv(general235):
    prog, _ = general235
    text = prog.to_csv()
    lines = text.splitlines()
    assert lines[0] == "kind,x,y"
    kinds = {ln.split(",")[0] for ln in lines[1:]}
    assert kinds == {"seed", "relation", "chain"}


def test_level_rows(levels235):
    rows = list(level_rows(levels235[-1].chain(), 1920 * 2))
    assert rows[0][:3] == (1, 1920, 6)
    assert {r[0] for r in rows} == {1, 2}


def test_seed_indices():
    assert seed_indices(PrimeSet((2, 3, 5)), 59) == [1, 7, 11, 13, 17, 19, 23, 29, 59]


def test_refine_rejects_empty_free_set(levels235):
    base = levels235[0]
    empty = type(base)(**{**base.__dict__, "residues": np.zeros(0, dtype=np.int64)})
    with pytest.raises(ValueError):
        refine_level(empty, 2)
