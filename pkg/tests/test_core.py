import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pmult.core import (INT64_MAX, PrimeSet, SignSequence, checked_mul, checked_pow,
                        prefix_sums, read_sequence, rough_decompose, rough_parts,
                        write_sequence)
from pmult.errors import UnsetValue

PRIME_SETS = [PrimeSet((2, 3)), PrimeSet((2, 3, 5)), PrimeSet((3, 5, 7)), PrimeSet((2, 3, 5, 7))]


def test_primeset_products():
    P = PrimeSet.parse("2,3,5,7")
    assert P.product == 210 and P.k == 4
    assert P.coprime_part == 6
    assert P.product_without(5) == 42


@pytest.mark.parametrize("text", ["3,2", "2,2", "2,4", "", "1"])
def test_primeset_rejects(text):
    with pytest.raises(ValueError):
        PrimeSet.parse(text)


def test_checked_arithmetic():
    assert checked_mul(2**31, 2**31) == 2**62
    with pytest.raises(OverflowError):
        checked_mul(2**32, 2**32)
    with pytest.raises(OverflowError):
        checked_pow(3, 40)
    assert checked_pow(2, 62) <= INT64_MAX


@pytest.mark.parametrize("n, primes, exps, m", [
    (12, (2, 3), (2, 1), 1),
    (1, (2, 3, 5), (0, 0, 0), 1),
    (227, (2, 3, 5), (0, 0, 0), 227),
])
def test_rough_decompose_examples(n, primes, exps, m):
    r = rough_decompose(n, PrimeSet(primes))
    assert tuple(r.exponents) == exps and r.rough_part == m


@given(st.integers(1, 10**12), st.sampled_from(PRIME_SETS))
def test_rough_decompose_reconstructs(n, P):
    r = rough_decompose(n, P)
    assert r.recompose(P) == n
    assert math.gcd(r.rough_part, P.product) == 1


@pytest.mark.parametrize("P", PRIME_SETS)
def test_rough_parts_match_scalar(P):
    rough, _ = rough_parts(10**6, P)
    n = np.arange(1, 10**6 + 1)
    assert (np.gcd(rough[1:], P.product) == 1).all()
    assert ((n % rough[1:]) == 0).all()
    for k in [1, 97, 210, 999_999, 10**6]:
        assert rough[k] == rough_decompose(k, P).rough_part


def _seed_table():
    # f(1)=1, f(2)=1, f(3)=-1, f(5)=-1 on [1, 6]
    return SignSequence.from_values([1, 1, -1, 1, -1, -1], PrimeSet((2, 3)), {2: 1, 3: -1})


def test_eval_examples():
    seq = _seed_table()
    assert seq.eval(6) == -1
    assert seq.eval(1) == 1
    big = SignSequence(12, PrimeSet((2, 3)), {2: 1, 3: -1})
    big.values[1] = 1
    assert big.eval(12) == -1  # 12 = 2^2 * 3


def test_eval_unset_rough_part():
    seq = SignSequence(10, PrimeSet((2, 3)), {2: 1, 3: -1})
    seq.values[1] = 1
    with pytest.raises(UnsetValue) as info:
        seq.eval(10)
    assert info.value.n == 5


def test_prefix_sums_first_block():
    prof = prefix_sums(_seed_table())
    assert list(prof.sums[1:]) == [1, 2, 1, 2, 1, 0]
    assert prof.sup_abs == 2 and prof.argmax == 2


def test_prefix_sums_all_ones():
    seq = SignSequence.from_values([1] * 5, PrimeSet((2,)), {2: 1})
    assert prefix_sums(seq).S(5) == 5


def test_prefix_sums_rejects_gaps():
    seq = SignSequence(5, PrimeSet((2,)), {2: 1})
    seq.values[1:3] = 1
    with pytest.raises(UnsetValue):
        prefix_sums(seq)


@given(st.lists(st.sampled_from([-1, 1]), min_size=2, max_size=300), st.data())
def test_prefix_sums_additive(vals, data):
    vals[0] = 1
    seq = SignSequence.from_values(vals, PrimeSet((2,)), {2: vals[1]})
    prof = prefix_sums(seq)
    a = data.draw(st.integers(0, len(vals)))
    b = data.draw(st.integers(a, len(vals)))
    assert prof.S(b) - prof.S(a) == sum(vals[a:b])


@settings(max_examples=30)
@given(st.lists(st.sampled_from([-1, 1]), min_size=1, max_size=200), st.sampled_from(["csv", "binary"]))
def test_sequence_roundtrip(tmp_path_factory, vals, fmt):
    vals[0] = 1
    P = PrimeSet((2, 3))
    seq = SignSequence.from_values(vals, P)
    path = tmp_path_factory.mktemp("io") / f"seq.{fmt}"
    write_sequence(seq, path, fmt)
    back = read_sequence(path, P, fmt)
    assert back.horizon == seq.horizon
    assert (back.values == seq.values).all()


def test_binary_layout(tmp_path):
    seq = SignSequence.from_values([1, -1, -1, 1, 1, 1, -1, 1, 1], PrimeSet((2,)))
    write_sequence(seq, tmp_path / "s.bin", "binary")
    raw = (tmp_path / "s.bin").read_bytes()
    assert raw[:8] == (9).to_bytes(8, "little")
    assert raw[8:] == bytes([0b10111001, 0b00000001])
