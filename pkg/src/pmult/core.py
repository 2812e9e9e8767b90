"""Prime sets, sign tables and partial sums shared by every construction."""
from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import UnsetValue

INT64_MAX = 2**63 - 1
UNSET = 0


def checked_mul(a: int, b: int) -> int:
    r = a * b
    if abs(r) > INT64_MAX:
        raise OverflowError(f"{a} * {b} exceeds the signed 64-bit range")
    return r


def checked_pow(base: int, exp: int) -> int:
    r = 1
    for _ in range(exp):
        r = checked_mul(r, base)
    return r


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    return all(n % d for d in range(3, math.isqrt(n) + 1, 2))


@dataclass(frozen=True)
class PrimeSet:
    """An ascending tuple of distinct primes p_1 < ... < p_k."""

    primes: tuple[int, ...]

    def __post_init__(self):
        ps = tuple(int(p) for p in self.primes)
        object.__setattr__(self, "primes", ps)
        if not ps:
            raise ValueError("a prime set needs at least one prime")
        for p in ps:
            if not is_prime(p):
                raise ValueError(f"{p} is not prime")
        if any(a >= b for a, b in zip(ps, ps[1:])):
            raise ValueError(f"primes must be strictly ascending: {ps}")
        self.product  # overflow check happens eagerly

    @classmethod
    def parse(cls, text: str) -> PrimeSet:
        return cls(tuple(int(t) for t in text.replace(" ", "").split(",") if t))

    @property
    def k(self) -> int:
        return len(self.primes)

    @property
    def product(self) -> int:
        r = 1
        for p in self.primes:
            r = checked_mul(r, p)
        return r

    @property
    def coprime_part(self) -> int:
        """Product of p_1..p_{k-2}; 1 when k <= 2."""
        r = 1
        for p in self.primes[:-2]:
            r = checked_mul(r, p)
        return r

    def product_without(self, p: int) -> int:
        return self.product // p

    def is_rough(self, n: int) -> bool:
        return all(n % p for p in self.primes)

    def __iter__(self):
        return iter(self.primes)

    def __len__(self):
        return len(self.primes)

    def __contains__(self, p) -> bool:
        return p in self.primes

    def __str__(self) -> str:
        return ",".join(map(str, self.primes))


@dataclass(frozen=True)
class RoughFactorization:
    exponents: tuple[int, ...]
    rough_part: int

    def recompose(self, primes: PrimeSet) -> int:
        n = self.rough_part
        for p, e in zip(primes, self.exponents):
            n *= p**e
        return n


def rough_decompose(n: int, primes: PrimeSet) -> RoughFactorization:
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    exps = []
    for p in primes:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        exps.append(e)
    return RoughFactorization(tuple(exps), n)


def rough_parts(limit: int, primes: Iterable[int]) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised rough decomposition of 0..limit.

    Returns ``(rough, parity)`` where ``parity[n]`` has bit ``i`` set when the
    exponent of the i-th prime in n is odd.  Index 0 is left as zero.
    """
    rough = np.arange(limit + 1, dtype=np.int64)
    parity = np.zeros(limit + 1, dtype=np.uint32)
    for i, p in enumerate(primes):
        idx = np.arange(p, limit + 1, p)
        while idx.size:
            rough[idx] //= p
            parity[idx] ^= np.uint32(1 << i)
            idx = idx[rough[idx] % p == 0]
    rough[0] = 0
    return rough, parity


class SignSequence:
    """Dense table of f(1..N) in {-1, +1}, with 0 marking an unset entry.

    ``values[0]`` is padding so that ``values[n]`` is f(n).
    """

    def __init__(self, horizon: int, primes: PrimeSet, prime_signs: Mapping[int, int]):
        if horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {horizon}")
        self.primes = primes
        self.prime_signs = {int(p): int(prime_signs[p]) for p in primes}
        for p, s in self.prime_signs.items():
            if s not in (-1, 1):
                raise ValueError(f"f({p}) must be +-1, got {s}")
        self.values = np.zeros(horizon + 1, dtype=np.int8)

    @classmethod
    def from_values(cls, values, primes: PrimeSet, prime_signs=None) -> SignSequence:
        """Wrap ``values`` (f(1), f(2), ...); prime signs default to the table entries."""
        arr = np.asarray(values, dtype=np.int8)
        if prime_signs is None:
            prime_signs = {p: int(arr[p - 1]) if p <= arr.size else 1 for p in primes}
        seq = cls(arr.size, primes, prime_signs)
        seq.values[1:] = arr
        return seq

    @property
    def horizon(self) -> int:
        return self.values.size - 1

    def __len__(self) -> int:
        return self.horizon

    def __getitem__(self, n):
        return self.values[n]

    def is_complete(self) -> bool:
        return bool(np.all(self.values[1:] != UNSET))

    def first_unset(self) -> int | None:
        gaps = np.flatnonzero(self.values[1:] == UNSET)
        return int(gaps[0]) + 1 if gaps.size else None

    def eval(self, n: int) -> int:
        """f(n) via f(p^e m) = f(p)^e f(m) with m the P-rough part of n."""
        if not 1 <= n <= self.horizon:
            raise IndexError(f"n={n} outside [1, {self.horizon}]")
        fac = rough_decompose(n, self.primes)
        v = int(self.values[fac.rough_part])
        if v == UNSET:
            raise UnsetValue(fac.rough_part)
        for p, e in zip(self.primes, fac.exponents):
            if e % 2 and self.prime_signs[p] < 0:
                v = -v
        return v

    def copy(self) -> SignSequence:
        out = SignSequence(self.horizon, self.primes, self.prime_signs)
        out.values[:] = self.values
        return out

    def truncated(self, n: int) -> SignSequence:
        out = SignSequence(n, self.primes, self.prime_signs)
        out.values[:] = self.values[: n + 1]
        return out


@dataclass
class PartialSumProfile:
    checkpoints: list[tuple[int, int]]
    sup_abs: int
    argmax: int
    sums: np.ndarray  # sums[n] = S(n), sums[0] = 0

    def S(self, n: int) -> int:
        return int(self.sums[n])

    def window_sup(self, lo: int, hi: int) -> int:
        return int(np.abs(self.sums[lo : hi + 1]).max())


def prefix_sums(seq: SignSequence, stride: int = 1) -> PartialSumProfile:
    if stride < 1:
        raise ValueError("stride must be positive")
    gap = seq.first_unset()
    if gap is not None:
        raise UnsetValue(gap)
    sums = np.cumsum(seq.values, dtype=np.int64)
    mags = np.abs(sums)
    argmax = int(np.argmax(mags))
    points = np.arange(stride, seq.horizon + 1, stride)
    return PartialSumProfile(
        checkpoints=[(int(n), int(sums[n])) for n in points],
        sup_abs=int(mags[argmax]),
        argmax=argmax,
        sums=sums,
    )


# --- file formats ------------------------------------------------------------


def write_csv(seq: SignSequence, path) -> None:
    lines = ["n,value"]
    lines.extend(f"{n},{v}" for n, v in enumerate(seq.values[1:].tolist(), start=1))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path, primes: PrimeSet) -> SignSequence:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header] != ["n", "value"]:
            raise ValueError(f"unexpected header {header}")
        vals = []
        for i, row in enumerate(reader, start=1):
            n, v = int(row[0]), int(row[1])
            if n != i or v not in (-1, 1):
                raise ValueError(f"bad row {row} at line {i + 1}")
            vals.append(v)
    return SignSequence.from_values(vals, primes)


def write_binary(seq: SignSequence, path) -> None:
    """8-byte little-endian N, then one bit per index (bit set means +1)."""
    bits = np.packbits(seq.values[1:] > 0, bitorder="little")
    Path(path).write_bytes(struct.pack("<Q", seq.horizon) + bits.tobytes())


def read_binary(path, primes: PrimeSet) -> SignSequence:
    raw = Path(path).read_bytes()
    (n,) = struct.unpack("<Q", raw[:8])
    bits = np.unpackbits(np.frombuffer(raw[8:], dtype=np.uint8), bitorder="little")[:n]
    if bits.size != n:
        raise ValueError("truncated binary sequence file")
    return SignSequence.from_values(bits.astype(np.int8) * 2 - 1, primes)


def read_sequence(path, primes: PrimeSet, fmt: str = "csv") -> SignSequence:
    return read_binary(path, primes) if fmt == "binary" else read_csv(path, primes)


def write_sequence(seq: SignSequence, path, fmt: str = "csv") -> None:
    (write_binary if fmt == "binary" else write_csv)(seq, path)
