"""Explicit constructions for P = {2, 3} and P = {2, 3, 5}.

Both build a {-1, +1} table block by block.  For {2,3} every block of six
satisfies

    f(6n+1) + f(6n+2) + f(6n+3) = -(f(6n+4) + f(6n+5) + f(6n+6)) = +-1,

so S(6m) = 0.  For {2,3,5} the free values f(30m + k), k coprime to 30, are
tied to earlier values by a fixed relation program chosen so that every block
of 30 * 64 = 1920 consecutive integers sums to zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import PrimeSet, SignSequence, rough_parts
from .errors import CaseFiveViolation, RelationConflict

P23 = PrimeSet((2, 3))
P235 = PrimeSet((2, 3, 5))


@dataclass(frozen=True)
class Block23State:
    index: int
    predetermined: tuple[int, int, int, int]  # f(6N+2), f(6N+3), f(6N+4), f(6N+6)
    chosen: tuple[int, int]  # f(6N+1), f(6N+5)
    case: int


def choose_block23(a: int, b: int, c: int, d: int) -> tuple[int, int, int]:
    """Pick (f(6N+1), f(6N+5), case) from the four predetermined values."""
    if a == b == c == d:
        raise CaseFiveViolation(f"f(6N+2)=f(6N+3)=f(6N+4)=f(6N+6)={a}")
    if a == b and c == d:
        return -a, -c, 1
    if a == b:
        return -a, -a, 2
    if c == d:
        return -c, -c, 3
    return 1, -1, 4


def construct_p23(n: int, f1: int = 1, f2: int = 1, f3: int = -1, f5: int = -1,
                  trace: list | None = None, states: list | None = None) -> SignSequence:
    if n < 6:
        raise ValueError(f"horizon must be >= 6, got {n}")
    if f1 != 1:
        raise ValueError("f(1) = 1 is forced by f(p) = f(p) f(1)")
    H = -(-n // 6) * 6
    v = [0] * (H + 1)
    v[1:7] = [1, f2, f3, f2 * f2, f5, f2 * f3]
    if v[1] + v[2] + v[3] not in (-1, 1) or v[1] + v[2] + v[3] != -(v[4] + v[5] + v[6]):
        raise ValueError(f"seeds {v[1:7]} violate the block relation on [1, 6]")
    for N in range(1, H // 6):
        base = 6 * N
        a = f2 * v[3 * N + 1]
        b = f3 * v[2 * N + 1]
        c = f2 * v[3 * N + 2]
        d = f2 * v[3 * N + 3]
        x1, x5, case = choose_block23(a, b, c, d)
        v[base + 1: base + 7] = [x1, a, b, c, x5, d]
        if states is not None:
            states.append(Block23State(N, (a, b, c, d), (x1, x5), case))
        if trace is not None:
            src1 = {1: base + 2, 2: base + 2, 3: base + 4}.get(case)
            src5 = {1: base + 4, 2: base + 2, 3: base + 4}.get(case)
            trace.append((base + 1, src1, f"case{case}"))
            trace.append((base + 5, src5, f"case{case}"))
    seq = SignSequence(n, P23, {2: f2, 3: f3})
    seq.values[:] = v[: n + 1]
    return seq


def block23_relation_holds(seq: SignSequence, N: int) -> bool:
    v = seq.values
    lo = int(v[6 * N + 1]) + int(v[6 * N + 2]) + int(v[6 * N + 3])
    hi = int(v[6 * N + 4]) + int(v[6 * N + 5]) + int(v[6 * N + 6])
    return lo in (-1, 1) and lo == -hi


# --- P = {2, 3, 5} -----------------------------------------------------------

# target residue -> source residue within the same 30-block: f(30m+k) = -f(30m+k')
ODD_PAIRS = {1: 3, 7: 5, 11: 9, 13: 15, 19: 21, 23: 25, 29: 27}

# Residues j mod 64 of the 30(64m+j)+17 terms left unpaired by the doubling
# relations.  J_LIST_WITH_45 swaps 43 for 45, which is 5 mod 8 and so already
# fixed by the 8m+5 relation; it is kept to show the collision.
J_LIST_WITH_45 = (3, 7, 9, 11, 15, 19, 23, 25, 27, 31, 33, 35, 39, 41, 45, 47,
                  51, 55, 57, 59, 63)
J_LIST = (3, 7, 9, 11, 15, 19, 23, 25, 27, 31, 33, 35, 39, 41, 43, 47,
          51, 55, 57, 59, 63)
BLOCK235 = 30 * 64


@dataclass(frozen=True)
class Program235:
    """The relation program for {2, 3, 5}.

    ``l_count`` multiples of 128 per 1920-block are cancelled against
    j_1..j_{l_count}; the remaining j_i take ``tail_signs``.  A 1920-block
    holds exactly 15 multiples of 128.
    """

    f17: int = 1
    l_count: int = 15
    tail_signs: tuple[int, ...] | None = None
    prime_signs: dict = field(default_factory=lambda: {2: -1, 3: -1, 5: 1})
    j_list: tuple[int, ...] = J_LIST

    def __post_init__(self):
        if self.f17 not in (-1, 1):
            raise ValueError("f(17) must be +-1")
        if self.tail_signs is None:
            tail = tuple((-1) ** i for i in range(self.l_count + 1, len(self.j_list) + 1))
            object.__setattr__(self, "tail_signs", tail)
        if len(self.tail_signs) != len(self.j_list) - self.l_count:
            raise ValueError("need one tail sign per unpaired j_i")
        # m = 0 doubling instance reads f(17) = -f(2) f(17)
        if self.prime_signs[2] != -1:
            raise RelationConflict("f(17) = -f(2) f(17) needs f(2) = -1")

    def j_index(self) -> dict[int, int]:
        return {j: i for i, j in enumerate(self.j_list, start=1)}

    def rule(self, n: int) -> tuple[int | None, int, str]:
        """Defining rule of a rough n as ``(source, constant, name)``.

        With a source the rule reads f(n) = -f(source); otherwise f(n) = constant.
        """
        m, r = divmod(n, 30)
        if r in ODD_PAIRS:
            return 30 * m + ODD_PAIRS[r], 0, f"30m+{r}"
        if r != 17:
            raise ValueError(f"{n} is not coprime to 30")
        M = m
        if M == 0:
            return None, self.f17, "free"
        if M % 2 == 0:
            return 30 * M + 34, 0, "2m"
        j, blk = M % 64, M // 64
        if j == 1:
            return 30 * (M - 1) + 17, 0, "64m+1"
        if j % 8 == 5:
            return 30 * (M - 1) + 17, 0, "8m+5"
        if j % 32 == 17:
            return 30 * (M - 1) + 17, 0, "32m+17"
        i = self.j_index().get(j)
        if i is None:
            raise RelationConflict(f"no rule defines f({n}) (j={j})")
        if i <= self.l_count:
            return BLOCK235 * blk + 128 * i, 0, f"l_{i}"
        return None, self.tail_signs[i - self.l_count - 1], f"tail_{i}"

    def instances(self, n: int):
        """Every rule instance (target, source, constant, name) with target <= n."""
        for t in range(1, n + 1):
            if math.gcd(t, 30) == 1:
                yield (t, *self.rule(t))


def _parity_sign(parity: int, neg_mask: int) -> int:
    return -1 if bin(parity & neg_mask).count("1") % 2 else 1


def construct_p235(n: int, program: Program235 | None = None,
                   trace: list | None = None) -> SignSequence:
    if n < BLOCK235:
        raise ValueError(f"horizon must be >= {BLOCK235}, got {n}")
    prog = program or Program235()
    H = -(-n // BLOCK235) * BLOCK235
    rough, parity = rough_parts(H + 2112, P235)
    neg = sum(1 << i for i, p in enumerate(P235) if prog.prime_signs[p] < 0)
    sign_of = np.array([_parity_sign(q, neg) for q in range(8)], dtype=np.int8)
    rough_l = rough.tolist()
    par_l = parity.tolist()
    v = [0] * (H + 2113)
    v[1] = 1
    for t in range(1, H + 1):
        if rough_l[t] != t:
            continue
        src, const, name = prog.rule(t)
        if src is None:
            val = const
        else:
            r = rough_l[src]
            if r >= t and t != 1:
                raise RelationConflict(f"source {src} of f({t}) is not yet determined")
            val = -v[r] * _parity_sign(par_l[src], neg)
        if t == 1 and val != 1:
            raise RelationConflict("relation program forces f(1) = -1")
        v[t] = val
        if trace is not None:
            trace.append((t, src, name))
    arr = np.array(v[: H + 1], dtype=np.int8)
    arr[1:] = sign_of[parity[1: H + 1]] * arr[rough[1: H + 1]]
    seq = SignSequence(n, P235, prog.prime_signs)
    seq.values[:] = arr[: n + 1]
    return seq


def check_program235(seq: SignSequence, program: Program235 | None = None) -> list[tuple]:
    """Return every rule instance that fails on ``seq`` (empty when all hold)."""
    prog = program or Program235()
    bad = []
    for t, src, const, name in prog.instances(seq.horizon):
        want = const if src is None else -seq.eval(src) if src <= seq.horizon else None
        if want is not None and seq.values[t] != want:
            bad.append((t, src, name))
    return bad
