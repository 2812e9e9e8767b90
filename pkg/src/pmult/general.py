"""Bounded-sum P-multiplicative functions for an arbitrary prime set (k > 2).

The construction works level by level, j = k-1 down to 1.  Level j carries a
modulus b_j, a free set F_j of P-rough integers and a relation set R_j of pairs
(x, y) meaning f(y) = -f(x).  Admissible functions (multiplicative at
p_j..p_k and obeying R_j) have vanishing sums over every block
I_M = [b_j M + 1, b_j (M + 1)], M >= 1, once multiples of p_1..p_{j-1} and
members of F_j are left out.

Beyond the first block every level is periodic with period b_j, so a level is
stored as one block's worth of offsets plus the irregular part in [1, b_j].
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import PrimeSet, SignSequence, checked_mul, checked_pow
from .errors import CountingFailure, RelationConflict, SurplusFailure
from .propagate import resolve

STEP_BASE, STEP_LIFT, STEP_SHIFT, STEP_SURPLUS = 0, 1, 2, 3


@dataclass
class LevelState:
    level: int
    modulus: int
    exponent: int | None  # a_j with b_j = p_j^a_j * b_{j+1}
    prime: int | None  # p_j, None on the base level
    head: np.ndarray  # F_j within [1, b_j]
    residues: np.ndarray  # offsets r with b_j M + r in F_j for every M >= 1
    pattern: np.ndarray  # (R, 2) new relation offsets (x, y) per block M >= 1
    kinds: np.ndarray  # step label of each pattern row
    block0: np.ndarray  # (Q, 2) absolute new relations inside block 0
    parent: LevelState | None = None
    stats: dict = field(default_factory=dict)

    @property
    def B(self) -> int:
        return int(self.residues.size)

    def free_in_block(self, M: int) -> np.ndarray:
        if M == 0:
            return self.head
        return self.modulus * M + self.residues

    def free_upto(self, n: int) -> np.ndarray:
        blocks = np.arange(1, n // self.modulus + 1, dtype=np.int64)
        periodic = (blocks[:, None] * self.modulus + self.residues[None, :]).ravel()
        out = np.concatenate([self.head, periodic])
        return out[out <= n]

    def free_mask(self, n: int) -> np.ndarray:
        mask = np.zeros(n + 1, dtype=bool)
        mask[self.free_upto(n)] = True
        return mask

    def relations_in_block(self, M: int) -> np.ndarray:
        """New pairs this level adds inside block M (inherited pairs excluded)."""
        if M == 0:
            return self.block0
        return self.pattern + self.modulus * M

    def new_relations_upto(self, n: int, kinds: bool = False):
        blocks = np.arange(1, n // self.modulus + 1, dtype=np.int64)
        shift = (blocks * self.modulus)[:, None, None]
        pairs = (self.pattern[None, :, :] + shift).reshape(-1, 2)
        lab = np.tile(self.kinds, blocks.size)
        pairs = np.concatenate([self.block0.reshape(-1, 2), pairs])
        lab = np.concatenate([np.full(len(self.block0), STEP_LIFT, dtype=np.int8), lab])
        keep = (pairs[:, 1] <= n) & (pairs[:, 0] <= n)
        return (pairs[keep], lab[keep]) if kinds else pairs[keep]

    def relations_upto(self, n: int) -> np.ndarray:
        """All of R_j restricted to pairs with x, y <= n."""
        parts = []
        lvl = self
        while lvl is not None:
            parts.append(lvl.new_relations_upto(n))
            lvl = lvl.parent
        return np.concatenate(parts) if parts else np.zeros((0, 2), dtype=np.int64)

    def chain(self):
        """Levels from this one up to the base level."""
        lvl = self
        while lvl is not None:
            yield lvl
            lvl = lvl.parent


def _coprime_mask(n: int, primes) -> np.ndarray:
    mask = np.ones(n + 1, dtype=bool)
    mask[0] = False
    for p in primes:
        mask[::p] = False
    return mask


def base_step(primes: PrimeSet, horizon: int | None = None) -> LevelState:
    """Level k-1: pair the P'-coprime multiples of p_{k-1}, p_k with P-rough numbers."""
    if primes.k <= 2:
        raise ValueError("the general construction needs at least three primes")
    P = primes.product
    if horizon is not None and horizon < 2 * P:
        raise ValueError(f"horizon {horizon} < 2P = {2 * P}")
    r = np.arange(1, P + 1, dtype=np.int64)
    head_primes = primes.primes[:-2]
    coprime_head = np.ones(P, dtype=bool)
    for p in head_primes:
        coprime_head &= r % p != 0
    tail = (r % primes.primes[-2] == 0) | (r % primes.primes[-1] == 0)
    U = r[coprime_head & ~tail]
    V = r[coprime_head & tail]
    if U.size <= V.size:
        raise CountingFailure(f"|U| = {U.size} <= |V| = {V.size} for P = {P}")
    pattern = np.stack([V, U[: V.size]], axis=1)
    return LevelState(
        level=primes.k - 1, modulus=P, exponent=None, prime=None,
        head=np.zeros(0, dtype=np.int64), residues=U[V.size:].copy(),
        pattern=pattern, kinds=np.full(V.size, STEP_BASE, dtype=np.int8),
        block0=np.zeros((0, 2), dtype=np.int64),
        stats={"U": int(U.size), "V": int(V.size)},
    )


def alternating_count(p: int, a: int) -> int:
    """sum_{r=0}^{a-1} (-1)^r p^(a-1-r)."""
    return sum((-1) ** r * p ** (a - 1 - r) for r in range(a))


def min_exponent(B: int, p: int, b: int) -> int:
    """Smallest a >= 1 with B * alternating_count(p, a) > b / p."""
    if B < 1:
        raise ValueError("the free set is empty, no exponent can work")
    a = 1
    while B * alternating_count(p, a) * p <= b:
        a += 1
    return a


def _vp(x: np.ndarray, p: int, cap: int) -> np.ndarray:
    s = np.zeros(x.shape, dtype=np.int64)
    y = x.copy()
    for _ in range(cap):
        hit = (y % p == 0) & (s < cap)
        if not hit.any():
            break
        s[hit] += 1
        y[hit] //= p
    return s


def refine_level(level: LevelState, p: int, horizon: int | None = None,
                 smaller=()) -> LevelState:
    """Produce level j-1 from level j using the prime p = p_{j-1}.

    ``smaller`` lists p_1..p_{j-2}.  Multiples of those never enter the
    block sums of level j-1, so they are left out of the p^(a+1) multiples
    that step 3 cancels.
    """
    b = level.modulus
    if b % p:
        raise ValueError(f"{p} does not divide b = {b}")
    B = level.B
    a = min_exponent(B, p, b)
    pa = checked_pow(p, a)
    bn = checked_mul(pa, b)
    if horizon is not None and horizon < 2 * bn:
        raise ValueError(f"horizon {horizon} < 2 b_(j-1) = {2 * bn}")

    # block M = 1 of the new level; every later block is a translate
    q = np.arange(pa, dtype=np.int64)
    E = (bn + q[:, None] * b + level.residues[None, :]).ravel()
    qa, t = E // b, E % b
    lift = qa % p == 0
    nprime, t1 = E[lift], t[lift]
    lift_x = p * (b * (qa[lift] // p) + t1)
    s = _vp(qa[lift], p, a)
    even = s % 2 == 0
    shift_y = nprime[even] + b
    shift_x = nprime[even]
    V = bn + checked_pow(p, a + 1) * np.arange(1, b // p + 1, dtype=np.int64)
    for q_small in smaller:
        V = V[V % q_small != 0]
    cand = E[~lift & ~np.isin(E, shift_y)]
    if cand.size <= V.size:
        raise SurplusFailure(
            f"level {level.level - 1}: {cand.size} free terms left for {V.size} multiples of {p}^{a + 1}")
    U = cand[: V.size]
    pattern = np.concatenate([
        np.stack([lift_x, nprime], axis=1),
        np.stack([shift_x, shift_y], axis=1),
        np.stack([V, U], axis=1),
    ]) - bn
    kinds = np.concatenate([
        np.full(nprime.size, STEP_LIFT, dtype=np.int8),
        np.full(shift_y.size, STEP_SHIFT, dtype=np.int8),
        np.full(V.size, STEP_SURPLUS, dtype=np.int8),
    ])

    # block 0: the lift relations are still needed so that chains starting in
    # later blocks can telescope through earlier terms
    q0 = np.arange(1, pa, dtype=np.int64)
    E0 = (q0[:, None] * b + level.residues[None, :]).ravel()
    lift0 = (E0 // b) % p == 0
    y0 = E0[lift0]
    x0 = p * (b * ((E0[lift0] // b) // p) + E0[lift0] % b)
    head = np.setdiff1d(np.concatenate([level.head, E0]), y0)

    return LevelState(
        level=level.level - 1, modulus=bn, exponent=a, prime=p,
        head=head, residues=np.sort(cand[V.size:] - bn),
        pattern=pattern, kinds=kinds, block0=np.stack([x0, y0], axis=1),
        parent=level,
        stats={"B": B, "V": int(V.size), "surplus": int(cand.size),
               "lift": int(nprime.size), "shift": int(shift_y.size)},
    )


def build_levels(primes: PrimeSet) -> list[LevelState]:
    """Levels k-1, k-2, ..., 1 in that order."""
    levels = [base_step(primes)]
    for j in range(primes.k - 2, 0, -1):
        levels.append(refine_level(levels[-1], primes.primes[j - 1],
                                   smaller=primes.primes[: j - 1]))
    return levels


@dataclass
class RuleProgram:
    primes: PrimeSet
    prime_signs: dict
    relations: np.ndarray  # (R, 2) pairs (x, y): f(y) = -f(x)
    chain: np.ndarray  # (C, 2) consecutive free pairs (a_i, a_{i+1})
    seeds: dict  # n -> sign for every value no rule fixes
    horizon: int
    levels: list = field(default_factory=list)

    def rows(self):
        for p in self.primes:
            yield ("seed", p, self.prime_signs[p])
        for n in sorted(self.seeds):
            yield ("seed", n, self.seeds[n])
        for x, y in self.relations.tolist():
            yield ("relation", x, y)
        for x, y in self.chain.tolist():
            yield ("chain", x, y)

    def to_csv(self) -> str:
        return "kind,x,y\n" + "".join(f"{k},{x},{y}\n" for k, x, y in self.rows())


def seed_indices(primes: PrimeSet, first_free: int | None) -> list[int]:
    P = primes.product
    r = np.arange(1, P + 1)
    rough = r[np.gcd(r, P) == 1].tolist()
    return rough + ([first_free] if first_free is not None else [])


def finalize(level1: LevelState, primes: PrimeSet, prime_signs=None, seeds=None,
             horizon: int = 0, rng: np.random.Generator | None = None) -> RuleProgram:
    """Close level 1 into a full rule program covering [1, horizon].

    The horizon is rounded up to a multiple of b_1 so every generated pair
    lies inside it.  Unspecified seeds default to +1, or to random signs when
    ``rng`` is given; f(1) is always +1.
    """
    b1 = level1.modulus
    H = max(b1, -(-horizon // b1) * b1)
    if prime_signs is None:
        prime_signs = {p: -1 for p in primes}
    free = np.sort(level1.free_upto(H))
    chain = np.stack([free[:-1], free[1:]], axis=1)
    wanted = seed_indices(primes, int(free[0]) if free.size else None)
    seeds = dict(seeds or {})
    out = {}
    for n in wanted:
        if n in seeds:
            out[n] = int(seeds[n])
        elif rng is not None and n != 1:
            out[n] = int(rng.choice((-1, 1)))
        else:
            out[n] = 1
    if out[1] != 1:
        raise ValueError("f(1) = 1 is forced")
    return RuleProgram(primes, dict(prime_signs), level1.relations_upto(H), chain, out, H,
                       levels=list(level1.chain()))


def materialize(program: RuleProgram, n: int | None = None) -> SignSequence:
    n = program.horizon if n is None else n
    if n > program.horizon:
        raise ValueError(f"program covers [1, {program.horizon}], asked for {n}")
    H = program.horizon
    pairs = np.concatenate([program.relations, program.chain])
    form = resolve(H, program.primes.primes, pairs[:, 0], pairs[:, 1])
    roots = form.roots()
    rv = np.zeros(H + 1, dtype=np.int8)
    missing = [int(r) for r in roots if int(r) not in program.seeds]
    if missing:
        raise RelationConflict(f"no rule or seed determines f({missing[0]})")
    for k, v in program.seeds.items():
        if k <= H:
            rv[k] = v
    vals = form.evaluate(rv, program.prime_signs)
    seq = SignSequence(n, program.primes, program.prime_signs)
    seq.values[:] = vals[: n + 1]
    return seq


def construct_general(primes: PrimeSet, n: int, prime_signs=None, seeds=None,
                      rng=None) -> tuple[RuleProgram, SignSequence]:
    levels = build_levels(primes)
    prog = finalize(levels[-1], primes, prime_signs, seeds, n, rng)
    return prog, materialize(prog, n)


def level_rows(levels, horizon: int):
    """Rows ``(level, b, a, block, free_count, relation_count)`` per generated block."""
    for lvl in levels:
        for M in range(0, horizon // lvl.modulus):
            yield (lvl.level, lvl.modulus, lvl.exponent if lvl.exponent is not None else "",
                   M, int(lvl.free_in_block(M).size), int(len(lvl.relations_in_block(M))))


def condition_failures(child: LevelState, horizon: int) -> list[str]:
    """Direct set checks of conditions (I)-(IV) for one level up to ``horizon``.

    Block membership uses the closed blocks [bM + 1, b(M + 1)], i.e. the
    block index of n is (n - 1) // b.
    """
    out = []
    b = child.modulus
    N = horizon
    free = child.free_mask(N)
    idx = np.flatnonzero(free)
    # (I), on the periodic part n > b
    up = idx[(idx > b) & (idx + b <= N)]
    if not free[up + b].all():
        out.append(f"(I) level {child.level}: n + b missing for n={int(up[~free[up + b]][0])}")
    down = idx[idx > 2 * b]
    if not free[down - b].all():
        out.append(f"(I) level {child.level}: n - b missing for n={int(down[~free[down - b]][0])}")
    rel = child.relations_upto(N)
    ys, counts = np.unique(rel[:, 1], return_counts=True)
    if (counts > 1).any():
        out.append(f"(II) level {child.level}: target {int(ys[counts > 1][0])} repeated")
    if child.parent is not None:
        par = child.parent
        pfree = par.free_mask(N)
        if (free & ~pfree).any():
            out.append(f"(I) level {child.level}: F not contained in parent free set")
        new = child.new_relations_upto(N)
        inherited = par.relations_upto(N)
        if len(np.intersect1d(new[:, 1], inherited[:, 1])):
            out.append(f"(III) level {child.level}: new target already in parent relations")
        if not (pfree[new[:, 1]] & ~free[new[:, 1]]).all():
            out.append(f"(III) level {child.level}: new target not in F_parent minus F_child")
        if ((new[:, 0] - 1) // b != (new[:, 1] - 1) // b).any():
            out.append(f"(III) level {child.level}: pair straddles a block")
        if child.modulus != checked_pow(child.prime, child.exponent) * par.modulus:
            out.append(f"(IV) level {child.level}: modulus mismatch")
    else:
        P = b
        if ((rel[:, 0] - 1) // P != (rel[:, 1] - 1) // P).any():
            out.append("(III) base level: pair straddles a block")
    if (np.gcd(idx, b) != 1).any():
        out.append(f"level {child.level}: free element shares a factor with P")
    return out
