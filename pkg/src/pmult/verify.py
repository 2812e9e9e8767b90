"""Checks that run against materialized tables and constructed levels."""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import PrimeSet, SignSequence, prefix_sums
from .general import STEP_LIFT, LevelState
from .propagate import resolve


@dataclass
class Check:
    name: str
    passed: bool
    witness: dict | None = None
    sup_abs: int | None = None
    nodes_explored: int | None = None
    detail: dict = field(default_factory=dict)

    def as_json(self) -> dict:
        return {
            "check": self.name,
            "status": "pass" if self.passed else "fail",
            "sup_abs": self.sup_abs,
            "first_violation": self.witness,
            "nodes_explored": self.nodes_explored,
        }


@dataclass
class VerificationReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def sup_abs(self) -> int | None:
        sups = [c.sup_abs for c in self.checks if c.sup_abs is not None]
        return max(sups) if sups else None

    @property
    def first_violation(self) -> dict | None:
        for c in self.checks:
            if not c.passed:
                return c.witness
        return None

    def extend(self, other: VerificationReport) -> VerificationReport:
        self.checks.extend(other.checks)
        return self

    def to_json(self) -> str:
        return json.dumps([c.as_json() for c in self.checks], indent=2, sort_keys=True) + "\n"


def _shards(lo: int, hi: int, parts: int):
    edges = np.linspace(lo, hi + 1, max(parts, 1) + 1).astype(np.int64)
    return [(int(a), int(b) - 1) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def check_multiplicativity(seq: SignSequence, primes: PrimeSet | None = None,
                           threads: int = 1) -> VerificationReport:
    """v[pn] = f(p) v[n] for every p in P and pn <= N, plus f(1) = 1."""
    primes = primes or seq.primes
    v = seq.values
    N = seq.horizon
    rep = VerificationReport()
    if v[1] != 1:
        rep.checks.append(Check("f(1)=1", False, {"n": 1, "expected": 1, "actual": int(v[1])}))
    best = None
    for p in primes:
        fp = int(seq.prime_signs[p])

        def scan(span, p=p, fp=fp):
            a, b = span
            n = np.arange(a, b + 1, dtype=np.int64)
            bad = np.flatnonzero(v[p * n] != fp * v[n])
            return int(n[bad[0]]) if bad.size else None

        spans = _shards(1, N // p, threads)
        if threads > 1:
            with ThreadPoolExecutor(threads) as ex:
                hits = list(ex.map(scan, spans))
        else:
            hits = [scan(s) for s in spans]
        hits = [h for h in hits if h is not None]
        if hits:
            n = min(hits)
            w = {"n": p * n, "p": p, "m": n, "expected": fp * int(v[n]), "actual": int(v[p * n])}
            if best is None or w["n"] < best["n"]:
                best = w
    rep.checks.append(Check("multiplicativity", best is None, best))
    return rep


def dyadic_windows(N: int, start: int = 1) -> list[tuple[int, int]]:
    out, lo = [], start
    while lo <= N:
        hi = min(2 * lo - 1, N) if lo > 1 else 1
        out.append((lo, hi))
        lo = hi + 1
    return out


def check_bounded(seq: SignSequence, windows=None, bound: int | None = None) -> VerificationReport:
    """Plateau test: no window after the first reaches a larger sup|S| than the first.

    With ``bound`` every window must also stay within it.
    """
    prof = prefix_sums(seq)
    N = seq.horizon
    if windows is None:
        windows = [(1, N // 2), (N // 2, N)]
    sups = [prof.window_sup(lo, hi) for lo, hi in windows]
    ref = sups[0]
    witness = None
    for (lo, hi), s in zip(windows, sups):
        limit = ref if bound is None else min(ref, bound) if (lo, hi) != windows[0] else bound
        if limit is not None and s > limit:
            seg = np.abs(prof.sums[lo: hi + 1])
            n = lo + int(np.flatnonzero(seg > limit)[0])
            witness = {"n": n, "expected": limit, "actual": int(prof.sums[n])}
            break
    c = Check("bounded", witness is None, witness, sup_abs=prof.sup_abs,
              detail={"windows": [list(w) for w in windows], "sups": sups})
    return VerificationReport([c])


def check_condition_V(level: LevelState, primes: PrimeSet, trials: int = 100, seed: int = 0,
                      horizon: int | None = None, exact: bool = False,
                      drop: int | None = None) -> VerificationReport:
    """Block sums of admissible functions vanish on every block I_M, M >= 1.

    Admissible: multiplicative at p_j..p_k, f(y) = -f(x) on R_j, anything
    elsewhere.  ``trials`` random admissible functions are drawn; ``exact``
    instead proves the claim for every choice of the free values (block sums
    are linear in them) and every choice of the prime signs.  ``drop`` removes
    one relation pair, for mutation testing.
    """
    b = level.modulus
    j = level.level
    H = max(2 * b, -(-(horizon or 2 * b) // b) * b)
    mult = primes.primes[j - 1:]
    rel = level.relations_upto(H)
    if drop is not None:
        rel = np.delete(rel, drop, axis=0)
    form = resolve(H, mult, rel[:, 0], rel[:, 1])
    mask = np.ones(H + 1, dtype=bool)
    mask[0] = False
    for p in primes.primes[: j - 1]:
        mask[::p] = False
    mask[level.free_upto(H)] = False
    mask[1: b + 1] = False  # block 0 carries no claim
    pos = np.flatnonzero(mask)
    block = (pos - 1) // b
    name = f"condition_V[level={j}]"
    rep = VerificationReport()
    if exact:
        k = len(mult)
        bad = None
        for code in range(1 << k):
            signs = {p: -1 if code >> i & 1 else 1 for i, p in enumerate(mult)}
            unit = np.ones(H + 1, dtype=np.int8)
            coeff = form.evaluate(unit, signs)[pos].astype(np.int64)
            key = block * (H + 1) + form.root[pos]
            uk, inv = np.unique(key, return_inverse=True)
            tot = np.bincount(inv, weights=coeff, minlength=uk.size)
            # the root 1 is pinned to +1, so its coefficient must vanish as well
            nz = np.flatnonzero(tot != 0)
            if nz.size:
                kk = int(uk[nz[0]])
                bad = {"n": (kk // (H + 1) + 1) * b, "block": kk // (H + 1),
                       "root": kk % (H + 1), "expected": 0, "actual": int(tot[nz[0]]),
                       "prime_signs": signs}
                break
        rep.checks.append(Check(name + "[exact]", bad is None, bad))
        return rep
    rng = np.random.default_rng(seed)
    bad = None
    nblocks = H // b
    for trial in range(trials):
        rv = rng.choice(np.array([-1, 1], dtype=np.int8), size=H + 1)
        rv[1] = 1
        signs = {p: int(rng.choice((-1, 1))) for p in mult}
        vals = form.evaluate(rv, signs)
        sums = np.bincount(block, weights=vals[pos], minlength=nblocks)
        nz = np.flatnonzero(sums[1:] != 0)
        if nz.size:
            M = int(nz[0]) + 1
            bad = {"n": b * (M + 1), "trial": trial, "block": M,
                   "expected": 0, "actual": int(sums[M])}
            break
    rep.checks.append(Check(name, bad is None, bad, detail={"trials": trials, "seed": seed}))
    return rep


def telescoping_chains(level: LevelState, horizon: int):
    """Chains (n', s, terms) for every lift target n' in blocks M >= 1 of ``level``."""
    p, a, b = level.prime, level.exponent, level.parent.modulus
    offs = level.pattern[level.kinds == STEP_LIFT][:, 1]
    blocks = np.arange(1, horizon // level.modulus, dtype=np.int64)
    nprime = (blocks[:, None] * level.modulus + offs[None, :]).ravel()
    qa, t = nprime // b, nprime % b
    s = np.zeros_like(qa)
    rest = qa.copy()
    for _ in range(a):
        hit = rest % p == 0
        s[hit] += 1
        rest[hit] //= p
    m = qa // p**s
    return nprime, s, m, t


def check_telescoping(seq: SignSequence, level: LevelState) -> VerificationReport:
    """The alternating chains p^(s-r) (p^r b m + t), r = 0..s, sum to 0 (s odd) or f(n') (s even)."""
    p, b = level.prime, level.parent.modulus
    v = seq.values.astype(np.int64)
    nprime, s, m, t = telescoping_chains(level, seq.horizon)
    bad = None
    count = 0
    for sv in np.unique(s):
        sel = s == sv
        tot = np.zeros(sel.sum(), dtype=np.int64)
        for r in range(sv + 1):
            terms = p ** (sv - r) * (p**r * b * m[sel] + t[sel])
            tot += v[terms]
        want = np.zeros_like(tot) if sv % 2 else v[nprime[sel]]
        count += int(sel.sum())
        wrong = np.flatnonzero(tot != want)
        if wrong.size:
            i = wrong[0]
            bad = {"n": int(nprime[sel][i]), "s": int(sv), "expected": int(want[i]),
                   "actual": int(tot[i])}
            break
    return VerificationReport([Check(f"telescoping[level={level.level}]", bad is None, bad,
                                     detail={"chains": count})])
