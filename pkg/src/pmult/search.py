"""Exhaustive search for P-multiplicative sign tables with |S(n)| <= C.

Signs are chosen at the primes of P and at P-rough n > 1 in ascending order,
-1 before +1; every other value follows from multiplicativity.  A prefix is
abandoned as soon as some |S(n)| exceeds C, or as soon as no continuation can
keep the sums in range on (n, 2n] (on that window every not-yet-chosen value
is an independent step, so the test is exact for the window).

Chronological backtracking cannot recover from a choice at r whose damage
only shows at 4r or 6r, so the ``cdcl`` engine hands the same constraints to
a clause-learning SAT solver.  ``auto`` runs the DFS and falls back to it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .core import PrimeSet, rough_parts

SAT, UNSAT, EXHAUSTED = "SAT", "UNSAT", "EXHAUSTED-BUDGET"
ENGINES = ("dfs", "cdcl", "auto")
AUTO_DFS_NODES = 20_000  # DFS share of an auto run before the solver takes over


@dataclass
class SearchResult:
    status: str
    witness: dict | None  # free index -> sign
    values: list | None  # f(1..N) for a SAT result
    nodes_explored: int
    max_prefix: int  # longest feasible prefix seen by the DFS
    engine: str = "dfs"

    def as_json(self) -> dict:
        return {"status": self.status, "engine": self.engine,
                "nodes_explored": self.nodes_explored, "max_prefix": self.max_prefix,
                "witness": None if self.witness is None else
                {str(k): v for k, v in sorted(self.witness.items())}}


def _tables(primes: PrimeSet, N: int):
    rough, par = rough_parts(N, primes)
    rough, par = rough.tolist(), par.tolist()
    free = [n >= 2 and (rough[n] == n or n in primes) for n in range(N + 1)]
    return rough, par, free


def _dfs(primes: PrimeSet, C: float, N: int, budget: int) -> SearchResult:
    rough, par, free = _tables(primes, N)
    plist = list(primes)
    top = max(plist)
    v = [0] * (N + 1)
    S = [0] * (N + 1)
    v[1] = S[1] = 1
    if C < 1:
        return SearchResult(UNSAT, None, None, 0, 0)
    bounded = C != math.inf
    c = int(C) if bounded else 0
    full = (1 << (2 * c + 1)) - 1

    def sign(m):
        s = v[rough[m]]
        bits = par[m]
        i = 0
        while bits:
            if bits & 1:
                s *= v[plist[i]]
            bits >>= 1
            i += 1
        return s

    def alive(n):
        # reachable values of S + c as a bitmask, walking (n, 2n]
        if not bounded or n < top:
            return True
        mask = 1 << (S[n] + c)
        for m in range(n + 1, min(N, 2 * n) + 1):
            if rough[m] <= n:
                mask = (mask << 1) & full if sign(m) > 0 else mask >> 1
            else:
                mask = ((mask << 1) | (mask >> 1)) & full
            if not mask:
                return False
        return True

    stack: list[int] = []
    nodes = 0
    best = 1
    n = 2
    while n <= N:
        if free[n]:
            if nodes >= budget:
                return SearchResult(EXHAUSTED, None, None, nodes, best)
            nodes += 1
            v[n] = -1
            stack.append(n)
        else:
            v[n] = sign(n)
        S[n] = S[n - 1] + v[n]
        if abs(S[n]) <= C and (not free[n] or alive(n)):
            best = max(best, n)
            n += 1
            continue
        while stack:
            m = stack.pop()
            if v[m] == -1:
                if nodes >= budget:
                    return SearchResult(EXHAUSTED, None, None, nodes, best)
                nodes += 1
                v[m] = 1
                S[m] = S[m - 1] + 1
                if abs(S[m]) <= C and alive(m):
                    stack.append(m)
                    n = m + 1
                    break
        else:
            return SearchResult(UNSAT, None, None, nodes, best)
    witness = {m: v[m] for m in range(2, N + 1) if free[m]}
    return SearchResult(SAT, witness, v[1:], nodes, N)


def _cdcl(primes: PrimeSet, C: float, N: int, budget: int) -> SearchResult:
    from pysat.solvers import Solver

    if C < 1:
        return SearchResult(UNSAT, None, None, 0, 0, "cdcl")
    c = int(C)
    rough, par, free = _tables(primes, N)
    # y[n] true <=> f(n) = +1; state var for S(n) = k is st(n, k)
    width = 2 * c + 1

    def st(n, k):
        return N + 1 + n * width + (k + c)

    clauses = [[1], [st(0, 0)]]
    for n in range(2, N + 1):
        if not free[n]:
            p = next(q for q in primes if n % q == 0)
            a, b = p, n // p
            # y_n <-> (y_p <-> y_m)
            clauses += [[-n, -a, b], [-n, a, -b], [n, a, b], [n, -a, -b]]
    for n in range(1, N + 1):
        for k in range(-c, c + 1):
            s = st(n - 1, k)
            clauses.append([-s, -n, st(n, k + 1)] if k < c else [-s, -n])
            clauses.append([-s, n, st(n, k - 1)] if k > -c else [-s, n])
    with Solver(name="cadical153", bootstrap_with=clauses) as solver:
        solver.set_phases([-n for n in range(1, N + 1)])
        solver.conf_budget(budget)
        ok = solver.solve_limited()
        nodes = int(solver.accum_stats().get("decisions", 0))
        if ok is None:
            return SearchResult(EXHAUSTED, None, None, nodes, 0, "cdcl")
        if not ok:
            return SearchResult(UNSAT, None, None, nodes, 0, "cdcl")
        model = solver.get_model()
    vals = [1 if model[n - 1] > 0 else -1 for n in range(1, N + 1)]
    witness = {m: vals[m - 1] for m in range(2, N + 1) if free[m]}
    return SearchResult(SAT, witness, vals, nodes, N, "cdcl")


def brute_force_search(primes: PrimeSet, C: float, N: int, budget: int = 10**6,
                       engine: str = "auto") -> SearchResult:
    if N < 1:
        raise ValueError("N must be >= 1")
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    if engine in ("dfs", "auto") or C == math.inf:
        res = _dfs(primes, C, N, budget if engine == "dfs" else min(budget, AUTO_DFS_NODES))
        if res.status != EXHAUSTED or engine == "dfs":
            return res
        nodes = res.nodes_explored
        res = _cdcl(primes, C, N, budget)
        res.nodes_explored += nodes
        res.engine = "auto"
    else:
        res = _cdcl(primes, C, N, budget)
    if res.status == SAT:
        ok, bad = replay(primes, C, res.values)
        if not ok:
            raise AssertionError(f"solver witness fails the predicate at n={bad}")
    return res


def replay(primes: PrimeSet, C: float, values) -> tuple[bool, int | None]:
    """Run a full table through the search's acceptance predicate.

    Returns ``(ok, first_bad_n)``: the table must start with f(1) = 1, obey
    f(pn) = f(p) f(n) for p in P and keep every |S(n)| <= C.
    """
    v = [0] + [int(x) for x in values]
    N = len(v) - 1
    s = 0
    for n in range(1, N + 1):
        if v[n] not in (-1, 1) or (n == 1 and v[1] != 1):
            return False, n
        for p in primes:
            if n % p == 0 and n != p and v[n] != v[p] * v[n // p]:
                return False, n
        s += v[n]
        if abs(s) > C:
            return False, n
    return True, None


def longest_feasible_prefix(primes: PrimeSet, C: float, cap: int,
                            budget: int = 10**6) -> tuple[int, SearchResult]:
    """Largest N <= cap admitting a table with |S(n)| <= C on [1, N].

    Feasibility is monotone in N, so a binary search over complete searches
    gives the exact value whenever every probe terminates.
    """
    lo, hi = 1, cap
    last = brute_force_search(primes, C, cap, budget)
    if last.status == SAT:
        return cap, last
    if brute_force_search(primes, C, 1, budget).status != SAT:
        return 0, last
    while lo < hi:
        mid = (lo + hi + 1) // 2
        r = brute_force_search(primes, C, mid, budget)
        if r.status == SAT:
            lo = mid
        elif r.status == UNSAT:
            hi = mid - 1
            last = r
        else:
            raise RuntimeError(f"search budget exhausted at N={mid}")
    return lo, last
