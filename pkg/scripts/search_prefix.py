"""Longest N with a P-multiplicative table keeping |S(n)| <= C on [1, N]."""
import argparse
import time

from pmult.core import PrimeSet
from pmult.search import brute_force_search, longest_feasible_prefix


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--primes", default="2,3")
    ap.add_argument("--C", type=int, default=1)
    ap.add_argument("--cap", type=int, default=1000)
    ap.add_argument("--engines", action="store_true", help="time dfs and cdcl at --cap")
    args = ap.parse_args()
    P = PrimeSet(tuple(int(p) for p in args.primes.split(",")))
    if args.engines:
        for engine in ("dfs", "cdcl", "auto"):
            t = time.perf_counter()
            r = brute_force_search(P, args.C, args.cap, budget=200_000, engine=engine)
            print(f"{engine}: {r.status} nodes={r.nodes_explored} max_prefix={r.max_prefix} "
                  f"{time.perf_counter() - t:.2f}s")
        return
    n, last = longest_feasible_prefix(P, args.C, args.cap)
    print(f"P={P.primes} C={args.C}: longest feasible prefix {n} (next: {last.status})")


if __name__ == "__main__":
    main()
