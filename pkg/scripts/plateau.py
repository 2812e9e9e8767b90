"""Record times of |S| and the block-boundary sums for the general construction."""
import argparse

import numpy as np

from pmult.core import PrimeSet
from pmult.general import build_levels, construct_general


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--primes", default="3,5,7")
    ap.add_argument("--n", type=int, default=10**7)
    args = ap.parse_args()
    P = PrimeSet(tuple(int(p) for p in args.primes.split(",")))
    b1 = build_levels(P)[-1].modulus
    _, seq = construct_general(P, args.n)
    S = np.cumsum(seq.values[1:].astype(np.int64))
    run = np.maximum.accumulate(np.abs(S))
    print(f"b_1={b1} boundary sums S(b_1 M): {sorted(set(S[b1 - 1::b1].tolist()))}")
    print("n,record")
    for i in np.flatnonzero(np.diff(run)) + 1:
        print(f"{i + 1},{run[i]}")
    x = 10**6
    while x <= args.n:
        print(f"# N={x}: sup[1,N/2]={np.abs(S[:x // 2]).max()} "
              f"sup[N/2,N]={np.abs(S[x // 2 - 1:x]).max()}")
        x *= 10


if __name__ == "__main__":
    main()
