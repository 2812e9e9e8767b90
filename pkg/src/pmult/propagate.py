"""Resolve sign constraints of the form f(pn) = f(p) f(n) and f(y) = -f(x).

Every index ends up expressed as

    f(n) = (-1)^flip[n] * prod_i f(p_i)^(bit i of expo[n]) * f(root[n])

with ``root[n]`` an index no constraint determines.  Pointer jumping gets
there in O(log depth) vectorised passes, so one resolution serves any number
of random or seeded evaluations.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DependencyCycle, RelationConflict


@dataclass
class SignForm:
    root: np.ndarray
    flip: np.ndarray
    expo: np.ndarray
    mult_primes: tuple[int, ...]

    @property
    def limit(self) -> int:
        return self.root.size - 1

    def roots(self) -> np.ndarray:
        idx = np.arange(self.root.size)
        return idx[(self.root == idx) & (idx >= 1)]

    def evaluate(self, root_values: np.ndarray, prime_signs) -> np.ndarray:
        """Values f(0..limit) as int8; ``root_values`` is indexed by n."""
        neg = 0
        for i, p in enumerate(self.mult_primes):
            if prime_signs[p] < 0:
                neg |= 1 << i
        odd = (np.bitwise_count(self.expo & np.uint32(neg)) & 1).astype(np.uint8) ^ self.flip
        out = (1 - 2 * odd.astype(np.int8)) * root_values[self.root].astype(np.int8)
        out[0] = 0
        return out


def resolve(limit: int, mult_primes, x=None, y=None) -> SignForm:
    """Build the sign form on 0..limit for relations f(y[i]) = -f(x[i])."""
    mult_primes = tuple(int(p) for p in mult_primes)
    parent = np.arange(limit + 1, dtype=np.int64)
    flip = np.zeros(limit + 1, dtype=np.uint8)
    expo = np.zeros(limit + 1, dtype=np.uint32)
    for i in reversed(range(len(mult_primes))):
        p = mult_primes[i]
        idx = np.arange(p, limit + 1, p)
        parent[idx] = idx // p
        expo[idx] = np.uint32(1 << i)
    if x is not None and len(x):
        x = np.asarray(x, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        if x.max() > limit or y.max() > limit:
            raise ValueError("relation index beyond the resolution limit")
        uniq, counts = np.unique(y, return_counts=True)
        if (counts > 1).any():
            raise RelationConflict(f"f({int(uniq[counts > 1][0])}) is defined by two relations")
        taken = (parent[y] != y) | (y == 1)
        if taken.any():
            raise RelationConflict(f"relation target {int(y[taken][0])} is already fixed")
        parent[y] = x
        flip[y] = 1
    bound = np.flatnonzero(parent != np.arange(limit + 1))
    for _ in range(2 * max(limit, 2).bit_length() + 2):
        nxt = parent[parent]
        if np.array_equal(nxt, parent):
            break
        flip ^= flip[parent]
        expo ^= expo[parent]
        parent = nxt
    else:
        stuck = np.flatnonzero(parent[parent] != parent)
        raise DependencyCycle(f"constraint cycle through n={int(stuck[0])}")
    # a cycle collapses onto itself, leaving a constrained index as its own root
    loops = bound[parent[bound] == bound]
    if loops.size:
        raise DependencyCycle(f"constraint cycle through n={int(loops[0])}")
    return SignForm(parent, flip, expo, mult_primes)
