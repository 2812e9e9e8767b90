"""Character-like functions: Dirichlet characters changed at primes of the modulus.

Values live in the L-th roots of unity plus zero, L the lcm of every order in
play.  Sums are kept as integer coefficient vectors over the powers of a
primitive L-th root and reduced modulo the L-th cyclotomic polynomial, so
"is this sum zero" is decided exactly.
"""
from __future__ import annotations

import cmath
import itertools
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from sympy import Poly, Symbol, cyclotomic_poly, divisors, primefactors
from sympy.functions.combinatorial.numbers import kronecker_symbol, mobius

from .errors import DecompositionMismatch, NotFound


@dataclass(frozen=True)
class UnitValue:
    """Zero, or exp(2 pi i num / order) with 0 <= num < order in lowest terms."""

    num: int = 0
    order: int = 1
    zero: bool = False

    def __post_init__(self):
        if self.zero:
            object.__setattr__(self, "num", 0)
            object.__setattr__(self, "order", 1)
            return
        if self.order < 1:
            raise ValueError("order must be positive")
        n = self.num % self.order
        g = math.gcd(n, self.order)
        object.__setattr__(self, "num", n // g)
        object.__setattr__(self, "order", self.order // g)

    @classmethod
    def root(cls, num: int, order: int) -> UnitValue:
        return cls(num, order)

    @classmethod
    def sign(cls, s: int) -> UnitValue:
        if s == 0:
            return ZERO
        return cls(0 if s > 0 else 1, 2)

    def __mul__(self, other: UnitValue) -> UnitValue:
        if self.zero or other.zero:
            return ZERO
        L = math.lcm(self.order, other.order)
        return UnitValue(self.num * (L // self.order) + other.num * (L // other.order), L)

    def __pow__(self, e: int) -> UnitValue:
        if e == 0:
            return ONE
        if self.zero:
            return ZERO
        return UnitValue(self.num * e, self.order)

    def exponent(self, L: int) -> int:
        """k with value = zeta_L^k (the order must divide L)."""
        if L % self.order:
            raise ValueError(f"order {self.order} does not divide {L}")
        return self.num * (L // self.order)

    def __complex__(self) -> complex:
        return 0j if self.zero else cmath.exp(2j * math.pi * self.num / self.order)

    def as_json(self):
        return 0 if self.zero else {"num": self.num, "order": self.order}

    @classmethod
    def from_json(cls, obj) -> UnitValue:
        if obj == 0 or obj is None:
            return ZERO
        return cls(int(obj["num"]), int(obj["order"]))


ZERO = UnitValue(zero=True)
ONE = UnitValue(0, 1)


@lru_cache(maxsize=None)
def _cyclotomic(L: int) -> tuple[int, ...]:
    # ascending coefficients of Phi_L
    z = Symbol("z")
    return tuple(int(c) for c in reversed(Poly(cyclotomic_poly(L, z), z).all_coeffs()))


@dataclass(frozen=True)
class RootSum:
    """sum_k coeffs[k] zeta_L^k, stored reduced modulo Phi_L (length phi(L))."""

    L: int
    coeffs: tuple[int, ...]

    @classmethod
    def from_counts(cls, L: int, counts) -> RootSum:
        r = [int(c) for c in counts]
        r += [0] * (L - len(r))
        phi = _cyclotomic(L)
        deg = len(phi) - 1
        for i in range(len(r) - 1, deg - 1, -1):
            c = r[i]
            if c:
                for j, pj in enumerate(phi):
                    r[i - deg + j] -= c * pj
        return cls(L, tuple(r[:deg]))

    @classmethod
    def zero(cls, L: int) -> RootSum:
        return cls(L, (0,) * (len(_cyclotomic(L)) - 1))

    def __add__(self, other: RootSum) -> RootSum:
        return RootSum(self.L, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: RootSum) -> RootSum:
        return RootSum(self.L, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def scale(self, m: int) -> RootSum:
        return RootSum(self.L, tuple(m * a for a in self.coeffs))

    def rotate(self, k: int) -> RootSum:
        """Multiply by zeta_L^k."""
        if k % self.L == 0:
            return self
        raw = [0] * self.L
        for i, c in enumerate(self.coeffs):
            raw[(i + k) % self.L] += c
        return RootSum.from_counts(self.L, raw)

    def times(self, u: UnitValue) -> RootSum:
        return RootSum.zero(self.L) if u.zero else self.rotate(u.exponent(self.L))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __complex__(self) -> complex:
        return sum((c * cmath.exp(2j * math.pi * k / self.L) for k, c in enumerate(self.coeffs)), 0j)

    def __abs__(self) -> float:
        return abs(complex(self))

    def as_int(self) -> int | None:
        """The value when it is a rational integer, else None."""
        if all(c == 0 for c in self.coeffs[1:]):
            return self.coeffs[0]
        return None


@dataclass(frozen=True)
class DirichletCharacter:
    modulus: int
    values: tuple[UnitValue, ...]

    def __post_init__(self):
        q = self.modulus
        if q < 1 or len(self.values) != q:
            raise ValueError("need one value per residue 0..q-1")
        for a, v in enumerate(self.values):
            if v.zero != (math.gcd(a, q) > 1) and q > 1:
                raise ValueError(f"chi({a}) must be zero iff gcd({a}, {q}) > 1")
        if q > 1 and self.values[1] != ONE:
            raise ValueError("chi(1) must be 1")
        units = [a for a in range(q) if math.gcd(a, q) == 1]
        for a in units:
            for b in units:
                if self.values[a * b % q] != self.values[a] * self.values[b]:
                    raise ValueError(f"not multiplicative at {a}*{b} mod {q}")

    @property
    def order(self) -> int:
        return math.lcm(*(v.order for v in self.values if not v.zero))

    def __call__(self, n: int) -> UnitValue:
        return self.values[n % self.modulus]

    def is_principal(self) -> bool:
        return all(v.zero or v == ONE for v in self.values)

    def to_json(self) -> str:
        return json.dumps({"modulus": self.modulus,
                           "values": [v.as_json() for v in self.values]}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> DirichletCharacter:
        obj = json.loads(text)
        return cls(int(obj["modulus"]), tuple(UnitValue.from_json(v) for v in obj["values"]))


def kronecker(a: int, n: int) -> int:
    return int(kronecker_symbol(a, n))


def quadratic_character(modulus: int) -> DirichletCharacter:
    """A real non-principal character mod ``modulus``.

    Kronecker symbols (D/.) with D = +-modulus are tried first (those are the
    primitive ones); for odd moduli the Jacobi symbol (./q) is the fallback.
    """
    q = modulus
    if q < 3:
        raise ValueError("no non-principal character mod 1 or 2")
    for D in (q, -q) if q % 4 == 1 else (-q, q):
        if D % 4 not in (0, 1):
            continue
        vals = tuple(UnitValue.sign(kronecker(D, a)) if a else
                     UnitValue.sign(kronecker(D, q)) for a in range(q))
        vals = (ZERO,) + vals[1:]
        try:
            chi = DirichletCharacter(q, vals)
        except ValueError:
            continue
        if all(vals[a] == UnitValue.sign(kronecker(D, a + q)) for a in range(1, q)) \
                and not chi.is_principal():
            return chi
    if q % 2:
        vals = tuple(UnitValue.sign(kronecker(a, q)) for a in range(q))
        chi = DirichletCharacter(q, vals)
        if not chi.is_principal():
            return chi
    raise ValueError(f"no real non-principal character mod {q}")


@dataclass(frozen=True)
class CharLikeFunction:
    """Completely multiplicative f equal to chi away from the modulus.

    ``overrides`` gives f(p) at primes p dividing the modulus; a missing prime
    keeps chi(p) = 0.  With no nonzero override f is chi itself.
    """

    character: DirichletCharacter
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        q = self.character.modulus
        for p in self.overrides:
            if q % p or len(primefactors(p)) != 1 or primefactors(p)[0] != p:
                raise ValueError(f"override at {p}: must be a prime dividing {q}")

    @property
    def modulus(self) -> int:
        return self.character.modulus

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(primefactors(self.modulus))

    def at_prime(self, p: int) -> UnitValue:
        return self.overrides.get(p, ZERO)

    @property
    def L(self) -> int:
        orders = [self.character.order, 2] + [u.order for u in self.overrides.values() if not u.zero]
        return math.lcm(*orders)

    def is_character(self) -> bool:
        return all(self.at_prime(p).zero for p in self.primes)

    def restrict(self, Pp: int) -> CharLikeFunction:
        """f': zero at the primes dividing ``Pp``, f elsewhere."""
        over = dict(self.overrides)
        for p in primefactors(Pp):
            over[p] = ZERO
        return CharLikeFunction(self.character, over)

    def __call__(self, n: int) -> UnitValue:
        if n < 1:
            raise ValueError("n must be >= 1")
        val = ONE
        for p in self.primes:
            while n % p == 0:
                n //= p
                val = val * self.at_prime(p)
        return val * self.character(n)

    @classmethod
    def parse_overrides(cls, character: DirichletCharacter, specs) -> CharLikeFunction:
        """Overrides given as "p=v" with v an integer sign or "num/order"."""
        over = {}
        for s in specs or ():
            p, _, v = s.partition("=")
            if "/" in v:
                a, b = v.split("/")
                over[int(p)] = UnitValue(int(a), int(b))
            else:
                over[int(p)] = UnitValue.sign(int(v))
        return cls(character, over)


class _ChiPrefix:
    """S_chi(y) = sum_{m <= y} chi(m) as exact coefficient counts, any y >= 0."""

    def __init__(self, chi: DirichletCharacter, L: int):
        q = chi.modulus
        self.q, self.L = q, L
        self.prefix = np.zeros((q, L), dtype=np.int64)  # counts over m in [1, r]
        acc = np.zeros(L, dtype=np.int64)
        for r in range(q):
            if r:
                v = chi(r)
                if not v.zero:
                    acc[v.exponent(L)] += 1
            self.prefix[r] = acc
        period = acc.copy()
        v0 = chi(0)
        if not v0.zero:
            period[v0.exponent(L)] += 1
        self.period = RootSum.from_counts(L, period.tolist())

    def __call__(self, y: int) -> RootSum:
        if y <= 0:
            return RootSum.zero(self.L)
        full, r = divmod(y, self.q)
        out = RootSum.from_counts(self.L, self.prefix[r].tolist())
        if full and not self.period.is_zero():
            out = out + self.period.scale(full)
        return out


def restricted_sum(f: CharLikeFunction, Pp: int, x: int) -> RootSum:
    """sum_{n <= x, gcd(n, Pp) = 1} f(n), through the modulus's prime powers.

    n = (product of p^a over primes of the modulus) * m with m coprime to the
    modulus, so the sum is a signed combination of character sums S_chi.
    """
    L = f.L
    chi_sum = _ChiPrefix(f.character, L)
    live = [(p, f.at_prime(p)) for p in f.primes if Pp % p and not f.at_prime(p).zero]
    total = RootSum.zero(L)

    def walk(i: int, y: int, e: int):
        nonlocal total
        if y <= 0:
            return
        if i == len(live):
            total = total + chi_sum(y).rotate(e)
            return
        p, u = live[i]
        k = u.exponent(L)
        while y > 0:
            walk(i + 1, y, e)
            y //= p
            e += k

    walk(0, x, 0)
    return total


def charlike_sum(f: CharLikeFunction, x: int) -> RootSum:
    return restricted_sum(f, 1, x)


class PrefixTable:
    """Explicit values f(1..X) and cumulative counts per root class.

    ``coprime_to`` sieves out the multiples of its primes first, giving the
    restricted sums directly.
    """

    def __init__(self, f: CharLikeFunction, X: int, coprime_to: int = 1):
        L = f.L
        self.f, self.X, self.L = f, X, L
        n = np.arange(X + 1, dtype=np.int64)
        rest = n.copy()
        expo = np.zeros(X + 1, dtype=np.int64)
        zero = n == 0
        for p in f.primes:
            u = f.at_prime(p)
            k = 0 if u.zero else u.exponent(L)
            while True:
                hit = (rest % p == 0) & (rest > 0)
                if not hit.any():
                    break
                rest[hit] //= p
                expo[hit] += k
                if u.zero:
                    zero |= hit
        q = f.modulus
        chi_exp = np.array([0 if f.character(r).zero else f.character(r).exponent(L)
                            for r in range(q)], dtype=np.int64)
        chi_zero = np.array([f.character(r).zero for r in range(q)])
        r = rest % q
        expo = (expo + chi_exp[r]) % L
        zero |= chi_zero[r] & (n > 0)
        keep = ~zero
        for p in primefactors(coprime_to):
            keep[::p] = False
        keep[0] = False
        self.expo = expo
        self.keep = keep
        dtype = np.int32 if X < 2**31 else np.int64
        self.counts = np.zeros((L, X + 1), dtype=dtype)
        for k in range(L):
            np.cumsum(keep & (expo == k), out=self.counts[k])

    def value(self, n: int) -> UnitValue:
        return UnitValue(int(self.expo[n]), self.L) if self.keep[n] else ZERO

    def S(self, x: int) -> RootSum:
        if x > self.X:
            raise ValueError(f"x={x} beyond table limit {self.X}")
        return RootSum.from_counts(self.L, self.counts[:, max(x, 0)].tolist())

    def abs_sums(self) -> np.ndarray:
        """|S(n)| for n = 0..X; exact integers when every value is real."""
        if self.L == 2:
            return np.abs(self.counts[0].astype(np.int64) - self.counts[1])
        zeta = np.exp(2j * np.pi * np.arange(self.L) / self.L)
        return np.abs(zeta @ self.counts.astype(np.float64))


@dataclass
class MobiusCheck:
    x: int
    Pp: int
    weighted: RootSum  # sum mu(d) f(d) S(x/d)
    unweighted: RootSum  # sum mu(d) S(x/d)
    direct: RootSum  # sieved sum over n <= x coprime to Pp

    @property
    def weighted_holds(self) -> bool:
        return (self.weighted - self.direct).is_zero()

    @property
    def unweighted_holds(self) -> bool:
        return (self.unweighted - self.direct).is_zero()


def mobius_decompose(f: CharLikeFunction, Pp: int, x: int,
                     table: PrefixTable | None = None) -> MobiusCheck:
    """Both readings of the divisor-sum decomposition against the direct sum.

    Raises DecompositionMismatch when the f(d)-weighted form, the one complete
    multiplicativity demands, disagrees with the direct restricted sum.
    """
    if Pp < 1 or f.modulus % Pp or any(e > 1 for e in _exponents(Pp)):
        raise ValueError("Pp must be a squarefree divisor of the modulus")
    L = f.L
    weighted = unweighted = RootSum.zero(L)
    for d in divisors(Pp):
        mu = int(mobius(d))
        if mu == 0:
            continue
        s = charlike_sum(f, x // d).scale(mu)
        unweighted = unweighted + s
        weighted = weighted + s.times(f(d))
    if table is not None and table.X >= x:
        direct = table.S(x)
    else:
        direct = PrefixTable(f, x, coprime_to=Pp).S(x)
    res = MobiusCheck(x, Pp, weighted, unweighted, direct)
    if not res.weighted_holds:
        raise DecompositionMismatch(f"x={x}, Pp={Pp}: {complex(weighted)} != {complex(direct)}")
    return res


def _exponents(n: int):
    out = []
    for p in primefactors(n):
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        out.append(e)
    return out


def complement(f: CharLikeFunction, p: int) -> int:
    """Largest divisor of the modulus prime to p."""
    q = f.modulus
    while q % p == 0:
        q //= p
    return q


def find_k(f: CharLikeFunction, Pp: int, k_max: int) -> int:
    """Smallest k <= k_max with S'(k Pp) != 0, S' the sum over n prime to Pp."""
    for k in range(1, k_max + 1):
        if not restricted_sum(f, Pp, k * Pp).is_zero():
            return k
    raise NotFound(f"S'(k*{Pp}) = 0 for every k <= {k_max}")


@dataclass
class WitnessReport:
    k: int
    p: int
    Pp: int
    digits: int
    exponents: list[int]
    x: int
    s_prime_abs: float
    method: str

    @property
    def ratio(self) -> float:
        return self.s_prime_abs / self.digits

    def as_json(self) -> dict:
        return {"k": self.k, "p": self.p, "digits": self.digits, "exponents": self.exponents,
                "x": self.x, "s_prime_abs": self.s_prime_abs, "ratio": self.ratio}


def witness_search(f: CharLikeFunction, p: int, n_digits: int, m_max: int | None = None,
                   k: int | None = None, Pp: int | None = None, k_max: int = 10**4,
                   exhaustive: bool | None = None) -> WitnessReport:
    """Pick m_1 < ... < m_n maximizing |S'(x)| at x = sum k Pp p^{m_i}.

    Greedy adds one exponent at a time (ties to the smallest m).  The
    exhaustive pass, on by default for n_digits <= 6, scans every exponent set
    and keeps the greedy result if nothing beats it.
    """
    if n_digits < 1:
        raise ValueError("n_digits must be >= 1")
    if f.modulus % p:
        raise ValueError(f"{p} does not divide the modulus")
    if f.at_prime(p).zero:
        raise ValueError(f"f vanishes at {p}")
    Pp = complement(f, p) if Pp is None else Pp
    k = find_k(f, Pp, k_max) if k is None else k
    m_max = 2 * n_digits + 4 if m_max is None else m_max
    if m_max + 1 < n_digits:
        raise ValueError("not enough exponents for distinct digits")
    unit = k * Pp

    def score(ms) -> float:
        return abs(restricted_sum(f, Pp, sum(unit * p**m for m in ms)))

    chosen: list[int] = []
    for _ in range(n_digits):
        best = max((m for m in range(m_max + 1) if m not in chosen),
                   key=lambda m: (score(chosen + [m]), -m))
        chosen.append(best)
    best_ms, best_val, method = sorted(chosen), score(chosen), "greedy"
    if exhaustive is None:
        exhaustive = n_digits <= 6
    if exhaustive:
        for ms in itertools.combinations(range(m_max + 1), n_digits):
            val = score(ms)
            if val > best_val + 1e-9:
                best_ms, best_val, method = list(ms), val, "exhaustive"
    x = sum(unit * p**m for m in best_ms)
    return WitnessReport(k, p, Pp, n_digits, best_ms, x, best_val, method)


@dataclass
class GrowthRow:
    x: int
    running_max_abs: float
    log_x: float
    ratio: float
    upper_bound: float  # (log x)^omega(P)

    def csv(self) -> str:
        return f"{self.x},{_fmt(self.running_max_abs)},{_fmt(self.log_x)},{_fmt(self.ratio)},{_fmt(self.upper_bound)}"


GROWTH_HEADER = "x,running_max_abs,log_x,ratio,upper_bound"


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else f"{v:.12g}"


def checkpoints(X: int, stride: int = 10, start: int = 10) -> list[int]:
    out, x = [], start
    while x <= X:
        out.append(x)
        x *= stride
    if not out or out[-1] != X:
        out.append(X)
    return out


def growth_profile(f: CharLikeFunction, X: int, stride: int = 10,
                   table: PrefixTable | None = None) -> list[GrowthRow]:
    if X < 10:
        raise ValueError("X must be >= 10")
    table = table or PrefixTable(f, X)
    run = np.maximum.accumulate(table.abs_sums())
    omega = len(f.primes)
    rows = []
    for x in checkpoints(X, stride):
        lx = math.log(x)
        m = float(run[x])
        rows.append(GrowthRow(x, m, lx, m / lx, lx**omega))
    return rows


def ceiling(x: int, omega: int) -> float:
    """3 (log_2 x)^omega, the sanity ceiling on running maxima."""
    return 3 * math.log2(x) ** omega
