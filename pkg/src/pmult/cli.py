"""Command-line front end: construct, verify, search, charlike.

Exit codes: 0 pass, 1 a check failed, 2 usage error, 3 internal invariant
violation.  All randomness comes from --rng-seed, and no output depends on
--threads or on wall-clock time.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import PrimeSet, prefix_sums, read_sequence, write_sequence
from .errors import InvariantViolation, NotFound

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    primes: PrimeSet | None = None
    horizon: int | None = None
    bound: float | None = None
    signs: dict = field(default_factory=dict)
    seeds: dict = field(default_factory=dict)
    output: str | None = None
    fmt: str = "csv"
    rng_seed: int = 0
    threads: int = 1
    extra: dict = field(default_factory=dict)


def _assignments(text: str | None, what: str) -> dict[int, int]:
    out: dict[int, int] = {}
    for part in (text or "").split(","):
        if not part.strip():
            continue
        k, sep, v = part.partition("=")
        if not sep:
            raise UsageError(f"{what}: expected n=value, got {part!r}")
        out[int(k)] = int(v)
    return out


def _primes(text: str) -> PrimeSet:
    try:
        return PrimeSet.parse(text)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _positive(name: str, n: int | None, least: int = 1) -> int:
    if n is None or n < least:
        raise UsageError(f"{name} must be >= {least}")
    return n


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _rows_csv(header: str, rows) -> str:
    return header + "\n" + "".join(",".join(str(c) for c in r) + "\n" for r in rows)


def cmd_construct(cfg: RunConfig) -> int:
    from .general import build_levels, finalize, level_rows, materialize
    from .small import P235, Program235, construct_p23, construct_p235

    P = cfg.primes
    n = _positive("--n", cfg.horizon)
    method = cfg.extra.get("method", "auto")
    if method == "auto":
        method = "small" if P.k == 2 or P == P235 else "general"
    if method == "small" and not (P.k == 2 and P.primes == (2, 3)) and P != P235:
        raise UsageError("the small constructions cover {2,3} and {2,3,5} only")
    if method == "general" and P.k < 3:
        raise UsageError("the general construction needs at least three primes")
    if method == "small" and (cfg.extra.get("program") or cfg.extra.get("dump_levels")):
        raise UsageError("--program and --dump-levels apply to the general construction")
    trace: list | None = [] if cfg.extra.get("trace") else None
    summary = {"method": method, "primes": list(P.primes), "n": n}
    if method == "small" and P.k == 2:
        s = cfg.signs
        seq = construct_p23(n, f2=s.get(2, 1), f3=s.get(3, -1), f5=cfg.seeds.get(5, -1), trace=trace)
    elif method == "small":
        signs = {2: -1, 3: -1, 5: 1} | cfg.signs
        seq = construct_p235(n, Program235(f17=cfg.seeds.get(17, 1), prime_signs=signs), trace=trace)
    else:
        levels = build_levels(P)
        rng = np.random.default_rng(cfg.rng_seed) if cfg.extra.get("random_seeds") else None
        signs = {p: cfg.signs.get(p, -1) for p in P}
        prog = finalize(levels[-1], P, signs, cfg.seeds, n, rng)
        seq = materialize(prog, n)
        summary["b"] = [lvl.modulus for lvl in prog.levels]
        summary["a"] = [lvl.exponent for lvl in prog.levels]
        if cfg.extra.get("program"):
            Path(cfg.extra["program"]).write_text(prog.to_csv())
        if cfg.extra.get("dump_levels"):
            Path(cfg.extra["dump_levels"]).write_text(
                _rows_csv("level,b,a,block,free_count,relation_count",
                          level_rows(prog.levels, prog.horizon)))
        if trace is not None:
            pairs = [(y, x, "relation") for x, y in prog.relations.tolist()]
            pairs += [(y, x, "chain") for x, y in prog.chain.tolist()]
            trace.extend(sorted(t for t in pairs if t[0] <= n))
    if trace is not None:
        Path(cfg.extra["trace"]).write_text(
            _rows_csv("target,source,rule", ((t, "" if s is None else s, r) for t, s, r in trace)))
    if cfg.output is None:
        raise UsageError("--out is required")
    write_sequence(seq, cfg.output, cfg.fmt)
    summary["sup_abs"] = prefix_sums(seq).sup_abs
    sys.stdout.write(json.dumps(summary, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    from .general import build_levels, condition_failures
    from .verify import (Check, check_bounded, check_condition_V,
                         check_multiplicativity, check_telescoping)

    P = cfg.primes
    src = cfg.extra.get("input")
    if not src:
        raise UsageError("--in is required")
    seq = read_sequence(src, P, cfg.fmt)
    rep = check_multiplicativity(seq, P, threads=cfg.threads)
    bound = None if cfg.bound is None else int(cfg.bound)
    rep.extend(check_bounded(seq, bound=bound))
    if cfg.extra.get("structure"):
        if P.k < 3:
            raise UsageError("--structure applies to the general construction")
        for lvl in build_levels(P):
            rep.extend(check_condition_V(lvl, P, trials=cfg.extra.get("trials", 100),
                                         seed=cfg.rng_seed, horizon=seq.horizon))
            if lvl.parent is not None:
                bad = condition_failures(lvl, seq.horizon)
                rep.checks.append(Check(f"conditions_I_IV[level={lvl.level}]", not bad,
                                        {"n": None, "expected": None, "actual": bad[0]} if bad else None))
                rep.extend(check_telescoping(seq, lvl))
    _write(cfg.extra.get("report"), rep.to_json())
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_search(cfg: RunConfig) -> int:
    from .search import SAT, UNSAT, brute_force_search

    P = cfg.primes
    n = _positive("--n", cfg.horizon)
    if cfg.bound is None or cfg.bound < 0:
        raise UsageError("--C must be >= 0")
    res = brute_force_search(P, cfg.bound, n, budget=cfg.extra.get("budget", 10**6),
                             engine=cfg.extra.get("engine", "auto"))
    _write(cfg.output, json.dumps(res.as_json(), sort_keys=True) + "\n")
    return EXIT_OK if res.status in (SAT, UNSAT) else EXIT_FAIL


def cmd_charlike(cfg: RunConfig) -> int:
    from .charlike import (GROWTH_HEADER, CharLikeFunction, DirichletCharacter, PrefixTable,
                           growth_profile, mobius_decompose, quadratic_character,
                           witness_search)

    ex = cfg.extra
    if ex.get("character"):
        chi = DirichletCharacter.from_json(Path(ex["character"]).read_text())
    else:
        chi = quadratic_character(_positive("--modulus", ex.get("modulus"), 3))
    f = CharLikeFunction.parse_overrides(chi, ex.get("override"))
    X = _positive("--x", cfg.horizon, 10)
    out = {"modulus": chi.modulus, "x": X, "is_character": f.is_character()}
    if ex.get("emit"):
        rows = growth_profile(f, X)
        Path(ex["emit"]).write_text(GROWTH_HEADER + "\n" + "".join(r.csv() + "\n" for r in rows))
        runs = [r.running_max_abs for r in rows]
        out["growth_strictly_increasing"] = all(a < b for a, b in zip(runs, runs[1:]))
    if ex.get("mobius_trials"):
        rng = np.random.default_rng(cfg.rng_seed)
        Pp = ex.get("pprime") or chi.modulus
        t2 = PrefixTable(f, X, coprime_to=Pp)
        xs = rng.integers(1, X + 1, size=ex["mobius_trials"]).tolist()
        checks = [mobius_decompose(f, Pp, int(x), t2) for x in xs]
        out["mobius"] = {"trials": len(checks), "pprime": Pp,
                         "weighted_identity": all(c.weighted_holds for c in checks),
                         "unweighted_identity": all(c.unweighted_holds for c in checks)}
    if ex.get("witness"):
        p = ex.get("prime") or min(f.primes)
        reports = [witness_search(f, p, d).as_json() for d in range(1, ex.get("digits", 8) + 1)]
        Path(ex["witness"]).write_text(json.dumps(reports, indent=2, sort_keys=True) + "\n")
    sys.stdout.write(json.dumps(out, sort_keys=True) + "\n")
    return EXIT_OK


COMMANDS = {"construct": cmd_construct, "verify": cmd_verify,
            "search": cmd_search, "charlike": cmd_charlike}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--rng-seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--error-json", action="store_true",
                        help="print failures as JSON on stderr")
    parser = _Parser(prog="pmult", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("construct", parents=[common], help="build a bounded sign table")
    c.add_argument("--primes", required=True)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--out")
    c.add_argument("--format", choices=("csv", "binary"), default="csv")
    c.add_argument("--method", choices=("auto", "small", "general"), default="auto")
    c.add_argument("--signs", help="prime signs, e.g. 2=-1,3=1")
    c.add_argument("--seeds", help="free values, e.g. 7=1,11=-1")
    c.add_argument("--random-seeds", action="store_true",
                   help="draw unspecified free values from --rng-seed")
    c.add_argument("--trace", help="CSV target,source,rule")
    c.add_argument("--program", help="rule program CSV kind,x,y")
    c.add_argument("--dump-levels", help="per-block level statistics CSV")

    v = sub.add_parser("verify", parents=[common], help="check a stored sign table")
    v.add_argument("--primes", required=True)
    v.add_argument("--in", dest="input", required=True)
    v.add_argument("--format", choices=("csv", "binary"), default="csv")
    v.add_argument("--bound", type=float, help="also require |S(n)| <= bound")
    v.add_argument("--structure", action="store_true",
                   help="rebuild the levels and check conditions (I)-(V) and telescoping")
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--report", help="JSON report path (default stdout)")

    s = sub.add_parser("search", parents=[common], help="exhaustive bounded-sum search")
    s.add_argument("--primes", required=True)
    s.add_argument("--C", type=float, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--budget", type=int, default=10**6)
    s.add_argument("--engine", choices=("auto", "dfs", "cdcl"), default="auto")
    s.add_argument("--out")

    h = sub.add_parser("charlike", parents=[common], help="character-like growth experiments")
    h.add_argument("--modulus", type=int)
    h.add_argument("--character", help="character JSON {modulus, values}")
    h.add_argument("--override", action="append", help="p=v, v a sign or num/order")
    h.add_argument("--x", type=int, required=True)
    h.add_argument("--emit", help="growth CSV path")
    h.add_argument("--mobius-trials", type=int, default=0)
    h.add_argument("--pprime", type=int)
    h.add_argument("--witness", help="witness JSON path")
    h.add_argument("--prime", type=int)
    h.add_argument("--digits", type=int, default=8)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(ns.command, rng_seed=ns.rng_seed, threads=ns.threads)
    if ns.threads < 1:
        raise UsageError("--threads must be >= 1")
    if getattr(ns, "primes", None):
        cfg.primes = _primes(ns.primes)
    cfg.horizon = getattr(ns, "n", None) if ns.command != "charlike" else ns.x
    cfg.fmt = getattr(ns, "format", "csv")
    cfg.output = getattr(ns, "out", None)
    if ns.command == "search":
        cfg.bound = math.inf if ns.C == math.inf else ns.C
    if ns.command == "verify":
        cfg.bound = ns.bound
    cfg.signs = _assignments(getattr(ns, "signs", None), "--signs")
    cfg.seeds = _assignments(getattr(ns, "seeds", None), "--seeds")
    skip = {"command", "rng_seed", "threads", "primes", "n", "format", "out", "signs",
            "seeds", "error_json", "C", "bound"}
    cfg.extra = {k: v for k, v in vars(ns).items() if k not in skip}
    return cfg


def run(cfg: RunConfig) -> int:
    return COMMANDS[cfg.command](cfg)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    want_json = "--error-json" in argv
    try:
        ns = build_parser().parse_args(argv)
        return run(config_from_args(ns))
    except (UsageError, ValueError, NotFound, OverflowError, FileNotFoundError) as e:
        return _fail(EXIT_USAGE, e, want_json)
    except InvariantViolation as e:
        return _fail(EXIT_INVARIANT, e, want_json)


def _fail(code: int, err: Exception, as_json: bool) -> int:
    if as_json:
        sys.stderr.write(json.dumps({"error": type(err).__name__, "message": str(err),
                                     "exit_code": code}, sort_keys=True) + "\n")
    else:
        sys.stderr.write(f"pmult: {err}\n")
    return code
