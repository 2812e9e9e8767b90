"""Running max of |S_f| against log x for a character-like f and for chi itself."""
import argparse

from pmult.charlike import (GROWTH_HEADER, CharLikeFunction, growth_profile,
                            quadratic_character)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--modulus", type=int, default=3)
    ap.add_argument("--override", action="append", default=None)
    ap.add_argument("--x", type=int, default=10**6)
    args = ap.parse_args()
    chi = quadratic_character(args.modulus)
    over = args.override or [f"{p}=1" for p in CharLikeFunction(chi).primes]
    for name, f in (("charlike", CharLikeFunction.parse_overrides(chi, over)),
                    ("character", CharLikeFunction(chi))):
        print(f"# {name}")
        print(GROWTH_HEADER)
        for row in growth_profile(f, args.x):
            print(row.csv())


if __name__ == "__main__":
    main()
