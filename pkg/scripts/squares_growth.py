"""Fit the growth exponent of the squares automaton against x = q**n.

Usage: python3 scripts/squares_growth.py --base 3 --n 4 6 8 10 12
"""

import argparse
import math

import numpy as np

from automaticity.constructions import build_squares_automaton


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--base", type=int, default=3)
    ap.add_argument("--n", type=int, nargs="+", default=[4, 6, 8, 10, 12])
    args = ap.parse_args()

    print("q,n,state_count,sqrt_x,ratio")
    sizes = []
    for n in args.n:
        _, rep = build_squares_automaton(args.base, n)
        sizes.append(rep.state_count)
        root = args.base ** (n // 2)
        print(f"{args.base},{n},{rep.state_count},{root},{rep.state_count / root:.4f}")
    if len(args.n) >= 2:
        slope = np.polyfit([n * math.log(args.base) for n in args.n], np.log(sizes), 1)[0]
        print(f"# slope of ln(states) vs ln(x): {slope:.4f}")


if __name__ == "__main__":
    main()
