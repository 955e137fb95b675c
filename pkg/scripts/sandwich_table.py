"""Lower bound, greedy upper bound and (when small enough) exact automaticity by budget N."""

import argparse

from automaticity.automata import size_sandwich
from automaticity.membership import build_oracle


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--base", type=int, default=2)
    ap.add_argument("--set", default="primes")
    ap.add_argument("--max-n", type=int, default=14)
    ap.add_argument("--exact-upto", type=int, default=5)
    args = ap.parse_args()

    print("q,N,lower,exact,upper,trie_size")
    for N in range(args.max_n + 1):
        oracle = build_oracle(args.set, max(args.base**N, 2))
        sw = size_sandwich(oracle, args.base, N, exact=N <= args.exact_upto)
        exact = sw.exact if sw.exact is not None else ""
        print(f"{args.base},{N},{sw.lower},{exact},{sw.upper},{sw.trie_size}")


if __name__ == "__main__":
    main()
