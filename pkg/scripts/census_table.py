"""Residual census of the primes for every split m of a fixed length n.

Prints one CSV row per m with the class counts in paper and full mode, the
multiplicity profile N_k, and the construction size for the same split.
"""

import argparse

from automaticity.constructions import build_primes_automaton
from automaticity.membership import build_prime_oracle
from automaticity.residuals import census


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--base", type=int, default=2)
    ap.add_argument("--n", type=int, default=16)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    q, n = args.base, args.n
    oracle = build_prime_oracle(q**n)

    print("q,n,m,N_paper,N_full,N_k,R_K,sum_sizes,max_size,construction_size")
    for m in range(1, n):
        paper = census(q, n, m, oracle, mode="paper", jobs=args.jobs)
        full = census(q, n, m, oracle, mode="full", jobs=args.jobs)
        _, rep = build_primes_automaton(q, n, m, oracle)
        nk = " ".join(map(str, paper.N_k))
        print(f"{q},{n},{m},{paper.N},{full.N},{nk},{paper.R_K},{paper.sum_sizes},"
              f"{paper.max_size},{rep.state_count}")


if __name__ == "__main__":
    main()
