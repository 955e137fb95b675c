"""Tabulate the analytic lower bounds next to the trivial bound x for a range of x.

All values are natural logs. The four hypothesis flags are printed as 0/1;
when any is 0 the lasteq column is a formal evaluation only.
"""

import argparse
import math

from automaticity.bounds import lasteq_lower, load_config, select_parameters, theorem1_log


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--base", type=int, default=2)
    ap.add_argument("--exponents", type=int, nargs="+", default=[6, 12, 19, 30, 60, 100, 300],
                    help="x = 10**e for each e")
    ap.add_argument("--config", default=None, help="key = value constants file")
    args = ap.parse_args()
    cfg = load_config(args.config)

    conds = None
    for e in args.exponents:
        x = 10**e
        sel = select_parameters(x, args.base, cfg)
        last = lasteq_lower(x, args.base, cfg)
        if conds is None:
            conds = list(sel.conditions)
            print("log10_x,K,m,ln_x,ln_theorem1,ln_lasteq," + ",".join(f'"{c}"' for c in conds))
        flags = ",".join(str(int(sel.conditions[c])) for c in conds)
        print(f"{e},{sel.values['K']},{sel.values['m']},{math.log(x):.4f},"
              f"{theorem1_log(x, cfg.c):.4f},{last.values['ln_value']:.4f},{flags}")


if __name__ == "__main__":
    main()
