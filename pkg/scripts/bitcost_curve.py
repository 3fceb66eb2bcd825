"""Phonons (and energy) per bit versus kappa/omega_m at 10 % error.

Compares the numerical search with the slow and fast closed forms and prints
a small table; the full curve is written by ``omx bitcost``.
"""

import argparse

import numpy as np

from omx.bitcost import EncodingProblem, phonons_fast_limit, phonons_slow_limit, required_phonons


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ratio-g", type=float, default=5e-5)
    ap.add_argument("--num", type=int, default=17)
    args = ap.parse_args()
    print(f"{'kappa/omega_m':>14} {'n_phon':>12} {'slow':>12} {'fast':>12} {'n/max':>8}")
    for rk in np.geomspace(1e-2, 1e2, args.num):
        prob = EncodingProblem(ratio_g=args.ratio_g, ratio_k=rk)
        res = required_phonons(prob)
        slow, fast = phonons_slow_limit(prob), phonons_fast_limit(prob)
        print(f"{rk:14.4g} {res.n_phon:12.4g} {slow:12.4g} {fast:12.4g} {res.n_phon / max(slow, fast):8.3f}")


if __name__ == "__main__":
    main()
