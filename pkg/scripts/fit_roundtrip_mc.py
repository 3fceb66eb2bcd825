"""Monte-Carlo recovery rate of every corpus fit at a given noise level.

For each corpus entry, synthesizes ``--seeds`` noisy traces, fits them and
reports the fraction whose parameters all land within the entry tolerance.
"""

import argparse
import time

import numpy as np

from omx.corpus import CORPUS, fit_entry
from omx.extraction import synthesize_trace


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--sigma", type=float, default=None, help="override the entry noise level")
    args = ap.parse_args()
    for e in CORPUS:
        noise = dict(e.noise)
        if args.sigma is not None:
            noise["sigma"] = args.sigma
        t0 = time.perf_counter()
        ok, worst = 0, {k: 0.0 for k in e.tolerance}
        for seed in range(args.seeds):
            f = fit_entry(e, synthesize_trace(e.model, e.params, e.grid, noise, seed))
            errs = {k: abs(f.params[k] / e.params[k] - 1.0) for k in e.tolerance}
            ok += all(errs[k] <= e.tolerance[k] for k in errs)
            worst = {k: max(worst[k], errs[k]) for k in errs}
        dt = time.perf_counter() - t0
        print(f"{e.name:15s} pass {ok / args.seeds:6.1%}  worst "
              + " ".join(f"{k}={v:.2%}" for k, v in worst.items()) + f"  ({dt:.1f} s)")


if __name__ == "__main__":
    np.seterr(all="ignore")
    main()
