"""Deterministic limit and gossip averages for the 51-agent hierarchy."""

import argparse

import numpy as np

from fjmids import fixtures
from fjmids.dynamics import limit_opinion
from fjmids.gossip import default_config, run


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=lambda s: int(float(s)), default=10_000_000)
    ap.add_argument("--seed", type=int, default=51)
    args = ap.parse_args(argv)

    model = fixtures.hierarchy()
    x = limit_opinion(model).reshape(model.n, model.m)
    stats = run(model, default_config(model, seed=args.seed, steps=args.steps))
    xbar = stats.cesaro[0].reshape(model.n, model.m)
    print("group  local leader (limit)      group mean (limit)    group mean (Cesaro)")
    for g in range(10):
        lead = 1 + 5 * g
        members = slice(lead, lead + 5)
        print(f"{g:>5}  {x[lead, 0]:8.2f} {x[lead, 1]:8.2f}      "
              f"{x[members, 0].mean():8.2f} {x[members, 1].mean():8.2f}     "
              f"{xbar[members, 0].mean():8.2f} {xbar[members, 1].mean():8.2f}")
    print(f"|xbar - x'|_inf after {args.steps} steps: {np.max(np.abs(xbar - x)):.3f}")


if __name__ == "__main__":
    main()
