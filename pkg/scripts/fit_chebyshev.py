"""Fit phases to T_d for a range of degrees and print residuals and timings."""
import argparse
import time

import numpy as np

from qspkan import SolverOptions, real_response, solve_phases


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-degree", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    fresh = np.linspace(-1, 1, 201)
    print("degree  residual_max  fresh_grid_err  restart  seconds")
    for d in range(1, args.max_degree + 1):
        target = lambda a, d=d: np.cos(d * np.arccos(np.clip(a, -1, 1)))
        t0 = time.perf_counter()
        phi, rep = solve_phases(target, d, options=SolverOptions(seed=args.seed))
        dt = time.perf_counter() - t0
        err = max(abs(real_response(phi, a) - target(a)) for a in fresh)
        print(f"{d:6d}  {rep.residual_max:12.2e}  {err:14.2e}  {rep.restart:7d}  {dt:7.3f}")


if __name__ == "__main__":
    main()
