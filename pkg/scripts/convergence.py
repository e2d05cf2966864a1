"""Grid convergence of single-species pulse speeds.

Runs each pure species at several resolutions and prints the relative speed
error against the closed-form speed. The scheme is first order, so each
halving of dx should roughly halve the error.

    python scripts/convergence.py --nx 900,1800,3600
"""

import argparse
import dataclasses

from chemopulse import analysis, experiments
from chemopulse.config import RunConfig, TimeSpec
from chemopulse.pde import Grid1D


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nx", default="900,1800,3600")
    ap.add_argument("--t-end", type=float, default=4000.0)
    args = ap.parse_args()

    base = RunConfig()
    print(f"{'species':>7} {'nx':>6} {'speed':>12} {'exact':>12} {'error':>8}")
    for phi, species in ((0.0, 1), (1.0, 2)):
        exact = analysis.species_speed(base.params, species)
        for nx in (int(v) for v in args.nx.split(",")):
            cfg = dataclasses.replace(base, grid=Grid1D(L=base.grid.L, nx=nx),
                                      time=TimeSpec(t_end=args.t_end,
                                                    snapshot_stride=max(1, 10 * nx // 900)))
            record, _ = experiments.tracked_run(cfg.with_phi(phi))
            speed = experiments.fit_speed(record.track(species)).speed
            print(f"{species:7d} {nx:6d} {speed:12.5e} {exact:12.5e} {(speed - exact) / exact:8.2%}")


if __name__ == "__main__":
    main()
