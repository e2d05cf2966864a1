"""Bifurcation diagram: fitted speeds of both species against the fast fraction.

Writes bifurcation.csv (same columns as ``chemopulse sweep``) and prints a
table with the analytic joint speed alongside.

    python scripts/bifurcation_sweep.py --out results/sweep --workers 4
"""

import argparse
import dataclasses
from pathlib import Path

import numpy as np

from chemopulse import analysis, experiments, outputs
from chemopulse.config import RunConfig, TimeSpec, load_config
from chemopulse.params import default_gamma
from chemopulse.pde import Grid1D


def extended_config(base: RunConfig, L, nx, t_end):
    g = default_gamma(L, base.init.M_total)
    return dataclasses.replace(
        base,
        params=base.params.replace(gamma1=g, gamma2=g),
        grid=Grid1D(L=L, nx=nx),
        time=TimeSpec(t_end=t_end, cfl=base.time.cfl, snapshot_stride=base.time.snapshot_stride),
    )


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", type=Path)
    ap.add_argument("--out", type=Path, default=Path("results/sweep"))
    ap.add_argument("--phis", default="0.05:0.95:0.05", help="start:stop:step or comma list")
    ap.add_argument("--length", type=float, default=8.0, help="channel length (cm)")
    ap.add_argument("--nx", type=int, default=4000)
    ap.add_argument("--t-end", type=float, default=20000.0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    if ":" in args.phis:
        a, b, c = (float(v) for v in args.phis.split(":"))
        phis = np.round(np.arange(a, b + c / 2, c), 10)
    else:
        phis = [float(v) for v in args.phis.split(",")]
    base = load_config(args.config) if args.config else RunConfig()
    cfg = extended_config(base, args.length, args.nx, args.t_end)

    result = experiments.sweep_phi(cfg, phis, workers=args.workers)
    path = outputs.write_csv(args.out / "bifurcation.csv", outputs.BIFURCATION_COLUMNS,
                             outputs.bifurcation_rows(result))
    s1 = analysis.species_speed(cfg.params, 1)
    s2 = analysis.species_speed(cfg.params, 2)
    print(f"sigma1 = {s1:.4e}  sigma2 = {s2:.4e}  phi* = {result.phi_star:.4f}")
    print(f"{'phi':>5} {'slow':>11} {'fast':>11} {'analytic':>11}  regime")
    fmt = lambda v: f"{v:11.4e}" if v is not None else f"{'-':>11}"
    for r in result.rows:
        print(f"{r.phi_red:5.2f} {fmt(r.speed_slow)} {fmt(r.speed_fast)} {fmt(r.sigma_analytic)}  "
              f"{r.regime or r.error}")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
