"""Command-line front end.

Results go to stdout as ``key = value`` lines and to files in the output
directory. Failures print one ``ERROR <code>: <message>`` line to stderr and
exit with 2 (bad configuration or input), 3 (numerical failure) or 4 (the
speed-selection hypothesis fails or no single pulse exists).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import analysis, experiments, outputs, pde
from .config import RunConfig, load_config
from .errors import (
    BifurcationUndefinedError,
    ChemopulseError,
    InsufficientDataError,
    InvalidParameterError,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_HYPOTHESIS = 0, 2, 3, 4

_EXIT_BY_CODE = {
    "config": EXIT_CONFIG,
    "invalid_parameter": EXIT_CONFIG,
    "invalid_profile": EXIT_CONFIG,
    "singular_fit": EXIT_CONFIG,
    "hypothesis_failed": EXIT_HYPOTHESIS,
    "no_single_pulse": EXIT_HYPOTHESIS,
}

CURVE_POINTS = 1001
DISPERSION_POINTS = 201
PROFILE_POINTS = 2001


def exit_status(exc: ChemopulseError):
    return _EXIT_BY_CODE.get(exc.code, EXIT_NUMERICAL)


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "none"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit(out, key, value):
    print(f"{key} = {_fmt(value)}", file=out)


def _species2_to_fast(params, phi_red):
    _, swapped = analysis.order_species(params)
    return 1.0 - phi_red if swapped else phi_red


# -- subcommands ---------------------------------------------------------------

def cmd_dispersion(cfg: RunConfig, outdir: Path, args, out):
    data = analysis.admissible_set(cfg.params)
    emit(out, "sigma1", data.sigma1)
    emit(out, "sigma2", data.sigma2)
    emit(out, "I1", str(data.I1))
    emit(out, "I2", str(data.I2))
    emit(out, "intersection", str(data.intersection))
    emit(out, "omega", str(data.omega))
    emit(out, "species_swapped", data.swapped)
    emit(out, "hypothesis_holds", data.hypothesis_holds)
    if not data.hypothesis_holds:
        emit(out, "failed_clause", data.failed_clause)

    p, _ = analysis.order_species(cfg.params)
    sig = np.linspace(data.sigma1, data.sigma2, DISPERSION_POINTS)
    with np.errstate(divide="ignore", invalid="ignore"):
        g1, g2 = analysis._g(p, sig, 1), analysis._g(p, sig, 2)
        H = analysis._H(p, sig)
        G = analysis._G(p, sig)
    om = data.omega
    # G is reported on the closure of Omega only
    if data.hypothesis_holds and not om.is_empty:
        inside = (sig >= om.lo) & (sig <= om.hi)
    else:
        inside = np.zeros(len(sig), dtype=bool)
    rows = [(s, a, b, h if np.isfinite(h) else None, gv if ok and np.isfinite(gv) else None)
            for s, a, b, h, gv, ok in zip(sig, g1, g2, H, G, inside)]
    path = outputs.write_csv(outdir / "dispersion.csv", outputs.DISPERSION_COLUMNS, rows)
    emit(out, "wrote", path)
    if not data.hypothesis_holds:
        raise BifurcationUndefinedError(data.failed_clause)


def cmd_phistar(cfg: RunConfig, outdir: Path, args, out):
    data = analysis.phi_star(cfg.params)
    emit(out, "omega", str(data.omega))
    emit(out, "lambda_star", data.lambda_star)
    emit(out, "lambda_star_grid", data.lambda_star_grid)
    emit(out, "sigma_star", data.sigma_star)
    emit(out, "phi_star", data.phi_star)
    sig = np.linspace(data.omega.lo, data.omega.hi, CURVE_POINTS)
    G = analysis.G_func(cfg.params, sig)
    path = outputs.write_csv(outdir / "g_curve.csv", outputs.G_CURVE_COLUMNS, zip(sig, G))
    emit(out, "wrote", path)


def cmd_profiles(cfg: RunConfig, outdir: Path, args, out):
    phi = cfg.init.phi_red if args.phi is None else args.phi
    if not 0 <= phi <= 1:
        raise InvalidParameterError("phi", f"must lie in [0, 1], got {phi!r}")
    sol = analysis.wave_solution(cfg.params, _species2_to_fast(cfg.params, phi),
                                 cfg.init.M_total)
    emit(out, "phi_red", phi)
    emit(out, "sigma", sol.sigma)
    for i in (1, 2):
        lm, lp = sol.rates(i)
        emit(out, f"lambda_minus_{i}", lm)
        emit(out, f"lambda_plus_{i}", lp)
        emit(out, f"rhoM_{i}", sol.amplitude(i))
    span = 10 * experiments.pulse_width(cfg.params)
    z = np.linspace(-span, span, PROFILE_POINTS)
    r1, r2, S = analysis.analytic_profiles(cfg.params, sol, z)
    path = outputs.write_csv(outdir / "profiles.csv", outputs.PROFILE_COLUMNS, zip(z, r1, r2, S))
    emit(out, "wrote", path)


def cmd_simulate(cfg: RunConfig, outdir: Path, args, out):
    grid = cfg.grid
    tracker = experiments._Tracker(grid.x, experiments.SPECIES, skip_empty=True)
    keep = []
    for s in pde.simulate(cfg):
        tracker.add(s)
        keep.append(s)
    record = tracker.record()
    last = keep[-1]
    emit(out, "snapshots", len(keep))
    emit(out, "t_end", last.t)
    for i in record.species:
        emit(out, f"mass_{i}", last.mass(i, grid.dx))
        try:
            fit = experiments.fit_speed(record.track(i), args.discard)
            emit(out, f"speed_{i}", fit.speed)
        except InsufficientDataError:
            emit(out, f"speed_{i}", None)
    written = []
    if "csv" in cfg.outputs.formats:
        written.append(outputs.write_csv(outdir / "snapshots.csv", outputs.SNAPSHOT_COLUMNS,
                                         outputs.snapshot_rows(keep, grid)))
        written.append(outputs.write_csv(outdir / "track.csv", outputs.TRACK_COLUMNS,
                                         outputs.track_rows(record)))
    if "ppm" in cfg.outputs.formats:
        written.append(outputs.write_ppm(outdir / "kymograph.ppm",
                                         experiments.render_kymograph(keep)))
    for p in written:
        emit(out, "wrote", p)


def kymograph_name(phi):
    return f"kymograph_phi_{phi:.4f}.ppm"


def cmd_sweep(cfg: RunConfig, outdir: Path, args, out):
    try:
        phis = [float(v) for v in args.phis.split(",") if v.strip()]
    except ValueError:
        raise InvalidParameterError("phis", f"not a comma-separated number list: {args.phis!r}") from None
    for p in phis:
        if not 0 <= p <= 1:
            raise InvalidParameterError("phis", f"values must lie in [0, 1], got {p!r}")
    result = experiments.sweep_phi(cfg, phis, workers=args.workers, discard_fraction=args.discard,
                                   keep_kymographs="ppm" in cfg.outputs.formats)
    emit(out, "phi_star", result.phi_star)
    for r in result.rows:
        line = (f"phi_red={r.phi_red!r} speed_slow={_fmt(r.speed_slow)} "
                f"speed_fast={_fmt(r.speed_fast)} regime={_fmt(r.regime)}")
        if r.error:
            line += f" error={r.error}"
        emit(out, "row", line)
    written = []
    if "csv" in cfg.outputs.formats:
        written.append(outputs.write_csv(outdir / "bifurcation.csv", outputs.BIFURCATION_COLUMNS,
                                         outputs.bifurcation_rows(result)))
    if "ppm" in cfg.outputs.formats:
        for r in result.rows:
            if r.kymograph is not None:
                written.append(outputs.write_ppm(outdir / kymograph_name(r.phi_red), r.kymograph))
    for p in written:
        emit(out, "wrote", p)


def cmd_fit(cfg: RunConfig, outdir: Path, args, out):
    DS = cfg.params.DS if args.ds is None else args.ds
    chiS, chiN, alpha = analysis.fit_parameters(args.lm, args.lp, args.sigma, args.d, DS)
    emit(out, "chiS", chiS)
    emit(out, "chiN", chiN)
    emit(out, "alpha", alpha)


COMMANDS = {
    "dispersion": cmd_dispersion,
    "phistar": cmd_phistar,
    "profiles": cmd_profiles,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "fit": cmd_fit,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="flat key = value configuration file")
    common.add_argument("--out", type=Path, help="output directory (overrides outputs.directory)")

    parser = argparse.ArgumentParser(prog="chemopulse", parents=[common],
                                     description="Traveling pulses of two chemotactic bacterial species.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("dispersion", parents=[common], help="single-species speeds and admissible set")
    sub.add_parser("phistar", parents=[common], help="critical fast fraction and the G curve")
    p = sub.add_parser("profiles", parents=[common], help="analytic joint pulse profiles")
    p.add_argument("--phi", type=float, help="mass fraction of species 2 (default init.phi_red)")
    p = sub.add_parser("simulate", parents=[common], help="one time-dependent simulation")
    p.add_argument("--discard", type=float, default=0.3, help="transient fraction ignored by speed fits")
    p = sub.add_parser("sweep", parents=[common], help="bifurcation sweep over phi_red")
    p.add_argument("--phis", required=True, help="comma-separated phi_red values")
    p.add_argument("--workers", type=int, default=1, help="parallel simulation processes")
    p.add_argument("--discard", type=float, default=0.3, help="transient fraction ignored by speed fits")
    p = sub.add_parser("fit", parents=[common], help="model constants from a measured pulse")
    p.add_argument("--lm", type=float, required=True, help="back decay rate lambda^- (1/cm, > 0)")
    p.add_argument("--lp", type=float, required=True, help="front decay rate lambda^+ (1/cm, < 0)")
    p.add_argument("--sigma", type=float, required=True, help="pulse speed (cm/s)")
    p.add_argument("--d", type=float, required=True, help="bacterial diffusivity (cm^2/s)")
    p.add_argument("--ds", type=float, help="chemoattractant diffusivity (default params.DS)")
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config is not None else RunConfig()
        outdir = Path(args.out) if args.out is not None else Path(cfg.outputs.directory)
        COMMANDS[args.command](cfg, outdir, args, out)
    except ChemopulseError as exc:
        print(f"ERROR {exc.code}: {exc}", file=err)
        return exit_status(exc)
    except OSError as exc:
        print(f"ERROR io: {exc}", file=err)
        return EXIT_CONFIG
    return EXIT_OK
