"""From simulations to measured speeds, regimes, bifurcation sweeps and kymographs."""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import analysis, pde
from .errors import ChemopulseError, InsufficientDataError, NoPeakError

SPECIES = (1, 2)
SINGLE, SPLIT, INDETERMINATE = "single", "split", "indeterminate"


# -- peak tracking -------------------------------------------------------------

@dataclass(frozen=True)
class Peak:
    index: int
    x: float
    height: float


def locate_peak(x, rho) -> Peak:
    """Leftmost argmax refined by the vertex of the parabola through it and its
    two neighbours. Maxima in a boundary cell are not refined."""
    rho = np.asarray(rho, dtype=float)
    k = int(np.argmax(rho))
    if not rho[k] > 0:
        raise NoPeakError("density is identically zero")
    xk, hk = float(x[k]), float(rho[k])
    if 0 < k < len(rho) - 1:
        fl, fr = rho[k - 1], rho[k + 1]
        curv = fl - 2.0 * rho[k] + fr
        if curv < 0:
            d = 0.5 * (fl - fr) / curv
            dx = float(x[k + 1] - x[k])
            xk += d * dx
            hk -= 0.25 * (fl - fr) * d
    return Peak(k, xk, hk)


@dataclass(frozen=True)
class SpeedFit:
    speed: float
    intercept: float
    rms: float
    window: tuple
    n_points: int


@dataclass(frozen=True, eq=False)
class SpeciesTrack:
    species: int
    t: np.ndarray
    x_peak: np.ndarray
    height: np.ndarray

    def __post_init__(self):
        for name in ("t", "x_peak", "height"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if not len(self.t) == len(self.x_peak) == len(self.height):
            raise ValueError("track columns differ in length")
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("track times must be strictly increasing")


@dataclass(frozen=True)
class TrackRecord:
    """Peak trajectories per species, with fitted speeds once :func:`fit_record` ran."""

    tracks: dict
    fits: dict = field(default_factory=dict)

    def track(self, species) -> SpeciesTrack:
        return self.tracks[species]

    def speed(self, species):
        fit = self.fits.get(species)
        return None if fit is None else fit.speed

    @property
    def species(self):
        return tuple(sorted(self.tracks))


class _Tracker:
    """Incremental peak tracker; keeps no snapshots."""

    def __init__(self, x, species=SPECIES, skip_empty=False):
        self.x = x
        self.species = tuple(species)
        self.skip_empty = skip_empty
        self.rows = {i: [] for i in self.species}
        self.empty = set()

    def add(self, state):
        for i in self.species:
            if i in self.empty:
                continue
            try:
                p = locate_peak(self.x, state.rho(i))
            except NoPeakError:
                if self.skip_empty and not self.rows[i]:
                    self.empty.add(i)
                    continue
                raise NoPeakError(f"species {i} has no peak at t = {state.t!r} s") from None
            self.rows[i].append((state.t, p.x, p.height))

    def record(self) -> TrackRecord:
        tracks = {}
        for i in self.species:
            if i in self.empty:
                continue
            rows = np.array(self.rows[i], dtype=float).reshape(-1, 3)
            tracks[i] = SpeciesTrack(i, rows[:, 0], rows[:, 1], rows[:, 2])
        return TrackRecord(tracks)


def track_peaks(snapshots, grid: pde.Grid1D, species=SPECIES, *, skip_empty=False) -> TrackRecord:
    """Peak position and height of each species in every snapshot.

    A species whose density is identically zero raises :class:`NoPeakError`,
    unless ``skip_empty`` is set and it is zero from the first snapshot on, in
    which case it is left out of the record.
    """
    snapshots = list(snapshots)
    if len(snapshots) < 2:
        raise InsufficientDataError(f"need at least 2 snapshots, got {len(snapshots)}")
    tracker = _Tracker(grid.x, species, skip_empty)
    for s in snapshots:
        tracker.add(s)
    return tracker.record()


# -- speeds --------------------------------------------------------------------

def fit_speed(track: SpeciesTrack, discard_fraction=0.3) -> SpeedFit:
    """Least-squares slope of ``x_peak(t)`` after dropping the leading
    ``discard_fraction`` of the time range as transient."""
    if not 0 <= discard_fraction < 1:
        raise ValueError(f"discard_fraction must lie in [0, 1), got {discard_fraction!r}")
    t, x = track.t, track.x_peak
    if len(t) == 0:
        raise InsufficientDataError("empty track")
    t_cut = t[0] + discard_fraction * (t[-1] - t[0])
    keep = t >= t_cut
    tk, xk = t[keep], x[keep]
    if len(tk) < 5:
        raise InsufficientDataError(
            f"species {track.species}: {len(tk)} points after discarding transient, need 5")
    tm, xm = tk.mean(), xk.mean()
    dt = tk - tm
    speed = float(np.dot(dt, xk - xm) / np.dot(dt, dt))
    intercept = float(xm - speed * tm)
    resid = xk - (intercept + speed * tk)
    rms = float(np.sqrt(np.mean(resid ** 2)))
    return SpeedFit(speed, intercept, rms, (float(tk[0]), float(tk[-1])), int(len(tk)))


def fit_record(record: TrackRecord, discard_fraction=0.3) -> TrackRecord:
    fits = {i: fit_speed(tr, discard_fraction) for i, tr in record.tracks.items()}
    return dataclasses.replace(record, fits=fits)


# -- regimes -------------------------------------------------------------------

@dataclass(frozen=True)
class RegimeThresholds:
    split: float = 5.0            # pulse widths
    single: float = 2.0           # pulse widths
    tail_fraction: float = 1.0 / 3.0
    monotone_samples: int = 10


def pulse_width(params) -> float:
    """``1/lambda^- + 1/|lambda^+|`` of the slow species' own pulse."""
    p, _ = analysis.order_species(params)
    lm, lp = analysis.lambda_pm(p, analysis.species_speed(p, 1), 1)
    return float(1.0 / lm + 1.0 / abs(lp))


def classify_regime(track1: SpeciesTrack, track2: SpeciesTrack, width,
                    thresholds: RegimeThresholds = RegimeThresholds()):
    """``split`` when the peak separation grows monotonically over the last
    part of the run and ends beyond ``thresholds.split`` widths; ``single``
    when it stays below ``thresholds.single`` widths there.

    Monotonicity is checked on ``monotone_samples`` evenly spaced points so
    that sub-cell jitter of the peak estimates does not matter.
    """
    if not np.array_equal(track1.t, track2.t):
        raise ValueError("tracks must share their sampling times")
    t = track1.t
    sep = np.abs(track2.x_peak - track1.x_peak)
    tail = sep[t >= t[-1] - thresholds.tail_fraction * (t[-1] - t[0])]
    if len(tail) >= 2:
        idx = np.unique(np.linspace(0, len(tail) - 1, thresholds.monotone_samples).round().astype(int))
        growing = bool(np.all(np.diff(tail[idx]) > 0))
    else:
        growing = False
    if growing and tail[-1] > thresholds.split * width:
        return SPLIT
    if np.max(tail) < thresholds.single * width:
        return SINGLE
    return INDETERMINATE


# -- single tracked runs -------------------------------------------------------

@dataclass(frozen=True)
class Kymograph:
    """Rows are snapshots, columns cells; both channels in [0, 1]."""

    t: np.ndarray
    g: np.ndarray
    r: np.ndarray

    @property
    def shape(self):
        return self.g.shape


def _normalize(a):
    m = float(a.max()) if a.size else 0.0
    return a / m if m > 0 else np.zeros_like(a)


def render_kymograph(snapshots) -> Kymograph:
    """Green channel from species 1, red from species 2, each scaled by its
    own maximum over the whole run."""
    snapshots = list(snapshots)
    if not snapshots:
        raise InsufficientDataError("need at least one snapshot")
    t = np.array([s.t for s in snapshots])
    g = np.array([s.rho1 for s in snapshots], dtype=float)
    r = np.array([s.rho2 for s in snapshots], dtype=float)
    return Kymograph(t, _normalize(g), _normalize(r))


@dataclass
class _Collect:
    """Keeps only the density rows a kymograph needs."""

    t: list = field(default_factory=list)
    rho1: list = field(default_factory=list)
    rho2: list = field(default_factory=list)

    def add(self, s):
        self.t.append(s.t)
        self.rho1.append(np.asarray(s.rho1, dtype=np.float64))
        self.rho2.append(np.asarray(s.rho2, dtype=np.float64))

    def kymograph(self):
        return Kymograph(np.array(self.t), _normalize(np.array(self.rho1)),
                         _normalize(np.array(self.rho2)))


def tracked_run(config, *, keep_kymograph=False):
    """Run one simulation, tracking peaks on the fly. Returns ``(record, kymograph)``."""
    tracker = _Tracker(config.grid.x, SPECIES, skip_empty=True)
    collect = _Collect() if keep_kymograph else None
    count = 0
    for s in pde.simulate(config):
        tracker.add(s)
        if collect is not None:
            collect.add(s)
        count += 1
    if count < 2:
        raise InsufficientDataError(f"need at least 2 snapshots, got {count}")
    return tracker.record(), (collect.kymograph() if collect is not None else None)


# -- sweeps --------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    phi_red: float
    speed_slow: float | None
    speed_fast: float | None
    regime: str | None
    sigma_analytic: float | None = None
    error: str | None = None
    record: TrackRecord | None = field(default=None, repr=False, compare=False)
    kymograph: Kymograph | None = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class SweepResult:
    rows: tuple
    phi_star: float | None

    @property
    def phis(self):
        return [r.phi_red for r in self.rows]

    @property
    def regimes(self):
        return [r.regime for r in self.rows]

    def transitions(self):
        """Indices ``k`` where the regime changes between row ``k`` and ``k+1``,
        ignoring rows without a regime."""
        labelled = [(k, r.regime) for k, r in enumerate(self.rows) if r.regime is not None]
        return [a[0] for a, b in zip(labelled, labelled[1:]) if a[1] != b[1]]


def _sweep_job(args):
    config, discard_fraction, thresholds, width, keep_kymograph = args
    phi = config.init.phi_red
    try:
        record, kymo = tracked_run(config, keep_kymograph=keep_kymograph)
        record = fit_record(record, discard_fraction)
        present = record.species
        if len(present) == 2:
            regime = classify_regime(record.track(1), record.track(2), width, thresholds)
        else:
            regime = SINGLE
        return SweepRow(phi, record.speed(1), record.speed(2), regime,
                        record=record, kymograph=kymo)
    except ChemopulseError as exc:
        return SweepRow(phi, None, None, None, error=f"{exc.code}: {exc}")


def _overlay(params, phi_red):
    """Analytic joint speed at ``phi_red`` (species-2 fraction) and phi*."""
    try:
        data = analysis.phi_star(params)
    except ChemopulseError:
        return None, None
    fast = 1.0 - phi_red if data.swapped else phi_red
    if fast >= 1.0 or fast > data.phi_star:
        return None, data.phi_star
    return analysis.sigma_two(params, fast), data.phi_star


def sweep_phi(base, phis, *, workers=1, discard_fraction=0.3,
              thresholds: RegimeThresholds = RegimeThresholds(),
              keep_kymographs=False) -> SweepResult:
    """One independent simulation per ``phi_red`` at fixed total mass.

    ``speed_slow`` and ``speed_fast`` are the fitted speeds of species 1 and 2.
    A failing run is recorded in its row and the sweep goes on.
    """
    phis = [float(p) for p in phis]
    if not phis:
        raise InsufficientDataError("empty phi list")
    if any(b <= a for a, b in zip(phis, phis[1:])):
        raise ValueError("phi values must be strictly increasing")
    width = pulse_width(base.params)
    jobs = [(base.with_phi(p), discard_fraction, thresholds, width, keep_kymographs)
            for p in phis]
    if workers == 1 or len(jobs) == 1:
        rows = [_sweep_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_sweep_job, jobs))
    star = None
    out = []
    for row in rows:
        sig, star = _overlay(base.params, row.phi_red)
        out.append(dataclasses.replace(row, sigma_analytic=sig))
    return SweepResult(tuple(out), star)


def relative_error(measured, expected):
    if measured is None or expected is None:
        return math.nan
    return abs(measured - expected) / abs(expected)
