import functools
import math

import pytest

from chemopulse.config import RunConfig, TimeSpec
from chemopulse.params import TABLE1, default_gamma
from chemopulse.pde import Grid1D

ACCEPTANCE_LINES = []


def hand_bisect(f, lo, hi, tol=1e-15):
    """Plain interval halving, written out independently of the package."""
    flo = f(lo)
    assert flo * f(hi) < 0, "bracket does not change sign"
    while hi - lo > tol * max(abs(lo), abs(hi), 1e-300):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def oracle_speed(chiS, chiN, DS=8e-6, alpha=5e-2):
    f = lambda s: chiN - s - chiS * s / math.sqrt(s * s + 4 * DS * alpha)
    return hand_bisect(f, max(0.0, chiN - chiS), chiN)


@pytest.fixture
def params():
    return TABLE1


def make_config(phi=0.0, nx=900, L=1.8, t_end=4000.0, stride=10):
    p = TABLE1.replace(gamma1=default_gamma(L, 1.0), gamma2=default_gamma(L, 1.0))
    cfg = RunConfig(params=p, grid=Grid1D(L=L, nx=nx),
                    time=TimeSpec(t_end=t_end, snapshot_stride=stride))
    return cfg.with_phi(phi)


@functools.lru_cache(maxsize=None)
def tracked(phi, nx=900, L=1.8, t_end=4000.0, stride=10):
    """Peak tracks of one run, shared between test modules."""
    from chemopulse.experiments import fit_record, tracked_run

    record, _ = tracked_run(make_config(phi, nx, L, t_end, stride))
    return fit_record(record)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
