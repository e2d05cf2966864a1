"""Semi-implicit finite-difference integrator for the two-species system.

Advection of the densities is explicit first-order upwind in conservative
flux form; diffusion, chemoattractant decay and nutrient consumption are
implicit. The channel is sealed: every field has a zero-flux boundary.

One step, with ``n`` the old and ``n+1`` the new time level::

    rho_i^{n+1} - dt D_i Lap rho_i^{n+1} = rho_i^n - dt/dx (F_{k+1/2} - F_{k-1/2})
    N^{n+1} - dt D_N Lap N^{n+1} + dt (g1 rho_1^n + g2 rho_2^n) N^{n+1} = N^n
    S^{n+1} - dt D_S Lap S^{n+1} + dt alpha S^{n+1} = S^n + dt (rho_1^{n+1} + rho_2^{n+1})

with velocities built from the signs of the forward differences of
``S^n`` and ``N^n``. The nutrient uses the old densities and the
chemoattractant the new ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import tridiag
from .errors import InvalidParameterError, NumericalFailureError, StepRejectedError
from .params import PhysicalParams


@dataclass(frozen=True)
class Grid1D:
    L: float = 1.8
    nx: int = 900

    def __post_init__(self):
        if isinstance(self.nx, bool) or not isinstance(self.nx, (int, np.integer)) or self.nx < 8:
            raise InvalidParameterError("nx", f"must be an integer >= 8, got {self.nx!r}")
        if not (math.isfinite(self.L) and self.L > 0):
            raise InvalidParameterError("L", f"must be finite and > 0, got {self.L!r}")

    @property
    def dx(self):
        return self.L / self.nx

    @property
    def x(self):
        return (np.arange(self.nx) + 0.5) * self.dx


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SimState:
    t: float
    rho1: np.ndarray
    rho2: np.ndarray
    S: np.ndarray
    N: np.ndarray

    def __post_init__(self):
        for name in ("rho1", "rho2", "S", "N"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        n = len(self.rho1)
        if any(len(getattr(self, f)) != n for f in ("rho2", "S", "N")):
            raise InvalidParameterError("state", "all fields must have the same length")

    def rho(self, species):
        return self.rho1 if species == 1 else self.rho2

    def mass(self, species, dx):
        return float(np.sum(self.rho(species)) * dx)

    def fields(self):
        return self.rho1, self.rho2, self.S, self.N


def max_speed(params: PhysicalParams):
    return max(params.chi1S + params.chi1N, params.chi2S + params.chi2N)


@dataclass(frozen=True)
class StepControl:
    """Time step. Only advection limits it: ``dt <= cfl dx / max_i(chiS_i + chiN_i)``."""

    dt: float
    cfl: float = 0.9

    def __post_init__(self):
        if not (0 < self.cfl <= 1):
            raise InvalidParameterError("cfl", f"must lie in (0, 1], got {self.cfl!r}")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise InvalidParameterError("dt", f"must be finite and > 0, got {self.dt!r}")

    @classmethod
    def from_cfl(cls, params, grid, cfl=0.9):
        return cls(cfl * grid.dx / max_speed(params), cfl)

    def check(self, params, grid, t=None):
        limit = self.cfl * grid.dx / max_speed(params)
        if self.dt > limit * (1 + 1e-12):
            raise StepRejectedError(f"dt = {self.dt!r} exceeds the CFL limit {limit!r}", t)


# -- advection ---------------------------------------------------------------

def discrete_velocity(field, k, chi, dx):
    """``chi * sgn((field[k+1] - field[k]) / dx)`` with ``sgn(0) = 0``."""
    if not 0 <= k <= len(field) - 2:
        raise IndexError(f"k = {k} has no right neighbour")
    return chi * float(np.sign((field[k + 1] - field[k]) / dx))


def velocities(field, chi):
    """Per-cell velocities ``a_k``; the last cell sees its zero-gradient ghost."""
    a = np.zeros(len(field))
    a[:-1] = chi * np.sign(np.diff(field))
    return a


def upwind_flux(rho, a_total, k_half):
    """Flux through interface ``k_half + 1/2``; the two walls carry none."""
    nx = len(rho)
    if k_half == -1 or k_half == nx - 1:
        return 0.0
    if not 0 <= k_half < nx - 1:
        raise IndexError(f"interface {k_half} + 1/2 outside the channel")
    return (max(a_total[k_half], 0.0) * rho[k_half]
            - max(-a_total[k_half + 1], 0.0) * rho[k_half + 1])


def upwind_fluxes(rho, a_total):
    """All ``nx + 1`` interface fluxes, walls included."""
    F = np.zeros(len(rho) + 1)
    F[1:-1] = np.maximum(a_total[:-1], 0.0) * rho[:-1] - np.maximum(-a_total[1:], 0.0) * rho[1:]
    return F


# -- implicit parts ------------------------------------------------------------

def diffusion_system(nx, r, extra=0.0):
    """Rows of ``(1 + extra) u - r Lap u`` with reflecting walls."""
    lower = np.full(nx, -r)
    upper = np.full(nx, -r)
    diag = 1.0 + 2.0 * r + np.broadcast_to(np.asarray(extra, dtype=float), (nx,))
    diag[0] -= r
    diag[-1] -= r
    lower[0] = 0.0
    upper[-1] = 0.0
    return lower, diag, upper


def _implicit_solve(lower, diag, upper, rhs, t=None):
    if not tridiag.is_diagonally_dominant(lower, diag, upper):
        raise NumericalFailureError("implicit system is not diagonally dominant", t)
    out = tridiag.solve(lower, diag, upper, rhs)
    if not np.all(np.isfinite(out)):
        raise NumericalFailureError("non-finite values after implicit solve", t)
    return out


def advance_density(rho, a_total, D, dt, dx, t=None):
    """Upwind advection then implicit diffusion of one density (``D >= 0``)."""
    F = upwind_fluxes(rho, a_total)
    rhs = rho - dt / dx * (F[1:] - F[:-1])
    if D == 0:
        return rhs
    return _implicit_solve(*diffusion_system(len(rho), dt * D / dx ** 2), rhs, t)


def step(state: SimState, params: PhysicalParams, grid: Grid1D, ctrl: StepControl,
         *, freeze_nutrient=False) -> SimState:
    """Advance one time step. ``freeze_nutrient`` keeps ``N`` fixed (test harness use)."""
    ctrl.check(params, grid, state.t)
    dt, dx = ctrl.dt, grid.dx
    sS = velocities(state.S, 1.0)
    sN = velocities(state.N, 1.0)

    new_rho = []
    for i, rho in ((1, state.rho1), (2, state.rho2)):
        a = params.chiS(i) * sS + params.chiN(i) * sN
        new_rho.append(advance_density(rho, a, params.D(i), dt, dx, state.t))

    if freeze_nutrient:
        N = state.N
    else:
        uptake = dt * (params.gamma1 * state.rho1 + params.gamma2 * state.rho2)
        N = _implicit_solve(*diffusion_system(grid.nx, dt * params.DN / dx ** 2, uptake),
                            state.N, state.t)
    S = _implicit_solve(*diffusion_system(grid.nx, dt * params.DS / dx ** 2, dt * params.alpha),
                        state.S + dt * (new_rho[0] + new_rho[1]), state.t)
    return SimState(state.t + dt, new_rho[0], new_rho[1], S, N)


# -- driver --------------------------------------------------------------------

def initial_state(grid: Grid1D, init) -> SimState:
    """Bacteria packed against the left wall, ``C_i exp(-x / ell0)``, no
    chemoattractant, uniform nutrient ``N0``."""
    x = grid.x
    shape = np.exp(-x / init.ell0)
    shape /= shape.sum() * grid.dx
    m2 = init.phi_red * init.M_total
    m1 = init.M_total - m2
    zeros = np.zeros(grid.nx)
    return SimState(0.0, m1 * shape, m2 * shape, zeros, np.full(grid.nx, float(init.N0)))


def simulate(config, state: SimState | None = None):
    """Yield snapshots every ``snapshot_stride`` steps, first and last included.

    ``config`` provides ``params``, ``grid``, ``time`` (``t_end``, ``cfl``,
    ``snapshot_stride``) and ``init``. The step is shortened uniformly so
    that the run ends exactly at ``t_end``.
    """
    params, grid, tm = config.params, config.grid, config.time
    if state is None:
        state = initial_state(grid, config.init)
    if tm.snapshot_stride < 1:
        raise InvalidParameterError("snapshot_stride", "must be >= 1")
    yield state
    if tm.t_end <= 0:
        return
    dt_max = tm.cfl * grid.dx / max_speed(params)
    n_steps = max(1, math.ceil(tm.t_end / dt_max - 1e-9))
    ctrl = StepControl(tm.t_end / n_steps, tm.cfl)
    m0 = [state.mass(i, grid.dx) for i in (1, 2)]
    t0 = state.t
    for n in range(1, n_steps + 1):
        state = step(state, params, grid, ctrl)
        # keep t free of accumulated round-off
        state = SimState(t0 + n * ctrl.dt, *state.fields())
        if n % tm.snapshot_stride == 0 or n == n_steps:
            yield state
    for i, m in zip((1, 2), m0):
        if m > 0 and abs(state.mass(i, grid.dx) - m) > 1e-10 * m:
            raise NumericalFailureError(f"mass of species {i} drifted", state.t)


def run(config, state: SimState | None = None):
    return list(simulate(config, state))
