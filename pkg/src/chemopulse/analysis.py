"""Closed-form traveling-pulse mathematics.

Pulses move to the right at speed ``sigma``. Each density is a two-sided
exponential peaked at ``z = 0`` and the chemoattractant is the kernel
convolution of the total density. Species are identified by label 1 or 2;
the bifurcation quantities (``G``, ``phi*``, the two-species speed) relabel
internally so that species 1 is the slow one.
"""

from __future__ import annotations

import dataclasses
import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import (
    AdmissibilityError,
    BifurcationUndefinedError,
    DomainError,
    InvalidParameterError,
    InvalidProfileError,
    NumericalFailureError,
    SingularFitError,
)
from .params import PhysicalParams

GRID_POINTS = 100_001
_RTOL = 4 * np.finfo(float).eps


class NoSinglePulseError(DomainError):
    """The fast fraction exceeds phi*: no single-speed traveling pulse."""

    code = "no_single_pulse"


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    closed: bool = True

    @classmethod
    def empty(cls):
        return cls(math.inf, -math.inf)

    @property
    def is_empty(self):
        if self.closed:
            return not self.lo <= self.hi
        return not self.lo < self.hi

    def contains(self, x):
        if self.is_empty:
            return False
        if self.closed:
            return self.lo <= x <= self.hi
        return self.lo < x < self.hi

    def intersect(self, other, closed=None):
        if self.is_empty or other.is_empty:
            return Interval.empty()
        closed = self.closed and other.closed if closed is None else closed
        out = Interval(max(self.lo, other.lo), min(self.hi, other.hi), closed)
        return Interval.empty() if out.is_empty else out

    def __str__(self):
        if self.is_empty:
            return "empty"
        left, right = ("[", "]") if self.closed else ("(", ")")
        return f"{left}{self.lo!r}, {self.hi!r}{right}"


@dataclass(frozen=True)
class WaveSolution:
    sigma: float
    lambda_minus_1: float
    lambda_plus_1: float
    lambda_minus_2: float
    lambda_plus_2: float
    rhoM_1: float
    rhoM_2: float
    phi_red: float
    M1: float
    M2: float

    def rates(self, species):
        if species == 1:
            return self.lambda_minus_1, self.lambda_plus_1
        return self.lambda_minus_2, self.lambda_plus_2

    def amplitude(self, species):
        return self.rhoM_1 if species == 1 else self.rhoM_2

    def mass(self, species):
        return self.M1 if species == 1 else self.M2


@dataclass(frozen=True)
class BifurcationData:
    sigma1: float
    sigma2: float
    I1: Interval
    I2: Interval
    intersection: Interval
    omega: Interval
    hypothesis_holds: bool
    failed_clause: str | None = None
    swapped: bool = False
    phi_star: float | None = None
    lambda_star: float | None = None
    lambda_star_grid: float | None = None
    sigma_star: float | None = None


# -- single species ---------------------------------------------------------

def sigma_single(chiS, chiN, DS, alpha):
    """Speed of a one-species pulse.

    Solves ``chiN - sigma = chiS * sigma / sqrt(sigma**2 + 4 DS alpha)`` by
    bisection on ``(max(0, chiN - chiS), chiN)`` where the residual is strictly
    decreasing.
    """
    for name, value in (("chiN", chiN), ("DS", DS), ("alpha", alpha), ("chiS", chiS)):
        if not math.isfinite(value) or value < 0:
            raise InvalidParameterError(name, f"must be finite and >= 0, got {value!r}")
    if DS == 0 or alpha == 0:
        raise InvalidParameterError("DS" if DS == 0 else "alpha", "must be > 0")
    if chiN == 0:
        return 0.0
    if chiS == 0:
        return float(chiN)
    four = 4.0 * DS * alpha

    def residual(s):
        return chiN - s - chiS * s / math.sqrt(s * s + four)

    return optimize.bisect(residual, max(0.0, chiN - chiS), chiN,
                           xtol=1e-300, rtol=_RTOL, maxiter=400)


def species_speed(params: PhysicalParams, species):
    return sigma_single(params.chiS(species), params.chiN(species), params.DS, params.alpha)


def admissible_interval(params: PhysicalParams, species) -> Interval:
    chiS, chiN = params.chiS(species), params.chiN(species)
    return Interval(chiN - chiS, chiN + chiS)


def _check_admissible(params, sigma, species):
    I = admissible_interval(params, species)
    s = np.asarray(sigma, dtype=float)
    if not np.all((s > I.lo) & (s < I.hi)):
        raise AdmissibilityError(
            f"sigma = {sigma!r} outside the interior of I{species} = {I}")


def lambda_pm(params: PhysicalParams, sigma, species):
    """Back (positive) and front (negative) exponential rates of a pulse."""
    _check_admissible(params, sigma, species)
    chiS, chiN, D = params.chiS(species), params.chiN(species), params.D(species)
    return (chiN + chiS - sigma) / D, (chiN - chiS - sigma) / D


# -- vectorised building blocks (no domain checks) ---------------------------

def _sq(p, s):
    return np.sqrt(s * s + 4.0 * p.alpha * p.DS)


def _g(p, s, i):
    return (s - p.chiN(i)) + p.chiS(i) * s / _sq(p, s)


def _q(p, s, i):
    return p.chiS(i) ** 2 - (p.chiN(i) - s) ** 2


def _h_poly(p, s, i):
    r = p.DS / p.D(i)
    chiS, chiN = p.chiS(i), p.chiN(i)
    return (s * s * (r - 1.0) + (1.0 - 2.0 * r) * s * chiN - chiS * _sq(p, s)
            + r * (chiN * chiN - chiS * chiS) - p.alpha * p.D(i))


def _h_prod(p, s, i):
    sq = _sq(p, s)
    chiS, chiN, D = p.chiS(i), p.chiN(i), p.D(i)
    lm, lp = (chiN + chiS - s) / D, (chiN - chiS - s) / D
    return (-s - sq - 2.0 * p.DS * lm) * (-s + sq - 2.0 * p.DS * lp)


def _G(p, s):
    return (-(p.chi2S * p.D2) / (p.chi1S * p.D1)
            * (_g(p, s, 1) / _g(p, s, 2))
            * (_h_poly(p, s, 2) / _h_poly(p, s, 1))
            * (_q(p, s, 1) / _q(p, s, 2)))


def _H(p, s):
    return ((p.chi1S * p.D1) / (p.chi2S * p.D2)
            * (_q(p, s, 2) / _q(p, s, 1))
            * (_h_poly(p, s, 1) / _h_poly(p, s, 2)))


def g_func(params: PhysicalParams, sigma, species):
    """``(sigma - chiN) + chiS sigma / sqrt(sigma^2 + 4 alpha DS)``; zero at the species speed."""
    return _g(params, np.asarray(sigma, dtype=float)[()], species)


def h_factored(params: PhysicalParams, sigma, species):
    """Product form of h, scaled to match :func:`h_func`."""
    _check_admissible(params, sigma, species)
    s = np.asarray(sigma, dtype=float)[()]
    return _h_prod(params, s, species) / (4.0 * params.DS / params.D(species))


def h_func(params: PhysicalParams, sigma, species):
    """Polynomial form of h, cross-checked against the factored product."""
    _check_admissible(params, sigma, species)
    s = np.asarray(sigma, dtype=float)[()]
    poly = _h_poly(params, s, species)
    prod = _h_prod(params, s, species) / (4.0 * params.DS / params.D(species))
    if not np.all(np.abs(poly - prod) <= 1e-10 * np.maximum(np.abs(poly), np.abs(prod))):
        raise NumericalFailureError(f"h forms disagree at sigma = {sigma!r}")
    return poly


def c_coeff(params: PhysicalParams, sigma, species):
    """Numerator coefficient of species ``species`` in S'(0), closed form."""
    s = np.asarray(sigma, dtype=float)[()]
    chiS, chiN = params.chiS(species), params.chiN(species)
    return 4.0 * params.DS / params.D(species) * (chiS * s + (s - chiN) * _sq(params, s))


def c_expanded(params: PhysicalParams, sigma, species):
    """Same coefficient assembled from the two one-sided kernel integrals."""
    _check_admissible(params, sigma, species)
    s = np.asarray(sigma, dtype=float)[()]
    lm, lp = lambda_pm(params, s, species)
    sq = _sq(params, s)
    DS = params.DS
    return (-s + sq) * (-s - sq - 2 * DS * lm) + (s + sq) * (-s + sq - 2 * DS * lp)


# -- two species -------------------------------------------------------------

def order_species(params: PhysicalParams):
    """Return params relabeled so species 1 is the slow one, and whether a swap happened."""
    if species_speed(params, 1) > species_speed(params, 2):
        return params.swapped(), True
    return params, False


def admissible_set(params: PhysicalParams) -> BifurcationData:
    p, swapped = order_species(params)
    s1, s2 = species_speed(p, 1), species_speed(p, 2)
    I1, I2 = admissible_interval(p, 1), admissible_interval(p, 2)
    inter = I1.intersect(I2)
    omega = Interval(s1, s2, closed=False).intersect(inter, closed=False)

    clause = None
    if inter.is_empty:
        clause = "I1 and I2 do not intersect"
    elif inter.contains(s2):
        clause = "sigma2 lies in I1 ∩ I2"
    elif inter.contains(p.chi2N - p.chi2S):
        clause = "chi2N - chi2S lies in I1 ∩ I2"
    return BifurcationData(
        sigma1=s1, sigma2=s2, I1=I1, I2=I2, intersection=inter, omega=omega,
        hypothesis_holds=clause is None, failed_clause=clause, swapped=swapped,
    )


def H_func(params: PhysicalParams, sigma):
    p, _ = order_species(params)
    with np.errstate(divide="ignore", invalid="ignore"):
        return _H(p, np.asarray(sigma, dtype=float)[()])


def G_func(params: PhysicalParams, sigma):
    """Speed-selection map: a pulse with fast fraction phi travels at a root of
    ``G(sigma) = phi / (1 - phi)``. Defined on the closure of Omega."""
    data = admissible_set(params)
    p, _ = order_species(params)
    s = np.asarray(sigma, dtype=float)[()]
    om = data.omega
    if om.is_empty or not np.all((s >= om.lo) & (s <= om.hi)):
        raise DomainError(f"sigma = {sigma!r} outside the closure of Omega = {om}")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = _G(p, s)
    if not np.all(np.isfinite(out)):
        raise DomainError(f"G has a vanishing denominator at sigma = {sigma!r}")
    return out


@functools.lru_cache(maxsize=64)
def _scan(p: PhysicalParams, lo, hi):
    sig = np.linspace(lo, hi, GRID_POINTS)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = _G(p, sig)
    if not np.all(np.isfinite(vals)):
        raise DomainError("G is not finite on the closure of Omega")
    sig.setflags(write=False)
    vals.setflags(write=False)
    return sig, vals


def _require_hypothesis(params):
    data = admissible_set(params)
    if not data.hypothesis_holds:
        raise BifurcationUndefinedError(data.failed_clause)
    if data.omega.is_empty:
        raise BifurcationUndefinedError("Omega is empty")
    return data


def phi_star(params: PhysicalParams) -> BifurcationData:
    """Critical fast fraction: ``lambda* = max G`` over Omega and ``phi* = lambda*/(1+lambda*)``.

    The maximum is located on a dense uniform grid and then refined by
    golden-section search inside the neighbouring grid cells.
    """
    data = _require_hypothesis(params)
    p, _ = order_species(params)
    sig, vals = _scan(p, data.omega.lo, data.omega.hi)
    i = int(np.clip(np.argmax(vals), 1, len(sig) - 2))
    res = optimize.minimize_scalar(lambda s: -float(_G(p, s)),
                                   bracket=(sig[i - 1], sig[i], sig[i + 1]),
                                   method="golden", tol=1e-12)
    grid_max = float(vals[i])
    if -res.fun >= grid_max:
        lam, s_star = float(-res.fun), float(res.x)
    else:
        lam, s_star = grid_max, float(sig[i])
    return dataclasses.replace(data, lambda_star=lam, lambda_star_grid=grid_max,
                               sigma_star=s_star, phi_star=lam / (1.0 + lam))


def _check_fraction(phi_red):
    if not (math.isfinite(phi_red) and 0.0 <= phi_red < 1.0):
        raise InvalidParameterError("phi_red", f"must lie in [0, 1), got {phi_red!r}")


def sigma_two_roots(params: PhysicalParams, phi_red):
    """All roots of ``G(sigma) = phi/(1-phi)`` on Omega, in increasing order.

    ``phi_red`` is the mass fraction of the fast species. The roots are
    bracketed by sign changes on the scan grid and bisected to full precision.
    """
    _check_fraction(phi_red)
    data = phi_star(params)
    p, _ = order_species(params)
    if phi_red == 0.0:
        return [data.sigma1]
    if phi_red > data.phi_star:
        return []
    # phi* itself may round to a target a hair above lambda*
    target = min(phi_red / (1.0 - phi_red), data.lambda_star)
    sig, vals = _scan(p, data.omega.lo, data.omega.hi)
    d = vals - target
    roots = []
    for k in np.flatnonzero((d[:-1] == 0) | (np.sign(d[:-1]) * np.sign(d[1:]) < 0)):
        if d[k] == 0:
            roots.append(float(sig[k]))
            continue
        roots.append(optimize.bisect(lambda s: float(_G(p, s)) - target,
                                     sig[k], sig[k + 1], xtol=1e-300, rtol=_RTOL,
                                     maxiter=400))
    if not roots:
        # tangency at the maximum
        roots = [data.sigma_star]
    for r in roots:
        if abs(float(_G(p, r)) - target) > 1e-10 * (1.0 + target):
            raise NumericalFailureError(f"root {r!r} does not satisfy G = {target!r}")
    return sorted(roots)


def sigma_two(params: PhysicalParams, phi_red):
    """Speed of the joint pulse, or None when ``phi_red > phi*``.

    The smallest root is returned: it is the one connected to the slow
    species speed at ``phi_red = 0``.
    """
    if phi_red == 0.0:
        _check_fraction(phi_red)
        _require_hypothesis(params)
        p, _ = order_species(params)
        return species_speed(p, 1)
    roots = sigma_two_roots(params, phi_red)
    return roots[0] if roots else None


# -- profiles ----------------------------------------------------------------

def mass_factor(params: PhysicalParams, sigma, species):
    """Integral of a unit-amplitude pulse, ``1/lambda^- + 1/|lambda^+|``."""
    chiS, chiN, D = params.chiS(species), params.chiN(species), params.D(species)
    return 2.0 * chiS * D / (chiS ** 2 - (sigma - chiN) ** 2)


def pulse(params: PhysicalParams, sigma, M1, M2) -> WaveSolution:
    """Pulse data at a given speed and species masses (speed not solved)."""
    if not (M1 >= 0 and M2 >= 0 and M1 + M2 > 0):
        raise InvalidParameterError("M", f"masses must be >= 0 with positive sum, got {M1!r}, {M2!r}")
    rates, amps = [], []
    for i, M in ((1, M1), (2, M2)):
        if M > 0 or _interior(params, sigma, i):
            lm, lp = lambda_pm(params, sigma, i)
        else:
            lm = lp = math.nan
        rates.append((float(lm), float(lp)))
        amps.append(M / mass_factor(params, sigma, i) if M > 0 else 0.0)
    return WaveSolution(
        sigma=float(sigma),
        lambda_minus_1=rates[0][0], lambda_plus_1=rates[0][1],
        lambda_minus_2=rates[1][0], lambda_plus_2=rates[1][1],
        rhoM_1=amps[0], rhoM_2=amps[1],
        phi_red=M2 / (M1 + M2), M1=float(M1), M2=float(M2),
    )


def _interior(params, sigma, species):
    I = admissible_interval(params, species)
    return I.lo < sigma < I.hi


def wave_solution(params: PhysicalParams, phi_red, total_mass=1.0) -> WaveSolution:
    """Solved two-species pulse; ``phi_red`` is the fast-species mass fraction."""
    sigma = sigma_two(params, phi_red)
    if sigma is None:
        raise NoSinglePulseError(
            f"phi_red = {phi_red!r} exceeds phi* = {phi_star(params).phi_star!r}")
    _, swapped = order_species(params)
    fast, slow = phi_red * total_mass, (1.0 - phi_red) * total_mass
    M1, M2 = (fast, slow) if swapped else (slow, fast)
    return pulse(params, sigma, M1, M2)


def kernel(z, sigma, DS, alpha):
    z = np.asarray(z, dtype=float)
    sq = math.sqrt(sigma * sigma + 4.0 * alpha * DS)
    return np.exp(-sigma * z / (2 * DS) - sq * np.abs(z) / (2 * DS))[()]


def _phi1(x):
    x = np.asarray(x, dtype=float)
    safe = np.where(x == 0, 1.0, x)
    return np.where(x == 0, 1.0, np.expm1(safe) / safe)


def _ediff(p, q, z):
    """``(exp(p z) - exp(q z)) / (p - q)``, stable when ``p`` is close to ``q``."""
    d = p - q
    near = np.abs(d * z) < 1.0
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        direct = (np.exp(p * z) - np.exp(q * z)) / np.where(d == 0, 1.0, d)
        series = np.exp(q * z) * z * _phi1(np.where(near, d * z, 0.0))
    return np.where(near, series, direct)


def _convolve_pulse(z, lm, lp, a, b):
    """Exact ``int K(z - y) e(y) dy`` for ``e(y) = exp(lm y)`` (y<0), ``exp(lp y)`` (y>0).

    ``a > 0`` and ``b < 0`` are the kernel exponents on z<0 and z>0.
    """
    z = np.asarray(z, dtype=float)
    zp = np.maximum(z, 0.0)
    zn = np.minimum(z, 0.0)
    right = (np.exp(b * zp) / (lm - b)
             + _ediff(lp, b, zp)
             + np.exp(lp * zp) / (a - lp))
    left = (np.exp(lm * zn) / (lm - b)
            - _ediff(lm, a, zn)
            + np.exp(a * zn) / (a - lp))
    return np.where(z >= 0, right, left)


def analytic_profiles(params: PhysicalParams, solution: WaveSolution, z, *, green=False):
    """Densities and chemoattractant of a pulse sampled at ``z`` (cm).

    S is the exact convolution of the unit-peak kernel with the densities.
    With ``green=True`` it is divided by ``sqrt(sigma^2 + 4 alpha DS)`` so
    that it solves ``-sigma S' = DS S'' - alpha S + rho1 + rho2``.
    """
    z = np.asarray(z, dtype=float)
    sigma = solution.sigma
    sq = math.sqrt(sigma * sigma + 4.0 * params.alpha * params.DS)
    a = (-sigma + sq) / (2 * params.DS)
    b = (-sigma - sq) / (2 * params.DS)
    rhos = []
    S = np.zeros_like(z)
    for i in (1, 2):
        amp = solution.amplitude(i)
        if amp == 0:
            rhos.append(np.zeros_like(z))
            continue
        lm, lp = solution.rates(i)
        rhos.append(amp * np.where(z < 0, np.exp(lm * np.minimum(z, 0.0)),
                                   np.exp(lp * np.maximum(z, 0.0))))
        S = S + amp * _convolve_pulse(z, lm, lp, a, b)
    if green:
        S = S / sq
    return rhos[0], rhos[1], S


def sprime_parts(params: PhysicalParams, solution: WaveSolution):
    """Contributions to S'(0) from the kernel on z<0 and on z>0."""
    sigma = solution.sigma
    sq = math.sqrt(sigma * sigma + 4.0 * params.alpha * params.DS)
    DS = params.DS
    minus = plus = 0.0
    for i in (1, 2):
        amp = solution.amplitude(i)
        if amp == 0:
            continue
        lm, lp = solution.rates(i)
        minus += amp * (-sigma + sq) / (-sigma + sq - 2 * DS * lp)
        plus += amp * (sigma + sq) / (-sigma - sq - 2 * DS * lm)
    return minus, plus


def sprime_at_zero(params: PhysicalParams, solution: WaveSolution):
    minus, plus = sprime_parts(params, solution)
    return minus + plus


# -- parameter estimation ----------------------------------------------------

def fit_parameters(lambda_minus, lambda_plus, sigma, D, DS):
    """Recover ``(chiS, chiN, alpha)`` from a measured pulse shape and speed."""
    if not (lambda_minus > 0 and lambda_plus < 0):
        raise InvalidProfileError(
            f"need lambda_minus > 0 > lambda_plus, got {lambda_minus!r}, {lambda_plus!r}")
    total = lambda_minus + lambda_plus
    if total == 0:
        raise SingularFitError("symmetric pulse (lambda_minus + lambda_plus = 0): alpha undetermined")
    if total < 0:
        raise InvalidProfileError("lambda_minus + lambda_plus < 0 implies chiN < sigma")
    for name, value in (("sigma", sigma), ("D", D), ("DS", DS)):
        if not (math.isfinite(value) and value > 0):
            raise InvalidParameterError(name, f"must be finite and > 0, got {value!r}")
    chiS = D * (lambda_minus - lambda_plus) / 2.0
    chiN = sigma + D * total / 2.0
    alpha = sigma ** 2 * (-lambda_plus * lambda_minus) / (DS * total ** 2)
    return chiS, chiN, alpha
