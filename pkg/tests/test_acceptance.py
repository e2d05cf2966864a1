"""Acceptance criteria, one test each.

Every test prints a single ``criterion N PASS|FAIL: ...`` line (collected in
the terminal summary) before asserting. Run on its own with::

    pytest tests/test_acceptance.py -v
"""

import math
import sys
import time

import numpy as np
import pytest

from chemopulse import analysis as A
from chemopulse import experiments as E
from chemopulse import pde
from chemopulse.params import TABLE1

from conftest import ACCEPTANCE_LINES, make_config, oracle_speed, tracked

P = TABLE1


def report(n, checks):
    """``checks``: list of ``(label, ok)``. Records and asserts."""
    ok = all(c for _, c in checks)
    detail = "; ".join(f"{label} [{'ok' if c else 'FAILED'}]" for label, c in checks)
    line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def rel(a, b):
    return abs(a - b) / abs(b)


def test_criterion_01_single_species_speeds():
    s1 = A.sigma_single(P.chi1S, P.chi1N, P.DS, P.alpha)
    s2 = A.sigma_single(P.chi2S, P.chi2N, P.DS, P.alpha)
    o1, o2 = oracle_speed(P.chi1S, P.chi1N), oracle_speed(P.chi2S, P.chi2N)
    reps = 2000
    t0 = time.perf_counter()
    for _ in range(reps):
        A.sigma_single(P.chi2S, P.chi2N, P.DS, P.alpha)
    per_call = (time.perf_counter() - t0) / reps
    um = 1e4
    report(1, [
        (f"sigma1 = {s1:.6e} vs oracle {o1:.6e}", abs(s1 - o1) <= 1e-7 and abs(s1 - 2.447e-4) <= 1e-7),
        (f"sigma2 = {s2:.6e} vs oracle {o2:.6e}", abs(s2 - o2) <= 1e-7 and abs(s2 - 3.893e-4) <= 1e-7),
        (f"sigma1 = {s1 * um:.3f} um/s in [1.5, 3.5]", 1.5 <= s1 * um <= 3.5),
        (f"sigma2 = {s2 * um:.3f} um/s in [3.0, 5.0]", 3.0 <= s2 * um <= 5.0),
        (f"runtime {per_call * 1e6:.0f} us < 1 ms", per_call < 1e-3),
    ])


def test_criterion_02_hypothesis_and_threshold():
    A._scan.cache_clear()
    t0 = time.perf_counter()
    d = A.phi_star(P)
    elapsed = time.perf_counter() - t0
    report(2, [
        ("hypothesis holds", d.hypothesis_holds),
        (f"Omega = {d.omega}", abs(d.omega.lo - 2.447e-4) <= 1e-7 and abs(d.omega.hi - 3.219e-4) <= 1e-7),
        (f"phi* = {d.phi_star:.10f} in (0, 1)", 0 < d.phi_star < 1),
        (f"grid vs refined lambda* rel diff {rel(d.lambda_star_grid, d.lambda_star):.1e} <= 1e-6",
         rel(d.lambda_star_grid, d.lambda_star) <= 1e-6),
        (f"runtime {elapsed:.3f} s < 1 s", elapsed < 1.0),
    ])


def _criterion3_phis():
    ps = A.phi_star(P).phi_star
    return np.linspace(ps / 20, ps, 20)


def test_criterion_03_two_species_reduction_and_bounds():
    d = A.phi_star(P)
    reduction = A.sigma_two(P, 0.0) == A.sigma_single(P.chi1S, P.chi1N, P.DS, P.alpha)
    worst_res, inside = 0.0, True
    for phi in _criterion3_phis():
        s = A.sigma_two(P, phi)
        target = phi / (1 - phi)
        worst_res = max(worst_res, abs(float(A.G_func(P, s)) - target) / (1 + target))
        inside &= d.sigma1 < s < d.sigma2
    report(3, [
        ("sigma_two(0) == sigma1 exactly", reduction),
        ("20 speeds in (sigma1, sigma2)", inside),
        (f"max |G - phi/(1-phi)|/(1+phi/(1-phi)) = {worst_res:.1e} <= 1e-10", worst_res <= 1e-10),
    ])


def test_criterion_04_sprime_identity():
    worst_closed, worst_num = 0.0, 0.0
    h = 1e-6
    for phi in _criterion3_phis():
        sol = A.wave_solution(P, phi)
        minus, plus = A.sprime_parts(P, sol)
        scale = abs(minus)
        worst_closed = max(worst_closed, abs(minus + plus) / scale)
        _, _, S = A.analytic_profiles(P, sol, np.array([-2 * h, -h, h, 2 * h]))
        # fourth-order central difference
        num = (S[0] - 8 * S[1] + 8 * S[2] - S[3]) / (12 * h)
        worst_num = max(worst_num, abs(num - (minus + plus)) / scale)
    report(4, [
        (f"closed form |S'(0)|/|S'_-| max {worst_closed:.1e} <= 1e-9", worst_closed <= 1e-9),
        (f"numerical S'(0) vs closed form max rel {worst_num:.1e} <= 1e-6", worst_num <= 1e-6),
    ])


def test_criterion_05_algebraic_cross_checks():
    rng = np.random.default_rng(2024)
    worst_h, worst_c = 0.0, 0.0
    for i in (1, 2):
        I = A.admissible_interval(P, i)
        s = rng.uniform(I.lo, I.hi, 100)
        s = s[(s > I.lo) & (s < I.hi)]
        poly, prod = A._h_poly(P, s, i), A.h_factored(P, s, i)
        worst_h = max(worst_h, float(np.max(np.abs(poly - prod) / np.abs(prod))))
        c1, c2 = A.c_coeff(P, s, i), A.c_expanded(P, s, i)
        worst_c = max(worst_c, float(np.max(np.abs(c1 - c2) / np.abs(c1))))
    report(5, [
        (f"h polynomial vs factored max rel {worst_h:.1e} <= 1e-10", worst_h <= 1e-10),
        (f"c closed vs expanded max rel {worst_c:.1e} <= 1e-10", worst_c <= 1e-10),
    ])


def test_criterion_06_conservation_and_positivity():
    checks = []
    for phi in (0.0, 0.5):
        cfg = make_config(phi)
        dt = cfg.time.cfl * cfg.grid.dx / pde.max_speed(cfg.params)
        cfg = make_config(phi, t_end=1e4 * dt, stride=100)
        first = last = None
        nonneg = True
        steps = 0
        for s in pde.simulate(cfg):
            first = first or s
            last = s
            nonneg &= all(bool(np.all(f >= 0)) for f in s.fields())
        steps = round(last.t / dt)
        drift = max(rel(last.mass(i, cfg.grid.dx), first.mass(i, cfg.grid.dx))
                    for i in (1, 2) if first.mass(i, cfg.grid.dx) > 0)
        checks += [
            (f"phi={phi}: {steps} steps", steps == 10_000),
            (f"phi={phi}: mass drift {drift:.1e} <= 1e-10", drift <= 1e-10),
            (f"phi={phi}: all fields >= 0", nonneg),
        ]
    report(6, checks)


def test_criterion_07_simulated_vs_analytic_speed():
    s1, s2 = A.species_speed(P, 1), A.species_speed(P, 2)
    e1 = [rel(tracked(0.0, nx=nx).speed(1), s1) for nx in (900, 1800)]
    e2 = [rel(tracked(1.0, nx=nx).speed(2), s2) for nx in (900, 1800)]
    report(7, [
        (f"phi=0 nx=900 speed error {e1[0]:.2%} <= 5%", e1[0] <= 0.05),
        (f"phi=1 nx=900 speed error {e2[0]:.2%} <= 5%", e2[0] <= 0.05),
        (f"phi=0 error shrinks {e1[0]:.2%} -> {e1[1]:.2%} at nx=1800", e1[1] < e1[0]),
        (f"phi=1 error shrinks {e2[0]:.2%} -> {e2[1]:.2%} at nx=1800", e2[1] < e2[0]),
    ])


def flank_slopes(x, rho, lo=1e-3, hi=0.3):
    """Least-squares slopes of log(rho) where ``lo < rho/max < hi`` on each side of the peak."""
    k = int(np.argmax(rho))
    m = rho[k]
    band = (rho > lo * m) & (rho < hi * m)
    back, front = band & (x < x[k]), band & (x > x[k])
    return (np.polyfit(x[back], np.log(rho[back]), 1)[0],
            np.polyfit(x[front], np.log(rho[front]), 1)[0])


def test_criterion_08_profile_shape():
    # Refined grid and a long channel: the front flank relaxes at the slow
    # relative speed sigma - (chiN - chiS) and needs ~10^4 s to settle.
    cfg = make_config(0.0, nx=8000, L=4.0, t_end=12000.0, stride=10 ** 9)
    last = pde.run(cfg)[-1]
    back, front = flank_slopes(cfg.grid.x, last.rho1)
    lm, lp = A.lambda_pm(P, A.species_speed(P, 1), 1)
    report(8, [
        (f"back slope {back:.2f} vs lambda- {lm:.2f} ({rel(back, lm):.1%}) <= 10%", rel(back, lm) <= 0.10),
        (f"front slope {front:.2f} vs lambda+ {lp:.2f} ({rel(front, lp):.1%}) <= 10%", rel(front, lp) <= 0.10),
    ])


SWEEP_PHIS = np.round(np.arange(0.05, 0.951, 0.05), 2)


@pytest.fixture(scope="module")
def sweep():
    # Extended channel: the split needs long runs to separate clearly.
    base = make_config(nx=4000, L=8.0, t_end=20000.0, stride=10)
    return E.sweep_phi(base, SWEEP_PHIS)


def test_criterion_09_bifurcation_diagram(sweep):
    rows = {round(r.phi_red, 2): r for r in sweep.rows}
    labelled = [(r.phi_red, r.regime) for r in sweep.rows if r.regime in (E.SINGLE, E.SPLIT)]
    changes = [(a, b) for a, b in zip(labelled, labelled[1:]) if a[1] != b[1]]
    one = (len(changes) == 1 and changes[0][0][1] == E.SINGLE and changes[0][1][1] == E.SPLIT)
    where = (changes[0][0][0], changes[0][1][0]) if one else None
    located = one and 0.3 <= where[0] and where[1] <= 0.7

    r1 = rows[0.1]
    sig01 = A.sigma_two(P, 0.1)
    agree = rel(r1.speed_slow, r1.speed_fast) if r1.speed_fast else math.inf
    mean01 = 0.5 * (r1.speed_slow + r1.speed_fast)
    r9 = rows[0.9]
    s1, s2 = A.species_speed(P, 1), A.species_speed(P, 2)
    regimes = ",".join({E.SINGLE: "1", E.SPLIT: "2", E.INDETERMINATE: "?"}.get(r.regime, "x")
                       for r in sweep.rows)
    report(9, [
        (f"regimes {regimes}: one single->split transition", one),
        (f"transition between {where} within [0.3, 0.7]", located),
        (f"phi=0.1 regime {r1.regime}, speeds agree to {agree:.2%} <= 2%", r1.regime == E.SINGLE and agree <= 0.02),
        (f"phi=0.1 mean speed vs sigma_two(0.1) {rel(mean01, sig01):.2%} <= 5%",
         rel(r1.speed_slow, sig01) <= 0.05 and rel(r1.speed_fast, sig01) <= 0.05),
        (f"phi=0.9 regime {r9.regime}", r9.regime == E.SPLIT),
        (f"phi=0.9 slow {rel(r9.speed_slow, s1):.2%}, fast {rel(r9.speed_fast, s2):.2%} <= 10%",
         rel(r9.speed_slow, s1) <= 0.10 and rel(r9.speed_fast, s2) <= 0.10),
    ])


def test_criterion_10_fit_round_trip():
    rng = np.random.default_rng(7)
    worst, n = 0.0, 0
    while n < 100:
        f = rng.uniform(0.5, 2.0, 5)
        p = P.replace(D1=P.D1 * f[0], DS=P.DS * f[1], alpha=P.alpha * f[2],
                      chi1S=P.chi1S * f[3], chi1N=P.chi1N * f[4])
        s = A.species_speed(p, 1)
        if not A.admissible_interval(p, 1).lo < s:
            continue
        lm, lp = A.lambda_pm(p, s, 1)
        chiS, chiN, alpha = A.fit_parameters(lm, lp, s, p.D1, p.DS)
        worst = max(worst, rel(chiS, p.chi1S), rel(chiN, p.chi1N), rel(alpha, p.alpha))
        n += 1
    report(10, [(f"100 parameter sets, worst relative error {worst:.1e} <= 1e-10", worst <= 1e-10)])


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
