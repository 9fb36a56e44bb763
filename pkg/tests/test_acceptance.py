"""Acceptance criteria for the full pipeline, one test per criterion.

Each test prints one [PASS]/[FAIL] line (visible with -s or on failure).
Criterion 8's hexagon leading coefficient is expected to fail against the
published value: two charge pairs sit at the exactly degenerate minimal
rate and the published number covers only one of them; see the README
section "Acceptance status" for the analysis.  Everything else is green.
"""

import cmath
import math
import time

import numpy as np
import pytest

from trigon.asymptotics import build_prediction, decay_table, linear_coefficient
from trigon.bps import builtin_spectrum, spectrum_from_webs
from trigon.curve import Charge, LiftedPath, PeriodMap
from trigon.network import detect_bps, grow_network
from trigon.polygon import ProjectivePolygon, builtin_expression, cross_ratio
from trigon.reference import pentagon_closed_form
from trigon.tba import SolverConfig, log_x, solve, spectral_coordinate


def _criterion(n, name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {n} ({name}): {detail}")
    return ok


# ---------------- shared heavy computations ----------------

@pytest.fixture(scope="module")
def pentagon_sweep(pentagon, pentagon_pm):
    t0 = time.time()
    webs = detect_bps(pentagon.curve, pentagon.lattice, (-math.pi, math.pi),
                      period_map=pentagon_pm)
    return webs, time.time() - t0


@pytest.fixture(scope="module")
def hexagon_sweep(hexagon, hexagon_pm):
    t0 = time.time()
    webs = detect_bps(hexagon.curve, hexagon.lattice, (0.0, 2 * math.pi),
                      period_map=hexagon_pm)
    return webs, time.time() - t0


@pytest.fixture(scope="module")
def pentagon_solution(pentagon, pentagon_pm):
    spec = builtin_spectrum("pentagon")
    return solve(SolverConfig(R=0.5, theta=0.0), spec, pentagon_pm,
                 pentagon.lattice.pairing)


# ---------------- criteria ----------------

def test_criterion_1_pentagon_periods(pentagon):
    t0 = time.time()
    pm = PeriodMap.compute(pentagon.curve, pentagon.lattice)
    dt = time.time() - t0
    refs = [-2.00324 + 1.15657j, -2.31315j]
    errs = [abs(pm.Z(pentagon.lattice.basis_charge(i)) - refs[i])
            for i in range(2)]
    cf_err = abs(pm.Z(Charge((1, 0))) - pentagon_closed_form())
    ok = max(errs) <= 5e-5 and cf_err <= 1e-6 and dt < 1.0
    assert _criterion(1, "pentagon periods", ok,
                      f"|dZ| = {max(errs):.2e} (tol 5e-5), closed form "
                      f"{cf_err:.2e} (tol 1e-6), {dt:.3f}s (< 1s)")


def test_criterion_2_hexagon_periods(hexagon):
    t0 = time.time()
    pm = PeriodMap.compute(hexagon.curve, hexagon.lattice)
    dt = time.time() - t0
    refs = [2.30298, 5.47033 + 4.48792j, -4.31884 + 2.49348j, -4.98697j]
    errs = [abs(pm.Z(hexagon.lattice.basis_charge(i)) - refs[i])
            for i in range(4)]
    ok = max(errs) <= 5e-5 and dt < 1.0
    assert _criterion(2, "hexagon periods", ok,
                      f"max |dZ| = {max(errs):.2e} (tol 5e-5), {dt:.3f}s (< 1s)")


def test_criterion_3_network_census(pentagon, hexagon):
    t0 = time.time()
    pn = grow_network(pentagon.curve, 0.0)
    t_p = time.time() - t0
    t0 = time.time()
    hn = grow_network(hexagon.curve, 0.1)
    t_h = time.time() - t0
    ok = (len(pn.trajectories) == 18 and pn.n_born == 2
          and len(pn.infinity_marks) == 10
          and len(hn.trajectories) == 31 and hn.n_born == 7
          and len(hn.infinity_marks) == 12
          and t_p < 30.0 and t_h < 30.0)
    assert _criterion(3, "network census", ok,
                      f"pentagon {len(pn.trajectories)}/{pn.n_born} born/"
                      f"{len(pn.infinity_marks)} dirs in {t_p:.2f}s; hexagon "
                      f"{len(hn.trajectories)}/{hn.n_born} born/"
                      f"{len(hn.infinity_marks)} dirs in {t_h:.2f}s")


def _web_phases_match_periods(webs, pm):
    worst = 0.0
    for w in webs:
        arg = cmath.phase(pm.Z(w.charge))
        worst = max(worst, abs((arg - w.theta_star + math.pi) % (2 * math.pi)
                               - math.pi))
    return worst


def test_criterion_4_pentagon_bps(pentagon_sweep, pentagon_pm):
    webs, dt = pentagon_sweep
    phases = sorted(w.theta_star for w in webs)
    want = [-5 * math.pi / 6, -math.pi / 2, -math.pi / 6,
            math.pi / 6, math.pi / 2, 5 * math.pi / 6]
    phase_ok = (len(phases) == 6
                and max(abs(p - q) for p, q in zip(phases, want)) <= 1e-3)
    harvested = spectrum_from_webs(webs, rank=2)
    builtin = builtin_spectrum("pentagon")
    charge_ok = (set(harvested.charges()) == set(builtin.charges())
                 and all(harvested.omega(c) == 1 for c in harvested.charges()))
    arg_err = _web_phases_match_periods(webs, pentagon_pm)
    ok = phase_ok and charge_ok and arg_err <= 1e-3 and dt < 300.0
    assert _criterion(4, "pentagon BPS sweep", ok,
                      f"phases {[round(p, 6) for p in phases]}, "
                      f"{len(harvested)} charges, arg match {arg_err:.1e}, "
                      f"{dt:.0f}s (< 300s)")


def test_criterion_5_hexagon_bps(hexagon_sweep, hexagon_pm):
    webs, dt = hexagon_sweep
    harvested = spectrum_from_webs(webs, rank=4)
    builtin = builtin_spectrum("hexagon")
    set_ok = set(harvested.charges()) == set(builtin.charges())
    junctions = [w for w in webs if w.topology == "three_string_junction"]
    near = [w for w in webs if abs(w.theta_star - 0.36) < 0.05]
    web_ok = len(near) == 1 and near[0].charge.components == (1, 0, -1, -1)
    arg_err = _web_phases_match_periods(webs, hexagon_pm)
    ok = (set_ok and len(junctions) == 6 and web_ok and arg_err <= 1e-3
          and dt < 900.0)
    assert _criterion(5, "hexagon BPS sweep", ok,
                      f"{len(webs)} webs / {len(junctions)} junctions, "
                      f"24 charges match: {set_ok}, theta=0.36 web "
                      f"{near[0].charge if near else None}, arg match "
                      f"{arg_err:.1e}, {dt:.0f}s (< 900s)")


def test_criterion_6_tba_spot_value(pentagon, pentagon_pm):
    spec = builtin_spectrum("pentagon")
    t0 = time.time()
    sol = solve(SolverConfig(R=0.5, theta=0.0), spec, pentagon_pm,
                pentagon.lattice.pairing)
    X = spectral_coordinate(sol, Charge((1, 0))).real
    dt = time.time() - t0
    ok = abs(X - 0.1286) <= 1e-3 and dt < 10.0
    assert _criterion(6, "TBA spot value", ok,
                      f"X_gamma1(R=0.5) = {X:.6f} (want 0.1286 +- 1e-3), "
                      f"{dt:.2f}s (< 10s)")


def test_criterion_7_kernel_exactness(hexagon, hexagon_pm):
    spec = builtin_spectrum("hexagon")
    worst = 0.0
    for R in (0.5, 1.0, 2.0):
        sol = solve(SolverConfig(R=R, theta=0.2), spec, hexagon_pm,
                    hexagon.lattice.pairing)
        for comps in ((0, 0, 1, 0), (0, 0, 0, 1)):
            g = Charge(comps)
            X = spectral_coordinate(sol, g).real
            exact = math.exp(linear_coefficient(g, 0.2, hexagon_pm) * R)
            worst = max(worst, abs(X - exact) / exact)
    a3 = linear_coefficient(Charge((0, 0, 1, 0)), 0.2, hexagon_pm)
    ok = worst <= 1e-12 and abs(a3 - (-7.4748)) <= 5e-4
    assert _criterion(7, "kernel exactness", ok,
                      f"max rel deviation {worst:.2e} (tol 1e-12), "
                      f"a_gamma3 = {a3:.5f} (want -7.4748 +- 5e-4)")


def test_criterion_8_pentagon_asymptotic_constants(pentagon, pentagon_pm):
    spec = builtin_spectrum("pentagon")
    a = linear_coefficient(Charge((1, 0)), 0.0, pentagon_pm)
    pred = build_prediction(Charge((1, 0)), 0.0, spec, pentagon_pm,
                            pentagon.lattice.pairing)
    ok = abs(a - (-4.00648)) <= 5e-5 and abs(pred.rho - 2.31315) <= 5e-5
    assert _criterion(8, "pentagon asymptotic constants", ok,
                      f"a = {a:.6f} (want -4.00648), rho = {pred.rho:.6f} "
                      f"(want 2.31315), both +- 5e-5")


def test_criterion_8_hexagon_asymptotic_constants(hexagon, hexagon_pm):
    # KNOWN RED: the published c = 0.1961 equals the contribution of one
    # of the two charge pairs whose |Z| ties at the minimal rate exactly
    # (conjugation symmetry); the solver-consistent summed coefficient is
    # 0.4441.  Kept faithful to the stated target value.
    spec = builtin_spectrum("hexagon")
    g1 = Charge((1, 0, 0, 0))
    a = linear_coefficient(g1, 0.2, hexagon_pm)
    pred = build_prediction(g1, 0.2, spec, hexagon_pm,
                            hexagon.lattice.pairing)
    a_ok = abs(a - 4.5142) <= 5e-4
    rho_ok = abs(pred.rho - 2.3030) <= 5e-4
    c_ok = abs(pred.leading_coefficient - 0.1961) <= 5e-4
    _criterion(8, "hexagon asymptotic constants", a_ok and rho_ok and c_ok,
               f"a = {a:.5f} (want 4.5142 ok={a_ok}), rho = {pred.rho:.5f} "
               f"(want 2.3030 ok={rho_ok}), c = {pred.leading_coefficient:.5f} "
               f"(want 0.1961 ok={c_ok}; summed over the full degenerate "
               f"leading rate)")
    assert a_ok and rho_ok
    assert c_ok, (
        "published 0.1961 is the partial sum over half the tied minimal-rate "
        "charges; the solver-consistent full sum is {:.5f} (see README, "
        "'Acceptance status')".format(pred.leading_coefficient))


def test_criterion_9_remainder_decay(pentagon, pentagon_pm):
    spec = builtin_spectrum("pentagon")
    pair = pentagon.lattice.pairing
    pred = build_prediction(Charge((1, 0)), 0.0, spec, pentagon_pm, pair)
    t0 = time.time()
    sols = [solve(SolverConfig(R=R, theta=0.0), spec, pentagon_pm, pair)
            for R in (1.0, 1.5, 2.0, 2.5, 3.0)]
    rows = decay_table(sols, pred)
    dt = time.time() - t0
    scaled = [r[4] for r in rows]
    ok = all(a > b for a, b in zip(scaled, scaled[1:])) and dt < 120.0
    assert _criterion(9, "remainder decay", ok,
                      f"|delta| sqrt(R) e^(2 rho R) = "
                      f"{[round(s, 5) for s in scaled]} strictly decreasing, "
                      f"{dt:.1f}s (< 120s)")


def test_criterion_10_property_suites(pentagon, hexagon, pentagon_pm,
                                      hexagon_pm, pentagon_solution):
    rng = np.random.default_rng(42)
    checks = []

    # multiplicativity and reality of the solved coordinates
    worst_mult = 0.0
    worst_imag = 0.0
    for _ in range(8):
        m, n = rng.integers(-3, 4, size=(2, 2))
        la = log_x(pentagon_solution, Charge(m))
        lb = log_x(pentagon_solution, Charge(n))
        lab = log_x(pentagon_solution, Charge(m + n))
        worst_mult = max(worst_mult,
                         abs(lab - la - lb) / max(1.0, abs(lab)))
        worst_imag = max(worst_imag, abs(la.imag))
    checks.append(("multiplicativity", worst_mult <= 1e-9,
                   f"{worst_mult:.2e}"))
    checks.append(("reality", worst_imag <= 1e-9, f"{worst_imag:.2e}"))

    # grid refinement stability
    spec = builtin_spectrum("pentagon")
    pair = pentagon.lattice.pairing
    x_fine = spectral_coordinate(
        solve(SolverConfig(R=0.5, theta=0.0, N=513), spec, pentagon_pm, pair),
        Charge((1, 0))).real
    x_base = spectral_coordinate(pentagon_solution, Charge((1, 0))).real
    checks.append(("grid refinement",
                   abs(x_fine - x_base) <= 1e-8 * abs(x_base),
                   f"{abs(x_fine - x_base) / abs(x_base):.2e}"))

    # period linearity
    worst = 0.0
    for _ in range(8):
        m, n = rng.integers(-5, 6, size=(2, 2))
        zab = pentagon_pm.Z(Charge(m + n))
        worst = max(worst, abs(zab - pentagon_pm.Z(Charge(m))
                               - pentagon_pm.Z(Charge(n)))
                    / max(1.0, abs(zab)))
    checks.append(("period linearity", worst <= 1e-9, f"{worst:.2e}"))

    # monodromy order 3
    wps = [1.0 + 0.4 * cmath.exp(2j * cmath.pi * 3 * k / 72)
           for k in range(73)]
    x0 = pentagon.curve.sheets_at(wps[0])[0]
    x3 = pentagon.curve.continue_sheet(LiftedPath(wps, x0))
    checks.append(("monodromy order 3", abs(x3 - x0) <= 1e-8,
                   f"{abs(x3 - x0):.2e}"))

    # polygon invariances
    angles = np.sort(rng.uniform(0, 2 * np.pi, size=6))
    poly = ProjectivePolygon(
        [[np.cos(a), np.sin(a), 1.0] for a in angles])
    expr = builtin_expression("hexagon", "gamma1")
    ref = cross_ratio(poly, expr)
    worst = 0.0
    for _ in range(5):
        M = rng.normal(size=(3, 3))
        M /= np.cbrt(np.linalg.det(M))
        moved = ProjectivePolygon(poly.vertices @ M.T)
        worst = max(worst, abs(cross_ratio(moved, expr) - ref) / abs(ref))
        scales = rng.uniform(0.2, 5.0, size=6)
        scaled = ProjectivePolygon(poly.vertices * scales[:, None])
        worst = max(worst, abs(cross_ratio(scaled, expr) - ref) / abs(ref))
    checks.append(("polygon invariance", worst <= 1e-10, f"{worst:.2e}"))

    # spectrum symmetry validation
    ok_omega = (builtin_spectrum("pentagon").validate().ok
                and builtin_spectrum("hexagon").validate().ok)
    checks.append(("omega symmetry", ok_omega, str(ok_omega)))

    all_ok = all(ok for _, ok, _ in checks)
    detail = "; ".join(f"{name} {msg} {'ok' if ok else 'FAIL'}"
                       for name, ok, msg in checks)
    assert _criterion(10, "property suites", all_ok, detail)
