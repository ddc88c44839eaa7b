"""End-to-end acceptance criteria; one PASS/FAIL line per criterion."""
import math
import time

import numpy as np
import pytest

from conftest import RESOLUTION, oracle_for, report, solution_for
from slitloewner import bangbang as bb, fixtures, loewner as lw
from slitloewner.geometry import Slit, SlitSystem
from slitloewner.lmr_oracle import LmrOracle, lemma_ratio, monotone_differences, random_quadruples
from slitloewner.zipper import map_disk_minus_slits

ALL = sorted(fixtures.FIXTURES)
PAIRS = ["asymmetric", "curved", "symmetric"]


def test_closed_form_lmr():
    x = 3 - 2 * math.sqrt(2)
    rows = []
    for res, tol in ((2000, 1e-3), (8000, 1e-4)):
        t0 = time.perf_counter()
        err = abs(map_disk_minus_slits([[1.0, x]], res, record=False).lmr_value - math.log(2))
        rows.append((res, err, tol, time.perf_counter() - t0))
    ok = all(err <= tol for _, err, tol, _ in rows)
    report("closed-form lmr", ok, "; ".join(f"R={r} err={e:.1e} (tol {t:g}, {s:.2f}s)"
                                              for r, e, t, s in rows))
    assert ok


def test_lemma_suite():
    oracle = oracle_for("asymmetric")
    f = np.linspace(0, 1, 33)
    G = oracle.grid(f, f)
    d0, d1 = monotone_differences(G)
    delta, dev = oracle.continuity_modulus(0.25)
    rng = np.random.default_rng(2024)
    ratios = np.array([lemma_ratio(oracle, q) for q in random_quadruples(rng, delta, 400)])
    gap = max(1, int(math.floor(delta * 32 + 1e-9)))
    glo, ghi = oracle.difference_ratios(oracle.grid(np.linspace(0, 1, 33), np.linspace(0, 1, 33)), gap)
    ok = d0 > 0 and d1 > 0 and 0.75 < ratios.min() and ratios.max() < 1.25 and 0.75 < glo and ghi < 1.25
    report("Lemma suite", ok, f"min differences {d0:.2e},{d1:.2e}; delta(0.25)={delta:.3f}; "
           f"sampled ratios [{ratios.min():.3f}, {ratios.max():.3f}]; grid ratios [{glo:.3f}, {ghi:.3f}]")
    assert ok


def test_telescoping_identity():
    worst = {}
    for name in PAIRS:
        oracle, sol = oracle_for(name), solution_for(name)
        tabs = [sol.u(k) for k in range(sol.m)]
        w = 0.0
        for i in range(1, len(sol.times)):
            t = sol.times[i]
            s = oracle.sums(tabs, t, sol.times[:i + 1])
            w = max(w, abs(s.s1 + s.s2_tilde - t), abs(s.s2 + s.s1_tilde - t))
        worst[name] = w
    ok = max(worst.values()) <= 1e-5
    report("telescoping identity", ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + " (tol 1e-5)")
    assert ok


def test_symmetry():
    sol = solution_for("symmetric")
    dl = abs(sol.lam[0] - 0.5)
    du = float(np.max(np.abs(sol.u_tables[0] - sol.u_tables[1])))
    ok = dl <= 1e-2 and du <= 1e-3
    report("symmetry", ok, f"lambda={sol.lam[0]:.5f} (|d|={dl:.1e} <= 1e-2), sup|u-v|={du:.1e} (<= 1e-3)")
    assert ok


def test_linearity_of_coefficients():
    oracle, sol = oracle_for("asymmetric"), solution_for("asymmetric")
    errs = []
    for d in (2, 4, 8, 16):
        Z = np.linspace(0, sol.L, d + 1)
        c = bb.coefficient_integrals(oracle, sol, Z)
        errs.append(float(np.max(np.abs(c[0] - sol.lam[0] * Z))))
    ratios = [errs[i] / errs[i + 1] for i in range(len(errs) - 1)]
    ok = len(ratios) >= 3 and all(1.4 <= r <= 2.6 for r in ratios)
    report("linearity of c_j", ok, "errors " + ", ".join(f"{e:.2e}" for e in errs) +
           "; halving ratios " + ", ".join(f"{r:.2f}" for r in ratios))
    assert ok


def test_normalization():
    errs = {name: bb.normalization_error(oracle_for(name), solution_for(name)) for name in ALL}
    ok = max(errs.values()) <= 5e-6
    report("normalization", ok, ", ".join(f"{k} {v:.1e}" for k, v in errs.items()) + " (tol 5e-6)")
    assert ok


@pytest.mark.parametrize("name", ALL)
def test_round_trip(name):
    oracle, sol = oracle_for(name), solution_for(name)
    rep = lw.roundtrip_report(oracle.original, sol, 128, oracle=oracle)
    ok = rep.passed["hausdorff"] and rep.passed["hausdorff_decreases"]
    report(f"round trip [{name}]", ok,
           "hausdorff " + ", ".join(f"{h:.2e}" for h in rep.hausdorff) +
           " vs 3x scale " + ", ".join(f"{3 * s:.2e}" for s in rep.scale) +
           "; at half steps " + ", ".join(f"{h:.2e}" for h in rep.hausdorff_half))
    assert ok


def test_uniqueness_surrogate():
    rows = {}
    for name in ALL:
        base = solution_for(name).lam
        tri = solution_for(name, schedule="triadic", max_level=4).lam
        ext = solution_for(name, headroom=2.0).lam
        rows[name] = max(np.max(np.abs(base - tri)), np.max(np.abs(base - ext)))
    ok = max(rows.values()) <= 1e-2
    report("uniqueness surrogate", ok, ", ".join(f"{k} {v:.1e}" for k, v in rows.items()) +
           " (dyadic 2^6 vs triadic 3^4 vs headroom 2.0; tol 1e-2)")
    assert ok


def test_forward_solver_law():
    rng = np.random.default_rng(11)
    worst_law, worst_zero = 0.0, 0.0
    for m, L, pieces in ((1, math.log(2), 1), (2, 1.5, 6), (3, 2.5, 10)):
        lam = rng.dirichlet(np.ones(m))
        times = np.linspace(0, L, pieces + 1)
        xi = np.exp(1j * rng.uniform(0, 2 * np.pi, size=(m, pieces + 1)))
        res = lw.solve_forward(lam, times, xi, L, [0.2 + 0.1j, -0.3j], interpolation="constant")
        worst_law = max(worst_law, res.derivative_law_error())
        worst_zero = max(worst_zero, float(np.max(np.abs(res.origin_path))))
    ok = worst_law <= 1e-6 and worst_zero <= 1e-12
    report("forward-solver law", ok, f"max |log h'(0)-t|/max(t,1) = {worst_law:.1e}, max |h_t(0)| = {worst_zero:.1e}")
    assert ok


def test_synthetic_inverse_problem():
    times, xi = fixtures.synthetic_driving(0.6)
    tr = lw.regenerate_traces(fixtures.SYNTHETIC_LAMBDA, times, xi, 1024)
    system = SlitSystem(tuple(Slit(t) for t in tr.traces))
    oracle = LmrOracle(system, resolution=RESOLUTION)
    sol = bb.construct(oracle, max_level=6, min_level=6)
    err = float(np.max(np.abs(sol.lam - np.array(fixtures.SYNTHETIC_LAMBDA))))
    ok = err <= 2e-2
    report("synthetic inverse", ok, f"recovered lambda {sol.lam[0]:.4f}/{sol.lam[1]:.4f} "
           f"vs 0.7/0.3 (err {err:.1e}, tol 2e-2); L={oracle.L:.6f} vs 0.6")
    assert ok
