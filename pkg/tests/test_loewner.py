import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slitloewner import _kernels as K, fixtures, loewner as lw
from slitloewner.bangbang import ConstantCoeffSolution
from slitloewner.geometry import hausdorff
from slitloewner.zipper import map_disk_minus_slits, radial_slit_lmr

LOG2 = math.log(2)


@given(st.floats(1e-6, 5.0))
def test_capacity_radius_inverts_closed_form(c):
    x = lw.capacity_radius(c)
    assert 0 < x < 1
    assert radial_slit_lmr(x) == pytest.approx(c, rel=1e-9, abs=1e-12)


def test_capacity_radius_log2():
    assert lw.capacity_radius(LOG2) == pytest.approx(3 - 2 * math.sqrt(2), abs=1e-15)


def _constant(m_xi, L, n=4):
    times = np.linspace(0, L, n + 1)
    return times, np.tile(np.asarray(m_xi, complex)[:, None], (1, n + 1))


def test_single_slit_trace_is_radial():
    times, xi = _constant([1.0], LOG2)
    tr = lw.regenerate_traces([1.0], times, xi, 64)
    t = tr.traces[0]
    assert t[0] == 1
    assert np.max(np.abs(t.imag)) < 1e-14
    assert t[-1].real == pytest.approx(3 - 2 * math.sqrt(2), abs=1e-12)
    assert np.all(np.diff(t.real) < 0)


@given(st.floats(-math.pi, math.pi))
@settings(max_examples=10, deadline=None)
def test_single_slit_rotates_with_base(ang):
    u = complex(math.cos(ang), math.sin(ang))
    times, xi = _constant([u], 0.5)
    tr = lw.regenerate_traces([1.0], times, xi, 32)
    ref = lw.regenerate_traces([1.0], *_constant([1.0], 0.5), 32)
    assert np.allclose(tr.traces[0], u * ref.traces[0], atol=1e-12)


def test_symmetric_pair_traces_mirror():
    times, xi = _constant([1j, -1j], 0.4)
    xi = xi * np.exp(1j * 0.2 * np.array([[1.0], [-1.0]]) * times / 0.4)
    gaps = {}
    for order in ("alternate", "fixed"):
        for n in (64, 256):
            a, b = lw.regenerate_traces([0.5, 0.5], times, xi, n, order=order).traces
            gaps[order, n] = hausdorff(a, np.conj(b))
    # alternating the order makes the mirror defect second order in the step
    assert gaps["alternate", 64] < 1e-5
    assert gaps["alternate", 256] < gaps["alternate", 64] / 8
    assert gaps["fixed", 256] < gaps["fixed", 64]
    assert gaps["alternate", 64] < gaps["fixed", 64]


def test_forward_matches_slit_map():
    # one slit with constant driving: h_L is exactly the radial slit map
    times, xi = _constant([1.0], LOG2)
    pts = [-0.5, 0.3j, 0.2 + 0.1j, -0.1 - 0.7j]
    res = lw.solve_forward([1.0], times, xi, LOG2, pts)
    x = 3 - 2 * math.sqrt(2)
    for z, h in zip(pts, res.trajectories[:, -1]):
        assert abs(h - K.slit_map(complex(z), x)) < 1e-8
    assert np.allclose(res.trajectories[:, 0], pts)


def test_forward_absorbs_slit_points():
    times, xi = _constant([1.0], LOG2)
    res = lw.solve_forward([1.0], times, xi, LOG2, [0.5, -0.5])
    assert 0 in res.absorbed_at and 1 not in res.absorbed_at
    # the point 0.5 is swallowed when the slit tip passes it
    assert res.absorbed_at[0] == pytest.approx(radial_slit_lmr(0.5), abs=1e-4)
    assert np.all(np.isnan(res.trajectories[0, -1:]))


def test_forward_law_piecewise_constant():
    rng = np.random.default_rng(7)
    times = np.linspace(0, 1.5, 7)
    xi = np.exp(1j * rng.uniform(0, 2 * np.pi, size=(2, 7)))
    res = lw.solve_forward([0.3, 0.7], times, xi, 1.5, [0.1 + 0.1j, -0.2j],
                           interpolation="constant")
    assert res.flow_derivative_at_0[0] == 1.0
    assert res.derivative_law_error() <= 1e-6
    assert np.max(np.abs(res.origin_path)) <= 1e-12
    live = res.trajectories[~np.isnan(res.trajectories)]
    assert np.all(np.abs(live) < 1)


def test_forward_rejects_bad_inputs():
    times, xi = _constant([1.0, -1.0], 0.5)
    with pytest.raises(ValueError):
        lw.solve_forward([0.5, 0.6], times, xi, 0.5)
    with pytest.raises(ValueError):
        lw.solve_forward([0.5, 0.5], times, 2 * xi, 0.5)
    with pytest.raises(ValueError):
        lw.solve_forward([0.5, 0.5], times, xi, 0.7)


def test_driving_collision():
    times, xi = _constant([1.0, 1.0], 0.3)
    with pytest.raises(lw.DrivingCollision):
        lw.regenerate_traces([0.5, 0.5], times, xi, 8)


def test_trace_zipper_duality():
    times, xi = fixtures.synthetic_driving(0.4, 16)
    tr = lw.regenerate_traces(fixtures.SYNTHETIC_LAMBDA, times, xi, 256)
    res = map_disk_minus_slits(tr.traces, resolution=1024)
    assert res.lmr_value == pytest.approx(0.4, abs=1e-4)
    for got, want in zip(res.tip_images, xi[:, -1]):
        assert abs(got - want) < 5e-2


def test_splitting_converges():
    times, xi = fixtures.synthetic_driving(0.4, 16)
    ref = lw.regenerate_traces(fixtures.SYNTHETIC_LAMBDA, times, xi, 1024)
    errs = []
    for n in (32, 64, 128):
        tr = lw.regenerate_traces(fixtures.SYNTHETIC_LAMBDA, times, xi, n)
        errs.append(max(hausdorff(a, b) for a, b in zip(tr.traces, ref.traces)))
    assert errs[0] > errs[1] > errs[2]


def test_map_final_sends_tips_to_driving_points():
    times, xi = fixtures.synthetic_driving(0.3, 8)
    tr = lw.regenerate_traces(fixtures.SYNTHETIC_LAMBDA, times, xi, 64, order="fixed")
    z = tr.map_final([0.0, 0.1 + 0.1j])
    assert abs(z[0]) < 1e-14
    assert abs(z[1]) < 1


def _toy_solution():
    times, xi = fixtures.synthetic_driving(0.3, 8)
    u = np.vstack([times / times[-1]] * 2)
    return ConstantCoeffSolution(np.array(fixtures.SYNTHETIC_LAMBDA), 0.3, times, u, xi)


def test_roundtrip_self_consistent():
    sol = _toy_solution()
    tr = lw.regenerate_traces(sol.lam, sol.times, sol.xi_tables, 512)
    from slitloewner.geometry import Slit, SlitSystem
    system = SlitSystem(tuple(Slit(t) for t in tr.traces))
    rep = lw.roundtrip_report(system, sol, 128)
    assert rep.passed["hausdorff"] and rep.passed["hausdorff_decreases"]
    assert not rep.xi_jump_flag
    d = rep.to_dict()
    for key in ("hausdorff", "hausdorff_half", "scale", "normalization_error",
                "derivative_law_error", "xi_modulus", "xi_jump_flag", "regenerated_lmr", "passed"):
        assert key in d


def test_roundtrip_flags_driving_jump():
    sol = _toy_solution()
    xi = sol.xi_tables.copy()
    xi[0, 5:] *= np.exp(1.0j)
    bad = ConstantCoeffSolution(sol.lam, sol.L, sol.times, sol.u_tables, xi)
    tr = lw.regenerate_traces(sol.lam, sol.times, sol.xi_tables, 64)
    from slitloewner.geometry import Slit, SlitSystem
    rep = lw.roundtrip_report(SlitSystem(tuple(Slit(t) for t in tr.traces)), bad, 64)
    assert rep.xi_jump_flag
    assert not rep.passed["xi_continuity"]


def test_roundtrip_symmetric_columns():
    times = np.linspace(0, 0.3, 9)
    xi = np.vstack([np.exp(0.1j * times), np.exp(-0.1j * times)]) * np.array([[1j], [-1j]])
    sol = ConstantCoeffSolution(np.array([0.5, 0.5]), 0.3, times, np.vstack([times / 0.3] * 2), xi)
    tr = lw.regenerate_traces(sol.lam, times, xi, 256)
    from slitloewner.geometry import Slit, SlitSystem
    rep = lw.roundtrip_report(SlitSystem(tuple(Slit(t) for t in tr.traces)), sol, 64)
    assert rep.hausdorff[0] == pytest.approx(rep.hausdorff[1], rel=1e-2)
    assert rep.scale[0] == pytest.approx(rep.scale[1], rel=1e-2)
