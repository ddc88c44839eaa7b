"""Forward radial Loewner flow with constant coefficients, and trace regeneration.

The flow is

    dh/dt = h * sum_k lam_k (xi_k(t) + h) / (xi_k(t) - h),   h_0(z) = z,

driven by unimodular tables xi_k on a time grid.  Traces are regenerated by
a splitting scheme: every time step is the composition of m exact single
radial slit maps with capacities lam_k * dt at the (transported) driving
points.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import _kernels as K
from .geometry import SlitSystem, hausdorff
from .zipper import map_disk_minus_slits

log = logging.getLogger(__name__)

ABSORPTION = 1e-7
COLLISION = 1e-9


class StiffnessError(RuntimeError):
    """The adaptive stepper could not make progress."""


class DrivingCollision(RuntimeError):
    """Two driving points met: the regenerated slits would touch."""


def _check_inputs(lam, times, xi_tables):
    lam = np.asarray(lam, dtype=float)
    times = np.asarray(times, dtype=float)
    xi = np.atleast_2d(np.asarray(xi_tables, dtype=complex))
    if np.any(lam <= 0) or abs(lam.sum() - 1.0) > 1e-9:
        raise ValueError(f"lambda must be positive and sum to 1, got {lam}")
    if xi.shape != (len(lam), len(times)):
        raise ValueError(f"xi tables must have shape {(len(lam), len(times))}, got {xi.shape}")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    if np.max(np.abs(np.abs(xi) - 1.0)) > 1e-9:
        raise ValueError("driving values must be unimodular")
    return lam, times, xi


def driving_function(times, xi_tables, interpolation="linear"):
    """Callable t -> array of driving points.

    ``linear`` interpolates the unwrapped angle, ``constant`` holds the
    left value on every interval (piecewise-constant driving).
    """
    times = np.asarray(times, dtype=float)
    ang = np.unwrap(np.angle(np.atleast_2d(xi_tables)), axis=1)
    if interpolation == "linear":
        def xi(t):
            return np.exp(1j * np.array([np.interp(t, times, a) for a in ang]))
    elif interpolation == "constant":
        def xi(t):
            i = int(np.clip(np.searchsorted(times, t, side="right") - 1, 0, len(times) - 1))
            return np.exp(1j * ang[:, i])
    else:
        raise ValueError(f"unknown interpolation {interpolation!r}")
    return xi


def capacity_radius(c):
    """Tip radius x of the radial slit [x, 1) whose lmr is ``c``."""
    if c <= 0:
        return 1.0
    b = 2.0 * math.exp(c) - 1.0
    # root of x^2 - 2 b x + 1 = 0 in (0, 1); written to avoid cancellation
    return 1.0 / (b + math.sqrt((b - 1.0) * (b + 1.0)))


# -- ODE ------------------------------------------------------------------------------

@dataclass
class ForwardSolveResult:
    times: np.ndarray
    flow_derivative_at_0: np.ndarray
    log_derivative_at_0: np.ndarray
    trajectories: np.ndarray            # (npoints, len(times)); nan after absorption
    absorbed_at: dict = field(default_factory=dict)
    origin_path: np.ndarray | None = None

    def derivative_law_error(self):
        t = self.times
        return float(np.max(np.abs(self.log_derivative_at_0 - t) / np.maximum(t, 1.0)))


def _rhs(lam, xi_fun):
    def f(t, y):
        h = complex(y[0], y[1])
        xi = xi_fun(t)
        d = xi - h
        v = h * np.sum(lam * (xi + h) / d)
        dv = np.sum(lam * ((xi + h) / d + 2.0 * h * xi / (d * d)))
        return [v.real, v.imag, dv.real, dv.imag]
    return f


def _absorb(xi_fun, threshold):
    def ev(t, y):
        return float(np.min(np.abs(xi_fun(t) - complex(y[0], y[1])))) - threshold
    ev.terminal = True
    ev.direction = -1
    return ev


def solve_forward(lam, times, xi_tables, L=None, points=(), interpolation="linear",
                  rtol=1e-10, atol=1e-12, absorption=ABSORPTION) -> ForwardSolveResult:
    """Integrate h_t(z) for every initial point, plus the derivative channel at 0.

    The ODE is run interval by interval of ``times`` so that the driving
    function is smooth inside every call of the stepper.  Points that come
    within ``absorption`` of a driving point are recorded in ``absorbed_at``
    and carry nan afterwards.
    """
    lam, times, xi = _check_inputs(lam, times, xi_tables)
    if L is not None and abs(times[-1] - L) > 1e-12 * max(1.0, L):
        raise ValueError(f"time grid ends at {times[-1]}, expected L={L}")
    xi_fun = driving_function(times, xi, interpolation)
    f = _rhs(lam, xi_fun)
    ev = _absorb(xi_fun, absorption)
    pts = [0j] + [complex(z) for z in points]
    traj = np.full((len(pts), len(times)), np.nan, dtype=complex)
    logd = np.zeros(len(times))
    absorbed = {}
    for i, z in enumerate(pts):
        y = np.array([z.real, z.imag, 0.0, 0.0])
        traj[i, 0] = z
        for l in range(len(times) - 1):
            t0, t1 = times[l], times[l + 1]
            if interpolation == "constant":
                # keep the stepper from evaluating the next value at t1
                t1e = t1 - 1e-14 * max(1.0, t1)
            else:
                t1e = t1
            sol = solve_ivp(f, (t0, t1e), y, method="RK45", rtol=rtol, atol=atol,
                            events=None if i == 0 else ev)
            if sol.status == -1:
                raise StiffnessError(f"point {z}: {sol.message} near t={sol.t[-1]:.6g}")
            if sol.status == 1:
                absorbed[i - 1] = float(sol.t_events[0][0])
                break
            y = sol.y[:, -1]
            h = complex(y[0], y[1])
            if abs(h) >= 1.0:
                raise StiffnessError(f"point {z} left the disk at t={t1:.6g}")
            traj[i, l + 1] = h
            if i == 0:
                logd[l + 1] = y[2]
    return ForwardSolveResult(times, np.exp(logd), logd, traj[1:], absorbed, traj[0])


# -- splitting scheme -------------------------------------------------------------------

@dataclass
class TraceResult:
    traces: list                # per slit: complex polyline starting on the circle
    bases: np.ndarray           # driving point of every elementary map
    radii: np.ndarray           # tip radius of every elementary map
    slit_of_map: np.ndarray
    steps: int

    def map_final(self, z):
        """Apply the composed elementary maps (the discrete h_L) to interior points."""
        z = np.atleast_1d(np.asarray(z, dtype=complex)).copy()
        for xi, x in zip(self.bases, self.radii):
            for i in range(len(z)):
                z[i] = K.forward_slit_step(z[i], xi, x)
        return z

    def scale(self, k):
        """Largest segment of trace k: the discretisation scale of the scheme."""
        return float(np.max(np.abs(np.diff(self.traces[k]))))


def regenerate_traces(lam, times, xi_tables, steps, order="alternate",
                      interpolation="linear") -> TraceResult:
    """Regenerate the slits from coefficients and driving tables.

    ``order='alternate'`` reverses the slit order on every other step;
    ``order='fixed'`` always runs slit 0 first.
    """
    lam, times, xi = _check_inputs(lam, times, xi_tables)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if order not in ("alternate", "fixed"):
        raise ValueError(f"unknown order {order!r}")
    m = len(lam)
    xi_fun = driving_function(times, xi, interpolation)
    t0, L = times[0], times[-1]
    dt = (L - t0) / steps
    radii_of = [capacity_radius(l * dt) for l in lam]
    bases, radii, owner = [], [], []
    for i in range(steps):
        cur = xi_fun(t0 + i * dt)
        if m > 1:
            gap = min(abs(cur[a] - cur[b]) for a in range(m) for b in range(a + 1, m))
            if gap < COLLISION:
                raise DrivingCollision(f"driving points meet at t={t0 + i * dt:.6g}")
        seq = range(m) if order == "fixed" or i % 2 == 0 else range(m - 1, -1, -1)
        done = set()
        for j in seq:
            b, x = cur[j], radii_of[j]
            bases.append(b)
            radii.append(x)
            owner.append(j)
            done.add(j)
            for r in range(m):
                if r not in done:
                    cur[r] = K.forward_slit_step_boundary(cur[r], b, x)
    bases = np.array(bases)
    radii = np.array(radii)
    owner = np.array(owner)
    tips = K.trace_points(bases, radii)
    start = xi_fun(t0)
    traces = [np.concatenate([[start[k]], tips[owner == k]]) for k in range(m)]
    return TraceResult(traces, bases, radii, owner, steps)


# -- round trip -------------------------------------------------------------------------

@dataclass
class RoundtripBounds:
    hausdorff_factor: float = 3.0
    normalization: float = 5e-6
    derivative_law: float = 1e-6
    xi_jump: float = 0.25
    decrease_floor: float = 1e-9


@dataclass
class RoundtripReport:
    steps: int
    hausdorff: list
    hausdorff_half: list
    scale: list
    normalization_error: float
    derivative_law_error: float
    xi_modulus: float
    xi_jump_flag: bool
    regenerated_lmr: float
    L: float
    order: str
    passed: dict

    @property
    def ok(self):
        return all(self.passed.values())

    def to_dict(self):
        return {
            "steps": self.steps, "order": self.order, "L": self.L,
            "hausdorff": self.hausdorff, "hausdorff_half": self.hausdorff_half,
            "scale": self.scale, "normalization_error": self.normalization_error,
            "derivative_law_error": self.derivative_law_error,
            "xi_modulus": self.xi_modulus, "xi_jump_flag": self.xi_jump_flag,
            "regenerated_lmr": self.regenerated_lmr, "passed": self.passed, "ok": self.ok,
        }


def xi_modulus(xi_tables):
    """Largest jump of the driving tables between consecutive grid times."""
    xi = np.atleast_2d(xi_tables)
    return float(np.max(np.abs(np.diff(xi, axis=1)))) if xi.shape[1] > 1 else 0.0


def roundtrip_report(system: SlitSystem, solution, steps, oracle=None, order="alternate",
                     bounds: RoundtripBounds = RoundtripBounds()) -> RoundtripReport:
    """Regenerate traces from a constant-coefficient solution and compare with the input."""
    lam, times, xi = solution.lam, solution.times, solution.xi_tables
    full = regenerate_traces(lam, times, xi, steps, order)
    half = regenerate_traces(lam, times, xi, max(1, steps // 2), order)
    hd, hh, sc = [], [], []
    for k, slit in enumerate(system.slits):
        hd.append(hausdorff(full.traces[k], slit.points))
        hh.append(hausdorff(half.traces[k], slit.points))
        sc.append(full.scale(k))
    fwd = solve_forward(lam, times, xi, solution.L)
    dle = fwd.derivative_law_error()
    if oracle is not None:
        from .bangbang import normalization_error
        nerr = normalization_error(oracle, solution)
    else:
        nerr = float("nan")
    regen = map_disk_minus_slits(full.traces, resolution=max(512, 2 * steps), record=False).lmr_value
    mod = xi_modulus(xi)
    passed = {
        "hausdorff": all(h <= bounds.hausdorff_factor * s for h, s in zip(hd, sc)),
        "hausdorff_decreases": all(h < g or h < bounds.decrease_floor for h, g in zip(hd, hh)),
        "normalization": bool(nerr <= bounds.normalization) if oracle is not None else True,
        "derivative_law": dle <= bounds.derivative_law,
        "xi_continuity": mod <= bounds.xi_jump,
    }
    return RoundtripReport(steps, hd, hh, sc, nerr, dle, mod, mod > bounds.xi_jump, regen,
                           float(solution.L), order, passed)
