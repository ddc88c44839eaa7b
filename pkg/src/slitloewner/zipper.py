"""Geodesic-zipper conformal maps of the disk minus partial slits.

The map is a composition of elementary steps, each removing one hyperbolic
geodesic piece from the current tip image of a slit to the image of its next
grid point (see ``_kernels``).  After every step the map is renormalised so
that 0 stays fixed with positive derivative, which makes the log-derivative
at 0 an exact running sum of step increments.

Between two grid points of a slit the lmr is interpolated by a quadratic in
the arclength fraction, fitted through the current tip, the next grid point
and (via a geodesic skipping one point) the grid point after it.  A partial
advance removes the sub-arc of the next geodesic piece that carries the
interpolated gain.  The quadratic is frozen when a cell is first entered,
and consecutive sub-arcs of one geodesic compose to the whole piece, so
partial advances do not change the discrete curve.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .geometry import Slit, arclength_grid, polyline_distance

CONFLICT_TOL = 1e-9
THETA_EPS = 1e-9


class GeometricConflict(RuntimeError):
    """A pending slit point reached the boundary: the prefixes touch."""


class UnsupportedConnectivity(ValueError):
    pass


class KernelPole(ZeroDivisionError):
    pass


class SlitExhausted(RuntimeError):
    """A slit ran out of grid points before a target was reached."""

    def __init__(self, slit_index, message=None):
        super().__init__(message or f"slit {slit_index} exhausted; extend the system further")
        self.slit_index = slit_index


@dataclass(frozen=True)
class KernelSpec:
    connectivity: int = 0
    description: str = "unit disk"


def kernel(u, w, spec: KernelSpec = KernelSpec()):
    """Herglotz kernel (u + w) / (u - w) of the radial equation in the disk."""
    if spec.connectivity != 0:
        raise UnsupportedConnectivity(
            f"kernel only available for the disk (N=0), got N={spec.connectivity}")
    u = complex(u)
    w = complex(w)
    if w == 0:
        return 1.0 + 0j
    if u == w:
        raise KernelPole(f"kernel pole at w = u = {u}")
    return (u + w) / (u - w)


@dataclass(frozen=True)
class StepRecord:
    slit: int
    e1: complex
    p: complex
    a: float
    s: float
    q: complex
    rot: complex
    increment: float


class ZipperState:
    """Mutable unzipping state over a fixed set of slit grids.

    ``grids[k]`` are the grid points of slit k (original coordinates,
    excluding the base) and ``fracs[k]`` their arclength fractions.
    """

    def __init__(self, bases, grids, fracs, record=False):
        self.m = len(grids)
        self.fracs = [np.asarray(f, dtype=float) for f in fracs]
        self.sizes = [len(g) for g in grids]
        self.offsets = np.concatenate([[0], np.cumsum(self.sizes)]).astype(np.int64)
        self.pts = np.concatenate([np.asarray(g, dtype=complex) for g in grids]) \
            if self.m else np.empty(0, complex)
        self._nexts = np.zeros(self.m, dtype=np.int64)
        self.tip = np.array([complex(b) / abs(b) for b in bases], dtype=complex)
        self.tip_frac = [0.0] * self.m
        self._mids = np.zeros(self.m, dtype=np.bool_)
        self._cells = [None] * self.m
        self.lmr = 0.0
        self.nsteps = 0
        self.record = record
        self.steps = []
        self._probe = None

    @classmethod
    def from_slits(cls, slits, resolution, scales=None, record=False):
        scales = scales or [s.length for s in slits]
        grids, fracs = [], []
        for s, sc in zip(slits, scales):
            g, f = arclength_grid(s, resolution, sc)
            grids.append(g)
            fracs.append(f)
        return cls([s.base for s in slits], grids, fracs, record=record)

    def copy(self):
        new = object.__new__(ZipperState)
        new.__dict__.update(self.__dict__)
        new.pts = self.pts.copy()
        new._nexts = self._nexts.copy()
        new.tip = self.tip.copy()
        new.tip_frac = list(self.tip_frac)
        new._mids = self._mids.copy()
        new._cells = list(self._cells)
        new.steps = list(self.steps)
        new._probe = None
        return new

    # -- queries ---------------------------------------------------------------

    def has_next(self, k):
        return self._nexts[k] < self.sizes[k]

    def next_frac(self, k):
        return self.fracs[k][self._nexts[k]]

    def max_frac(self, k):
        return self.fracs[k][-1] if self.sizes[k] else 0.0

    def _frame(self, k):
        if self._probe is not None and self._probe[0] == k and self._probe[1] == self.nsteps:
            return self._probe[2]
        if not self.has_next(k):
            raise SlitExhausted(k)
        b = self.tip[k]
        p = self.pts[self.offsets[k] + self._nexts[k]]
        e1, a, v0, om_v0 = K.step_frame(b, p)
        inc, q, dq = K.increment(v0, om_v0, a)
        frame = (p, e1, a, v0, om_v0, inc)
        self._probe = (k, self.nsteps, frame)
        return frame

    def probe(self, k):
        """lmr increment of removing the whole next geodesic piece of slit k."""
        return self._frame(k)[5]

    # -- commits ---------------------------------------------------------------

    def _apply(self, k, p, e1, a, s, v0, om_v0, inc):
        q, rot = K.step_derivative(e1, p, a, v0, s)
        gap = K.apply_all(self.pts, self.offsets, self._nexts, self._mids, self.tip,
                          k, e1, p, a, s, q, rot)
        self.lmr += inc
        self.nsteps += 1
        self._probe = None
        if self.record:
            self.steps.append(StepRecord(k, e1, p, a, s, q, rot, inc))
        if gap < CONFLICT_TOL:
            raise GeometricConflict(f"slit {k} touches another slit (gap {gap:.3e})")

    def _cell_start(self, k):
        i = self._nexts[k]
        return self.fracs[k][i - 1] if i > 0 else 0.0

    def _shape(self, k):
        """(x0, w, I, c): lmr gain over the cell is P(x) = I x / w + c x (x - w).

        Frozen once the cell has been entered by a partial advance.
        """
        if self._mids[k]:
            return self._cells[k]
        inc = self.probe(k)
        i = self._nexts[k]
        x0 = self._cell_start(k)
        w = self.fracs[k][i] - x0
        c = 0.0
        if i + 1 < self.sizes[k]:
            p2 = self.pts[self.offsets[k] + i + 1]
            _e1, _a, v0, om = K.step_frame(self.tip[k], p2)
            J = K.increment(v0, om, _a)[0]
            W = self.fracs[k][i + 1] - x0
            c = (J - inc * W / w) / (W * (W - w))
            # keep P increasing on the cell
            cap = 0.9 * inc / (w * w)
            c = min(cap, max(-cap, c))
        return (x0, w, inc, c)

    @staticmethod
    def _P(shape, x):
        _x0, w, inc, c = shape
        return inc * x / w + c * x * (x - w)

    def commit(self, k):
        """Remove the whole next geodesic piece of slit k."""
        p, e1, a, v0, om_v0, inc = self._frame(k)
        self._check_origin(e1, p, a, v0)
        self.pts[self.offsets[k] + self._nexts[k]] = np.nan  # consumed
        self._nexts[k] += 1
        self._apply(k, p, e1, a, a, v0, om_v0, inc)
        self.tip_frac[k] = self.fracs[k][self._nexts[k] - 1]
        self._mids[k] = False
        self._cells[k] = None

    def commit_partial(self, k, theta, new_frac):
        """Remove the initial sub-arc carrying ``theta`` of the next increment."""
        # sub-arcs this close to either end are numerically degenerate
        if theta <= THETA_EPS:
            return
        if theta >= 1.0 - THETA_EPS:
            self.commit(k)
            return
        shape = self._shape(k)
        p, e1, a, v0, om_v0, inc = self._frame(k)
        self._check_origin(e1, p, a, v0)
        s = K.solve_partial(v0, om_v0, a, theta * inc)
        sub_inc, _q, _dq = K.increment(v0, om_v0, s)
        self._mids[k] = True
        self._cells[k] = shape
        self._apply(k, p, e1, a, s, v0, om_v0, sub_inc)
        self.tip_frac[k] = new_frac

    def _gain_fraction(self, k, f):
        """Share of the remaining piece's increment needed to reach fraction f."""
        shape = self._shape(k)
        x0 = shape[0]
        x1 = self.tip_frac[k] - x0
        P1 = self._P(shape, x1)
        return (self._P(shape, f - x0) - P1) / (shape[2] - P1)

    # -- compound moves -------------------------------------------------------------

    def advance_to_fraction(self, k, f, commit_last=True):
        """Advance slit k to fraction f; return the resulting lmr.

        With ``commit_last=False`` the final partial piece is only probed, so
        the state stays at the last grid point below ``f``.
        """
        if f < self.tip_frac[k] - 1e-15:
            raise ValueError(f"slit {k} is already at {self.tip_frac[k]} > {f}")
        while self.has_next(k) and self.next_frac(k) <= f:
            self.commit(k)
        if f <= self.tip_frac[k]:
            return self.lmr
        if not self.has_next(k):
            raise SlitExhausted(k)
        theta = self._gain_fraction(k, f)
        if commit_last:
            self.commit_partial(k, theta, f)
            return self.lmr
        return self.lmr + theta * self.probe(k)

    def advance_by_lmr(self, k, target):
        """Advance slit k until the total lmr equals ``target``; return its fraction."""
        while True:
            if self.lmr >= target:
                return self.tip_frac[k]
            inc = self.probe(k)
            if self.lmr + inc <= target:
                self.commit(k)
                continue
            theta = (target - self.lmr) / inc
            shape = self._shape(k)
            x0, w, I, c = shape
            P1 = self._P(shape, self.tip_frac[k] - x0)
            T = P1 + theta * (I - P1)
            b = I / w - c * w
            x = 2.0 * T / (b + math.sqrt(max(0.0, b * b + 4.0 * c * T)))
            self.commit_partial(k, theta, x0 + min(max(x, 0.0), w))
            return self.tip_frac[k]

    @staticmethod
    def _check_origin(e1, p, a, v0):
        if abs(v0.imag) < 1e-12 and v0.real >= a:
            raise GeometricConflict("slit passes through the origin")

    # -- evaluation --------------------------------------------------------------

    def evaluate(self, z):
        if not self.record:
            raise RuntimeError("state was built without step recording")
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if not self.steps:
            return z.copy()
        arr = np.array([(r.e1, r.p, r.a, r.s, r.q, r.rot) for r in self.steps], dtype=complex)
        return K.evaluate_steps(z, arr[:, 0], arr[:, 1], arr[:, 2].real.copy(),
                                arr[:, 3].real.copy(), arr[:, 4], arr[:, 5])


@dataclass(frozen=True)
class MappingResult:
    lmr_value: float
    tip_images: tuple
    resolution: int
    accuracy_warning: bool
    _state: ZipperState = field(repr=False, compare=False)

    def evaluate(self, z):
        out = self._state.evaluate(z)
        return out if np.ndim(z) else complex(out[0])

    @property
    def steps(self):
        return self._state.steps

    def dump_steps(self, path):
        """CSV of unzip steps: index, slit, map parameters, running lmr."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "slit", "p_re", "p_im", "a", "s", "q_re", "q_im", "increment", "lmr"])
            run = 0.0
            for i, r in enumerate(self._state.steps):
                run += r.increment
                w.writerow([i, r.slit, repr(r.p.real), repr(r.p.imag), repr(r.a), repr(r.s),
                            repr(r.q.real), repr(r.q.imag), repr(r.increment), repr(run)])


def map_disk_minus_slits(prefixes, resolution=2000, record=True) -> MappingResult:
    """Normalised map of the disk minus the given polylines onto the disk.

    ``prefixes`` is a list of point sequences starting on the unit circle;
    a sequence of length < 2 (or all points equal) is an empty prefix whose
    base is still tracked as the driving point.  Slits are unzipped
    interleaved by arclength fraction.
    """
    slits = []
    for pre in prefixes:
        pts = [complex(p) for p in pre]
        slits.append(pts)
    bases = [p[0] for p in slits]
    for i in range(len(slits)):
        for j in range(i + 1, len(slits)):
            d = polyline_distance(_dedupe(slits[i]), _dedupe(slits[j]))
            if d < CONFLICT_TOL:
                raise GeometricConflict(f"prefixes {i} and {j} touch (distance {d:.3e})")
    grids, fracs = [], []
    npoints = 0
    for pts in slits:
        pts = _dedupe(pts)
        npoints += len(pts)
        if len(pts) < 2:
            grids.append(np.empty(0, complex))
            fracs.append(np.empty(0))
            continue
        s = Slit(pts)
        g, f = arclength_grid(s, resolution, s.length)
        grids.append(g)
        fracs.append(f)
    state = ZipperState(bases, grids, fracs, record=record)
    order = sorted(((f, k, i) for k, fr in enumerate(fracs) for i, f in enumerate(fr)))
    for _f, k, _i in order:
        state.commit(k)
    warn = resolution < npoints
    return MappingResult(state.lmr, tuple(complex(t) for t in state.tip), state.nsteps, warn, state)


def _dedupe(pts):
    out = [pts[0]]
    for p in pts[1:]:
        if p != out[-1]:
            out.append(p)
    return out


def single_slit_lmr(points, resolution=512):
    """lmr of the disk minus one polyline (used for extension targets)."""
    return map_disk_minus_slits([points], resolution, record=False).lmr_value


def radial_slit_lmr(x):
    """Closed form: lmr of the disk minus [x, 1)."""
    return math.log((1.0 + x) ** 2 / (4.0 * x))
