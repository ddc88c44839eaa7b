"""The lmr function over prefix tuples, partition sums and Lemma-type checks."""
from __future__ import annotations

import logging
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from . import geometry
from .geometry import SlitSystem
from .zipper import ZipperState, single_slit_lmr

log = logging.getLogger(__name__)

KEY_DIGITS = 9


class FloorReached(RuntimeError):
    """No continuity modulus can be certified above the oracle's accuracy floor."""


@dataclass(frozen=True)
class PartitionSums:
    s: tuple            # S_j: slit j advanced first, others frozen at the left end
    s_tilde: tuple      # S~_j: slit j advanced last
    partition: tuple
    t: float

    @property
    def s1(self):
        return self.s[0]

    @property
    def s2(self):
        return self.s[1]

    @property
    def s1_tilde(self):
        return self.s_tilde[0]

    @property
    def s2_tilde(self):
        return self.s_tilde[1]

    @property
    def norm(self):
        return float(np.max(np.diff(self.partition))) if len(self.partition) > 1 else 0.0


def choose_resolution(system: SlitSystem, accuracy=1e-6, start=128, cap=4096):
    """Smallest power of two whose lmr values agree with the doubled resolution.

    Probed at the full system and at two tuples that fall between grid
    points (where the oracle interpolates), in the oracle's canonical order.
    """
    probes = [tuple([1.0] * system.m), tuple([2 ** -0.5] * system.m), tuple([3 ** -0.5] * system.m)]
    scales = [s.length for s in system.slits]

    def values(r):
        out = []
        for f in probes:
            st = ZipperState.from_slits(system.slits, r, scales)
            out.append(_canonical(st, f))
        return np.array(out)

    r = start
    prev = values(r)
    while r < cap:
        cur = values(2 * r)
        if np.max(np.abs(cur - prev)) < accuracy:
            return r
        r *= 2
        prev = cur
    log.warning("resolution cap %d reached before accuracy %g", cap, accuracy)
    return cap


def _canonical(state, fracs):
    """Slit-major evaluation: slits 0..m-2 committed, the last one probed."""
    m = len(fracs)
    for k in range(m - 1):
        state.advance_to_fraction(k, fracs[k])
    return state.advance_to_fraction(m - 1, fracs[m - 1], commit_last=False)


class LmrOracle:
    """Memoising evaluator of prefix tuples -> lmr for one (extended) system.

    Fractions are arclength divided by the *original* slit length, so 1 is
    the original tip; values above 1 reach into the extension.
    """

    def __init__(self, system: SlitSystem, accuracy=1e-6, resolution=None,
                 extend=True, extension_target=None, cache_states=32):
        problems = geometry.validate(system)
        if problems:
            raise geometry.GeometryError("; ".join(problems))
        self.original = system
        self.accuracy = accuracy
        self.resolution = resolution or choose_resolution(system, accuracy)
        self.scales = [s.length for s in system.slits]
        self._values = {}
        self._states = OrderedDict()
        self._cache_states = cache_states
        self.system = system
        self._base = ZipperState.from_slits(system.slits, self.resolution, self.scales)
        self.L = self.lmr_at([1.0] * system.m)
        if extend:
            target = extension_target if extension_target is not None \
                else system.extension_headroom * self.L
            lone = max(64, self.resolution // 2)
            ext = geometry.extend(system, target, lambda pts: single_slit_lmr(pts, lone))
            self._set_system(ext)
            self.L = self.lmr_at([1.0] * system.m)

    def _set_system(self, system):
        self.system = system
        self._base = ZipperState.from_slits(system.slits, self.resolution, self.scales)
        self._values.clear()
        self._states.clear()

    @property
    def m(self):
        return self.original.m

    def max_fraction(self, k):
        return self._base.max_frac(k)

    def new_state(self, record=False):
        st = self._base.copy()
        st.record = record
        return st

    def key(self, fracs):
        return tuple(round(float(f), KEY_DIGITS) + 0.0 for f in fracs)

    def lmr_at(self, fracs):
        fracs = self.key(fracs)
        if len(fracs) != self.m:
            raise ValueError(f"expected {self.m} fractions, got {len(fracs)}")
        for k, f in enumerate(fracs):
            if f < 0 or f > self.max_fraction(k) + 1e-12:
                raise ValueError(f"fraction {f} for slit {k} outside [0, {self.max_fraction(k)}]")
        hit = self._values.get(fracs)
        if hit is not None:
            return hit
        head, last = fracs[:-1], fracs[-1]
        entry = self._states.get(head)
        if entry is None:
            prefix = self._base.copy()
            for k, f in enumerate(head):
                prefix.advance_to_fraction(k, f)
            entry = [prefix, prefix.copy()]
            self._states[head] = entry
            if len(self._states) > self._cache_states:
                self._states.popitem(last=False)
        else:
            self._states.move_to_end(head)
        walker = entry[1]
        if walker.tip_frac[self.m - 1] > last:
            walker = entry[1] = entry[0].copy()
        value = walker.advance_to_fraction(self.m - 1, last, commit_last=False)
        self._values[fracs] = value
        return value

    def __call__(self, *fracs):
        return self.lmr_at(fracs)

    # -- grids and sums ---------------------------------------------------------

    def grid(self, f1s, f2s):
        """lmr over a product grid for a two-slit system (rows: slit 0)."""
        if self.m != 2:
            raise ValueError("grid is defined for two slits")
        out = np.empty((len(f1s), len(f2s)))
        order = np.argsort(f2s)
        for i, a in enumerate(f1s):
            for j in order:
                out[i, j] = self.lmr_at((a, f2s[j]))
        return out

    def sums(self, tables, t, Z) -> PartitionSums:
        """Partition sums for monotone tables a_j (callables of time)."""
        Z = np.asarray(Z, dtype=float)
        if len(Z) < 1 or np.any(np.diff(Z) <= 0):
            raise ValueError("partition must be strictly increasing")
        if abs(Z[0]) > 1e-15 or abs(Z[-1] - t) > 1e-12:
            raise ValueError("partition must run from 0 to t")
        vals = np.array([[tab(z) for tab in tables] for z in Z])
        m = len(tables)
        s = np.zeros(m)
        st = np.zeros(m)
        for l in range(len(Z) - 1):
            lo, hi = vals[l], vals[l + 1]
            base_lo = self.lmr_at(lo)
            base_hi = self.lmr_at(hi)
            for j in range(m):
                fwd = lo.copy()
                fwd[j] = hi[j]
                s[j] += self.lmr_at(fwd) - base_lo
                back = hi.copy()
                back[j] = lo[j]
                st[j] += base_hi - self.lmr_at(back)
        return PartitionSums(tuple(s), tuple(st), tuple(Z), float(t))

    # -- Lemma checks ---------------------------------------------------------------

    def difference_ratios(self, G, max_gap, accuracy=0.0):
        """Extreme ratios over grid quadruples with index gaps <= max_gap.

        With ``accuracy`` > 0 every ratio is widened by its worst-case
        relative error 2*accuracy*(1/|num| + 1/|den|).
        """
        lo, hi = np.inf, -np.inf
        for g1 in range(1, max_gap + 1):
            d = G[g1:, :] - G[:-g1, :]          # slit-0 increments at every tau
            for g2 in range(1, max_gap + 1):
                num, den = d[:, :-g2], d[:, g2:]
                r = num / den
                u = 2.0 * accuracy * (1.0 / np.abs(num) + 1.0 / np.abs(den))
                lo = min(lo, float((r * (1 - u)).min()))
                hi = max(hi, float((r * (1 + u)).max()))
        return lo, hi

    def continuity_modulus(self, epsilon, n=32, max_n=256):
        """Largest sampled delta with all Lemma ratios inside (1-eps, 1+eps).

        Returns (delta, worst_ratio_deviation).  Ratios are widened by the
        oracle accuracy, so a delta is only certified where the grid
        increments resolve the band.  The grid is refined when even
        neighbouring quadruples fail.
        """
        if epsilon <= 0:
            raise ValueError("epsilon must be positive")
        while True:
            f = np.linspace(0.0, 1.0, n + 1)
            G = self.grid(f, f)
            best = None
            for g in range(1, n + 1):
                lo, hi = self.difference_ratios(G, g, self.accuracy)
                if 1 - epsilon < lo and hi < 1 + epsilon:
                    best = (g / n, max(1 - lo, hi - 1))
                else:
                    break
            if best is not None:
                return best
            if 2 * n > max_n:
                raise FloorReached(f"no delta certified for epsilon={epsilon} down to n={n} "
                                   f"at accuracy {self.accuracy:g}")
            n *= 2


def random_quadruples(rng, delta, count):
    """Sample (t_lo, t_hi, tau_lo, tau_hi) in [0,1] with gaps in (0, delta]."""
    out = []
    for _ in range(count):
        d1, d2 = rng.uniform(0.05, 1.0, size=2) * delta
        t = rng.uniform(0, 1 - d1)
        tau = rng.uniform(0, 1 - d2)
        out.append((t, t + d1, tau, tau + d2))
    return out


def lemma_ratio(oracle, quad):
    t_lo, t_hi, tau_lo, tau_hi = quad
    num = oracle.lmr_at((t_lo, tau_lo)) - oracle.lmr_at((t_hi, tau_lo))
    den = oracle.lmr_at((t_lo, tau_hi)) - oracle.lmr_at((t_hi, tau_hi))
    return num / den


def monotone_differences(G):
    """Smallest first difference along each axis of an lmr grid."""
    return float(np.diff(G, axis=0).min()), float(np.diff(G, axis=1).min())


__all__ = ["LmrOracle", "PartitionSums", "FloorReached", "choose_resolution",
           "random_quadruples", "lemma_ratio", "monotone_differences"]
