"""Constant-coefficient parametrisation of disjoint slits by the Bang-Bang scheme.

At level n the time interval [0, L] is cut into n steps.  In every step the
slits advance one after another (slit 0 first), slit j by exactly
``lambda_j * L / n`` of lmr.  The coefficients are tuned until all slits
reach their original tips at the final step simultaneously.  Refining n
converges to the unique constant coefficients.

All advances of one level run on a single incremental zipper state, so the
lmr values seen by the construction are those of the history order; the
oracle's canonical order agrees with it to discretisation accuracy.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .lmr_oracle import LmrOracle
from .zipper import SlitExhausted

log = logging.getLogger(__name__)


class BracketFailure(RuntimeError):
    """A slit ran past its extension: the system needs a larger T*."""


class NonConvergence(RuntimeError):
    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history or []


class _Overshoot(Exception):
    def __init__(self, slit):
        self.slit = slit


@dataclass
class PartitionLevel:
    n: int
    lam: np.ndarray
    t_tables: np.ndarray        # shape (m, n+1): prefix fraction per slit and step
    xi: np.ndarray              # shape (m, n+1): tip images on the diagonal
    increments: np.ndarray      # shape (n, m): lmr gained by each advance
    L: float
    residual: float = float("nan")

    @property
    def times(self):
        return np.linspace(0.0, self.L, self.n + 1)

    @property
    def final(self):
        return self.t_tables[:, -1]


@dataclass
class ConstantCoeffSolution:
    lam: np.ndarray
    L: float
    times: np.ndarray
    u_tables: np.ndarray        # (m, len(times))
    xi_tables: np.ndarray       # (m, len(times)) unimodular
    levels: list = field(default_factory=list)
    converged: bool = False
    stall: bool = False
    schedule: str = "dyadic"

    @property
    def m(self):
        return len(self.lam)

    def u(self, k):
        """Piecewise-linear reparametrisation of slit k as a function of time."""
        times, vals = self.times, self.u_tables[k]
        return lambda t: float(np.interp(t, times, vals))

    def trace(self):
        return [{"n": lv.n, "lambda": [float(x) for x in lv.lam], "residual": float(lv.residual)}
                for lv in self.levels]


def compute_L(oracle: LmrOracle) -> float:
    return oracle.lmr_at([1.0] * oracle.m)


def build_level(oracle: LmrOracle, n: int, lam, stop_on=None, limit=None) -> PartitionLevel:
    """Run the level-n recursion for coefficients ``lam``.

    ``stop_on``: set of slit indices; as soon as one of them passes fraction
    ``limit`` the run aborts with ``_Overshoot`` (used by the lambda search,
    where the sign of t_{n,n} - 1 is all that matters).
    """
    lam = np.asarray(lam, dtype=float)
    m = oracle.m
    if n < 1:
        raise ValueError("n must be >= 1")
    if len(lam) != m or np.any(lam < 0) or abs(lam.sum() - 1.0) > 1e-12:
        raise ValueError(f"lambda must be a probability vector of length {m}, got {lam}")
    L = oracle.L
    st = oracle.new_state()
    tt = np.zeros((m, n + 1))
    xi = np.zeros((m, n + 1), dtype=complex)
    xi[:, 0] = st.tip
    inc = np.zeros((n, m))
    cum = np.concatenate([[0.0], np.cumsum(lam)])
    for k in range(1, n + 1):
        for j in range(m):
            before = st.lmr
            target = L * ((k - 1) + cum[j + 1]) / n
            if j == m - 1:
                target = L * k / n
            try:
                f = st.advance_by_lmr(j, target)
            except SlitExhausted as exc:
                if stop_on is not None and j in stop_on:
                    raise _Overshoot(j) from exc
                raise BracketFailure(
                    f"slit {j} exhausted at level {n} (lambda={lam}); increase extension_headroom"
                ) from exc
            tt[j, k] = f
            inc[k - 1, j] = st.lmr - before
            if stop_on is not None and j in stop_on and f > limit:
                raise _Overshoot(j)
        xi[:, k] = st.tip
    return PartitionLevel(n, lam, tt, xi, inc, L)


def _lam_from_scalar(x):
    return np.array([x, 1.0 - x])


def _sign_two(oracle, n, x, early_exit):
    """+1 when slit 0 overshoots its tip for lambda_0 = x, -1 when it falls short."""
    try:
        lv = build_level(oracle, n, _lam_from_scalar(x),
                         stop_on={0, 1} if early_exit else None, limit=1.0)
    except _Overshoot as o:
        return 1 if o.slit == 0 else -1
    return 1 if lv.final[0] > 1.0 else -1


def solve_lambda(oracle: LmrOracle, n: int, tol=1e-9, early_exit=True, bracket=None,
                 max_sweeps=100):
    """Coefficients for which every slit ends at its original tip at level n."""
    m = oracle.m
    if m == 1:
        return np.array([1.0])
    if m == 2:
        lo, hi = bracket if bracket is not None else (0.0, 1.0)
        if bracket is not None:
            if _sign_two(oracle, n, lo, early_exit) > 0:
                lo = 0.0
            if _sign_two(oracle, n, hi, early_exit) < 0:
                hi = 1.0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if _sign_two(oracle, n, mid, early_exit) > 0:
                hi = mid
            else:
                lo = mid
        return _lam_from_scalar(0.5 * (lo + hi))
    return _solve_many(oracle, n, tol, max_sweeps)


def _rescale(lam, j, x):
    rest = np.delete(lam, j)
    rest = rest / rest.sum() * (1.0 - x)
    return np.insert(rest, j, x)


def _final_fraction(oracle, n, lam, j):
    try:
        lv = build_level(oracle, n, lam, stop_on={j}, limit=1.0)
    except _Overshoot:
        return np.inf
    return lv.final[j]


def _solve_many(oracle, n, tol, max_sweeps):
    """Coordinatewise bisection sweeps for m > 2 slits."""
    m = oracle.m
    lam = np.full(m, 1.0 / m)
    history = []
    for sweep in range(max_sweeps):
        for j in range(m):
            lo, hi = 0.0, 1.0
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                if _final_fraction(oracle, n, _rescale(lam, j, mid), j) > 1.0:
                    hi = mid
                else:
                    lo = mid
            lam = _rescale(lam, j, 0.5 * (lo + hi))
        lv = build_level(oracle, n, lam)
        res = float(np.max(np.abs(lv.final - 1.0)))
        history.append((lam.copy(), res))
        log.debug("sweep %d lambda=%s residual=%.3e", sweep, lam, res)
        if res < 1e-6:
            return lam
    raise NonConvergence(f"coordinatewise sweeps did not converge at level {n}", history)


def level_sizes(schedule, j0, J):
    base = {"dyadic": 2, "triadic": 3}[schedule]
    return [base ** j for j in range(j0, J + 1)]


def construct(oracle: LmrOracle, max_level=6, min_level=None, j0=1, schedule="dyadic",
              lambda_tol=1e-3, table_tol=1e-3, root_tol=1e-9) -> ConstantCoeffSolution:
    """Refine Bang-Bang levels until lambda and the u-tables settle.

    Runs levels base**j for j = j0..max_level, never stopping before
    ``min_level``.  The finest level computed provides the tables.
    """
    min_level = j0 if min_level is None else min_level
    levels = []
    gaps = []
    converged = False
    bracket = None
    for n in level_sizes(schedule, j0, max_level):
        lam = solve_lambda(oracle, n, tol=root_tol, bracket=bracket)
        lv = build_level(oracle, n, lam)
        lv.residual = abs(oracle.lmr_at(np.minimum(lv.final, [oracle.max_fraction(k)
                                                              for k in range(oracle.m)])) - oracle.L)
        if levels:
            prev = levels[-1]
            dl = float(np.max(np.abs(lv.lam - prev.lam)))
            stride = n // prev.n
            du = float(np.max(np.abs(lv.t_tables[:, ::stride] - prev.t_tables)))
            gaps.append(dl)
            log.info("level %d lambda=%s dlambda=%.2e du=%.2e", n, lv.lam, dl, du)
            converged = dl < lambda_tol and du < table_tol
        levels.append(lv)
        if oracle.m == 2 and len(gaps) >= 1:
            g = max(gaps[-1], 1e-4)
            bracket = (max(0.0, lv.lam[0] - 4 * g), min(1.0, lv.lam[0] + 4 * g))
        if converged and int(round(np.log(n) / np.log(2 if schedule == "dyadic" else 3))) >= min_level:
            break
    stall = len(gaps) >= 3 and gaps[-1] > gaps[-2] > gaps[-3]
    fin = levels[-1]
    return ConstantCoeffSolution(
        lam=fin.lam.copy(), L=oracle.L, times=fin.times, u_tables=fin.t_tables.copy(),
        xi_tables=fin.xi.copy(), levels=levels, converged=converged, stall=stall,
        schedule=schedule)


def coefficient_integrals(oracle: LmrOracle, solution: ConstantCoeffSolution, Z):
    """c_j(t) ~ S_j(u, t, Z) at every t in the partition Z (m x len(Z) array)."""
    Z = np.asarray(Z, dtype=float)
    tabs = [solution.u(k) for k in range(solution.m)]
    out = np.zeros((solution.m, len(Z)))
    vals = np.array([[tab(z) for tab in tabs] for z in Z])
    for l in range(len(Z) - 1):
        lo, hi = vals[l], vals[l + 1]
        base = oracle.lmr_at(lo)
        for j in range(solution.m):
            fwd = lo.copy()
            fwd[j] = hi[j]
            out[j, l + 1] = out[j, l] + oracle.lmr_at(fwd) - base
    return out


def normalization_error(oracle: LmrOracle, solution: ConstantCoeffSolution):
    """max over the table grid of |lmr(u_1(t), ..., u_m(t)) - t| via the oracle."""
    errs = [abs(oracle.lmr_at(solution.u_tables[:, i]) - t) for i, t in enumerate(solution.times)]
    return float(max(errs))
