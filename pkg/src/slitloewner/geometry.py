"""Slits as polylines in the unit disk, and systems of disjoint slits."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

BOUNDARY_TOL = 1e-12
DISJOINT_TOL = 1e-12


class GeometryError(ValueError):
    """Raised when a slit system cannot be built or extended."""

    def __init__(self, message, feature=None):
        super().__init__(message)
        self.feature = feature


@dataclass(frozen=True)
class Slit:
    points: tuple

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(complex(p) for p in self.points))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=complex)

    @property
    def base(self) -> complex:
        return self.points[0]

    @property
    def tip(self) -> complex:
        return self.points[-1]

    def cumulative_length(self) -> np.ndarray:
        a = self.array
        return np.concatenate([[0.0], np.cumsum(np.abs(np.diff(a)))])

    @property
    def length(self) -> float:
        return float(self.cumulative_length()[-1])


@dataclass(frozen=True)
class SlitSystem:
    slits: tuple
    extension_headroom: float = 1.5

    def __post_init__(self):
        object.__setattr__(self, "slits", tuple(
            s if isinstance(s, Slit) else Slit(s) for s in self.slits))

    @property
    def m(self) -> int:
        return len(self.slits)


@dataclass(frozen=True)
class SlitPrefix:
    slit_index: int
    fraction: float


# -- validation ---------------------------------------------------------------

def _point_segment_distance(z, a, b):
    d = b - a
    dd = abs(d) ** 2
    if dd == 0.0:
        return abs(z - a)
    t = ((z - a) * d.conjugate()).real / dd
    t = min(1.0, max(0.0, t))
    return abs(z - (a + t * d))


def _point_segments(z, a, b):
    """Distances from points z (shape (n,1)) to segments [a, b] (shape (1,k))."""
    d = b - a
    dd = np.abs(d) ** 2
    t = np.where(dd > 0, ((z - a) * d.conj()).real / np.where(dd > 0, dd, 1.0), 0.0)
    return np.abs(z - (a + np.clip(t, 0.0, 1.0) * d))


def segment_distances(p1, p2, q1, q2):
    """Pairwise distances between segment arrays [p1, p2] (rows) and [q1, q2] (columns)."""
    p1, p2 = np.asarray(p1, complex)[:, None], np.asarray(p2, complex)[:, None]
    q1, q2 = np.asarray(q1, complex)[None, :], np.asarray(q2, complex)[None, :]
    d1, d2 = p2 - p1, q2 - q1
    cross = (d1.conj() * d2).imag
    r = q1 - p1
    safe = np.where(cross != 0, cross, 1.0)
    t = (r.conj() * d2).imag / safe
    u = (r.conj() * d1).imag / safe
    hit = (cross != 0) & (t >= 0) & (t <= 1) & (u >= 0) & (u <= 1)
    out = np.minimum(np.minimum(_point_segments(p1, q1, q2), _point_segments(p2, q1, q2)),
                     np.minimum(_point_segments(q1, p1, p2), _point_segments(q2, p1, p2)))
    return np.where(hit, 0.0, out)


def _segments(pts):
    a = np.asarray(pts, complex)
    if len(a) == 1:
        return a, a
    return a[:-1], a[1:]


def polyline_distance(a, b, block=512) -> float:
    """Euclidean distance between two polylines (sequences of complex points)."""
    p1, p2 = _segments(list(a))
    q1, q2 = _segments(list(b))
    best = np.inf
    for i in range(0, len(p1), block):
        best = min(best, float(segment_distances(p1[i:i + block], p2[i:i + block], q1, q2).min()))
    return best


def slit_violations(slit: Slit, label="slit") -> list:
    pts = slit.points
    out = []
    if len(pts) < 2:
        out.append(f"{label}: needs at least 2 points")
        return out
    if not all(math.isfinite(p.real) and math.isfinite(p.imag) for p in pts):
        out.append(f"{label}: non-finite coordinate")
        return out
    if abs(abs(pts[0]) - 1.0) > BOUNDARY_TOL:
        out.append(f"{label}: base point not on the unit circle (|z|={abs(pts[0]):.12g})")
    for j, p in enumerate(pts[1:], start=1):
        r = abs(p)
        if not (0.0 < r < 1.0):
            out.append(f"{label}: point {j} not strictly inside the punctured disk (|z|={r:.12g})")
    if any(_point_segment_distance(0j, a, b) <= DISJOINT_TOL for a, b in zip(pts[:-1], pts[1:])):
        out.append(f"{label}: passes through the origin")
    for j in range(len(pts) - 1):
        if pts[j] == pts[j + 1]:
            out.append(f"{label}: repeated point {j}")
    a, b = _segments(list(pts))
    for i in range(0, len(a), 512):
        d = segment_distances(a[i:i + 512], b[i:i + 512], a, b)
        rows, cols = np.nonzero(d <= DISJOINT_TOL)
        for r, c in zip(rows + i, cols):
            if c >= r + 2:
                out.append(f"{label}: self-intersection between segments {r} and {c}")
    return out


def validate(system: SlitSystem) -> list:
    """Violated invariants of ``system``; an empty list means admissible."""
    out = []
    if system.m < 1:
        out.append("system: needs at least one slit")
    if not (system.extension_headroom > 0):
        out.append("system: extension_headroom must be positive")
    for k, s in enumerate(system.slits):
        out.extend(slit_violations(s, f"slit {k}"))
    for i in range(system.m):
        for j in range(i + 1, system.m):
            si, sj = system.slits[i], system.slits[j]
            if abs(si.base - sj.base) <= DISJOINT_TOL:
                out.append(f"slits {i},{j}: share a base point")
            elif polyline_distance(si.points, sj.points) <= DISJOINT_TOL:
                out.append(f"slits {i},{j}: not disjoint")
    return out


# -- arclength ----------------------------------------------------------------

def point_at(slit: Slit, fraction: float, scale: float | None = None) -> complex:
    """Point at arclength ``fraction * scale`` (scale defaults to the slit length)."""
    cum = slit.cumulative_length()
    target = fraction * (cum[-1] if scale is None else scale)
    j = int(np.searchsorted(cum, target, side="right")) - 1
    j = min(max(j, 0), len(cum) - 2)
    seg = cum[j + 1] - cum[j]
    t = 0.0 if seg == 0 else (target - cum[j]) / seg
    a, b = slit.points[j], slit.points[j + 1]
    return a + min(max(t, 0.0), 1.0) * (b - a)


def prefix_points(slit: Slit, fraction: float) -> Slit:
    """Sub-polyline covering the first ``fraction`` of the arclength."""
    if not (0.0 <= fraction <= 1.0):
        raise ValueError(f"fraction must lie in [0, 1], got {fraction}")
    if fraction == 1.0:
        return slit
    cum = slit.cumulative_length()
    target = fraction * cum[-1]
    keep = [p for p, c in zip(slit.points, cum) if c < target]
    end = point_at(slit, fraction)
    if not keep:
        keep = [slit.points[0]]
    if end != keep[-1]:
        keep.append(end)
    if len(keep) == 1:
        keep.append(keep[0])
    return Slit(keep)


def arclength_grid(slit: Slit, resolution: int, scale: float, vertex_merge=0.1):
    """Unzip grid along ``slit``: uniform points plus all vertices.

    Returns (points, fractions) excluding the base point; fractions are
    arclength divided by ``scale`` (the length of the original slit, so that
    fraction 1 is the original tip even when ``slit`` is extended).
    """
    cum = slit.cumulative_length()
    total = cum[-1]
    h = scale / resolution
    uniform = np.arange(1, int(math.floor(total / h + 1e-9)) + 1) * h
    verts = cum[1:]
    if len(uniform):
        near = np.min(np.abs(uniform[:, None] - verts[None, :]), axis=1) < vertex_merge * h
        uniform = uniform[~near]
    arcs = np.unique(np.concatenate([uniform, verts]))
    arcs = arcs[arcs > 0]
    P = slit.array
    j = np.clip(np.searchsorted(cum, arcs, side="right") - 1, 0, len(cum) - 2)
    seg = cum[j + 1] - cum[j]
    t = np.where(seg > 0, (arcs - cum[j]) / np.where(seg > 0, seg, 1.0), 0.0)
    pts = P[j] + np.clip(t, 0.0, 1.0) * (P[j + 1] - P[j])
    # vertices exactly, not re-interpolated
    vi = np.searchsorted(arcs, verts)
    pts[vi] = P[1:]
    return pts, arcs / scale


# -- extension -----------------------------------------------------------------

def _extension_step(slits, k, step, max_turn, r_min):
    """Next point for slit k: bend toward the origin, spiral once close to it."""
    pts = slits[k]
    tip = pts[-1]
    d = tip - pts[-2]
    heading = math.atan2(d.imag, d.real)
    if abs(tip) > r_min + step:
        want = math.atan2(-tip.imag, -tip.real)
    else:
        # circle the origin, keeping the current sense of rotation
        sense = 1.0 if (tip.conjugate() * d).imag >= 0 else -1.0
        want = math.atan2(tip.imag, tip.real) + sense * math.pi / 2
    turn = (want - heading + math.pi) % (2 * math.pi) - math.pi
    turn = max(-max_turn, min(max_turn, turn))
    for extra in (0.0, max_turn, -max_turn, 2 * max_turn, -2 * max_turn, 3 * max_turn, -3 * max_turn):
        ang = heading + turn + extra
        cand = tip + step * complex(math.cos(ang), math.sin(ang))
        r = abs(cand)
        if not (0.0 < r < 1.0 - step):
            continue
        if _point_segment_distance(0j, tip, cand) < min(r_min, step):
            continue
        ok = True
        for j, other in enumerate(slits):
            body = other if j != k else _drop_tail(other, 1.5 * step)
            if len(body) >= 2 and polyline_distance([tip, cand], body) < step:
                ok = False
                break
            if len(body) == 1 and abs(body[0] - cand) < step:
                ok = False
                break
        if ok:
            return cand
    return None


def _drop_tail(pts, arclength):
    """Points of a polyline farther than ``arclength`` (along the curve) from its end."""
    d = np.cumsum(np.abs(np.diff(np.asarray(pts[::-1], complex))))
    keep = len(pts) - 1 - int(np.searchsorted(d, arclength, side="right"))
    return pts[:max(keep, 0)]


def extend(system: SlitSystem, target_lmr: float, lmr_alone, step=None, max_points=4000) -> SlitSystem:
    """Prolong every slit until its lone lmr reaches ``target_lmr``.

    ``lmr_alone(points)`` returns the lmr of the disk minus a single polyline.
    Slits are continued along their final direction, turning when the
    straight continuation would leave the punctured disk or approach another
    slit.  Original points stay a prefix of the result.
    """
    slits = [list(s.points) for s in system.slits]
    for k in range(system.m):
        if lmr_alone(slits[k]) >= target_lmr:
            continue
        h = step if step is not None else max(1e-3, system.slits[k].length / 16)
        n = 0
        while True:
            cand = _extension_step(slits, k, h, math.pi / 12, r_min=4 * h)
            if cand is None:
                raise GeometryError(
                    f"slit {k}: extension blocked near {slits[k][-1]:.6g}",
                    feature=_obstruction(slits, k, h))
            slits[k].append(cand)
            n += 1
            if lmr_alone(slits[k]) >= target_lmr:
                _trim_last(slits[k], target_lmr, lmr_alone)
                break
            if n > max_points:
                raise GeometryError(f"slit {k}: extension did not reach lmr {target_lmr}",
                                    feature="length")
    return SlitSystem(tuple(Slit(s) for s in slits), system.extension_headroom)


def _trim_last(pts, target_lmr, lmr_alone, iters=60):
    """Pull the last point back along its segment so the lone lmr hits the target."""
    a, b = pts[-2], pts[-1]
    lo, hi = 0.0, 1.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        pts[-1] = a + mid * (b - a)
        if lmr_alone(pts) >= target_lmr:
            hi = mid
        else:
            lo = mid
    pts[-1] = a + hi * (b - a)


def _obstruction(slits, k, h):
    tip = slits[k][-1]
    if abs(tip) < 4 * h:
        return "origin"
    if 1 - abs(tip) < 2 * h:
        return "boundary"
    return "slit"


# -- serialisation ---------------------------------------------------------------

def to_dict(system: SlitSystem) -> dict:
    return {"slits": [[[p.real, p.imag] for p in s.points] for s in system.slits],
            "extension_headroom": system.extension_headroom}


def from_dict(data: dict) -> SlitSystem:
    slits = []
    for s in data["slits"]:
        pts = [complex(float(re), float(im)) for re, im in s]
        if not all(math.isfinite(p.real) and math.isfinite(p.imag) for p in pts):
            raise GeometryError("non-finite coordinate in input")
        slits.append(Slit(pts))
    return SlitSystem(tuple(slits), float(data.get("extension_headroom", 1.5)))


def dumps(system: SlitSystem) -> str:
    return json.dumps(to_dict(system), allow_nan=False)


def loads(text: str) -> SlitSystem:
    return from_dict(json.loads(text))


# -- distances between curves -----------------------------------------------------

def densify(pts, spacing):
    """Polyline resampled so that consecutive points are at most ``spacing`` apart."""
    a = np.asarray(pts, complex)
    if len(a) < 2:
        return a.copy()
    out = [a[:1]]
    for p, q in zip(a[:-1], a[1:]):
        k = max(1, int(math.ceil(abs(q - p) / spacing)))
        out.append(p + (q - p) * np.arange(1, k + 1) / k)
    return np.concatenate(out)


def directed_distance(a, b, spacing, block=2048):
    """sup over the polyline a of the distance to the polyline b (a sampled densely)."""
    z = densify(a, spacing)
    q1, q2 = _segments(list(b))
    best = 0.0
    for i in range(0, len(z), block):
        d = _point_segments(z[i:i + block, None], q1[None, :], q2[None, :]).min(axis=1)
        best = max(best, float(d.max()))
    return best


def hausdorff(a, b, spacing=None):
    """Hausdorff distance between two polylines, sampled at ``spacing``."""
    if spacing is None:
        lengths = [Slit(list(a)).length, Slit(list(b)).length]
        spacing = max(min(lengths), 1e-12) / 2000
    return max(directed_distance(a, b, spacing), directed_distance(b, a, spacing))
