"""Compiled inner loops for the slit maps.

Every elementary step removes a hyperbolic geodesic piece that starts at a
boundary point ``b`` and ends at an interior point ``p``.  The step is the
composition

    z -> e1 (z - p) / (1 - conj(p) z)      (b -> 1, p -> 0)
      -> (z + a) / (1 + a z)               (p -> a = s, slides along the diameter)
      -> F_s                               (removes the radial slit [s, 1))
      -> rot (z - q) / (1 - conj(q) z)     (renormalise: 0 -> 0, derivative > 0)

where ``F_s = K^{-1}(K(z) / (4 K(s)))`` and ``K(z) = z / (1 + z)^2``.
"""
import cmath
import math

import numpy as np
from numba import njit

S_MIN = 0.05


@njit(cache=True)
def koebe(z):
    return z / ((1.0 + z) * (1.0 + z))


@njit(cache=True)
def koebe_inv(w):
    # small-modulus root of w z^2 + (2w - 1) z + w = 0
    return 2.0 * w / (1.0 - 2.0 * w + cmath.sqrt(1.0 - 4.0 * w))


@njit(cache=True)
def koebe_deriv(z):
    return (1.0 - z) / ((1.0 + z) * (1.0 + z) * (1.0 + z))


@njit(cache=True)
def slit_map(z, s):
    """Map of the disk minus the radial slit [s, 1) onto the disk, fixing 0."""
    return koebe_inv(koebe(z) / (4.0 * koebe(s + 0j)))


@njit(cache=True)
def slit_map_boundary(z, s):
    """Same map for a unimodular argument; the side of the cut is sign(Im z)."""
    c = z.real
    if 1.0 + c < 1e-300:
        return -1.0 + 0j
    k = 1.0 / (2.0 * (1.0 + c))
    w = k / (4.0 * s / ((1.0 + s) * (1.0 + s)))
    disc = 4.0 * w - 1.0
    if disc < 0.0:
        # w < 1/4 cannot happen on the circle; guard against rounding
        disc = 0.0
    im = math.sqrt(disc)
    if z.imag < 0.0:
        im = -im
    out = complex((1.0 - 2.0 * w) / (2.0 * w), im / (2.0 * w))
    return out / abs(out)


@njit(cache=True)
def slit_map_deriv(z, s):
    w = slit_map(z, s)
    return koebe_deriv(z) / (4.0 * koebe(s + 0j) * koebe_deriv(w))


@njit(cache=True)
def step_frame(b, p):
    """Automorphism data for the geodesic from boundary point b to p.

    Returns (e1, a, v0, one_minus_v0sq): the rotation of the first Moebius
    map, the slide parameter (= s), the image of the origin before the slit
    map and 1 - |v0|^2 computed without cancellation.
    """
    pc = p.conjugate()
    e1 = (1.0 - pc * b) / (b - p)
    e1 = e1 / abs(e1)
    o = -e1 * p
    om = 1.0 - (p.real * p.real + p.imag * p.imag)
    # hyperbolic foot of o on the real diameter, via the Klein model
    kx = 2.0 * o.real / (1.0 + (o.real * o.real + o.imag * o.imag))
    if kx > 1.0:
        kx = 1.0
    if kx < -1.0:
        kx = -1.0
    r0 = kx / (1.0 + math.sqrt(max(0.0, 1.0 - kx * kx)))
    a = -r0
    if a < S_MIN:
        a = S_MIN
    v0 = (o + a) / (1.0 + a * o)
    den = abs(1.0 + a * o)
    om_v0 = (1.0 - a * a) * om / (den * den)
    return e1, a, v0, om_v0


@njit(cache=True)
def increment(v0, om_v0, s):
    """log of the derivative at 0 of the normalised step with slit [s, 1)."""
    q = slit_map(v0, s)
    dq = slit_map_deriv(v0, s)
    om_q = 1.0 - (q.real * q.real + q.imag * q.imag)
    return math.log(abs(dq)) + math.log(om_v0) - math.log(om_q), q, dq


@njit(cache=True)
def solve_partial(v0, om_v0, s, target):
    """Find s' in [s, 1) whose step increment equals ``target``.

    The increment is strictly decreasing in s' and tends to 0 at s' = 1.
    Bisection on x = 1 - s' down to relative precision 1e-15.
    """
    lo = 0.0
    hi = 1.0 - s
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        inc, _q, _dq = increment(v0, om_v0, 1.0 - mid)
        if inc < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return 1.0 - 0.5 * (lo + hi)


@njit(cache=True)
def apply_interior(pts, start, stop, e1, p, a, s, q, rot):
    pc = p.conjugate()
    qc = q.conjugate()
    for i in range(start, stop):
        z = pts[i]
        u = e1 * (z - p) / (1.0 - pc * z)
        v = (u + a) / (1.0 + a * u)
        w = slit_map(v, s)
        pts[i] = rot * (w - q) / (1.0 - qc * w)


@njit(cache=True)
def apply_boundary(z, e1, p, a, s, q, rot):
    pc = p.conjugate()
    u = e1 * (z - p) / (1.0 - pc * z)
    u = u / abs(u)
    v = (u + a) / (1.0 + a * u)
    v = v / abs(v)
    w = slit_map_boundary(v, s)
    out = rot * (w - q) / (1.0 - q.conjugate() * w)
    return out / abs(out)


@njit(cache=True)
def apply_all(pts, offsets, nexts, mids, tips, k, e1, p, a, s, q, rot):
    """Push every pending point and every other tip through one step.

    Returns the smallest 1 - |z| over pending points of the other slits
    (skipping the remainder of a partially removed piece).
    """
    m = tips.shape[0]
    gap = np.inf
    for j in range(m):
        lo = offsets[j] + nexts[j]
        hi = offsets[j + 1]
        apply_interior(pts, lo, hi, e1, p, a, s, q, rot)
        if j != k:
            tips[j] = apply_boundary(tips[j], e1, p, a, s, q, rot)
            if mids[j]:
                lo += 1
            g = min_gap(pts, lo, hi)
            if g < gap:
                gap = g
    t = rot * (1.0 - q) / (1.0 - q.conjugate())
    tips[k] = t / abs(t)
    return gap


@njit(cache=True)
def step_derivative(e1, p, a, v0, s):
    """q = F_s(v0) and the rotation making the step's derivative at 0 positive."""
    q = slit_map(v0, s)
    dq = slit_map_deriv(v0, s)
    o = -e1 * p
    dphi = e1 * (1.0 - (p.real * p.real + p.imag * p.imag)) * (1.0 - a * a) / ((1.0 + a * o) * (1.0 + a * o))
    d = dq * dphi
    rot = d.conjugate() / abs(d)
    return q, rot


@njit(cache=True)
def min_gap(pts, start, stop):
    """Smallest 1 - |z| over pts[start:stop] (inf for an empty range)."""
    best = np.inf
    for i in range(start, stop):
        g = 1.0 - abs(pts[i])
        if g < best:
            best = g
    return best


@njit(cache=True)
def evaluate_steps(z, e1s, ps, as_, ss, qs, rots):
    out = z.copy()
    n = e1s.shape[0]
    for k in range(n):
        apply_interior(out, 0, out.shape[0], e1s[k], ps[k], as_[k], ss[k], qs[k], rots[k])
    return out


@njit(cache=True)
def inverse_slit_step(z, xi, x):
    """Inverse of the normalised single radial slit map with base xi and tip radius x.

    Maps the disk into the disk minus the segment from xi to x * xi.
    """
    w = z / xi
    return xi * koebe_inv(4.0 * koebe(x + 0j) * koebe(w))


@njit(cache=True)
def forward_slit_step(z, xi, x):
    w = z / xi
    return xi * slit_map(w, x)


@njit(cache=True)
def forward_slit_step_boundary(z, xi, x):
    w = z / xi
    w = w / abs(w)
    return xi * slit_map_boundary(w, x)


@njit(cache=True)
def trace_points(xis, xs):
    """Pull tips back through the accumulated inverse maps.

    ``xis[k]``, ``xs[k]`` describe the k-th elementary radial map in the order
    applied.  For every k the tip ``xs[k] * xis[k]`` is pulled back through
    maps k-1, ..., 0.
    """
    n = xis.shape[0]
    out = np.empty(n, dtype=np.complex128)
    for k in range(n):
        z = xs[k] * xis[k]
        for j in range(k - 1, -1, -1):
            z = inverse_slit_step(z, xis[j], xs[j])
        out[k] = z
    return out
