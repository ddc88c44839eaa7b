"""Built-in slit systems used by tests, scripts and the command line."""
import math

import numpy as np

from .geometry import Slit, SlitSystem

RADIAL_TIP = 3.0 - 2.0 * math.sqrt(2.0)     # lone lmr log 2


def single_radial(x=RADIAL_TIP):
    return SlitSystem((Slit([1.0, x]),))


def symmetric_pair(x=0.5):
    """Radial slits on the real axis, [x, 1) and (-1, -x]."""
    return SlitSystem((Slit([1.0, x]), Slit([-1.0, -x])))


def asymmetric_pair():
    return SlitSystem((Slit([1.0, 0.4]), Slit([1j, 0.6j])))


def curved_pair(n=12):
    t = np.linspace(0.0, 1.0, n)
    arc = [complex(1 - 0.6 * s, 0.3 * math.sin(math.pi * s)) for s in t]
    arc[0] = 1.0 + 0j
    b = complex(-0.2, -0.98)
    b /= abs(b)
    return SlitSystem((Slit(arc), Slit([b, -0.15 - 0.6j, -0.3 - 0.4j])))


FIXTURES = {
    "single": single_radial,
    "symmetric": symmetric_pair,
    "asymmetric": asymmetric_pair,
    "curved": curved_pair,
}


def get(name):
    try:
        return FIXTURES[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None


def synthetic_driving(L=0.6, n=64):
    """Smooth driving tables for the synthetic inverse problem.

    Two driving points start at 1 and -1 and drift slowly in opposite
    senses.
    """
    times = np.linspace(0.0, L, n + 1)
    s = times / L
    a0 = 0.4 * s + 0.15 * np.sin(math.pi * s)
    a1 = math.pi - 0.3 * s + 0.1 * np.sin(2 * math.pi * s)
    return times, np.exp(1j * np.vstack([a0, a1]))


SYNTHETIC_LAMBDA = (0.7, 0.3)
