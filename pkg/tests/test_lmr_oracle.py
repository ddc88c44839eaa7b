import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slitloewner import fixtures
from slitloewner.geometry import GeometryError, Slit, SlitSystem
from slitloewner.lmr_oracle import (FloorReached, LmrOracle, choose_resolution, lemma_ratio,
                                    monotone_differences, random_quadruples)


@pytest.fixture(scope="module")
def pair():
    return LmrOracle(fixtures.asymmetric_pair(), resolution=128)


@pytest.fixture(scope="module")
def sym():
    return LmrOracle(fixtures.symmetric_pair(), resolution=128)


def test_origin_value(pair):
    assert pair.lmr_at((0, 0)) == 0.0


def test_single_radial_closed_form():
    o = LmrOracle(fixtures.single_radial(), resolution=128)
    assert o.L == pytest.approx(math.log(2), abs=1e-9)
    assert o(1.0) == o.L


def test_radial_prefix_in_pair_matches_lone_slit(pair):
    # with the other slit empty, a radial prefix [x, 1) gives the closed form
    x = 1 - 0.6 * 0.5
    assert pair.lmr_at((0.5, 0.0)) == pytest.approx(math.log((1 + x) ** 2 / (4 * x)), abs=1e-9)


@given(st.integers(0, 64), st.integers(0, 64), st.integers(1, 16))
@settings(max_examples=30, deadline=None)
def test_strictly_increasing(i, j, d):
    o = LmrOracle(fixtures.asymmetric_pair(), resolution=128)
    a, b = i / 64, j / 64
    base = o.lmr_at((a, b))
    assert o.lmr_at((min(a + d / 64, 1.1), b)) > base
    assert o.lmr_at((a, min(b + d / 64, 1.1))) > base


def test_reproducible_cache(pair):
    keys = [(0.3, 0.7), (0.9, 0.1), (0.3, 0.2), (0.3, 0.7)]
    first = [pair.lmr_at(k) for k in keys]
    fresh = LmrOracle(fixtures.asymmetric_pair(), resolution=128)
    assert [fresh.lmr_at(k) for k in reversed(keys)] == list(reversed(first))


def test_domain_errors(pair):
    with pytest.raises(ValueError):
        pair.lmr_at((0.5,))
    with pytest.raises(ValueError):
        pair.lmr_at((-0.1, 0.5))
    with pytest.raises(ValueError):
        pair.lmr_at((0.1, 50.0))


def test_invalid_system_rejected():
    with pytest.raises(GeometryError):
        LmrOracle(SlitSystem((Slit([0.9, 0.5]),)), resolution=64)


def test_extension_headroom(pair):
    for k in range(2):
        assert pair.max_fraction(k) > 1.0
        lone = [0.0, 0.0]
        lone[k] = pair.max_fraction(k)
        assert pair.lmr_at(lone) >= pair.system.extension_headroom * pair.L * (1 - 1e-6)


def test_choose_resolution_converges():
    r = choose_resolution(fixtures.symmetric_pair(), accuracy=1e-6)
    assert r == 128  # radial slits are exact at every resolution


def test_sums_single_interval(pair):
    tabs = [lambda t: 0.6 * t, lambda t: 0.4 * t]
    s = pair.sums(tabs, 1.0, [0.0, 1.0])
    assert s.s1 == pytest.approx(pair.lmr_at((0.6, 0.0)))
    assert s.s2 == pytest.approx(pair.lmr_at((0.0, 0.4)))
    assert s.norm == 1.0


def test_sums_symmetric(sym):
    tab = lambda t: t
    s = sym.sums([tab, tab], 0.8, np.linspace(0, 0.8, 9))
    # the oracle commits slit 0 before slit 1, which breaks the mirror symmetry
    # at the level of the discretisation only
    assert s.s1 == pytest.approx(s.s2, abs=1e-7)
    assert s.s1_tilde == pytest.approx(s.s2_tilde, abs=1e-7)


@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=6, unique=True),
       st.floats(0.2, 1.0), st.floats(0.2, 1.0))
@settings(max_examples=25, deadline=None)
def test_sums_telescope(cuts, ra, rb):
    o = LmrOracle(fixtures.asymmetric_pair(), resolution=128)
    t = 1.0
    Z = np.unique(np.concatenate([[0.0], np.sort(cuts), [t]]))
    tabs = [lambda s: ra * s, lambda s: rb * s ** 2]
    s = o.sums(tabs, t, Z)
    total = o.lmr_at((ra, rb))
    # the identity holds term by term for any monotone tables
    assert s.s1 + s.s2_tilde == pytest.approx(total, abs=1e-12)
    assert s.s2 + s.s1_tilde == pytest.approx(total, abs=1e-12)
    assert min(s.s) >= 0 and min(s.s_tilde) >= 0


def test_sums_validate_partition(pair):
    tabs = [lambda t: t, lambda t: t]
    with pytest.raises(ValueError):
        pair.sums(tabs, 1.0, [0.0, 0.7, 0.5, 1.0])
    with pytest.raises(ValueError):
        pair.sums(tabs, 1.0, [0.1, 1.0])


def test_grid_monotone(pair):
    f = np.linspace(0, 1, 9)
    d0, d1 = monotone_differences(pair.grid(f, f))
    assert d0 > 0 and d1 > 0


def test_continuity_modulus(pair):
    delta, dev = pair.continuity_modulus(0.25, n=16)
    assert 0 < delta <= 1 and dev < 0.25
    wide, _ = pair.continuity_modulus(1.0, n=16)
    assert wide >= delta
    with pytest.raises(FloorReached):
        pair.continuity_modulus(1e-9, n=8, max_n=16)
    with pytest.raises(ValueError):
        pair.continuity_modulus(0.0)


def test_random_quadruples_respect_delta():
    rng = np.random.default_rng(3)
    for t0, t1, s0, s1 in random_quadruples(rng, 0.1, 100):
        assert 0 <= t0 < t1 <= 1 and 0 <= s0 < s1 <= 1
        assert t1 - t0 <= 0.1 and s1 - s0 <= 0.1


def test_lemma_ratio_positive(pair):
    rng = np.random.default_rng(4)
    for q in random_quadruples(rng, 0.5, 20):
        assert lemma_ratio(pair, q) > 0
