"""Acceptance gates.

Deep-run reference values (frozen from level-14 computations) must be
reproduced or bracketed at the stated tolerances, the property suites must
hold at full size, and the demos must show their qualitative behavior.
"""

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from gasketdensity import (
    Ball,
    BoundedEstimate,
    LatticePoint,
    apply_word,
    assemble_spectrum,
    ball_count,
    measure_interval,
    sandwich_check,
    typical_ball_extremes,
    vertex_extremes,
    zoom_sequence,
)

S = math.log(3.0) / math.log(2.0)
SQRT3 = math.sqrt(3.0)

# Level-14 vertex sweep: (value, lower, upper, witness radius). The printed
# reference bounds are rounded outward (floor below, ceil above) at six
# decimals, so they are matched with floor/ceil rather than half-even
# rounding.
DEEP_MIN = (0.299714, 0.299656, 0.299763, 0.642272)
DEEP_MAX = (0.356687, 0.356645, 0.356756, 0.913663)

# Level-14 typical-ball searches (not desk-scale; frozen reference results
# used as cross-check targets and spectrum inputs).
DEEP_PACKING = BoundedEstimate(
    kind="packing",
    level=14,
    value=1.668305,
    lower=1.667178,
    upper=1.671292,
    witness_radius=0.160543,
    witness_center=(0.5, 0.0),
    lower_certified=False,
    upper_certified=True,
)
DEEP_CENTRED = BoundedEstimate(
    kind="centred",
    level=14,
    value=1.004903,
    lower=1.003109,
    upper=1.005611,
    witness_radius=0.145957,
    witness_center=(5 / 16, SQRT3 / 16.0),
    lower_certified=False,
    upper_certified=False,
)

RUNTIMES = {}


@pytest.fixture(scope="module")
def vertex14(system):
    from gasketdensity import build_index, default_cell_size, generate_support

    t0 = time.monotonic()
    idx = build_index(generate_support(system, 14), default_cell_size(14))
    extremes = vertex_extremes(idx, 14)
    RUNTIMES["vertex14"] = time.monotonic() - t0
    return extremes


@pytest.fixture(scope="module")
def search10(level_index, system):
    idx = level_index(10)
    t0 = time.monotonic()
    packing = typical_ball_extremes(idx, 10, system.open_sets, "min")
    centred = typical_ball_extremes(idx, 10, system.open_sets, "max")
    RUNTIMES["search10"] = time.monotonic() - t0
    return packing, centred


# ----------------------------------------------------------------------
# 1. Deep vertex extremes
# ----------------------------------------------------------------------


def test_deep_vertex_minimum(vertex14):
    lo, _ = vertex14
    value, lower, upper, witness = DEEP_MIN
    assert abs(lo.value - value) <= 1e-6
    assert math.floor(lo.lower * 1e6) == round(lower * 1e6)
    assert math.ceil(lo.upper * 1e6) == round(upper * 1e6)
    assert abs(lo.witness_radius - witness) <= 2.0**-14
    assert lo.certified


def test_deep_vertex_maximum(vertex14):
    _, hi = vertex14
    value, lower, upper, witness = DEEP_MAX
    assert abs(hi.value - value) <= 1e-6
    assert math.floor(hi.lower * 1e6) == round(lower * 1e6)
    assert math.ceil(hi.upper * 1e6) == round(upper * 1e6)
    assert abs(hi.witness_radius - witness) <= 2.0**-14
    assert hi.certified


def test_deep_vertex_runtime(vertex14):
    assert RUNTIMES["vertex14"] <= 600.0


# ----------------------------------------------------------------------
# 2. Certified packing bound constant
# ----------------------------------------------------------------------


def test_packing_upper_bound_constant():
    k14_factor = (1.0 - 2.0**-9 / SQRT3) ** (-S)
    assert abs(k14_factor * 1.668305 - 1.671292) <= 1e-6


# ----------------------------------------------------------------------
# 3. Typical-ball searches at level 10
# ----------------------------------------------------------------------


def test_packing_search_interval_meets_deep_interval(search10):
    packing, _ = search10
    assert packing.lower <= DEEP_PACKING.upper
    assert packing.upper >= DEEP_PACKING.lower
    wx, wy = packing.witness_center
    assert math.hypot(wx - 0.5, wy - 0.0) <= 2.0**-9


def test_centred_search_matches_deep_estimate(search10):
    _, centred = search10
    assert abs(centred.value - DEEP_CENTRED.value) <= 0.01
    wx, wy = centred.witness_center
    assert math.hypot(wx - 5 / 16, wy - SQRT3 / 16.0) <= 2.0**-9


def test_search_runtime(search10):
    assert RUNTIMES["search10"] <= 3600.0


# ----------------------------------------------------------------------
# 4/5. Spectrum assembly from the deep inputs
# ----------------------------------------------------------------------


@pytest.fixture(scope="module")
def deep_spectrum(vertex14):
    def scaled(alpha):
        return assemble_spectrum(vertex14, (DEEP_PACKING, DEEP_CENTRED), alpha)

    return scaled


def test_spectrum_disjoint(deep_spectrum, vertex14):
    report = deep_spectrum(1.0)
    assert report.disjoint
    _, hi = vertex14
    assert hi.upper < 0.3568
    assert 0.5983 < 1.0 / DEEP_PACKING.upper


@pytest.mark.parametrize(
    "alpha,vertex_band,typical_band",
    [
        (1.0, (0.2997, 0.3567), (0.5994, 0.9951)),
        (1.668305, (0.5, 0.5951), (1.0, 1.6602)),
        (1.004903, (0.3012, 0.3584), (0.6023, 1.0)),
    ],
)
def test_spectrum_bands_to_four_decimals(
    deep_spectrum, alpha, vertex_band, typical_band
):
    report = deep_spectrum(alpha)
    (vlo, vhi), (tlo, thi) = report.bands()
    for got, want in zip((vlo, vhi, tlo, thi), (*vertex_band, *typical_band)):
        assert abs(got - want) < 5e-5


# ----------------------------------------------------------------------
# 6. Property suites at full size
# ----------------------------------------------------------------------


def _timed(name):
    RUNTIMES[name] = time.monotonic()

    def stop():
        RUNTIMES[name] = time.monotonic() - RUNTIMES[name]

    return stop


def test_property_mass_normalization(level_measure):
    stop = _timed("mass")
    for k in range(1, 15):
        assert abs(level_measure(k).total - 1.0) <= 1e-12
    stop()


def test_property_atom_counts_vs_word_enumeration(level_measure, system):
    stop = _timed("counts")
    for k in range(1, 9):
        m = level_measure(k)
        assert m.natoms == (3**k + 3) // 2
        corners = ((0.0, 0.0), (1.0, 0.0), (0.5, SQRT3 / 2.0))
        scale = 1 << k
        naive = set()
        for word in itertools.product(range(3), repeat=k - 1):
            for c in corners:
                x, y = apply_word(system, word, c)
                naive.add((round(x * scale), round(y / SQRT3 * scale)))
        assert set(zip(m.p, m.q)) == naive
    stop()


def test_property_exact_scaling(level_index):
    stop = _timed("scaling")
    k = 8
    coarse, fine = level_index(k), level_index(k + 1)
    rng = np.random.default_rng(2026)
    for _ in range(200):
        d = float(rng.uniform(0.0, 1.0))
        r2 = Fraction(d) ** 2
        a = ball_count(coarse, Ball(LatticePoint(0, 0, k), r2, mode="open"))
        b = ball_count(fine, Ball(LatticePoint(0, 0, k + 1), r2 / 4, mode="open"))
        # Equal unit counts mean the masses differ by exactly 1/3: the
        # discrete corner densities agree as exact rationals.
        assert a == b
    stop()


def test_property_sandwich_ten_thousand(level_index, system):
    stop = _timed("sandwich")
    rng = np.random.default_rng(99)
    corners = ((0.0, 0.0), (1.0, 0.0), (0.5, SQRT3 / 2.0))
    for _ in range(10_000):
        k = int(rng.integers(4, 11))
        m = int(rng.integers(2, 11))
        denom = 2 ** int(rng.integers(2, 6))
        cx = int(rng.integers(0, denom + 1)) / denom
        cy = int(rng.integers(0, denom + 1)) / denom * SQRT3 / 2.0
        reach = max(math.hypot(cx - px, cy - py) for px, py in corners)
        d = float(rng.uniform(1.5 * 2.0**-k, min(reach, 1.0)))
        assert sandwich_check(level_index(k), (cx, cy), d, k, m, system)
    stop()


def test_property_oracle_refinement(system):
    stop = _timed("oracle")
    balls = [
        Ball((0.0, 0.0), Fraction(9, 25)),
        Ball((0.5, 0.0), Fraction(1, 30)),
        Ball((0.25, 0.4), Fraction(1, 12)),
        Ball((0.75, 0.2), Fraction(1, 9)),
    ]
    for ball in balls:
        intervals = [measure_interval(system, ball, m) for m in range(1, 13)]
        for prev, cur in zip(intervals, intervals[1:]):
            assert cur.lower >= prev.lower - 1e-12
            assert cur.upper <= prev.upper + 1e-12
        for a in intervals:
            for b in intervals:
                assert a.lower <= b.upper + 1e-12
    stop()


def test_property_ball_mass_brute_force(level_index):
    stop = _timed("ball")
    for k in range(1, 7):
        idx = level_index(k)
        m = idx.measure
        xy = m.xy()
        rng = np.random.default_rng(500 + k)
        for _ in range(1000):
            cx = rng.uniform(-0.2, 1.2)
            cy = rng.uniform(-0.2, 1.0)
            r = rng.uniform(0.005, 0.9)
            mode = "open" if rng.integers(2) else "closed"
            got = ball_count(idx, Ball((cx, cy), r * r, mode=mode))
            d2 = (xy[:, 0] - cx) ** 2 + (xy[:, 1] - cy) ** 2
            inside = d2 < r * r if mode == "open" else d2 <= r * r
            assert got == int(m.counts[inside].sum())
    stop()


def test_property_suites_runtime_budget():
    names = ("mass", "counts", "scaling", "sandwich", "oracle", "ball")
    missing = [n for n in names if n not in RUNTIMES]
    if missing:
        pytest.skip(f"suites not all run: {missing}")
    assert sum(RUNTIMES[n] for n in names) <= 900.0


# ----------------------------------------------------------------------
# 7. Tangent-zoom demo
# ----------------------------------------------------------------------


def test_zoom_self_coded_distances_grow_with_lost_resolution(level_index):
    k, d = 12, 0.6
    key = round(d * d * 4**k)
    target = Ball(LatticePoint(0, 0, k), Fraction(key, 4**k))
    steps = zoom_sequence(level_index(k), target, [0] * 6, 6)
    dists = [s.distance for s in steps]
    assert dists[0] == pytest.approx(0.0, abs=1e-12)
    assert all(a <= b + 1e-12 for a, b in zip(dists, dists[1:]))


def test_zoom_random_code_running_minimum_improves(level_index):
    k, d = 12, 0.16
    key = round(d * d * 4**k)
    target = Ball(LatticePoint(1 << (k - 1), 0, k), Fraction(key, 4**k))
    code = [int(t) for t in np.random.default_rng(0).integers(0, 3, size=6)]
    steps = zoom_sequence(level_index(k), target, code, 6)
    dists = [s.distance for s in steps]
    assert min(dists[2:]) < dists[1]
