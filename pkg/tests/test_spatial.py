"""Grid index, exact ball masses, and candidate radii."""

import math
from fractions import Fraction

import numpy as np
import pytest

from gasketdensity import (
    Ball,
    DomainError,
    LatticePoint,
    ball_count,
    ball_mass,
    build_index,
    candidate_radii,
    default_cell_size,
)
from gasketdensity.lattice import DiscreteMeasure

SQRT3 = math.sqrt(3.0)


def z0(k):
    return LatticePoint(0, 0, k)


def test_ball_validation():
    with pytest.raises(DomainError):
        Ball((0.0, 0.0), 1.0, mode="half")
    with pytest.raises(DomainError):
        Ball((0.0, 0.0), -1.0)
    b = Ball(LatticePoint(1, 1, 1), Fraction(1, 4), mode="open")
    assert b.is_open
    assert b.radius == pytest.approx(0.5)
    assert b.center_xy == pytest.approx((0.5, SQRT3 / 2.0))


def test_build_index_validation(level_measure):
    with pytest.raises(DomainError):
        build_index(level_measure(1), 0.0)
    empty = DiscreteMeasure(
        1, np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0, np.int64)
    )
    with pytest.raises(DomainError):
        build_index(empty, 0.5)


def test_index_covers_all_atoms(level_index):
    idx = level_index(2)
    indexed = np.concatenate(list(idx.buckets.values()))
    assert sorted(indexed) == list(range(6))
    assert idx.source_level == 2


def test_bucket_count_bound(level_measure):
    idx = build_index(level_measure(8), 2.0**-8)
    assert idx.bucket_count() <= (2**8 + 1) * (2**7 + 1)


def test_unit_ball_masses_at_the_corner(level_index):
    idx = level_index(1)
    assert ball_mass(idx, Ball(z0(1), Fraction(1))) == pytest.approx(1.0)
    assert ball_mass(idx, Ball(z0(1), Fraction(1), mode="open")) == pytest.approx(
        1 / 3
    )


def test_half_ball_masses_at_the_corner(level_index):
    idx = level_index(2)
    assert ball_mass(idx, Ball(z0(2), Fraction(1, 4))) == pytest.approx(5 / 9)
    assert ball_mass(
        idx, Ball(z0(2), Fraction(1, 4), mode="open")
    ) == pytest.approx(1 / 9)


def test_float_center_boundary_ties_are_exact(level_index):
    # Midpoints sit at squared distance exactly 1/4 from the origin; the
    # float path must adjudicate them by field arithmetic, not rounding.
    idx = level_index(2)
    assert ball_count(idx, Ball((0.0, 0.0), 0.25, mode="closed")) == 5
    assert ball_count(idx, Ball((0.0, 0.0), 0.25, mode="open")) == 1
    # From the bottom midpoint, four atoms sit at distance exactly 1/2.
    assert ball_count(idx, Ball((0.5, 0.0), 0.25, mode="closed")) == 8
    assert ball_count(idx, Ball((0.5, 0.0), 0.25, mode="open")) == 2


def test_lattice_center_at_coarser_level(level_index):
    # A level-1 center against a level-2 measure goes through the integer
    # fast path at the common refinement.
    idx = level_index(2)
    assert ball_count(idx, Ball(LatticePoint(1, 1, 1), Fraction(1, 4))) == 5


def test_open_closed_monotonicity(level_index):
    idx = level_index(4)
    center = z0(4)
    masses = []
    for d in (0.3, 0.5, 0.7, 1.0):
        o = ball_mass(idx, Ball(center, Fraction(d) ** 2, mode="open"))
        c = ball_mass(idx, Ball(center, Fraction(d) ** 2, mode="closed"))
        assert o <= c
        masses.append((o, c))
    for (_, c1), (o2, _) in zip(masses, masses[1:]):
        assert c1 <= o2


@pytest.mark.parametrize("k", range(1, 7))
def test_ball_counts_match_brute_force(level_index, k):
    idx = level_index(k)
    m = idx.measure
    xy = m.xy()
    rng = np.random.default_rng(100 + k)
    for _ in range(100):
        cx = rng.uniform(-0.2, 1.2)
        cy = rng.uniform(-0.2, 1.0)
        r = rng.uniform(0.01, 0.8)
        mode = "open" if rng.integers(2) else "closed"
        got = ball_count(idx, Ball((cx, cy), r * r, mode=mode))
        d2 = (xy[:, 0] - cx) ** 2 + (xy[:, 1] - cy) ** 2
        inside = d2 < r * r if mode == "open" else d2 <= r * r
        assert got == int(m.counts[inside].sum())


def test_candidate_radii_full_range(level_index):
    cands = candidate_radii(level_index(2), z0(2), 0.0, 1.0)
    assert [c.key for c in cands] == [0, 4, 12, 16]
    assert [c.value for c in cands] == pytest.approx([0.0, 0.5, SQRT3 / 2.0, 1.0])


def test_candidate_radii_narrow_window(level_index):
    cands = candidate_radii(level_index(2), z0(2), 0.4, 0.6)
    assert [(c.key, c.value) for c in cands] == [(4, 0.5)]


def test_candidate_radii_degenerate_window(level_index):
    cands = candidate_radii(level_index(3), z0(3), 0.0, 0.0)
    assert [(c.key, c.value) for c in cands] == [(0, 0.0)]
    with pytest.raises(DomainError):
        candidate_radii(level_index(3), z0(3), 0.5, 0.4)


def test_candidate_radii_are_complete(level_index):
    # Between consecutive candidates the open mass at the upper candidate
    # equals the closed mass at the lower one: no atom distance is missed.
    idx = level_index(4)
    cands = candidate_radii(idx, z0(4), 0.0, 1.0)
    four = 4**4
    for lo, hi in zip(cands, cands[1:]):
        closed_lo = ball_count(idx, Ball(z0(4), Fraction(lo.key, four)))
        open_hi = ball_count(idx, Ball(z0(4), Fraction(hi.key, four), mode="open"))
        assert closed_lo == open_hi


def test_default_cell_size():
    assert default_cell_size(8) == pytest.approx(0.125)
    assert default_cell_size(2, 0.1) == pytest.approx(0.25)
