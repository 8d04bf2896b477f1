"""Lattice points, level measures, exact distances, CSV export."""

import io
import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from gasketdensity import (
    DiscreteMeasure,
    DomainError,
    LatticePoint,
    LevelMismatchError,
    ResourceLimitError,
    UnsupportedSystemError,
    apply_word,
    corner_points,
    dist2_exact,
    dist2_key,
    generate_support,
    write_csv,
)
from gasketdensity.lattice import MAX_LEVEL

SQRT3 = math.sqrt(3.0)


def test_lattice_point_coordinates():
    pt = LatticePoint(3, 1, 2)
    assert pt.xy == pytest.approx((0.75, SQRT3 / 4.0))
    ex, ey = pt.exact_xy()
    assert ex.a == Fraction(3, 4) and ex.b == 0
    assert ey.a == 0 and ey.b == Fraction(1, 4)
    with pytest.raises(DomainError):
        LatticePoint(0, 0, -1)


def test_corner_points():
    z0, z1, z2 = corner_points(3)
    assert (z0.p, z0.q) == (0, 0)
    assert (z1.p, z1.q) == (8, 0)
    assert (z2.p, z2.q) == (4, 4)
    assert z1.xy == pytest.approx((1.0, 0.0))
    assert z2.xy == pytest.approx((0.5, SQRT3 / 2.0))


def test_exact_distances_between_corners():
    z0, z1, z2 = corner_points(4)
    assert dist2_exact(z0, z1) == 1
    assert dist2_exact(z0, z2) == 1
    assert dist2_exact(z1, z2) == 1
    mid = LatticePoint(1, 0, 1)
    assert dist2_exact(LatticePoint(0, 0, 1), mid) == Fraction(1, 4)
    assert dist2_key(LatticePoint(0, 0, 1), mid) == 1


def test_distances_require_matching_levels():
    with pytest.raises(LevelMismatchError):
        dist2_exact(LatticePoint(0, 0, 1), LatticePoint(0, 0, 2))
    with pytest.raises(LevelMismatchError):
        dist2_key(LatticePoint(0, 0, 1), LatticePoint(0, 0, 2))


def test_level_one_measure(level_measure):
    m = level_measure(1)
    assert m.level == 1
    assert list(zip(m.p, m.q)) == [(0, 0), (2, 0), (1, 1)]
    assert list(m.counts) == [1, 1, 1]
    assert m.weights == pytest.approx([1 / 3, 1 / 3, 1 / 3])
    assert m.total == pytest.approx(1.0, abs=1e-15)


def test_level_two_measure(level_measure):
    m = level_measure(2)
    assert list(zip(m.p, m.q)) == [(0, 0), (2, 0), (4, 0), (1, 1), (3, 1), (2, 2)]
    assert list(m.counts) == [1, 2, 1, 2, 2, 1]
    # Vertices keep weight 1/9; the three shared midpoints merge to 2/9.
    assert m.point_count(0, 0) == 1
    assert m.point_count(2, 0) == 2
    assert m.point_count(5, 0) == 0


def test_level_five_atom_count(level_measure):
    assert level_measure(5).natoms == 123


def _atoms_by_word_enumeration(system, k):
    corners = ((0.0, 0.0), (1.0, 0.0), (0.5, SQRT3 / 2.0))
    scale = 1 << k
    pts = set()
    for word in itertools.product(range(3), repeat=k - 1):
        for c in corners:
            x, y = apply_word(system, word, c)
            pts.add((round(x * scale), round(y / SQRT3 * scale)))
    return pts


@pytest.mark.parametrize("k", range(1, 7))
def test_atom_count_law_against_word_enumeration(system, level_measure, k):
    m = level_measure(k)
    assert m.natoms == (3**k + 3) // 2
    assert m.total_count == 3**k
    assert set(zip(m.p, m.q)) == _atoms_by_word_enumeration(system, k)


@pytest.mark.parametrize("k", range(1, 11))
def test_mass_normalization(level_measure, k):
    assert abs(level_measure(k).total - 1.0) <= 1e-12


def test_supports_are_nested(level_measure):
    coarse = set(zip(level_measure(4).p, level_measure(4).q))
    fine = set(zip(level_measure(5).p, level_measure(5).q))
    assert {(2 * p, 2 * q) for p, q in coarse} <= fine


def test_atoms_iterator(level_measure):
    m = level_measure(2)
    atoms = list(m.atoms())
    assert len(atoms) == 6
    pt, w = atoms[1]
    assert (pt.p, pt.q, pt.level) == (2, 0, 2)
    assert w == pytest.approx(2 / 9)


def test_subset_restricts_atoms(level_measure):
    m = level_measure(3)
    mask = m.q == 0
    sub = m.subset(mask)
    assert sub.natoms == int(mask.sum())
    assert sub.weight_exp == m.weight_exp
    rescaled = m.subset(mask, weight_exp=m.weight_exp - 1)
    assert rescaled.total == pytest.approx(3.0 * sub.total)


def test_measure_constructor_validation():
    with pytest.raises(DomainError):
        DiscreteMeasure(1, np.array([0, 2]), np.array([0]), np.array([1, 1]))
    with pytest.raises(DomainError):
        DiscreteMeasure(1, np.array([0]), np.array([0]), np.array([0]))
    with pytest.raises(DomainError):
        DiscreteMeasure(
            1, np.array([2, 0]), np.array([0, 0]), np.array([1, 1])
        )
    with pytest.raises(DomainError):
        DiscreteMeasure(
            1, np.array([0, 0]), np.array([0, 0]), np.array([1, 1])
        )


def test_generate_support_guards(system):
    with pytest.raises(ResourceLimitError, match="level guard"):
        generate_support(system, 0)
    with pytest.raises(ResourceLimitError, match="level guard"):
        generate_support(system, MAX_LEVEL + 1)


def test_generate_support_rejects_foreign_systems():
    from gasketdensity import IfsSystem, Similitude

    segment = IfsSystem(
        (
            Similitude(0.5 * np.eye(2), (0.0, 0.0), 0.5),
            Similitude(0.5 * np.eye(2), (0.5, 0.0), 0.5),
        ),
        (0.5, 0.5),
        1.0,
    )
    with pytest.raises(UnsupportedSystemError):
        generate_support(segment, 3)


def test_write_csv_golden_level_one(level_measure):
    buf = io.StringIO()
    write_csv(level_measure(1), buf)
    assert buf.getvalue() == (
        "p,q,level,x,y,weight\n"
        "0,0,1,0,0,0.33333333333333331\n"
        "2,0,1,1,0,0.33333333333333331\n"
        "1,1,1,0.5,0.8660254037844386,0.33333333333333331\n"
    )


def test_write_csv_golden_level_two(level_measure):
    buf = io.StringIO()
    write_csv(level_measure(2), buf)
    assert buf.getvalue().splitlines() == [
        "p,q,level,x,y,weight",
        "0,0,2,0,0,0.1111111111111111",
        "2,0,2,0.5,0,0.22222222222222221",
        "4,0,2,1,0,0.1111111111111111",
        "1,1,2,0.25,0.4330127018922193,0.22222222222222221",
        "3,1,2,0.75,0.4330127018922193,0.22222222222222221",
        "2,2,2,0.5,0.8660254037844386,0.1111111111111111",
    ]


def test_write_csv_to_path(tmp_path, level_measure):
    out = tmp_path / "atoms.csv"
    write_csv(level_measure(1), str(out))
    assert out.read_text().startswith("p,q,level,x,y,weight\n")
