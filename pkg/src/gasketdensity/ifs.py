"""Planar contractive similitude systems, words, and feasible open sets.

The module is generic over similitude systems but ships the Sierpinski
gasket preset used by the lattice modules: three ratio-1/2 homotheties with
fixed points (0,0), (1,0), (1/2, sqrt(3)/2), the similarity dimension
log(3)/log(2), and four feasible open sets (the open unit-triangle interior
and the three open rhombi obtained by reflecting the triangle across each
of its edges).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .errors import DomainError, GeometryError, InvalidWordError
from .exact import Root3

Vec = np.ndarray


@dataclass(frozen=True, eq=False)
class Similitude:
    """A contractive similarity x -> linear @ x + translation.

    The linear part is an orthogonal matrix scaled by ``ratio`` (reflections
    allowed), validated to 1e-12.
    """

    linear: np.ndarray
    translation: np.ndarray
    ratio: float

    def __post_init__(self):
        lin = np.array(self.linear, dtype=float).reshape(2, 2)
        tr = np.array(self.translation, dtype=float).reshape(2)
        lin.setflags(write=False)
        tr.setflags(write=False)
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "translation", tr)
        if not (0.0 < self.ratio <= 1.0):
            raise DomainError(f"ratio must be in (0, 1], got {self.ratio}")
        gram = lin.T @ lin
        if not np.allclose(gram, self.ratio**2 * np.eye(2), atol=1e-12, rtol=0.0):
            raise GeometryError("linear part is not orthogonal scaled by ratio")

    def __call__(self, x) -> Vec:
        return self.linear @ np.asarray(x, dtype=float) + self.translation

    def fixed_point(self) -> Vec:
        return np.linalg.solve(np.eye(2) - self.linear, self.translation)


@dataclass(frozen=True)
class Word:
    """A finite composition index; the empty word is the identity."""

    digits: tuple = ()

    def __post_init__(self):
        digs = tuple(int(d) for d in self.digits)
        if any(d < 0 for d in digs):
            raise InvalidWordError(f"negative digit in word {digs}")
        object.__setattr__(self, "digits", digs)

    def __len__(self) -> int:
        return len(self.digits)

    def __iter__(self):
        return iter(self.digits)

    def concat(self, other: "Word") -> "Word":
        return Word(self.digits + tuple(other))


@dataclass(frozen=True, eq=False)
class ConvexPolygon:
    """Strictly convex polygon, counter-clockwise, with exact vertices.

    Vertex coordinates are values in the field {a + b*sqrt(3): a, b rational}
    (every dyadic rational qualifies), kept exact so convexity is decided
    without rounding; a float copy is cached for distance queries.
    """

    vertices: tuple
    name: str = ""

    def __post_init__(self):
        verts = tuple(
            (Root3.of(vx), Root3.of(vy)) for vx, vy in self.vertices
        )
        if len(verts) < 3:
            raise GeometryError("polygon needs at least 3 vertices")
        n = len(verts)
        for i in range(n):
            ax, ay = verts[i]
            bx, by = verts[(i + 1) % n]
            cx, cy = verts[(i + 2) % n]
            e1x, e1y = bx - ax, by - ay
            e2x, e2y = cx - bx, cy - by
            cross = e1x * e2y - e1y * e2x
            if cross.sign() <= 0:
                raise GeometryError(
                    "vertices must be strictly convex in counter-clockwise order"
                )
        object.__setattr__(self, "vertices", verts)
        xy = np.array([[float(vx), float(vy)] for vx, vy in verts])
        xy.setflags(write=False)
        object.__setattr__(self, "_xy", xy)
        # Unit inward normals and offsets, one per edge, for fast distances.
        rolled = np.roll(xy, -1, axis=0)
        edges = rolled - xy
        lengths = np.hypot(edges[:, 0], edges[:, 1])
        normals = np.stack([-edges[:, 1], edges[:, 0]], axis=1) / lengths[:, None]
        offsets = np.einsum("ij,ij->i", normals, xy)
        normals.setflags(write=False)
        offsets.setflags(write=False)
        object.__setattr__(self, "_normals", normals)
        object.__setattr__(self, "_offsets", offsets)

    @property
    def xy(self) -> np.ndarray:
        return self._xy

    def edge_distances(self, x) -> np.ndarray:
        """Signed inward distance from x to each edge line (positive inside)."""
        pt = np.asarray(x, dtype=float)
        return self._normals @ pt - self._offsets

    def min_edge_distance(self, x) -> float:
        return float(self.edge_distances(x).min())

    def bulk_min_edge_distance(self, xs: np.ndarray) -> np.ndarray:
        """min_edge_distance for an (n, 2) array of points at once."""
        d = xs @ self._normals.T - self._offsets[None, :]
        return d.min(axis=1)


@dataclass(frozen=True, eq=False)
class IfsSystem:
    """A similitude system with probabilities, dimension, and open sets."""

    maps: tuple
    probabilities: tuple
    dimension: float
    open_sets: tuple = ()

    def __post_init__(self):
        maps = tuple(self.maps)
        probs = tuple(float(p) for p in self.probabilities)
        object.__setattr__(self, "maps", maps)
        object.__setattr__(self, "probabilities", probs)
        object.__setattr__(self, "open_sets", tuple(self.open_sets))
        if len(maps) != len(probs) or not maps:
            raise DomainError("need one probability per map")
        if any(p <= 0 for p in probs):
            raise DomainError("probabilities must be positive")
        if abs(sum(probs) - 1.0) > 1e-12:
            raise DomainError("probabilities must sum to 1 within 1e-12")
        moment = sum(f.ratio**self.dimension for f in maps)
        if abs(moment - 1.0) > 1e-12:
            raise DomainError("sum of ratio^dimension must be 1 within 1e-12")
        for poly in self.open_sets:
            for f in maps:
                for vx, vy in poly.vertices:
                    img = f((float(vx), float(vy)))
                    if poly.min_edge_distance(img) < -1e-9:
                        raise GeometryError(
                            f"map image of a vertex of {poly.name or 'polygon'} "
                            "escapes the set: not a feasible open set"
                        )


def apply_word(system: IfsSystem, w: Union[Word, Sequence[int]], x) -> Vec:
    """Apply the composition f_{w1} o f_{w2} o ... o f_{wn} to x.

    The last digit acts first; the empty word is the identity.
    """
    digits = tuple(w)
    m = len(system.maps)
    for d in digits:
        if not 0 <= d < m:
            raise InvalidWordError(f"digit {d} outside alphabet of size {m}")
    pt = np.asarray(x, dtype=float)
    for d in reversed(digits):
        pt = system.maps[d](pt)
    return pt


def similarity_dimension(ratios: Sequence[float]) -> float:
    """Solve sum(r^s) = 1 for s by bisection on [0, 64].

    The map s -> sum(r^s) is strictly decreasing for ratios in (0, 1), so
    200 bisection steps pin s far below the 1e-12 residual target.
    """
    rs = [float(r) for r in ratios]
    if not rs:
        raise DomainError("need at least one ratio")
    if any(not 0.0 < r < 1.0 for r in rs):
        raise DomainError("ratios must lie strictly inside (0, 1)")

    def excess(s: float) -> float:
        return sum(r**s for r in rs) - 1.0

    lo, hi = 0.0, 64.0
    if excess(lo) <= 0.0:
        return lo
    if excess(hi) > 0.0:
        raise DomainError("similarity dimension exceeds the bisection bracket")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


_HALF = Fraction(1, 2)


def gasket_preset() -> IfsSystem:
    """The Sierpinski gasket system with its four feasible open sets."""
    half_eye = 0.5 * np.eye(2)
    sqrt3_4 = math.sqrt(3.0) / 4.0
    maps = (
        Similitude(half_eye, (0.0, 0.0), 0.5),
        Similitude(half_eye, (0.5, 0.0), 0.5),
        Similitude(half_eye, (0.25, sqrt3_4), 0.5),
    )
    top = Root3.sqrt3_times(_HALF)
    tri = ConvexPolygon(((0, 0), (1, 0), (_HALF, top)), name="tri")
    r0 = ConvexPolygon(
        ((0, 0), (1, 0), (Fraction(3, 2), top), (_HALF, top)), name="r0"
    )
    r1 = ConvexPolygon(
        ((0, 0), (1, 0), (_HALF, top), (Fraction(-1, 2), top)), name="r1"
    )
    r2 = ConvexPolygon(
        ((0, 0), (_HALF, -top), (1, 0), (_HALF, top)), name="r2"
    )
    s = similarity_dimension([0.5, 0.5, 0.5])
    third = 1.0 / 3.0
    return IfsSystem(maps, (third, third, third), s, (tri, r0, r1, r2))


def is_gasket_system(system: IfsSystem) -> bool:
    """True when the system is the gasket preset up to 1e-12."""
    if len(system.maps) != 3:
        return False
    ref = gasket_preset()
    for f, g in zip(system.maps, ref.maps):
        if abs(f.ratio - 0.5) > 1e-12:
            return False
        if not np.allclose(f.linear, g.linear, atol=1e-12, rtol=0.0):
            return False
        if not np.allclose(f.translation, g.translation, atol=1e-12, rtol=0.0):
            return False
    return True


def ball_in_open_set(poly: ConvexPolygon, center, radius: float) -> bool:
    """Whether the ball of the given radius around center fits inside poly.

    Acceptance requires the center's distance to every edge line to exceed
    the radius by more than 1e-15; the slack errs toward rejection so a
    borderline ball is never admitted as typical.
    """
    if radius < 0:
        raise DomainError("radius must be nonnegative")
    return poly.min_edge_distance(center) - radius > 1e-15
