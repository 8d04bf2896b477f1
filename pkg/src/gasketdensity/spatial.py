"""Grid-bucketed spatial index with exact open/closed ball mass queries.

Mass queries run in floating point over bucket candidates, then re-decide
every atom whose squared distance lands within a guard band of the squared
radius using exact field arithmetic, so boundary ties are never resolved by
rounding. Lattice-centered balls with lattice-derived radii skip floats
entirely and compare integer keys.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional, Tuple, Union

import numpy as np

from .errors import DomainError
from .exact import Root3
from .lattice import SQRT3, DiscreteMeasure, LatticePoint

Center = Union[LatticePoint, Tuple[float, float]]

_BAND_REL = 1e-9


@dataclass(frozen=True, eq=False)
class Ball:
    """A ball with explicit open/closed boundary mode.

    radius2 is the squared radius; pass a Fraction for lattice-derived radii
    to make boundary comparisons exact (floats are still exact dyadics and
    get promoted when a tie must be adjudicated).
    """

    center: Center
    radius2: Union[Fraction, float]
    mode: str = "closed"

    def __post_init__(self):
        if self.mode not in ("open", "closed"):
            raise DomainError(f"mode must be 'open' or 'closed', got {self.mode!r}")
        if (self.radius2 < 0) is True:
            raise DomainError("radius2 must be nonnegative")

    @property
    def is_open(self) -> bool:
        return self.mode == "open"

    @property
    def center_xy(self) -> Tuple[float, float]:
        if isinstance(self.center, LatticePoint):
            return self.center.xy
        return (float(self.center[0]), float(self.center[1]))

    @property
    def radius(self) -> float:
        return math.sqrt(float(self.radius2))

    def center_exact(self) -> Tuple[Root3, Root3]:
        if isinstance(self.center, LatticePoint):
            return self.center.exact_xy()
        cx, cy = self.center
        return (Root3.of(cx), Root3.of(cy))

    def radius2_exact(self) -> Fraction:
        if isinstance(self.radius2, Fraction):
            return self.radius2
        return Fraction(float(self.radius2))


class GridIndex:
    """Uniform-cell bucketing of a measure's atoms."""

    def __init__(self, measure: DiscreteMeasure, cell_size: float):
        if cell_size <= 0:
            raise DomainError("cell_size must be positive")
        if measure.natoms == 0:
            raise DomainError("cannot index an empty measure")
        self.measure = measure
        self.cell_size = float(cell_size)
        self.source_level = measure.level
        xy = measure.xy()
        self._xy = xy
        cx = np.floor(xy[:, 0] / self.cell_size).astype(np.int64)
        cy = np.floor(xy[:, 1] / self.cell_size).astype(np.int64)
        order = np.lexsort((cy, cx))
        scx, scy = cx[order], cy[order]
        changed = np.nonzero((np.diff(scx) != 0) | (np.diff(scy) != 0))[0] + 1
        starts = np.concatenate([[0], changed])
        ends = np.concatenate([changed, [len(order)]])
        self.bounds = (
            float(xy[:, 0].min()),
            float(xy[:, 0].max()),
            float(xy[:, 1].min()),
            float(xy[:, 1].max()),
        )
        self._buckets: Dict[Tuple[int, int], np.ndarray] = {}
        for a, b in zip(starts, ends):
            self._buckets[(int(scx[a]), int(scy[a]))] = order[a:b]

    @property
    def buckets(self) -> Dict[Tuple[int, int], np.ndarray]:
        return self._buckets

    def bucket_count(self) -> int:
        return len(self._buckets)

    def candidates(self, x: float, y: float, r: float) -> np.ndarray:
        """Indices of atoms in buckets meeting the (x, y, r) bounding box."""
        c = self.cell_size
        x0 = math.floor((x - r) / c)
        x1 = math.floor((x + r) / c)
        y0 = math.floor((y - r) / c)
        y1 = math.floor((y + r) / c)
        ncells = (x1 - x0 + 1) * (y1 - y0 + 1)
        if ncells >= len(self._buckets):
            return np.arange(self.measure.natoms)
        picked = []
        for cx in range(x0, x1 + 1):
            for cy in range(y0, y1 + 1):
                hit = self._buckets.get((cx, cy))
                if hit is not None:
                    picked.append(hit)
        if not picked:
            return np.empty(0, dtype=np.int64)
        return np.concatenate(picked)


def build_index(measure: DiscreteMeasure, cell_size: float) -> GridIndex:
    return GridIndex(measure, cell_size)


def default_cell_size(level: int, dmax_query: float = 1.0) -> float:
    """Coarse cells sized so ball queries touch few buckets."""
    return max(dmax_query / 8.0, 2.0 ** (-level))


def _exact_inside(
    ball: Ball, p: int, q: int, level: int, strict: bool
) -> bool:
    cx, cy = ball.center_exact()
    den = 1 << level
    dx = Root3.of(Fraction(int(p), den)) - cx
    dy = Root3.sqrt3_times(Fraction(int(q), den)) - cy
    gap = dx * dx + dy * dy - Root3.of(ball.radius2_exact())
    return gap.sign() < 0 if strict else gap.sign() <= 0


def ball_count(idx: GridIndex, ball: Ball) -> int:
    """Integer count units of the measure inside the ball (exact)."""
    m = idx.measure
    # Pure-integer path: lattice center and a radius whose square clears
    # denominators at a usable common level.
    if isinstance(ball.center, LatticePoint) and isinstance(ball.radius2, Fraction):
        lvl = max(ball.center.level, m.level)
        scaled = ball.radius2 * (1 << (2 * lvl))
        if scaled.denominator == 1 and lvl <= 25:
            key_bound = int(scaled)
            sp = 1 << (lvl - m.level)
            sc = 1 << (lvl - ball.center.level)
            dp = m.p * sp - ball.center.p * sc
            dq = m.q * sp - ball.center.q * sc
            keys = dp * dp + 3 * dq * dq
            if ball.is_open:
                return int(m.counts[keys < key_bound].sum())
            return int(m.counts[keys <= key_bound].sum())

    x, y = ball.center_xy
    r = ball.radius
    cand = idx.candidates(x, y, r)
    if len(cand) == 0:
        return 0
    xy = idx._xy[cand]
    d2 = (xy[:, 0] - x) ** 2 + (xy[:, 1] - y) ** 2
    r2 = float(ball.radius2)
    band = _BAND_REL * max(1.0, r2)
    inner = d2 < r2 - band
    near = np.abs(d2 - r2) <= band
    total = int(m.counts[cand[inner]].sum())
    strict = ball.is_open
    for i in np.nonzero(near)[0]:
        ai = cand[i]
        if _exact_inside(ball, m.p[ai], m.q[ai], m.level, strict):
            total += int(m.counts[ai])
    return total


def ball_mass(idx: GridIndex, ball: Ball) -> float:
    """Measure of the ball: sum of weights with exact boundary handling."""
    return ball_count(idx, ball) * 3.0 ** (-idx.measure.weight_exp)


class CandidateRadius(NamedTuple):
    key: int
    value: float


def candidate_radii(
    idx: GridIndex,
    center: LatticePoint,
    dmin: float,
    dmax: float,
) -> List[CandidateRadius]:
    """Sorted distinct atom distances from center within [dmin, dmax].

    Distances are deduplicated by the integer key dp^2 + 3 dq^2 evaluated at
    the common level; values are sqrt(key)/2^level.
    """
    if dmin > dmax:
        raise DomainError("dmin must not exceed dmax")
    m = idx.measure
    lvl = max(center.level, m.level)
    sp = 1 << (lvl - m.level)
    sc = 1 << (lvl - center.level)
    dp = m.p * sp - center.p * sc
    dq = m.q * sp - center.q * sc
    keys = np.unique(dp * dp + 3 * dq * dq)
    four = 1 << (2 * lvl)
    klo = math.ceil(Fraction(float(dmin)) ** 2 * four)
    khi = math.floor(Fraction(float(dmax)) ** 2 * four)
    keys = keys[(keys >= klo) & (keys <= khi)]
    scale = 1.0 / (1 << lvl)
    return [CandidateRadius(int(k), math.sqrt(k) * scale) for k in keys]
