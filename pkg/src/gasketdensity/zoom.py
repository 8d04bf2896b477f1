"""Empirical tangent-zoom demo.

Zooming along a digit code: for each prefix length j the measure is
restricted to the ball of radius d*2^{-j} around the coded point, pulled
back through the inverse of the prefix map (exact on the lattice: double
integer coordinates and un-translate, once per digit), and its weights are
blown up by 3^j. The binned total-variation distance to the fixed target
restriction mu_k|B(x, d) tracks how closely the rescaled window reproduces
the target neighborhood.

The coded point is anchored at the target center: y = f_prefix(x) for the
full j_max prefix, which is lattice-exact at level k + j_max and within
2^{-j_max} of the limit point of the code. With the code of x itself the
construction collapses to the exact scaling identity (the pullback at step
j is the level k-j approximation restricted to the target ball).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    DegenerateMeasureError,
    DomainError,
    InvalidWordError,
    ResolutionError,
)
from .ifs import Word, ball_in_open_set, gasket_preset
from .lattice import DiscreteMeasure, LatticePoint
from .spatial import Ball, GridIndex

DEFAULT_GRID = 64


@dataclass(frozen=True)
class ZoomStep:
    """One zoom level: restriction at scale 2^{-j}, pulled back and rescaled."""

    word: Word
    scale: float
    pulled_back: DiscreteMeasure
    distance: float

    def __post_init__(self):
        j = len(self.word.digits)
        if self.scale != 2.0**-j:
            raise DomainError("scale must be 2^-len(word)")
        if not math.isfinite(self.pulled_back.total):
            raise DomainError("pulled-back mass must be finite")

    @property
    def depth(self) -> int:
        return len(self.word.digits)


def binned_tv_distance(
    a: DiscreteMeasure,
    b: DiscreteMeasure,
    grid: int,
    bbox: Optional[Tuple[float, float, float, float]] = None,
) -> float:
    """Total variation between unit-normalized n x n cell histograms.

    bbox = (xmin, xmax, ymin, ymax); defaults to the union of both supports.
    Points on or beyond the box edge land in the nearest boundary cell.
    """
    if grid < 1:
        raise DomainError("grid must be >= 1")
    if a.total_count == 0 or b.total_count == 0:
        raise DegenerateMeasureError("cannot normalize a zero-mass measure")
    axy, bxy = a.xy(), b.xy()
    if bbox is None:
        xs = np.concatenate([axy[:, 0], bxy[:, 0]])
        ys = np.concatenate([axy[:, 1], bxy[:, 1]])
        bbox = (xs.min(), xs.max(), ys.min(), ys.max())
    xmin, xmax, ymin, ymax = map(float, bbox)
    if not (xmin <= xmax and ymin <= ymax):
        raise DomainError("bounding box is empty")

    def hist(m: DiscreteMeasure, xy: np.ndarray) -> np.ndarray:
        wx = (xmax - xmin) / grid
        wy = (ymax - ymin) / grid
        ix = (
            np.zeros(len(xy), dtype=np.int64)
            if wx == 0.0
            else np.clip((xy[:, 0] - xmin) // wx, 0, grid - 1).astype(np.int64)
        )
        iy = (
            np.zeros(len(xy), dtype=np.int64)
            if wy == 0.0
            else np.clip((xy[:, 1] - ymin) // wy, 0, grid - 1).astype(np.int64)
        )
        w = m.counts / m.total_count
        return np.bincount(ix * grid + iy, weights=w, minlength=grid * grid)

    return float(np.abs(hist(a, axy) - hist(b, bxy)).sum())


def _forward(p: int, q: int, level: int, digit: int) -> Tuple[int, int]:
    """Apply map `digit` to a level point, producing level+1 coordinates."""
    if digit == 0:
        return p, q
    if digit == 1:
        return p + (1 << level), q
    if digit == 2:
        return p + (1 << (level - 1)), q + (1 << (level - 1))
    raise InvalidWordError(f"digit {digit} outside the 3-map system")


def _inverse(p: np.ndarray, q: np.ndarray, level: int, digit: int):
    """Apply the inverse of map `digit`, staying at the same level."""
    if digit == 0:
        return 2 * p, 2 * q
    if digit == 1:
        return 2 * p - (1 << level), 2 * q
    if digit == 2:
        return 2 * p - (1 << (level - 1)), 2 * q - (1 << (level - 1))
    raise InvalidWordError(f"digit {digit} outside the 3-map system")


def zoom_sequence(
    idx: GridIndex,
    target: Ball,
    y_code: Sequence[int],
    j_max: int,
    grid: int = DEFAULT_GRID,
) -> List[ZoomStep]:
    """Zoom steps j = 0..j_max along y_code, with distances to the target.

    The target ball must be typical (contained in one of the standard open
    sets), centered at an atom, and carry a lattice-exact squared radius
    (an integer multiple of 4^{-k}).
    """
    measure = idx.measure
    k = measure.level
    y_code = [int(t) for t in y_code]
    if j_max < 0:
        raise DomainError("j_max must be nonnegative")
    if len(y_code) < j_max:
        raise DomainError(f"code length {len(y_code)} < j_max={j_max}")
    center = target.center
    if not isinstance(center, LatticePoint) or center.level != k:
        raise DomainError("target center must be a level-k lattice point")
    if measure.point_count(center.p, center.q) == 0:
        raise DomainError("target center is not an atom of the measure")
    key_t = Fraction(target.radius2) * (1 << (2 * k))
    if key_t.denominator != 1 or key_t <= 0:
        raise DomainError(
            "target radius^2 must be a positive multiple of 4^-k "
            "(snap it to a candidate radius first)"
        )
    key_t = int(key_t)
    d = math.sqrt(key_t) / (1 << k)
    # Corner-centered targets cannot sit inside any feasible open set, but
    # the self-coded corner zoom is exactly the scaling identity, so corners
    # are admitted alongside properly typical balls.
    corner = (center.p, center.q) in (
        (0, 0),
        (1 << k, 0),
        (1 << (k - 1), 1 << (k - 1)),
    )
    if not corner and not any(
        ball_in_open_set(poly, center.xy, d)
        for poly in gasket_preset().open_sets
    ):
        raise DomainError("target ball is not typical (no open set contains it)")
    res = math.ceil(-math.log2(d))
    if j_max + res > k:
        raise ResolutionError(
            f"j_max={j_max} plus target resolution {res} exceeds level {k}"
        )

    # Coded point at level k + j_max, anchored at the target center.
    yp, yq, lev = center.p, center.q, k
    for t in reversed(y_code[:j_max]):
        yp, yq = _forward(yp, yq, lev, t)
        lev += 1

    shift = 1 << j_max
    scaled_p = measure.p.astype(np.int64) * shift
    scaled_q = measure.q.astype(np.int64) * shift
    dp0 = measure.p - center.p
    dq0 = measure.q - center.q
    target_keys = dp0 * dp0 + 3 * dq0 * dq0
    if target.is_open:
        target_mask = target_keys < key_t
    else:
        target_mask = target_keys <= key_t
    target_restriction = measure.subset(target_mask)
    if target_restriction.natoms == 0:
        raise DegenerateMeasureError("target ball holds no atoms")

    dp = scaled_p - yp
    dq = scaled_q - yq
    keys = dp * dp + 3 * dq * dq

    steps = []
    for j in range(j_max + 1):
        bound = key_t << (2 * (j_max - j))
        mask = keys < bound if target.is_open else keys <= bound
        sub_p = measure.p[mask]
        sub_q = measure.q[mask]
        sub_c = measure.counts[mask]
        for t in y_code[:j]:
            sub_p, sub_q = _inverse(sub_p, sub_q, k, t)
        pulled = DiscreteMeasure(
            k, sub_p, sub_q, sub_c, weight_exp=k - j, validate=False
        )
        dist = binned_tv_distance(pulled, target_restriction, grid)
        steps.append(
            ZoomStep(
                word=Word(tuple(y_code[:j])),
                scale=2.0**-j,
                pulled_back=pulled,
                distance=dist,
            )
        )
    return steps
