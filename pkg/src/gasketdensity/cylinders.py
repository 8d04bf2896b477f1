"""Certified ball-measure intervals from cylinder classification.

A depth-m subdivision of the gasket's generating triangle classifies every
level-m cell against a ball: cells whose three corners lie in the closed
ball are inside (exact integer/quadratic arithmetic, no floats), cells whose
triangle hull misses the ball by a float margin are outside, the rest count
as boundary. Since the limit measure gives each level-m cell mass 3^{-m},

    inside * 3^{-m}  <=  mu(ball)  <=  (inside + boundary) * 3^{-m}

for the closed ball (and the open ball differs at most on spheres, which
carry no limit mass). The classification prunes: a cell fully resolved at
depth j accounts for all 3^{m-j} of its descendants at once.

sandwich_check cross-validates the oracle interval against the discrete
upper/lower masses mu_k(B(x, d -+ 2^{-k})); the intersection test runs on
exact integer counts so a tie at interval endpoints never misreports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Tuple

from .errors import DomainError, ResourceLimitError, UnsupportedSystemError
from .exact import Root3
from .ifs import IfsSystem, is_gasket_system
from .lattice import SQRT3
from .spatial import Ball, GridIndex, ball_count

MAX_DEPTH = 16

_OUT_MARGIN = 1e-12
_SCREEN_BAND = 1e-9


@dataclass(frozen=True)
class CylinderInterval:
    """Two-sided measure bound from a depth-`level` cell classification."""

    lower: float
    upper: float
    level: int
    counts: Tuple[int, int, int]

    def __post_init__(self):
        inside, boundary, outside = self.counts
        if min(inside, boundary, outside) < 0:
            raise DomainError("cell counts must be nonnegative")
        if inside + boundary + outside != 3 ** self.level:
            raise DomainError("cell counts must total 3^level")
        if not 0.0 <= self.lower <= self.upper <= 1.0 + 1e-12:
            raise DomainError("interval must sit inside [0, 1]")

    @property
    def width(self) -> float:
        return self.upper - self.lower


def _segment_dist2(px, py, ax, ay, bx, by):
    vx, vy = bx - ax, by - ay
    wx, wy = px - ax, py - ay
    t = (wx * vx + wy * vy) / (vx * vx + vy * vy)
    t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    dx, dy = wx - t * vx, wy - t * vy
    return dx * dx + dy * dy


def _triangle_dist(px, py, xs, ys):
    """Distance from a point to a (counterclockwise) filled triangle."""
    inside = True
    best = math.inf
    for i in range(3):
        j = (i + 1) % 3
        cross = (xs[j] - xs[i]) * (py - ys[i]) - (ys[j] - ys[i]) * (px - xs[i])
        if cross < 0.0:
            inside = False
        best = min(best, _segment_dist2(px, py, xs[i], ys[i], xs[j], ys[j]))
    return 0.0 if inside else math.sqrt(best)


class _Classifier:
    """Shared per-query state for the recursive cell classification."""

    def __init__(self, ball: Ball, depth: int):
        self.depth = depth
        self.cx, self.cy = ball.center_exact()
        self.r2 = Root3(ball.radius2_exact())
        self.fx = float(self.cx)
        self.fy = float(self.cy)
        self.fr2 = float(self.r2.a)
        self.fr = math.sqrt(self.fr2)
        self.band = _SCREEN_BAND * max(1.0, self.fr2)
        self.inside = 0
        self.boundary = 0
        self.outside = 0

    def _vertex_in_closed_ball(self, p: int, q: int, level: int) -> bool:
        scale = 0.5**level
        dx = p * scale - self.fx
        dy = q * SQRT3 * scale - self.fy
        d2 = dx * dx + dy * dy
        # Float screen; only near-sphere vertices pay for exact arithmetic.
        if d2 < self.fr2 - self.band:
            return True
        if d2 > self.fr2 + self.band:
            return False
        ex = Root3(Fraction(p, 2**level)) - self.cx
        ey = Root3(0, Fraction(q, 2**level)) - self.cy
        gap = ex * ex + ey * ey - self.r2
        return gap.sign() <= 0

    def classify(self, corners, depth: int) -> None:
        level = depth + 1
        subtree = 3 ** (self.depth - depth)
        if all(self._vertex_in_closed_ball(p, q, level) for p, q in corners):
            self.inside += subtree
            return
        scale = 0.5**level
        xs = [p * scale for p, _ in corners]
        ys = [q * SQRT3 * scale for _, q in corners]
        if _triangle_dist(self.fx, self.fy, xs, ys) > self.fr + _OUT_MARGIN:
            self.outside += subtree
            return
        if depth == self.depth:
            self.boundary += 1
            return
        for t in range(3):
            pt, qt = corners[t]
            child = tuple((pt + p, qt + q) for p, q in corners)
            self.classify(child, depth + 1)


def measure_interval(system: IfsSystem, ball: Ball, m: int) -> CylinderInterval:
    """Certified interval for the limit measure of `ball` at cell depth m."""
    if not is_gasket_system(system):
        raise UnsupportedSystemError(
            "cylinder classification is implemented for the gasket system"
        )
    if not 1 <= m <= MAX_DEPTH:
        raise ResourceLimitError(
            f"depth guard: m={m} outside [1, {MAX_DEPTH}]"
        )
    cls = _Classifier(ball, m)
    cls.classify(((0, 0), (2, 0), (1, 1)), 0)
    counts = (cls.inside, cls.boundary, cls.outside)
    unit = 3.0**-m
    return CylinderInterval(
        lower=cls.inside * unit,
        upper=(cls.inside + cls.boundary) * unit,
        level=m,
        counts=counts,
    )


def sandwich_record(
    idx: GridIndex,
    x: Tuple[float, float],
    d: float,
    k: int,
    m: int,
    system: IfsSystem,
) -> Dict:
    """Cross-validate oracle and discrete bounds for mu(B(x, d)).

    Discrete side: l = mu_k(closed ball at d - 2^{-k}), u = mu_k(open ball
    at d + 2^{-k}); oracle side [L, U] at depth m. The ok verdict is the
    exact (integer-count) non-emptiness of [max(l,L), min(u,U)].
    """
    measure = idx.measure
    if k != measure.level:
        raise DomainError(f"index holds level {measure.level}, not {k}")
    step = Fraction(1, 2**k)
    dd = Fraction(float(d))
    if not dd > step:
        raise DomainError(f"need d > 2^-{k}, got d={d}")
    reach = max(
        math.hypot(x[0] - cx, x[1] - cy)
        for cx, cy in ((0.0, 0.0), (1.0, 0.0), (0.5, SQRT3 / 2.0))
    )
    if float(d) > reach + 1e-12:
        raise DomainError(
            f"d={d} exceeds the farthest corner distance {reach:.17g}"
        )

    lo_count = _ball_count_at(idx, x, (dd - step) ** 2, "closed")
    hi_count = _ball_count_at(idx, x, (dd + step) ** 2, "open")
    oracle = measure_interval(system, Ball(x, dd * dd, mode="closed"), m)
    inside, boundary, _ = oracle.counts

    # Compare  count * 3^{-k}  against  cells * 3^{-m}  exactly.
    e = max(k, m)
    lnum = lo_count * 3 ** (e - k)
    unum = hi_count * 3 ** (e - k)
    Lnum = inside * 3 ** (e - m)
    Unum = (inside + boundary) * 3 ** (e - m)
    ok = max(lnum, Lnum) <= min(unum, Unum)

    unit = 3.0**-k
    return {
        "x": float(x[0]),
        "y": float(x[1]),
        "d": float(d),
        "k": k,
        "m": m,
        "l": lo_count * unit,
        "u": hi_count * unit,
        "L": oracle.lower,
        "U": oracle.upper,
        "ok": bool(ok),
    }


def sandwich_check(
    idx: GridIndex,
    x: Tuple[float, float],
    d: float,
    k: int,
    m: int,
    system: IfsSystem,
) -> bool:
    return sandwich_record(idx, x, d, k, m, system)["ok"]


def _ball_count_at(idx: GridIndex, x, radius2: Fraction, mode: str) -> int:
    return ball_count(idx, Ball((float(x[0]), float(x[1])), radius2, mode=mode))
