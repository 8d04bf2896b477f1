"""Integer-lattice representation of the gasket iterates and their measures.

A level-k lattice point (p, q) denotes the plane point (p/2^k, q*sqrt(3)/2^k).
In these coordinates the three gasket maps send a level-j point to level j+1
as (p, q), (p + 2^j, q), and (p + 2^{j-1}, q + 2^{j-1}), so every vertex
iterate is integer-exact and squared distances are integers over 4^k:

    |a - b|^2 = (dp^2 + 3 dq^2) / 4^k.

The k-th measure places weight count/3^k on each distinct support point,
where count is the number of (word, seed-vertex) pairs landing there (1 at
the three extreme corners, 2 everywhere else). Counts are kept as integers
so merged masses are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, TextIO, Tuple, Union

import numpy as np

from .errors import (
    DomainError,
    LevelMismatchError,
    ResourceLimitError,
    UnsupportedSystemError,
)
from .exact import Root3
from .ifs import IfsSystem, is_gasket_system

SQRT3 = math.sqrt(3.0)

MAX_LEVEL = 20

CSV_HEADER = "p,q,level,x,y,weight"


@dataclass(frozen=True)
class LatticePoint:
    """The point (p/2^level, q*sqrt(3)/2^level)."""

    p: int
    q: int
    level: int

    def __post_init__(self):
        if self.level < 0:
            raise DomainError("level must be nonnegative")

    @property
    def xy(self) -> Tuple[float, float]:
        scale = 1.0 / (1 << self.level)
        return (self.p * scale, self.q * SQRT3 * scale)

    def exact_xy(self) -> Tuple[Root3, Root3]:
        den = 1 << self.level
        return (
            Root3.of(Fraction(self.p, den)),
            Root3.sqrt3_times(Fraction(self.q, den)),
        )


def corner_points(k: int) -> Tuple[LatticePoint, LatticePoint, LatticePoint]:
    """The three extreme corners of the level-k lattice."""
    return (
        LatticePoint(0, 0, k),
        LatticePoint(1 << k, 0, k),
        LatticePoint(1 << (k - 1), 1 << (k - 1), k),
    )


def dist2_exact(a: LatticePoint, b: LatticePoint) -> Fraction:
    """Exact squared Euclidean distance between two same-level points."""
    if a.level != b.level:
        raise LevelMismatchError(
            f"points at levels {a.level} and {b.level} cannot be compared"
        )
    return Fraction(dist2_key(a, b), 4**a.level)


def dist2_key(a: LatticePoint, b: LatticePoint) -> int:
    """Integer key dp^2 + 3 dq^2; equals 4^level times the squared distance."""
    if a.level != b.level:
        raise LevelMismatchError(
            f"points at levels {a.level} and {b.level} cannot be compared"
        )
    dp = a.p - b.p
    dq = a.q - b.q
    return dp * dp + 3 * dq * dq


class DiscreteMeasure:
    """A finitely supported measure on one lattice level.

    Atoms are held as parallel numpy arrays sorted by (q, p); weights are
    counts times 3^{-weight_exp}. Full-mass measures use weight_exp = level;
    restrictions keep it and zoom pullbacks lower it, so mass bookkeeping
    stays in exact integer units throughout.
    """

    def __init__(
        self,
        level: int,
        p: np.ndarray,
        q: np.ndarray,
        counts: np.ndarray,
        weight_exp: Optional[int] = None,
        validate: bool = True,
    ):
        self.level = int(level)
        self.p = np.ascontiguousarray(p, dtype=np.int64)
        self.q = np.ascontiguousarray(q, dtype=np.int64)
        self.counts = np.ascontiguousarray(counts, dtype=np.int64)
        self.weight_exp = self.level if weight_exp is None else int(weight_exp)
        if validate:
            if not (len(self.p) == len(self.q) == len(self.counts)):
                raise DomainError("atom arrays must have equal length")
            if len(self.p) and self.counts.min() <= 0:
                raise DomainError("atom counts must be positive")
            if len(self.p) > 1:
                dq = np.diff(self.q)
                dp = np.diff(self.p)
                ordered = (dq > 0) | ((dq == 0) & (dp > 0))
                if not ordered.all():
                    raise DomainError("atoms must be distinct and (q, p)-sorted")
        for arr in (self.p, self.q, self.counts):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return len(self.p)

    @property
    def natoms(self) -> int:
        return len(self.p)

    @property
    def total_count(self) -> int:
        return int(self.counts.sum())

    @property
    def total(self) -> float:
        return self.total_count * 3.0 ** (-self.weight_exp)

    @property
    def weights(self) -> np.ndarray:
        return self.counts * 3.0 ** (-self.weight_exp)

    def xy(self) -> np.ndarray:
        """Float coordinates of the atoms, shape (n, 2)."""
        scale = 1.0 / (1 << self.level)
        return np.stack([self.p * scale, self.q * (SQRT3 * scale)], axis=1)

    def atoms(self) -> Iterator[Tuple[LatticePoint, float]]:
        unit = 3.0 ** (-self.weight_exp)
        for p, q, c in zip(self.p, self.q, self.counts):
            yield LatticePoint(int(p), int(q), self.level), int(c) * unit

    def point_count(self, p: int, q: int) -> int:
        """Count units at the given lattice point (0 when absent)."""
        i = np.searchsorted(self.q, q, side="left")
        j = np.searchsorted(self.q, q, side="right")
        if i == j:
            return 0
        pos = i + np.searchsorted(self.p[i:j], p, side="left")
        if pos < j and self.p[pos] == p and self.q[pos] == q:
            return int(self.counts[pos])
        return 0

    def subset(self, mask: np.ndarray, weight_exp: Optional[int] = None) -> "DiscreteMeasure":
        """The restriction to the masked atoms (order preserved)."""
        return DiscreteMeasure(
            self.level,
            self.p[mask],
            self.q[mask],
            self.counts[mask],
            self.weight_exp if weight_exp is None else weight_exp,
            validate=False,
        )


def _merge_atoms(p: np.ndarray, q: np.ndarray, counts: np.ndarray):
    """Deduplicate (p, q) pairs, summing counts."""
    key = (p << 22) | q
    distinct, inverse = np.unique(key, return_inverse=True)
    # Counts stay far below 2^53, so float accumulation in bincount is exact.
    merged = np.bincount(inverse, weights=counts.astype(np.float64))
    mp = (distinct >> 22).astype(np.int64)
    mq = (distinct & ((1 << 22) - 1)).astype(np.int64)
    return mp, mq, merged.astype(np.int64)


def generate_support(system: IfsSystem, k: int) -> DiscreteMeasure:
    """The level-k vertex iterate with exact merged weights.

    Seeds the three corners at level 1 and pushes forward k-1 times through
    the three maps, deduplicating coincident images at every step.
    """
    if not 1 <= k <= MAX_LEVEL:
        raise ResourceLimitError(
            f"level guard: k must be within [1, {MAX_LEVEL}], got {k}"
        )
    if not is_gasket_system(system):
        raise UnsupportedSystemError(
            "lattice generation supports only the gasket preset"
        )
    p = np.array([0, 2, 1], dtype=np.int64)
    q = np.array([0, 0, 1], dtype=np.int64)
    counts = np.array([1, 1, 1], dtype=np.int64)
    for j in range(1, k):
        h = 1 << (j - 1)
        np_ = np.concatenate([p, p + 2 * h, p + h])
        nq = np.concatenate([q, q, q + h])
        nc = np.concatenate([counts, counts, counts])
        p, q, counts = _merge_atoms(np_, nq, nc)
    order = np.lexsort((p, q))
    return DiscreteMeasure(k, p[order], q[order], counts[order])


def _fmt(x: float) -> str:
    return format(x, ".17g")


def write_csv(measure: DiscreteMeasure, out: Union[str, TextIO]) -> None:
    """Write atoms as CSV rows `p,q,level,x,y,weight` in (q, p) order."""
    own = isinstance(out, str)
    fh = open(out, "w", encoding="utf-8") if own else out
    try:
        fh.write(CSV_HEADER + "\n")
        scale = 1.0 / (1 << measure.level)
        unit = 3.0 ** (-measure.weight_exp)
        for p, q, c in zip(measure.p, measure.q, measure.counts):
            x = p * scale
            y = q * SQRT3 * scale
            fh.write(
                f"{p},{q},{measure.level},{_fmt(x)},{_fmt(y)},{_fmt(c * unit)}\n"
            )
    finally:
        if own:
            fh.close()
