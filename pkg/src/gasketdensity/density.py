"""Spherical densities, vertex extremes, typical-ball searches, spectrum.

Density of a ball is mass/(2d)^s with s the similarity dimension. Three
estimators live here:

* vertex_profile / vertex_extremes: the density of balls centered at the
  origin corner, swept over the exact set of atom distances in
  [1/2 - 2^{-k}, 1]. The extremes carry certified two-sided bounds obtained
  from perturbed-radius masses (lower/upper factors (1 -+ 2^{1-k})^s and
  exact masses at d +- 2^{-k}).

* typical_ball_extremes: searches balls B(x, d) with x an atom, d an atom
  distance inside a radius window, and the ball provably inside one of the
  configured feasible open sets. The minimum open-ball density estimates the
  reciprocal packing constant (its upper bound factor (1 - 2^{5-k}/sqrt(3))^{-s}
  is certified); the maximum closed-ball density estimates the reciprocal
  centred constant (bounds heuristic, flagged uncertified).

* assemble_spectrum: scales the two density intervals by a measure's total
  mass and certifies their disjointness.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, EmptySearchError, InvariantViolationError
from .ifs import ConvexPolygon
from .lattice import DiscreteMeasure
from .spatial import GridIndex

WORKERS_ENV = "GASKETDENSITY_WORKERS"

CONTAINMENT_SLACK = 1e-15

# Default typical-search radius window: one octave around the known optimal
# radii, bounded away from the degenerate few-atom balls near the lattice
# spacing and from the half-scale copies of the optima (which tie exactly by
# self-similarity and would make the argmin/argmax ambiguous).
TYPICAL_DMIN = math.sqrt(3.0) / 16.0
TYPICAL_DMAX = math.sqrt(3.0) / 4.0


def density(mass: float, d: float, s: float) -> float:
    """The s-density mass/(2d)^s of a ball of radius d."""
    if d <= 0:
        raise DomainError("ball radius must be positive")
    if mass < 0:
        raise DomainError("mass must be nonnegative")
    return mass / (2.0 * d) ** s


def logscale(d: float, eps: float) -> float:
    """Logarithmic reparametrization of [eps, 1] onto itself.

    g(d) = eps + (eps - 1)/log(eps) * (log(d) - log(eps)); strictly
    increasing with g(eps) = eps and g(1) = 1.
    """
    if not 0.0 < eps < 1.0:
        raise DomainError("eps must be inside (0, 1)")
    if not eps <= d <= 1.0:
        raise DomainError(f"d={d} outside [{eps}, 1]")
    return eps + (eps - 1.0) / math.log(eps) * (math.log(d) - math.log(eps))


@dataclass(frozen=True)
class DensityRecord:
    """Open and closed densities at one exact candidate radius."""

    radius: float
    key: int
    theta_open: float
    theta_closed: float

    def __post_init__(self):
        if self.theta_open < 0 or self.theta_closed < 0:
            raise InvariantViolationError("densities must be nonnegative")
        if self.theta_open > self.theta_closed:
            raise InvariantViolationError("open density cannot exceed closed")


@dataclass(frozen=True)
class BoundedEstimate:
    """A point estimate with two-sided bounds and the witness ball.

    lower_certified/upper_certified track which side carries a proved
    perturbation bound; `certified` in exports is their conjunction.
    """

    kind: str
    level: int
    value: float
    lower: float
    upper: float
    witness_radius: float
    witness_center: Tuple[float, float]
    lower_certified: bool = True
    upper_certified: bool = True

    def __post_init__(self):
        if not self.lower <= self.value <= self.upper:
            raise InvariantViolationError(
                f"{self.kind}: bounds [{self.lower}, {self.upper}] "
                f"do not bracket value {self.value}"
            )

    @property
    def certified(self) -> bool:
        return self.lower_certified and self.upper_certified

    def to_record(self) -> Dict:
        return {
            "kind": self.kind,
            "k": self.level,
            "value": self.value,
            "lower": self.lower,
            "upper": self.upper,
            "certified": self.certified,
            "witness": {
                "x": self.witness_center[0],
                "y": self.witness_center[1],
                "d": self.witness_radius,
            },
        }


def _corner_key_masses(measure: DiscreteMeasure):
    """Distinct squared-distance keys from the origin corner, with the
    cumulative count strictly below and through each key."""
    keys = measure.p * measure.p + 3 * measure.q * measure.q
    order = np.argsort(keys, kind="stable")
    sk = keys[order]
    sc = measure.counts[order]
    cum = np.cumsum(sc)
    last = np.nonzero(np.diff(sk))[0]
    ends = np.concatenate([last, [len(sk) - 1]])
    distinct = sk[ends]
    closed = cum[ends]
    below = np.concatenate([[0], closed[:-1]])
    return distinct, below, closed


def _closed_count_through(distinct: np.ndarray, closed: np.ndarray, bound: int) -> int:
    pos = np.searchsorted(distinct, bound, side="right")
    return int(closed[pos - 1]) if pos > 0 else 0


def vertex_profile(
    idx: GridIndex, k: int, dmin: float, dmax: float
) -> List[DensityRecord]:
    """Density records at every atom distance from the origin corner in
    [dmin, dmax], sorted by radius."""
    if not 0.0 < dmin < dmax <= 1.0:
        raise DomainError("need 0 < dmin < dmax <= 1")
    m = idx.measure
    if k != m.level:
        raise DomainError(f"index holds level {m.level}, not {k}")
    s = math.log(3.0) / math.log(2.0)
    distinct, below, closed = _corner_key_masses(m)
    four = 1 << (2 * k)
    klo = math.ceil(Fraction(float(dmin)) ** 2 * four)
    khi = math.floor(Fraction(float(dmax)) ** 2 * four)
    sel = (distinct >= max(klo, 1)) & (distinct <= khi)
    unit = 3.0 ** (-k)
    scale = 1.0 / (1 << k)
    out = []
    for key, lo, hi in zip(distinct[sel], below[sel], closed[sel]):
        d = math.sqrt(key) * scale
        denom = (2.0 * d) ** s
        out.append(
            DensityRecord(d, int(key), lo * unit / denom, hi * unit / denom)
        )
    return out


def vertex_extremes(idx: GridIndex, k: int) -> Tuple[BoundedEstimate, BoundedEstimate]:
    """Extreme corner densities over the sweep window [1/2 - 2^{-k}, 1].

    Returns (minimum open-ball density, maximum closed-ball density), each
    with certified bounds: the min is bracketed by (1 - 2^{1-k})^s times
    itself from below and by the exact open mass at d + 2^{-k} from above;
    the max symmetrically.
    """
    if k < 2:
        raise DomainError("vertex extremes need k >= 2")
    m = idx.measure
    if k != m.level:
        raise DomainError(f"index holds level {m.level}, not {k}")
    s = math.log(3.0) / math.log(2.0)
    distinct, below, closed = _corner_key_masses(m)
    k0 = ((1 << (k - 1)) - 1) ** 2
    sel = np.nonzero((distinct >= k0) & (distinct <= 1 << (2 * k)))[0]
    keys = distinct[sel]
    unit = 3.0 ** (-k)
    scale = 1.0 / (1 << k)
    dvals = np.sqrt(keys) * scale
    denoms = (2.0 * dvals) ** s
    theta_open = below[sel] * unit / denoms
    theta_closed = closed[sel] * unit / denoms

    imin = int(np.argmin(theta_open))
    imax = int(np.argmax(theta_closed))
    kmin, kmax = int(keys[imin]), int(keys[imax])
    dmin_w, dmax_w = float(dvals[imin]), float(dvals[imax])
    vmin, vmax = float(theta_open[imin]), float(theta_closed[imax])

    # Exact perturbed-radius masses: open mass at d + 2^{-k} counts keys up
    # to K + floor(2 sqrt(K)) (+1 when 4K is not a perfect square); closed
    # mass at d - 2^{-k} counts keys up to K + 1 - ceil(2 sqrt(K)).
    r = math.isqrt(4 * kmin)
    up_bound = kmin + r + (0 if r * r == 4 * kmin else 1)
    up_mass = _closed_count_through(distinct, closed, up_bound) * unit
    r = math.isqrt(4 * kmax)
    down_bound = (kmax + 1 - r) if r * r == 4 * kmax else (kmax - r)
    down_mass = _closed_count_through(distinct, closed, down_bound) * unit

    half_step = 2.0 ** (1 - k)
    min_est = BoundedEstimate(
        kind="vertex-min",
        level=k,
        value=vmin,
        lower=(1.0 - half_step) ** s * vmin,
        upper=up_mass / (2.0 * dmin_w) ** s,
        witness_radius=dmin_w,
        witness_center=(0.0, 0.0),
    )
    max_est = BoundedEstimate(
        kind="vertex-max",
        level=k,
        value=vmax,
        lower=down_mass / (2.0 * dmax_w) ** s,
        upper=(1.0 + half_step) ** s * vmax,
        witness_radius=dmax_w,
        witness_center=(0.0, 0.0),
    )
    return min_est, max_est


# ----------------------------------------------------------------------
# Typical-ball search
# ----------------------------------------------------------------------

_SEARCH: Dict = {}


def _init_search(state: Dict) -> None:
    _SEARCH.update(state)


def _cylinder_masks(p: np.ndarray, q: np.ndarray, k: int) -> np.ndarray:
    """Bit i set when the atom lies in the closed hull of first-level
    cylinder i; the three shared midpoints carry two bits."""
    h = 1 << (k - 2)
    m0 = (q <= h) & (p + q <= 2 * h)
    m1 = p - q >= 2 * h
    m2 = q >= h
    return (
        m0.astype(np.uint8)
        | (m1.astype(np.uint8) << 1)
        | (m2.astype(np.uint8) << 2)
    )


_INVERSE_SHIFTS = ((0, 0), (2, 0), (1, 1))  # translation units of 2^{k-1}


def _scan_centers(bounds: Tuple[int, int]):
    """Best (value, key, q, p) over a contiguous range of center indices.

    For which='min' the value is the open density, for 'max' the negated
    closed density, so smaller tuples always win and the (key, q, p) tail
    implements the radius-then-center tie-break.

    A candidate ball contained in a single first-level cylinder f_i measures
    the configuration of the doubled ball at f_i^{-1}(x) with one level less
    resolution (exact scaling identity); when that doubled ball is itself
    typical and inside the radius window the candidate is skipped as a
    redundant coarse copy of a finer family member.
    """
    st = _SEARCH
    p, q, counts = st["p"], st["q"], st["counts"]
    masks = st["masks"]
    polys = st["polys"]
    centers = st["centers"]
    caps = st["caps"]
    klo, khi = st["klo"], st["khi"]
    s, k = st["s"], st["k"]
    minimize = st["which"] == "min"
    unit = 3.0 ** (-k)
    scale = 1.0 / (1 << k)
    sqrt3 = math.sqrt(3.0)
    best = None
    for ci in range(bounds[0], bounds[1]):
        c = centers[ci]
        p0, q0 = int(p[c]), int(q[c])
        dp = p - p0
        dq = q - q0
        keys = dp * dp + 3 * dq * dq
        near = keys <= khi
        nk = keys[near]
        nc = counts[near]
        order = np.argsort(nk, kind="stable")
        sk = nk[order]
        cum = np.cumsum(nc[order])
        cum_and = np.bitwise_and.accumulate(masks[near][order])
        last = np.nonzero(np.diff(sk))[0]
        ends = np.concatenate([last, [len(sk) - 1]])
        distinct = sk[ends]
        closed = cum[ends]
        below = np.concatenate([[0], closed[:-1]])
        and_bits = cum_and[ends]
        dvals = np.sqrt(distinct) * scale
        ok = (distinct >= klo) & (dvals < caps[ci] - CONTAINMENT_SLACK)
        for i, (sp, sq) in enumerate(_INVERSE_SHIFTS):
            nested = ok & ((and_bits & (1 << i)) != 0) & (4 * distinct <= khi)
            if not nested.any():
                continue
            half = 1 << (k - 1)
            x2 = (2 * p0 - sp * half) * scale
            y2 = (2 * q0 - sq * half) * sqrt3 * scale
            cap2 = max(poly.min_edge_distance((x2, y2)) for poly in polys)
            ok &= ~(nested & (2.0 * dvals < cap2 - CONTAINMENT_SLACK))
        if not ok.any():
            continue
        denom = (2.0 * dvals[ok]) ** s
        if minimize:
            vals = below[ok] * unit / denom
        else:
            vals = -(closed[ok] * unit / denom)
        j = int(np.argmin(vals))
        cand = (
            float(vals[j]),
            int(distinct[ok][j]),
            q0,
            p0,
        )
        if best is None or cand < best:
            best = cand
    return best


def _resolve_workers(workers: Optional[int]) -> int:
    cap = os.environ.get(WORKERS_ENV)
    if workers is None:
        workers = int(cap) if cap else 1
    elif cap:
        workers = min(workers, int(cap))
    return max(1, workers)


def typical_ball_extremes(
    idx: GridIndex,
    k: int,
    open_sets: Sequence[ConvexPolygon],
    which: str,
    dmin: Optional[float] = None,
    dmax: Optional[float] = None,
    workers: Optional[int] = None,
) -> BoundedEstimate:
    """Extremal density over typical balls, as a reciprocal-form estimate.

    which='min' minimizes open-ball density and returns its reciprocal (the
    packing-type estimate; upper bound certified, lower heuristic);
    which='max' maximizes closed-ball density and returns its reciprocal
    (the centred-type estimate; both bounds heuristic).
    """
    if k < 4:
        raise DomainError("typical-ball search needs k >= 4")
    if which not in ("min", "max"):
        raise DomainError("which must be 'min' or 'max'")
    if not open_sets:
        raise DomainError("need at least one open set")
    m = idx.measure
    if k != m.level:
        raise DomainError(f"index holds level {m.level}, not {k}")
    dmin = TYPICAL_DMIN if dmin is None else float(dmin)
    dmax = TYPICAL_DMAX if dmax is None else float(dmax)
    if not 0.0 < dmin < dmax:
        raise DomainError("need 0 < dmin < dmax")

    xy = m.xy()
    caps = None
    for poly in open_sets:
        d = poly.bulk_min_edge_distance(xy)
        caps = d if caps is None else np.maximum(caps, d)
    centers = np.nonzero(caps > dmin + CONTAINMENT_SLACK)[0]
    if len(centers) == 0:
        raise EmptySearchError("no center admits a typical ball above dmin")

    four = 1 << (2 * k)
    state = {
        "p": m.p,
        "q": m.q,
        "counts": m.counts,
        "masks": _cylinder_masks(m.p, m.q, k),
        "polys": tuple(open_sets),
        "centers": centers,
        "caps": caps[centers],
        "klo": math.ceil(Fraction(float(dmin)) ** 2 * four),
        "khi": math.floor(Fraction(float(dmax)) ** 2 * four),
        "s": math.log(3.0) / math.log(2.0),
        "k": k,
        "which": which,
    }

    nworkers = _resolve_workers(workers)
    if nworkers == 1:
        _init_search(state)
        try:
            best = _scan_centers((0, len(centers)))
        finally:
            _SEARCH.clear()
    else:
        chunk = max(1, (len(centers) + 4 * nworkers - 1) // (4 * nworkers))
        ranges = [
            (a, min(a + chunk, len(centers)))
            for a in range(0, len(centers), chunk)
        ]
        best = None
        with ProcessPoolExecutor(
            max_workers=nworkers, initializer=_init_search, initargs=(state,)
        ) as pool:
            for cand in pool.map(_scan_centers, ranges):
                if cand is not None and (best is None or cand < best):
                    best = cand

    if best is None:
        raise EmptySearchError("no typical ball found inside the radius window")

    val, key, q0, p0 = best
    theta = val if which == "min" else -val
    if theta <= 0:
        raise EmptySearchError("extremal density is zero inside the window")
    estimate = 1.0 / theta
    scale = 1.0 / (1 << k)
    witness_d = math.sqrt(key) * scale
    witness_xy = (p0 * scale, q0 * math.sqrt(3.0) * scale)

    s = state["s"]
    shrink = (1.0 - 2.0 ** (5 - k) / math.sqrt(3.0)) ** (-s)
    grow = (1.0 + 2.0 ** (5 - k) / math.sqrt(3.0)) ** (-s)
    if which == "min":
        return BoundedEstimate(
            kind="packing",
            level=k,
            value=estimate,
            lower=grow * estimate,
            upper=shrink * estimate,
            witness_radius=witness_d,
            witness_center=witness_xy,
            lower_certified=False,
            upper_certified=True,
        )
    return BoundedEstimate(
        kind="centred",
        level=k,
        value=estimate,
        lower=grow * estimate,
        upper=shrink * estimate,
        witness_radius=witness_d,
        witness_center=witness_xy,
        lower_certified=False,
        upper_certified=False,
    )


@dataclass(frozen=True)
class SpectrumReport:
    """Two density bands scaled by a measure's total mass."""

    vertex_interval: Tuple[BoundedEstimate, BoundedEstimate]
    typical_interval: Tuple[BoundedEstimate, BoundedEstimate]
    alpha_mass: float
    disjoint: bool

    def bands(self) -> Tuple[Tuple[float, float], Tuple[float, float]]:
        a = self.alpha_mass
        vmin, vmax = self.vertex_interval
        tmin, tmax = self.typical_interval
        return (
            (a * vmin.value, a * vmax.value),
            (a * tmin.value, a * tmax.value),
        )

    def to_record(self) -> Dict:
        (lo1, hi1), (lo2, hi2) = self.bands()
        return {
            "alpha_mass": self.alpha_mass,
            "vertex_band": [lo1, hi1],
            "typical_band": [lo2, hi2],
            "disjoint": self.disjoint,
            "estimates": [
                e.to_record()
                for e in (*self.vertex_interval, *self.typical_interval)
            ],
        }


def assemble_spectrum(
    vertex: Tuple[BoundedEstimate, BoundedEstimate],
    typical: Tuple[BoundedEstimate, BoundedEstimate],
    alpha_mass: float = 1.0,
) -> SpectrumReport:
    """Combine vertex extremes with reciprocal typical-ball estimates.

    `typical` carries the (packing, centred) reciprocal estimates; the
    report's typical interval is their reciprocal band [1/P, 1/C]. The
    disjointness verdict compares the certified upper bound of the vertex
    band against the certified lower endpoint 1/P_upper of the typical band.
    """
    if alpha_mass <= 0:
        raise DomainError("alpha_mass must be positive")
    vmin, vmax = vertex
    packing, centred = typical
    for est in (vmin, vmax, packing, centred):
        if not est.lower <= est.value <= est.upper:
            raise InvariantViolationError(f"estimate {est.kind} is inconsistent")

    def reciprocal(est: BoundedEstimate, kind: str) -> BoundedEstimate:
        return BoundedEstimate(
            kind=kind,
            level=est.level,
            value=1.0 / est.value,
            lower=1.0 / est.upper,
            upper=1.0 / est.lower,
            witness_radius=est.witness_radius,
            witness_center=est.witness_center,
            lower_certified=est.upper_certified,
            upper_certified=est.lower_certified,
        )

    tmin = reciprocal(packing, "typical-min")
    tmax = reciprocal(centred, "typical-max")
    if tmin.value > tmax.value:
        raise InvariantViolationError(
            "packing reciprocal exceeds centred reciprocal"
        )
    disjoint = vmax.upper < tmin.lower
    return SpectrumReport(
        vertex_interval=(vmin, vmax),
        typical_interval=(tmin, tmax),
        alpha_mass=float(alpha_mass),
        disjoint=bool(disjoint),
    )
