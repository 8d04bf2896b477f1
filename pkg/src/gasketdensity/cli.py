"""Command-line entry point.

Subcommands
-----------
gen              write the level-k atom set as CSV (p,q,level,x,y,weight)
profile          corner density profile as d,g_d,theta_open,theta_closed
vertex-extremes  extreme corner densities with certified bounds
estimate         typical-ball extremal search (packing/centred reciprocals)
spectrum         assemble and scale the two density bands
zoom             tangent-zoom demo along a digit code
verify           run the cross-module invariant suites

Exit codes: 0 success, 1 verify-suite failure, 2 usage error, 3 resource
guard. Outputs are deterministic for a fixed configuration and seed; floats
print with 17 significant digits.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .cylinders import measure_interval, sandwich_record
from .density import (
    assemble_spectrum,
    logscale,
    typical_ball_extremes,
    vertex_extremes,
    vertex_profile,
)
from .errors import EmptySearchError, ResourceLimitError
from .ifs import gasket_preset
from .lattice import (
    MAX_LEVEL,
    DiscreteMeasure,
    LatticePoint,
    generate_support,
    write_csv,
)
from .spatial import Ball, GridIndex, ball_count, build_index, default_cell_size
from .zoom import DEFAULT_GRID, zoom_sequence

ESTIMATE_GUARD = 12
OPEN_SET_NAMES = ("tri", "r0", "r1", "r2")


@dataclass(frozen=True)
class RunConfig:
    """Parsed invocation; one instance fully determines the run."""

    command: str
    k: int = 8
    eps: float = 0.05
    open_sets: Tuple[str, ...] = OPEN_SET_NAMES
    alpha: str = "natural"
    out: Optional[str] = None
    fmt: str = "csv"
    seed: int = 0
    dmin: Optional[float] = None
    dmax: Optional[float] = None
    which: str = "min"
    typical_k: Optional[int] = None
    workers: Optional[int] = None
    acknowledge_cost: bool = False
    x: float = 0.5
    y: float = 0.0
    d: float = 0.16
    code: Optional[str] = None
    j_max: int = 6
    grid: int = DEFAULT_GRID
    m: int = 8
    suite: str = "all"
    samples: int = 100
    plot: bool = False


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _to_json(value, indent: int = 0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _fmt(value)
    if value is None:
        return "null"
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = ",\n".join(
            f"{inner}{json.dumps(str(k))}: {_to_json(v, indent + 1)}"
            for k, v in value.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = ",\n".join(f"{inner}{_to_json(v, indent + 1)}" for v in value)
        return "[\n" + items + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(value)!r}")


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _plot_path(out: Optional[str], fallback: str) -> str:
    if out:
        stem, _ = os.path.splitext(out)
        return stem + ".png"
    return fallback


def _level_measure(k: int) -> DiscreteMeasure:
    return generate_support(gasket_preset(), k)


def _estimate_csv(records: Sequence[Dict]) -> str:
    lines = ["kind,k,value,lower,upper,certified,x,y,d"]
    for r in records:
        w = r["witness"]
        lines.append(
            ",".join(
                [
                    r["kind"],
                    str(r["k"]),
                    _fmt(r["value"]),
                    _fmt(r["lower"]),
                    _fmt(r["upper"]),
                    "true" if r["certified"] else "false",
                    _fmt(w["x"]),
                    _fmt(w["y"]),
                    _fmt(w["d"]),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def cmd_gen(cfg: RunConfig) -> int:
    measure = _level_measure(cfg.k)
    if cfg.out:
        write_csv(measure, cfg.out)
    else:
        write_csv(measure, sys.stdout)
    return 0


def cmd_profile(cfg: RunConfig) -> int:
    measure = _level_measure(cfg.k)
    idx = build_index(measure, default_cell_size(cfg.k))
    dmin = cfg.eps if cfg.dmin is None else cfg.dmin
    dmax = 1.0 if cfg.dmax is None else cfg.dmax
    records = vertex_profile(idx, cfg.k, dmin, dmax)
    if cfg.fmt == "json":
        payload = [
            {
                "d": r.radius,
                "g_d": logscale(r.radius, cfg.eps),
                "theta_open": r.theta_open,
                "theta_closed": r.theta_closed,
            }
            for r in records
        ]
        _emit(_to_json(payload) + "\n", cfg.out)
    else:
        lines = ["d,g_d,theta_open,theta_closed"]
        for r in records:
            lines.append(
                ",".join(
                    [
                        _fmt(r.radius),
                        _fmt(logscale(r.radius, cfg.eps)),
                        _fmt(r.theta_open),
                        _fmt(r.theta_closed),
                    ]
                )
            )
        _emit("\n".join(lines) + "\n", cfg.out)
    if cfg.plot:
        from .plots import render_profile

        render_profile(records, _plot_path(cfg.out, "profile.png"), cfg.eps)
    return 0


def cmd_vertex_extremes(cfg: RunConfig) -> int:
    measure = _level_measure(cfg.k)
    idx = build_index(measure, default_cell_size(cfg.k))
    lo, hi = vertex_extremes(idx, cfg.k)
    records = [lo.to_record(), hi.to_record()]
    if cfg.fmt == "json":
        _emit(_to_json(records) + "\n", cfg.out)
    else:
        _emit(_estimate_csv(records), cfg.out)
    return 0


def _selected_open_sets(names: Sequence[str]):
    system = gasket_preset()
    by_name = {poly.name: poly for poly in system.open_sets}
    return tuple(by_name[n] for n in names)


def _guard_estimate_level(k: int, acknowledged: bool) -> None:
    if k > ESTIMATE_GUARD and not acknowledged:
        raise ResourceLimitError(
            f"estimate guard: k={k} exceeds {ESTIMATE_GUARD}; "
            "pass --acknowledge-cost to override"
        )


def cmd_estimate(cfg: RunConfig) -> int:
    _guard_estimate_level(cfg.k, cfg.acknowledge_cost)
    measure = _level_measure(cfg.k)
    idx = build_index(measure, default_cell_size(cfg.k))
    est = typical_ball_extremes(
        idx,
        cfg.k,
        _selected_open_sets(cfg.open_sets),
        cfg.which,
        dmin=cfg.dmin,
        dmax=cfg.dmax,
        workers=cfg.workers,
    )
    record = est.to_record()
    if cfg.fmt == "json":
        _emit(_to_json(record) + "\n", cfg.out)
    else:
        _emit(_estimate_csv([record]), cfg.out)
    return 0


def cmd_spectrum(cfg: RunConfig) -> int:
    measure = _level_measure(cfg.k)
    idx = build_index(measure, default_cell_size(cfg.k))
    vertex = vertex_extremes(idx, cfg.k)

    tk = cfg.typical_k if cfg.typical_k is not None else min(cfg.k, 8)
    _guard_estimate_level(tk, cfg.acknowledge_cost)
    if tk == cfg.k:
        tidx = idx
    else:
        tidx = build_index(_level_measure(tk), default_cell_size(tk))
    sets = _selected_open_sets(cfg.open_sets)
    packing = typical_ball_extremes(
        tidx, tk, sets, "min", dmin=cfg.dmin, dmax=cfg.dmax, workers=cfg.workers
    )
    centred = typical_ball_extremes(
        tidx, tk, sets, "max", dmin=cfg.dmin, dmax=cfg.dmax, workers=cfg.workers
    )
    alpha = {
        "natural": 1.0,
        "packing": packing.value,
        "centred": centred.value,
    }[cfg.alpha]
    report = assemble_spectrum(vertex, (packing, centred), alpha)
    if cfg.fmt == "json":
        _emit(_to_json(report.to_record()) + "\n", cfg.out)
    else:
        (vlo, vhi), (tlo, thi) = report.bands()
        lines = [
            "band,lower,upper",
            f"vertex,{_fmt(vlo)},{_fmt(vhi)}",
            f"typical,{_fmt(tlo)},{_fmt(thi)}",
            f"disjoint,{'true' if report.disjoint else 'false'},",
        ]
        _emit("\n".join(lines) + "\n", cfg.out)
    if cfg.plot:
        from .plots import render_spectrum

        render_spectrum(report, _plot_path(cfg.out, "spectrum.png"))
    return 0


def _zoom_code(cfg: RunConfig) -> List[int]:
    if cfg.code is not None:
        digits = [int(c) for c in cfg.code if not c.isspace()]
        return digits
    rng = np.random.default_rng(cfg.seed)
    return [int(t) for t in rng.integers(0, 3, size=cfg.j_max)]


def cmd_zoom(cfg: RunConfig) -> int:
    measure = _level_measure(cfg.k)
    idx = build_index(measure, default_cell_size(cfg.k))
    xy = measure.xy()
    d2 = (xy[:, 0] - cfg.x) ** 2 + (xy[:, 1] - cfg.y) ** 2
    at = int(np.argmin(d2))
    center = LatticePoint(int(measure.p[at]), int(measure.q[at]), cfg.k)
    key = max(1, round(cfg.d * cfg.d * 4**cfg.k))
    target = Ball(center, Fraction(key, 4**cfg.k), mode="closed")
    steps = zoom_sequence(idx, target, _zoom_code(cfg), cfg.j_max, cfg.grid)
    if cfg.fmt == "json":
        payload = [
            {"j": s.depth, "scale": s.scale, "distance": s.distance}
            for s in steps
        ]
        _emit(_to_json(payload) + "\n", cfg.out)
    else:
        lines = ["j,scale,distance"]
        for s in steps:
            lines.append(f"{s.depth},{_fmt(s.scale)},{_fmt(s.distance)}")
        _emit("\n".join(lines) + "\n", cfg.out)
    if cfg.plot:
        from .plots import render_zoom

        render_zoom(steps, _plot_path(cfg.out, "zoom.png"))
    return 0


# ----------------------------------------------------------------------
# verify suites
# ----------------------------------------------------------------------


def _suite_mass(k: int, rng) -> Tuple[bool, str]:
    worst = 0.0
    for j in range(1, k + 1):
        worst = max(worst, abs(_level_measure(j).total - 1.0))
    return worst <= 1e-12, f"max |mass-1| = {worst:.3e} for k<={k}"


def _suite_counts(k: int, rng) -> Tuple[bool, str]:
    for j in range(1, min(k, 8) + 1):
        m = _level_measure(j)
        if m.natoms != (3**j + 3) // 2 or m.total_count != 3**j:
            return False, f"count law fails at k={j}"
    return True, f"atom counts match (3^k+3)/2 for k<={min(k, 8)}"


def _suite_scaling(k: int, rng) -> Tuple[bool, str]:
    for j in range(2, k):
        coarse = build_index(_level_measure(j), default_cell_size(j))
        fine = build_index(_level_measure(j + 1), default_cell_size(j + 1))
        z0 = LatticePoint(0, 0, j)
        z0f = LatticePoint(0, 0, j + 1)
        for d_num in rng.integers(1, 2**j, size=20):
            r2 = Fraction(int(d_num) ** 2, 4**j)
            a = ball_count(coarse, Ball(z0, r2, mode="open"))
            b = ball_count(fine, Ball(z0f, r2 / 4, mode="open"))
            if a != b:
                return False, f"scaling identity fails at k={j}, key={d_num}"
    return True, f"corner scaling identity holds for k<{k}"


def _suite_bounds(k: int, rng) -> Tuple[bool, str]:
    for j in range(2, min(k, 12) + 1):
        idx = build_index(_level_measure(j), default_cell_size(j))
        for rec in vertex_profile(idx, j, 0.3, 1.0):
            if rec.theta_open > rec.theta_closed:
                return False, f"open>closed at k={j}, d={rec.radius}"
        lo, hi = vertex_extremes(idx, j)
        for est in (lo, hi):
            if not est.lower <= est.value <= est.upper:
                return False, f"{est.kind} bounds disordered at k={j}"
    return True, f"profiles ordered and extreme bounds bracket for k<={min(k, 12)}"


def _suite_ball(k: int, rng) -> Tuple[bool, str]:
    checked = 0
    for j in range(1, min(k, 6) + 1):
        m = _level_measure(j)
        idx = build_index(m, default_cell_size(j))
        xy = m.xy()
        for _ in range(50):
            cx, cy = rng.uniform(-0.2, 1.2), rng.uniform(-0.2, 1.0)
            r = rng.uniform(0.01, 0.8)
            mode = "open" if rng.integers(2) else "closed"
            got = ball_count(idx, Ball((cx, cy), r * r, mode=mode))
            d2 = (xy[:, 0] - cx) ** 2 + (xy[:, 1] - cy) ** 2
            inside = d2 < r * r if mode == "open" else d2 <= r * r
            want = int(m.counts[inside].sum())
            if got != want:
                return False, f"ball count mismatch at k={j}: {got} vs {want}"
            checked += 1
    return True, f"{checked} indexed counts equal brute force"


def _random_sandwich_inputs(k: int, rng):
    # Dyadic centers keep the exact discrete radii nondegenerate.
    denom = 2 ** int(rng.integers(2, 6))
    cx = int(rng.integers(0, denom + 1)) / denom
    cy = int(rng.integers(0, denom + 1)) / denom * math.sqrt(3.0) / 2.0
    reach = max(
        math.hypot(cx - px, cy - py)
        for px, py in ((0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3.0) / 2.0))
    )
    lo = 2.0**-k * 1.5
    d = float(rng.uniform(lo, min(reach, 1.0)))
    return (cx, cy), d


def _suite_sandwich(k: int, rng, samples: int) -> Tuple[bool, str, List[Dict]]:
    system = gasket_preset()
    records = []
    kk = min(k, 10)
    idx = build_index(_level_measure(kk), default_cell_size(kk))
    for _ in range(samples):
        m = int(rng.integers(3, min(kk, 10) + 1))
        x, d = _random_sandwich_inputs(kk, rng)
        rec = sandwich_record(idx, x, d, kk, m, system)
        records.append(rec)
        if not rec["ok"]:
            return False, f"sandwich violated at x={x}, d={d}, m={m}", records
    return True, f"{samples} sandwich checks hold at k={kk}", records


def _suite_oracle(k: int, rng) -> Tuple[bool, str]:
    system = gasket_preset()
    balls = [
        Ball((0.0, 0.0), Fraction(9, 25), mode="closed"),
        Ball((0.5, 0.0), Fraction(1, 30), mode="closed"),
        Ball((0.25, 0.4), Fraction(1, 12), mode="closed"),
    ]
    top = min(k, 10)
    for ball in balls:
        prev = None
        intervals = []
        for m in range(2, top + 1):
            cur = measure_interval(system, ball, m)
            intervals.append(cur)
            if prev is not None:
                if cur.lower < prev.lower - 1e-12 or cur.upper > prev.upper + 1e-12:
                    return False, f"refinement not monotone at m={m}"
            prev = cur
        for a in intervals:
            for b in intervals:
                if a.lower > b.upper + 1e-12:
                    return False, "oracle intervals do not intersect"
    return True, f"oracle refinement monotone through m={top}"


def cmd_verify(cfg: RunConfig) -> int:
    rng = np.random.default_rng(cfg.seed)
    suites = {
        "mass": lambda: _suite_mass(cfg.k, rng),
        "counts": lambda: _suite_counts(cfg.k, rng),
        "scaling": lambda: _suite_scaling(cfg.k, rng),
        "bounds": lambda: _suite_bounds(cfg.k, rng),
        "ball": lambda: _suite_ball(cfg.k, rng),
        "oracle": lambda: _suite_oracle(cfg.k, rng),
    }
    chosen = list(suites) + ["sandwich"] if cfg.suite == "all" else [cfg.suite]
    failed = False
    sandwich_records: List[Dict] = []
    for name in chosen:
        if name == "sandwich":
            ok, msg, sandwich_records = _suite_sandwich(cfg.k, rng, cfg.samples)
        elif name in suites:
            ok, msg = suites[name]()
        else:
            raise ValueError(f"unknown suite {name!r}")
        failed = failed or not ok
        print(f"{'ok' if ok else 'FAIL':4s} {name}: {msg}")
    if sandwich_records and cfg.out:
        _emit(_to_json(sandwich_records) + "\n", cfg.out)
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gasket-density",
        description="Discrete gasket measures, extremal ball densities, "
        "and the tangent-zoom demo.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, default_k):
        p.add_argument("--k", type=int, default=default_k, help="lattice level")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument(
            "--format",
            dest="fmt",
            choices=("csv", "json"),
            default="csv",
            help="output format",
        )

    p = sub.add_parser("gen", help="write the level-k atom set")
    add_common(p, 8)

    p = sub.add_parser("profile", help="corner density profile")
    add_common(p, 8)
    p.add_argument("--eps", type=float, default=0.05, help="log-scale anchor")
    p.add_argument("--dmin", type=float, help="smallest radius (default: eps)")
    p.add_argument("--dmax", type=float, help="largest radius (default: 1)")
    p.add_argument("--plot", action="store_true", help="render a PNG as well")

    p = sub.add_parser("vertex-extremes", help="extreme corner densities")
    add_common(p, 8)

    p = sub.add_parser("estimate", help="typical-ball extremal search")
    add_common(p, 8)
    p.add_argument("--which", choices=("min", "max"), default="min")
    p.add_argument(
        "--open-sets",
        default=",".join(OPEN_SET_NAMES),
        help="comma list from {tri,r0,r1,r2}",
    )
    p.add_argument("--dmin", type=float, help="radius window start")
    p.add_argument("--dmax", type=float, help="radius window end")
    p.add_argument("--workers", type=int, help="parallel worker count")
    p.add_argument(
        "--acknowledge-cost",
        action="store_true",
        help=f"allow k above the default guard ({ESTIMATE_GUARD})",
    )

    p = sub.add_parser("spectrum", help="assemble the two density bands")
    add_common(p, 8)
    p.add_argument("--typical-k", type=int, help="search level (default: min(k,8))")
    p.add_argument(
        "--alpha",
        choices=("natural", "packing", "centred"),
        default="natural",
        help="scaling mass",
    )
    p.add_argument("--open-sets", default=",".join(OPEN_SET_NAMES))
    p.add_argument("--dmin", type=float)
    p.add_argument("--dmax", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--acknowledge-cost", action="store_true")
    p.add_argument("--plot", action="store_true")

    p = sub.add_parser("zoom", help="tangent-zoom demo")
    add_common(p, 12)
    p.add_argument("--x", type=float, default=0.5, help="target center x")
    p.add_argument("--y", type=float, default=0.0, help="target center y")
    p.add_argument("--d", type=float, default=0.16, help="target radius")
    p.add_argument("--code", help="explicit digit string, e.g. 0120")
    p.add_argument("--seed", type=int, default=0, help="code seed")
    p.add_argument("--j-max", type=int, default=6)
    p.add_argument("--grid", type=int, default=DEFAULT_GRID)
    p.add_argument("--plot", action="store_true")

    p = sub.add_parser("verify", help="run invariant suites")
    add_common(p, 8)
    p.add_argument(
        "--suite",
        default="all",
        choices=("all", "mass", "counts", "scaling", "bounds", "ball", "oracle", "sandwich"),
    )
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)

    return parser


def config_from_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    fields = {
        k: v for k, v in vars(args).items() if v is not None or k in ("out",)
    }
    if "open_sets" in fields:
        names = tuple(
            n.strip() for n in str(fields["open_sets"]).split(",") if n.strip()
        )
        for n in names:
            if n not in OPEN_SET_NAMES:
                build_parser().error(f"unknown open set {n!r}")
        fields["open_sets"] = names
    return RunConfig(**fields)


def run(cfg: RunConfig) -> int:
    handlers = {
        "gen": cmd_gen,
        "profile": cmd_profile,
        "vertex-extremes": cmd_vertex_extremes,
        "estimate": cmd_estimate,
        "spectrum": cmd_spectrum,
        "zoom": cmd_zoom,
        "verify": cmd_verify,
    }
    return handlers[cfg.command](cfg)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = config_from_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return run(cfg)
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, EmptySearchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
