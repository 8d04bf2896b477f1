"""Figure rendering for the CLI report paths.

Every renderer writes a PNG next to the delimited output and returns the
path. Uses the Agg backend so the CLI works headless.
"""

from __future__ import annotations

from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .density import DensityRecord, SpectrumReport, logscale  # noqa: E402
from .zoom import ZoomStep  # noqa: E402

plt.rcParams.update(
    {
        "figure.figsize": (7.0, 4.5),
        "figure.dpi": 140,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "font.size": 10,
    }
)


def render_profile(
    records: Sequence[DensityRecord],
    path: str,
    eps: Optional[float] = None,
) -> str:
    """Open/closed density vs radius; eps switches to the log reparametrized
    abscissa g(d) on [eps, 1]."""
    if eps is not None:
        xs = [logscale(r.radius, eps) for r in records]
        xlabel = f"g(d), log scale anchored at eps={eps:g}"
    else:
        xs = [r.radius for r in records]
        xlabel = "d"
    fig, ax = plt.subplots()
    ax.step(
        xs,
        [r.theta_open for r in records],
        where="post",
        lw=0.8,
        label="open-ball density",
    )
    ax.step(
        xs,
        [r.theta_closed for r in records],
        where="post",
        lw=0.8,
        label="closed-ball density",
    )
    ax.set_xlabel(xlabel)
    ax.set_ylabel("mass / (2d)^s")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def render_zoom(steps: Sequence[ZoomStep], path: str) -> str:
    """Binned distance to the target restriction vs zoom depth."""
    js = [s.depth for s in steps]
    ds = [s.distance for s in steps]
    fig, ax = plt.subplots()
    ax.plot(js, ds, marker="o", lw=1.0)
    ax.set_xlabel("zoom depth j")
    ax.set_ylabel("binned TV distance")
    ax.set_ylim(bottom=0.0)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def render_spectrum(report: SpectrumReport, path: str) -> str:
    """The two scaled density bands with their bound whiskers."""
    (vlo, vhi), (tlo, thi) = report.bands()
    a = report.alpha_mass
    fig, ax = plt.subplots(figsize=(7.0, 2.8))
    ax.hlines(1.0, vlo, vhi, lw=6, color="tab:blue", label="vertex band")
    ax.hlines(2.0, tlo, thi, lw=6, color="tab:orange", label="typical band")
    for est, ypos in zip(
        (*report.vertex_interval, *report.typical_interval),
        (1.0, 1.0, 2.0, 2.0),
    ):
        ax.plot(
            [a * est.lower, a * est.upper],
            [ypos, ypos],
            color="k",
            lw=1.0,
            marker="|",
        )
    ax.set_yticks([1.0, 2.0], ["vertex", "typical"])
    ax.set_ylim(0.4, 2.6)
    ax.set_xlabel("scaled density")
    ax.set_title(
        "disjoint" if report.disjoint else "overlapping", fontsize=10
    )
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
