from __future__ import annotations

import logging
import math
from typing import Iterable

import matplotlib
matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.collections import LineCollection

from torus_curves import IntersectionBook, PLCurve, SlopeCurve, intersection_book, twisted_pl_curve
from .utils import color_for

logger = logging.getLogger(__name__)

FIGSIZE_IN = 5.12
DPI = 100
HASH_SALT = "exact-sequence"

Segment = tuple[tuple[float, float], tuple[float, float]]


def _translates(seg: Segment) -> list[Segment]:
    """Integer translates of a lifted segment that can meet the unit square."""
    (x0, y0), (x1, y1) = seg
    return [((x0 - i, y0 - j), (x1 - i, y1 - j)) for i in _span(x0, x1) for j in _span(y0, y1)]


def _span(a: float, b: float) -> range:
    lo = math.floor(min(a, b))
    return range(lo, max(math.ceil(max(a, b)), lo + 1))


def line_segments(curve: SlopeCurve) -> list[Segment]:
    bx, by = (float(c) for c in curve.base_point())
    return _translates(((bx, by), (bx + curve.p, by + curve.q)))


def pl_segments(curve: PLCurve) -> list[Segment]:
    segs: list[Segment] = []
    for a, b in curve.edges():
        segs.extend(_translates(((float(a[0]), float(a[1])), (float(b[0]), float(b[1])))))
    return segs


def _draw(ax, segs: Iterable[Segment], color: str, label: str, width: float = 1.4, style: str = "solid") -> None:
    ax.add_collection(LineCollection(list(segs), colors=color, linewidths=width, linestyles=style, label=label))


def render_configuration(L: SlopeCurve, A: SlopeCurve, B: SlopeCurve, out_path: str,
                         show_twisted: bool = True, conv: int = 1,
                         book: IntersectionBook | None = None) -> str:
    """Draw L, L0, L1 (and the PL image of L0 under the twist) on the unit square.

    The SVG is deterministic: fixed hash salt, no date metadata.
    """
    book = book or intersection_book(L, A, B)
    plt.rcParams["svg.hashsalt"] = HASH_SALT
    fig, ax = plt.subplots(figsize=(FIGSIZE_IN, FIGSIZE_IN), dpi=DPI)
    try:
        _draw(ax, line_segments(L), color_for("L"), f"L {L}", width=2.0)
        _draw(ax, line_segments(A), color_for("L0"), f"L0 {A}")
        _draw(ax, line_segments(B), color_for("L1"), f"L1 {B}")
        if show_twisted:
            _draw(ax, pl_segments(twisted_pl_curve(L, A, conv=conv)), color_for("twisted"), "tau L0",
                  width=1.0, style="dashed")

        groups = {"x0": [], "x1": [], "q": []}
        for label, (x, y) in sorted(book.coordinates.items()):
            groups[label.split("_")[0]].append((float(x), float(y)))
        for key, color in (("x0", color_for("L0")), ("x1", color_for("L1")), ("q", "black")):
            if groups[key]:
                xs, ys = zip(*groups[key])
                ax.scatter(xs, ys, s=18, color=color, zorder=3, label=f"{key} ({len(xs)})")

        ax.set_xlim(0, 1)
        ax.set_ylim(0, 1)
        ax.set_aspect("equal")
        ax.set_xticks([0, 0.5, 1])
        ax.set_yticks([0, 0.5, 1])
        ax.set_title(f"L={L}  L0={A}  L1={B}", fontsize=9)
        ax.legend(loc="upper right", fontsize=6, framealpha=0.8)
        fig.savefig(out_path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
    logger.info("wrote %s", out_path)
    return out_path
