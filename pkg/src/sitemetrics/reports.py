"""Aggregate distribution reports grouped by land use or subzone.

Each numeric indicator gets a five-number summary per group (quantiles by
linear interpolation); coverage-ratio outliers are excluded from every
statistic and counted separately. Output is RFC-4180 CSV plus box-plot and
stacked-bar SVG files. SVG is generated directly (no plotting library) so
repeated runs are byte-identical.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .records import Dataset, FormType, LayoutPattern

NUMERIC_INDICATORS = ("SI", "PTA", "CI", "FAR", "BCR")
GROUP_FIELDS = ("land_use", "subzone")


@dataclass
class GroupStats:
    group: str
    indicator: str
    count: int  # values with the indicator computed, outliers included
    outliers: int
    minimum: float | None
    q1: float | None
    median: float | None
    q3: float | None
    maximum: float | None


def _plot_value(plot, indicator: str) -> float | None:
    return {
        "SI": plot.si,
        "PTA": plot.pta,
        "CI": plot.ci,
        "FAR": plot.far,
        "BCR": plot.bcr,
    }[indicator]


def _quantiles(values: list[float]) -> tuple[float, float, float, float, float]:
    arr = np.asarray(values, dtype=float)
    q = np.percentile(arr, [0, 25, 50, 75, 100])
    return tuple(float(v) for v in q)


def aggregate_stats(ds: Dataset, group_by: str) -> list[GroupStats]:
    """Per-group five-number summaries for every numeric indicator.

    BCR values flagged as outliers are excluded from the summary numbers
    per the coverage-ratio outlier protocol, but still counted.
    """
    if group_by not in GROUP_FIELDS:
        raise ValueError(f"group_by must be one of {GROUP_FIELDS}, got {group_by!r}")
    groups: dict[str, list] = {}
    for plot in ds.plots:
        groups.setdefault(getattr(plot, group_by), []).append(plot)

    out: list[GroupStats] = []
    for group in sorted(groups):
        plots = groups[group]
        for indicator in NUMERIC_INDICATORS:
            values = [( _plot_value(p, indicator), bool(p.bcr_outlier)) for p in plots if _plot_value(p, indicator) is not None]
            if indicator == "BCR":
                clean = [v for v, outlier in values if not outlier]
                n_outliers = sum(1 for _, outlier in values if outlier)
            else:
                clean = [v for v, _ in values]
                n_outliers = 0
            if clean:
                mn, q1, med, q3, mx = _quantiles(clean)
            else:
                mn = q1 = med = q3 = mx = None
            out.append(
                GroupStats(
                    group=group,
                    indicator=indicator,
                    count=len(values),
                    outliers=n_outliers,
                    minimum=mn,
                    q1=q1,
                    median=med,
                    q3=q3,
                    maximum=mx,
                )
            )
    return out


def category_distribution(ds: Dataset, group_by: str, what: str) -> dict[str, dict[str, int]]:
    """group -> category -> count, for form types or layout patterns."""
    out: dict[str, dict[str, int]] = {}
    if what == "form":
        plot_group = {p.mp_name: getattr(p, group_by) for p in ds.plots}
        for b in ds.buildings:
            if b.form_type is None or b.plot_id not in plot_group:
                continue
            g = plot_group[b.plot_id]
            out.setdefault(g, {})
            key = b.form_type.value
            out[g][key] = out[g].get(key, 0) + 1
    elif what == "layout":
        for p in ds.plots:
            if not p.layout_assigned:
                continue
            g = getattr(p, group_by)
            key = p.layout_pattern.value if p.layout_pattern else "null"
            out.setdefault(g, {})
            out[g][key] = out[g].get(key, 0) + 1
    else:
        raise ValueError(f"unknown distribution {what!r}")
    return {g: dict(sorted(cats.items())) for g, cats in sorted(out.items())}


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def write_stats_csv(path: str | Path, stats: list[GroupStats], group_by: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, quoting=csv.QUOTE_MINIMAL)
        writer.writerow([group_by, "indicator", "count", "outliers", "min", "q1", "median", "q3", "max"])
        for s in stats:
            writer.writerow(
                [
                    s.group,
                    s.indicator,
                    s.count,
                    s.outliers,
                    *("" if v is None else repr(v) for v in (s.minimum, s.q1, s.median, s.q3, s.maximum)),
                ]
            )


def write_distribution_csv(path: str | Path, dist: dict[str, dict[str, int]], group_by: str, what: str) -> None:
    categories = sorted({c for cats in dist.values() for c in cats})
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, quoting=csv.QUOTE_MINIMAL)
        writer.writerow([group_by, f"{what}_category", "count", "share"])
        for group, cats in dist.items():
            total = sum(cats.values())
            for cat in categories:
                n = cats.get(cat, 0)
                if n:
                    writer.writerow([group, cat, n, repr(n / total)])


# ---------------------------------------------------------------------------
# SVG (hand-rolled; deterministic output)
# ---------------------------------------------------------------------------

_PALETTE = ("#4c78a8", "#f58518", "#54a24b", "#e45756", "#72b7b2", "#eeca3b", "#b279a2", "#9d755d")
_FONT = 'font-family="monospace" font-size="11"'


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _svg_doc(width: int, height: int, body: list[str], metadata: dict | None) -> str:
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    ]
    if metadata is not None:
        payload = json.dumps(metadata, sort_keys=True).replace("&", "&amp;").replace("<", "&lt;")
        parts.append(f"<metadata>{payload}</metadata>")
    parts.append(f'<rect width="{width}" height="{height}" fill="white"/>')
    parts.extend(body)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def boxplot_svg(
    title: str,
    groups: list[str],
    summaries: list[tuple[float, float, float, float, float] | None],
    metadata: dict | None = None,
) -> str:
    """Box-and-whisker chart: one box per group from its five-number summary."""
    margin_l, margin_r, margin_t, margin_b = 60, 20, 40, 120
    slot = 46
    width = margin_l + margin_r + slot * max(1, len(groups))
    height = 360
    plot_h = height - margin_t - margin_b

    present = [s for s in summaries if s is not None]
    lo = min((s[0] for s in present), default=0.0)
    hi = max((s[4] for s in present), default=1.0)
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo

    def y(v: float) -> float:
        return margin_t + plot_h * (1.0 - (v - lo) / span)

    body = [f'<text x="{margin_l}" y="20" {_FONT} font-size="13">{_escape(title)}</text>']
    # y axis with 5 ticks
    body.append(
        f'<line x1="{margin_l}" y1="{margin_t}" x2="{margin_l}" y2="{margin_t + plot_h}" stroke="black"/>'
    )
    for k in range(5):
        v = lo + span * k / 4.0
        yy = y(v)
        body.append(f'<line x1="{margin_l - 4}" y1="{_fmt(yy)}" x2="{margin_l}" y2="{_fmt(yy)}" stroke="black"/>')
        body.append(f'<text x="{margin_l - 8}" y="{_fmt(yy + 4)}" {_FONT} text-anchor="end">{v:.3g}</text>')

    for i, (group, summary) in enumerate(zip(groups, summaries)):
        cx = margin_l + slot * i + slot / 2.0
        label_y = margin_t + plot_h + 12
        body.append(
            f'<text x="{_fmt(cx)}" y="{_fmt(label_y)}" {_FONT} text-anchor="end" '
            f'transform="rotate(-45 {_fmt(cx)} {_fmt(label_y)})">{_escape(group)}</text>'
        )
        if summary is None:
            continue
        mn, q1, med, q3, mx = summary
        half = 14.0
        body.append(f'<line x1="{_fmt(cx)}" y1="{_fmt(y(mn))}" x2="{_fmt(cx)}" y2="{_fmt(y(q1))}" stroke="black"/>')
        body.append(f'<line x1="{_fmt(cx)}" y1="{_fmt(y(q3))}" x2="{_fmt(cx)}" y2="{_fmt(y(mx))}" stroke="black"/>')
        body.append(
            f'<rect x="{_fmt(cx - half)}" y="{_fmt(y(q3))}" width="{_fmt(2 * half)}" '
            f'height="{_fmt(max(y(q1) - y(q3), 0.5))}" fill="{_PALETTE[0]}" fill-opacity="0.6" stroke="black"/>'
        )
        body.append(
            f'<line x1="{_fmt(cx - half)}" y1="{_fmt(y(med))}" x2="{_fmt(cx + half)}" y2="{_fmt(y(med))}" '
            f'stroke="black" stroke-width="2"/>'
        )
        for v in (mn, mx):
            body.append(
                f'<line x1="{_fmt(cx - half / 2)}" y1="{_fmt(y(v))}" x2="{_fmt(cx + half / 2)}" y2="{_fmt(y(v))}" stroke="black"/>'
            )
    return _svg_doc(width, height, body, metadata)


def stacked_bar_svg(
    title: str,
    dist: dict[str, dict[str, int]],
    metadata: dict | None = None,
) -> str:
    """Proportional stacked bars: one bar per group, one segment per category."""
    groups = list(dist)
    categories = sorted({c for cats in dist.values() for c in cats})
    margin_l, margin_r, margin_t, margin_b = 60, 160, 40, 120
    slot = 46
    width = margin_l + margin_r + slot * max(1, len(groups))
    height = 360
    plot_h = height - margin_t - margin_b

    body = [f'<text x="{margin_l}" y="20" {_FONT} font-size="13">{_escape(title)}</text>']
    body.append(
        f'<line x1="{margin_l}" y1="{margin_t}" x2="{margin_l}" y2="{margin_t + plot_h}" stroke="black"/>'
    )
    for k in range(5):
        frac = k / 4.0
        yy = margin_t + plot_h * (1.0 - frac)
        body.append(f'<line x1="{margin_l - 4}" y1="{_fmt(yy)}" x2="{margin_l}" y2="{_fmt(yy)}" stroke="black"/>')
        body.append(f'<text x="{margin_l - 8}" y="{_fmt(yy + 4)}" {_FONT} text-anchor="end">{frac:.2f}</text>')

    for i, group in enumerate(groups):
        cats = dist[group]
        total = sum(cats.values())
        cx = margin_l + slot * i + slot / 2.0
        label_y = margin_t + plot_h + 12
        body.append(
            f'<text x="{_fmt(cx)}" y="{_fmt(label_y)}" {_FONT} text-anchor="end" '
            f'transform="rotate(-45 {_fmt(cx)} {_fmt(label_y)})">{_escape(group)}</text>'
        )
        if total == 0:
            continue
        y_cursor = margin_t + plot_h
        for ci, cat in enumerate(categories):
            n = cats.get(cat, 0)
            if n == 0:
                continue
            h = plot_h * n / total
            y_cursor -= h
            body.append(
                f'<rect x="{_fmt(cx - 16)}" y="{_fmt(y_cursor)}" width="32" height="{_fmt(h)}" '
                f'fill="{_PALETTE[ci % len(_PALETTE)]}" stroke="white" stroke-width="0.5"/>'
            )
    # legend
    lx = width - margin_r + 12
    for ci, cat in enumerate(categories):
        ly = margin_t + 16 * ci
        body.append(f'<rect x="{lx}" y="{ly}" width="10" height="10" fill="{_PALETTE[ci % len(_PALETTE)]}"/>')
        body.append(f'<text x="{lx + 14}" y="{ly + 9}" {_FONT}>{_escape(cat)}</text>')
    return _svg_doc(width, height, body, metadata)


# ---------------------------------------------------------------------------
# Full report
# ---------------------------------------------------------------------------

def write_reports(ds: Dataset, out_dir: str | Path, group_by: str, metadata: dict | None = None) -> list[Path]:
    """All CSV/SVG artifacts for one grouping dimension; returns paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    stats = aggregate_stats(ds, group_by)
    csv_path = out_dir / f"indicators_by_{group_by}.csv"
    write_stats_csv(csv_path, stats, group_by)
    written.append(csv_path)

    groups = sorted({s.group for s in stats})
    for indicator in NUMERIC_INDICATORS:
        summaries = []
        for g in groups:
            s = next(x for x in stats if x.group == g and x.indicator == indicator)
            summaries.append(None if s.median is None else (s.minimum, s.q1, s.median, s.q3, s.maximum))
        svg_path = out_dir / f"box_{indicator.lower()}_by_{group_by}.svg"
        svg_path.write_text(
            boxplot_svg(f"{indicator} by {group_by}", groups, summaries, metadata), encoding="utf-8"
        )
        written.append(svg_path)

    for what in ("form", "layout"):
        dist = category_distribution(ds, group_by, what)
        dist_csv = out_dir / f"{what}_by_{group_by}.csv"
        write_distribution_csv(dist_csv, dist, group_by, what)
        written.append(dist_csv)
        svg_path = out_dir / f"{what}_by_{group_by}.svg"
        svg_path.write_text(
            stacked_bar_svg(f"{what} distribution by {group_by}", dist, metadata), encoding="utf-8"
        )
        written.append(svg_path)
    return written
