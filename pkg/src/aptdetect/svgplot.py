"""Self-contained SVG chart emission: ROC curves (single and overlay),
metric bar charts, and lift charts. Text-only output keeps the artifacts
diffable and byte-deterministic."""

from __future__ import annotations

from .metrics import LiftChart, RocCurve

WIDTH = 640
HEIGHT = 480
MARGIN = 64

PALETTE = ("#1f6fb2", "#d1495b", "#3a7d44", "#8a5a9e", "#c77d2f")


def data_to_px(x: float, y: float, xmax: float = 1.0,
               ymax: float = 1.0) -> tuple[float, float]:
    """Map data coordinates to pixel coordinates of the plot area."""
    px = MARGIN + (x / xmax) * (WIDTH - 2 * MARGIN)
    py = HEIGHT - MARGIN - (y / ymax) * (HEIGHT - 2 * MARGIN)
    return px, py


def _header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="28" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{title}</text>',
    ]


def _axes(xlabel: str, ylabel: str, ticks=True) -> list[str]:
    x0, y0 = data_to_px(0, 0)
    x1, _ = data_to_px(1, 0)
    _, y1 = data_to_px(0, 1)
    parts = [
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
        f'<text x="{(x0 + x1) / 2}" y="{HEIGHT - 16}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{xlabel}</text>',
        f'<text x="18" y="{(y0 + y1) / 2}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 18 {(y0 + y1) / 2})">{ylabel}</text>',
    ]
    if ticks:
        for i in range(6):
            t = i / 5
            tx, _ = data_to_px(t, 0)
            _, ty = data_to_px(0, t)
            parts.append(f'<line x1="{tx}" y1="{y0}" x2="{tx}" y2="{y0 + 5}" '
                         f'stroke="black"/>')
            parts.append(f'<text x="{tx}" y="{y0 + 18}" text-anchor="middle" '
                         f'font-family="sans-serif" font-size="10">{t:.1f}</text>')
            parts.append(f'<line x1="{x0 - 5}" y1="{ty}" x2="{x0}" y2="{ty}" '
                         f'stroke="black"/>')
            parts.append(f'<text x="{x0 - 8}" y="{ty + 3}" text-anchor="end" '
                         f'font-family="sans-serif" font-size="10">{t:.1f}</text>')
    return parts


def _polyline(xs, ys, color: str) -> str:
    pts = " ".join("{:.3f},{:.3f}".format(*data_to_px(float(x), float(y)))
                   for x, y in zip(xs, ys))
    return (f'<polyline class="series" points="{pts}" fill="none" '
            f'stroke="{color}" stroke-width="1.5"/>')


def write_roc_svg(path, series: list[tuple[str, RocCurve, float]],
                  title: str) -> None:
    """One polyline per (label, curve, auc) triple plus a chance diagonal;
    AUC values are annotated to four decimals."""
    parts = _header(title)
    parts.extend(_axes("false positive rate", "true positive rate"))
    d0 = data_to_px(0, 0)
    d1 = data_to_px(1, 1)
    parts.append(f'<line x1="{d0[0]}" y1="{d0[1]}" x2="{d1[0]}" y2="{d1[1]}" '
                 f'stroke="#bbbbbb" stroke-dasharray="4 4"/>')
    for i, (label, curve, auc_value) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        parts.append(_polyline(curve.fpr, curve.tpr, color))
        parts.append(f'<text x="{WIDTH - MARGIN - 8}" y="{HEIGHT - MARGIN - 16 * (len(series) - i)}" '
                     f'text-anchor="end" font-family="sans-serif" font-size="12" '
                     f'fill="{color}">{label}: AUC = {auc_value:.4f}</text>')
    parts.append("</svg>")
    _write(path, parts)


def write_bar_svg(path, metric_names: list[str],
                  model_values: dict[str, list[float | None]],
                  title: str) -> None:
    """Grouped bars, one group per metric, one bar per model."""
    parts = _header(title)
    parts.extend(_axes("", "value", ticks=True))
    x0, y0 = data_to_px(0, 0)
    n_groups = len(metric_names)
    n_models = max(len(model_values), 1)
    group_w = (WIDTH - 2 * MARGIN) / max(n_groups, 1)
    bar_w = group_w * 0.8 / n_models
    for gi, metric in enumerate(metric_names):
        gx = MARGIN + gi * group_w
        for mi, (model, values) in enumerate(model_values.items()):
            v = values[gi]
            if v is None:
                continue
            _, ty = data_to_px(0, v)
            bx = gx + group_w * 0.1 + mi * bar_w
            parts.append(f'<rect class="bar" x="{bx:.3f}" y="{ty:.3f}" '
                         f'width="{bar_w:.3f}" height="{(y0 - ty):.3f}" '
                         f'fill="{PALETTE[mi % len(PALETTE)]}"/>')
        parts.append(f'<text x="{gx + group_w / 2:.3f}" y="{y0 + 32}" '
                     f'text-anchor="middle" font-family="sans-serif" '
                     f'font-size="10">{metric}</text>')
    for mi, model in enumerate(model_values):
        parts.append(f'<text x="{MARGIN + 8}" y="{MARGIN - 10 + 14 * mi}" '
                     f'font-family="sans-serif" font-size="11" '
                     f'fill="{PALETTE[mi % len(PALETTE)]}">{model}</text>')
    parts.append("</svg>")
    _write(path, parts)


def write_lift_svg(path, chart: LiftChart, class_name: str, title: str) -> None:
    """Per-bin bars: outline for bin size, fill for target-class count,
    bottom labels with each bin's confidence floor."""
    parts = _header(title)
    parts.extend(_axes("confidence-ordered bins", "records", ticks=False))
    x0, y0 = data_to_px(0, 0)
    _, ytop = data_to_px(0, 1)
    max_size = max(b.size for b in chart.bins) or 1
    n = len(chart.bins)
    group_w = (WIDTH - 2 * MARGIN) / n
    for i, b in enumerate(chart.bins):
        bx = MARGIN + i * group_w + group_w * 0.1
        bw = group_w * 0.8
        oy = y0 - (b.size / max_size) * (y0 - ytop)
        fy = y0 - (b.target_count / max_size) * (y0 - ytop)
        parts.append(f'<rect x="{bx:.3f}" y="{oy:.3f}" width="{bw:.3f}" '
                     f'height="{(y0 - oy):.3f}" fill="none" stroke="#888888"/>')
        parts.append(f'<rect class="bar" x="{bx:.3f}" y="{fy:.3f}" '
                     f'width="{bw:.3f}" height="{(y0 - fy):.3f}" '
                     f'fill="{PALETTE[0]}"/>')
        parts.append(f'<text x="{bx + bw / 2:.3f}" y="{y0 + 14}" '
                     f'text-anchor="middle" font-family="sans-serif" '
                     f'font-size="9">&#8805;{b.min_confidence:.2f}</text>')
    parts.append(f'<text x="{WIDTH - MARGIN}" y="{MARGIN - 10}" text-anchor="end" '
                 f'font-family="sans-serif" font-size="12">{class_name} class</text>')
    parts.append("</svg>")
    _write(path, parts)


def _write(path, parts: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")
