"""Render metric outputs as publication-style tables (CSV/Markdown/JSON) and SVGs.

Rendering never does arithmetic beyond percent formatting and the stated
average-of-rendered-values columns; every number comes from the metrics or
checkpoint-diff modules. SVG output is built from strings only, so identical
inputs produce byte-identical figures.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from . import __version__
from .ckptdiff import DiffMatrix
from .corpus import canonical_language_order
from .errors import MetricError
from .metrics import OverlapMatrix, delta_accuracy, is_defined

SENTINEL = "—"  # undefined metric placeholder in rendered tables


def fmt_percent(value) -> str:
    """Fraction -> 2-decimal percent string; sentinels pass through."""
    if not is_defined(value) or value is None:
        return SENTINEL
    return f"{100.0 * value:.2f}"


def fmt_points(value) -> str:
    """Percent-scale number -> 2-decimal string."""
    if not is_defined(value) or value is None:
        return SENTINEL
    return f"{value:.2f}"


@dataclass(frozen=True)
class TableArtifact:
    csv: str
    markdown: str
    data: object  # JSON-ready structure mirroring the table

    def write(self, out_dir: str | Path, stem: str) -> list[Path]:
        import json

        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = []
        for suffix, text in (
            (".csv", self.csv),
            (".md", self.markdown),
            (".json", json.dumps(self.data, indent=2, ensure_ascii=False) + "\n"),
        ):
            path = out_dir / f"{stem}{suffix}"
            path.write_text(text, encoding="utf-8")
            paths.append(path)
        return paths


def _markdown_table(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |"]
    lines.append("|" + "|".join(" --- " for _ in header) + "|")
    for row in rows:
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


def _csv_table(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"


def render_accuracy_table(rows: Sequence[Mapping]) -> TableArtifact:
    """Pretrained-vs-finetuned accuracy table with recomputed gains.

    Rows carry model, language, plm, sft on the percent scale; the layout is
    one row per language with per-model PLM/SFT/gain column groups.
    """
    models = []
    for row in rows:
        if row["model"] not in models:
            models.append(row["model"])
    languages = canonical_language_order({r["language"] for r in rows})
    cell = {(r["model"], r["language"]): r for r in rows}

    header = ["language"]
    for model in models:
        header += [f"{model}_plm", f"{model}_sft", f"{model}_delta"]
    table_rows = []
    data_rows = []
    for lang in languages:
        out = [lang]
        entry = {"language": lang, "models": {}}
        for model in models:
            row = cell.get((model, lang))
            if row is None:
                out += [SENTINEL] * 3
                continue
            delta = delta_accuracy(row["plm"], row["sft"])
            out += [fmt_points(row["plm"]), fmt_points(row["sft"]), fmt_points(delta)]
            entry["models"][model] = {
                "plm": row["plm"],
                "sft": row["sft"],
                "delta": delta,
            }
        table_rows.append(out)
        data_rows.append(entry)
    return TableArtifact(
        csv=_csv_table(header, table_rows),
        markdown=_markdown_table(header, table_rows),
        data=data_rows,
    )


def render_cococola_table(
    entries: Sequence[Mapping],
    include_average: bool = True,
) -> TableArtifact:
    """Adherence-ratio/cumulative-accuracy table, one row per model tag.

    Entries carry model_tag, language, ratio, acc (fractions, possibly the
    undefined sentinel). The Average pair is the arithmetic mean of the
    rendered per-language values, matching how such tables are printed.
    """
    tags = []
    for e in entries:
        if e["model_tag"] not in tags:
            tags.append(e["model_tag"])
    languages = canonical_language_order({e["language"] for e in entries})
    cell = {(e["model_tag"], e["language"]): e for e in entries}

    header = ["model"]
    for lang in languages:
        header += [f"{lang}_ratio", f"{lang}_acc"]
    if include_average:
        header += ["average_ratio", "average_acc"]

    table_rows = []
    data_rows = []
    for tag in tags:
        out = [tag]
        ratios, accs = [], []
        entry = {"model_tag": tag, "languages": {}, "average": {}}
        for lang in languages:
            e = cell.get((tag, lang))
            ratio = e.get("ratio") if e else None
            acc = e.get("acc") if e else None
            out += [fmt_percent(ratio), fmt_percent(acc)]
            entry["languages"][lang] = {
                "ratio": ratio if is_defined(ratio) else None,
                "acc": acc if is_defined(acc) else None,
            }
            if e and is_defined(ratio) and ratio is not None:
                ratios.append(round(100.0 * ratio, 2))
            if e and is_defined(acc) and acc is not None:
                accs.append(round(100.0 * acc, 2))
        if include_average:
            avg_ratio = sum(ratios) / len(ratios) if ratios else None
            avg_acc = sum(accs) / len(accs) if accs else None
            out += [
                fmt_points(avg_ratio) if avg_ratio is not None else SENTINEL,
                fmt_points(avg_acc) if avg_acc is not None else SENTINEL,
            ]
            entry["average"] = {"ratio": avg_ratio, "acc": avg_acc}
        table_rows.append(out)
        data_rows.append(entry)
    return TableArtifact(
        csv=_csv_table(header, table_rows),
        markdown=_markdown_table(header, table_rows),
        data=data_rows,
    )


# --- SVG rendering -------------------------------------------------------------

# viridis-like anchors, interpolated linearly
_COLOR_STOPS = (
    (0.0, (68, 1, 84)),
    (0.25, (59, 82, 139)),
    (0.5, (33, 145, 140)),
    (0.75, (94, 201, 98)),
    (1.0, (253, 231, 37)),
)


def _color(t: float) -> str:
    t = min(1.0, max(0.0, t))
    for (t0, c0), (t1, c1) in zip(_COLOR_STOPS, _COLOR_STOPS[1:]):
        if t <= t1:
            f = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
            rgb = tuple(round(a + f * (b - a)) for a, b in zip(c0, c1))
            return "#{:02x}{:02x}{:02x}".format(*rgb)
    return "#fde725"


def _fmt_value(v: float) -> str:
    return f"{v:.3g}"


def _svg_grid(
    row_labels: Sequence[str],
    col_labels: Sequence[str],
    values: Sequence[Sequence[float | None]],
    vmin: float,
    vmax: float,
    title: str,
    x_axis_label: str,
) -> str:
    cell_w, cell_h = 64, 36
    left, top, right, bottom = 110, 46, 86, 56
    width = left + cell_w * len(col_labels) + right
    height = top + cell_h * len(row_labels) + bottom
    span = vmax - vmin

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" font-family="monospace" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left}" y="20" font-size="13">{title}</text>',
    ]
    for r, row in enumerate(values):
        y = top + r * cell_h
        parts.append(
            f'<text x="{left - 8}" y="{y + cell_h / 2 + 4:.6g}" '
            f'text-anchor="end">{row_labels[r]}</text>'
        )
        for c, value in enumerate(row):
            x = left + c * cell_w
            if value is None:
                parts.append(
                    f'<rect x="{x}" y="{y}" width="{cell_w}" '
                    f'height="{cell_h}" fill="#eeeeee" stroke="white"/>'
                )
                continue
            t = 0.0 if span == 0 else (value - vmin) / span
            fill = _color(t)
            text_fill = "white" if t < 0.5 else "black"
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cell_w}" height="{cell_h}" '
                f'fill="{fill}" stroke="white"/>'
            )
            parts.append(
                f'<text x="{x + cell_w / 2:.6g}" y="{y + cell_h / 2 + 4:.6g}" '
                f'text-anchor="middle" fill="{text_fill}">'
                f"{_fmt_value(value)}</text>"
            )
    base_y = top + len(row_labels) * cell_h
    for c, label in enumerate(col_labels):
        x = left + c * cell_w + cell_w / 2
        parts.append(
            f'<text x="{x:.6g}" y="{base_y + 16}" text-anchor="middle">'
            f"{label}</text>"
        )
    parts.append(
        f'<text x="{left + cell_w * len(col_labels) / 2:.6g}" '
        f'y="{base_y + 36}" text-anchor="middle">{x_axis_label}</text>'
    )
    # colorbar
    bar_x = left + cell_w * len(col_labels) + 24
    bar_h = cell_h * len(row_labels)
    steps = 24
    for i in range(steps):
        t = 1.0 - (i + 0.5) / steps
        y = top + bar_h * i / steps
        parts.append(
            f'<rect x="{bar_x}" y="{y:.6g}" width="14" '
            f'height="{bar_h / steps + 0.5:.6g}" fill="{_color(t)}"/>'
        )
    parts.append(
        f'<text x="{bar_x + 18}" y="{top + 8}" font-size="10">'
        f"{_fmt_value(vmax)}</text>"
    )
    parts.append(
        f'<text x="{bar_x + 18}" y="{top + bar_h}" font-size="10">'
        f"{_fmt_value(vmin)}</text>"
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_heatmap(
    matrix: DiffMatrix,
    normalization: str = "per-matrix",
    global_bounds: tuple[float, float] | None = None,
    title: str = "parameter update magnitude",
) -> str:
    """Update-magnitude grid: layers on x, module kinds on y, annotated cells.

    normalization "per-matrix" scales colors to this matrix's own range;
    "global" uses the caller-supplied bounds so several heatmaps share one
    color scale. Raw values are always annotated and preserved in the CSV.
    """
    if matrix.layer_count == 0 or not matrix.kinds:
        raise MetricError("cannot render an empty diff matrix")
    if normalization == "per-matrix":
        vmin, vmax = matrix.min_value(), matrix.max_value()
    elif normalization == "global":
        if global_bounds is None:
            raise MetricError("global normalization needs explicit bounds")
        vmin, vmax = global_bounds
    else:
        raise MetricError(f"unknown normalization {normalization!r}")
    values = [matrix.row(kind) for kind in matrix.kinds]
    col_labels = [str(l + 1) for l in range(matrix.layer_count)]
    return _svg_grid(
        row_labels=list(matrix.kinds),
        col_labels=col_labels,
        values=values,
        vmin=vmin,
        vmax=vmax,
        title=title,
        x_axis_label="layer (1-indexed)",
    )


def render_overlap_heatmap(matrix: OverlapMatrix, title: str = "correct-answer overlap") -> str:
    """Symmetric Jaccard matrix figure with languages on both axes."""
    values = [list(row) for row in matrix.iou]
    return _svg_grid(
        row_labels=list(matrix.languages),
        col_labels=list(matrix.languages),
        values=values,
        vmin=0.0,
        vmax=1.0,
        title=title,
        x_axis_label="language",
    )


def overlap_to_csv(matrix: OverlapMatrix) -> str:
    header = ["language"] + list(matrix.languages)
    rows = []
    for lang, row in zip(matrix.languages, matrix.iou):
        rows.append([lang] + [f"{v:.6f}" for v in row])
    return _csv_table(header, rows)


def known_unknown_to_csv(
    counts: Mapping[tuple[str, str], tuple[int, int]],
    languages: Sequence[str],
) -> str:
    """Pairwise known/unknown asymmetry counts as a flat CSV."""
    header = ["language_a", "language_b", "known_a_not_b", "known_b_not_a"]
    rows = []
    for a in languages:
        for b in languages:
            if (a, b) in counts:
                only_a, only_b = counts[(a, b)]
                rows.append([a, b, str(only_a), str(only_b)])
    return _csv_table(header, rows)


# --- provenance & bundle ---------------------------------------------------------

def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def provenance(inputs: Iterable[str | Path]) -> dict:
    return {
        "toolkit_version": __version__,
        "inputs": {str(p): file_digest(p) for p in sorted(map(str, inputs))},
    }


@dataclass
class ReportBundle:
    provenance: dict
    accuracy_table: TableArtifact | None = None
    cococola_table: TableArtifact | None = None
    overlap_figures: dict = field(default_factory=dict)  # name -> svg text
    heatmap_figures: dict = field(default_factory=dict)
    extra_csv: dict = field(default_factory=dict)

    def write(self, out_dir: str | Path) -> list[Path]:
        import json

        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        if self.accuracy_table is not None:
            written += self.accuracy_table.write(out_dir, "accuracy_table")
        if self.cococola_table is not None:
            written += self.cococola_table.write(out_dir, "cococola_table")
        for name, svg in sorted(self.overlap_figures.items()):
            path = out_dir / f"{name}.svg"
            path.write_text(svg, encoding="utf-8")
            written.append(path)
        for name, svg in sorted(self.heatmap_figures.items()):
            path = out_dir / f"{name}.svg"
            path.write_text(svg, encoding="utf-8")
            written.append(path)
        for name, text in sorted(self.extra_csv.items()):
            path = out_dir / f"{name}.csv"
            path.write_text(text, encoding="utf-8")
            written.append(path)
        path = out_dir / "provenance.json"
        path.write_text(
            json.dumps(self.provenance, indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        written.append(path)
        return written
