"""Deterministic report emission: CSV tables, a JSON summary, and 2-D SVG
scatter plots. Given the same bundle, every file is byte-identical across
runs and platforms; floats are rendered with repr (shortest round-trip) and
no timestamps or environment details are ever written.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class ReportBundle:
    """Tables are (columns, rows); metadata must carry generator id, seed,
    and config hash so every artifact is attributable."""

    tables: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    svgs: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def add_table(self, name: str, columns, rows) -> None:
        self.tables[name] = (list(columns), [list(r) for r in rows])

    def note(self, text: str) -> None:
        self.metadata.setdefault("notes", []).append(text)


def fmt_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    if isinstance(value, (np.integer, int)):
        return str(int(value))
    return str(value)


def _meta_comment(metadata: dict) -> str:
    parts = [
        f"generator={metadata.get('generator', '')}",
        f"seed={metadata.get('seed', '')}",
        f"config_hash={metadata.get('config_hash', '')}",
    ]
    return "# " + " ".join(parts)


def emit_report(bundle: ReportBundle, out_dir) -> list:
    """Write every table, the summary JSON, and any SVGs; returns the paths."""
    if not bundle.metadata:
        raise ValueError("report bundles must carry metadata")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    for name in sorted(bundle.tables):
        columns, rows = bundle.tables[name]
        path = out / f"{name}.csv"
        with open(path, "w", newline="") as f:
            f.write(_meta_comment(bundle.metadata) + "\n")
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([fmt_cell(v) for v in row])
        written.append(path)

    doc = {"metadata": bundle.metadata, "summary": bundle.summary}
    path = out / "summary.json"
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    written.append(path)

    for name in sorted(bundle.svgs):
        path = out / f"{name}.svg"
        path.write_text(bundle.svgs[name])
        written.append(path)
    return written


_SVG_SIZE = 640
_PAD = 40


def _px(v: float) -> str:
    return f"{_PAD + v * (_SVG_SIZE - 2 * _PAD):.2f}"


def _py(v: float) -> str:
    # SVG y grows downward; flip so the box renders with y up.
    return f"{_PAD + (1.0 - v) * (_SVG_SIZE - 2 * _PAD):.2f}"


def render_scatter_svg(
    metadata: dict,
    blob_means=None,
    concept_members=None,
    candidates=None,
    selected=None,
) -> str:
    """Scatter of the unit box: class blob means, concept members,
    adversarial candidates, and the selected point."""
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_SVG_SIZE}" height="{_SVG_SIZE}">',
        f"<!-- {_meta_comment(metadata)[2:]} -->",
        f'<rect x="0" y="0" width="{_SVG_SIZE}" height="{_SVG_SIZE}" fill="#ffffff"/>',
        f'<rect x="{_PAD}" y="{_PAD}" width="{_SVG_SIZE - 2 * _PAD}" height="{_SVG_SIZE - 2 * _PAD}" '
        'fill="none" stroke="#444444" stroke-width="1"/>',
    ]

    def circles(points, radius, fill, opacity="1.0"):
        for p in np.atleast_2d(np.asarray(points, dtype=np.float64)):
            lines.append(
                f'<circle cx="{_px(p[0])}" cy="{_py(p[1])}" r="{radius}" '
                f'fill="{fill}" fill-opacity="{opacity}"/>'
            )

    if blob_means is not None and len(blob_means):
        circles(blob_means, 7, "#555555", "0.8")
    if concept_members is not None and len(concept_members):
        circles(concept_members, 3, "#1f77b4", "0.8")
    if candidates is not None and len(candidates):
        circles(candidates, 4, "#d62728", "0.9")
    if selected is not None:
        p = np.asarray(selected, dtype=np.float64)
        lines.append(
            f'<circle cx="{_px(p[0])}" cy="{_py(p[1])}" r="9" '
            'fill="none" stroke="#2ca02c" stroke-width="2.5"/>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
