"""CSV and SVG writers for sweep tables.

CSV files open with ``# key: <json>`` comment lines carrying the run
metadata, followed by a header row and the data.  Reals are written with 17
significant digits, integers in plain decimal, booleans as ``true``/``false``
and missing values as empty fields.

Heatmaps use a linear RGB ramp from ``LOW_COLOR`` (at the lowest claim) to
``HIGH_COLOR`` (at the highest claim).
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from collections import defaultdict
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Sequence
from xml.sax.saxutils import escape

from . import __version__
from .sweep import SweepResult

LOW_COLOR = "#2166ac"
HIGH_COLOR = "#b2182b"


def timestamp(now: bool = False) -> str:
    """ISO-8601 time for the metadata block.

    ``SOURCE_DATE_EPOCH`` wins when set so that outputs stay byte-identical;
    otherwise wall-clock time is used only when ``now`` is true.
    """
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        return datetime.fromtimestamp(int(epoch), tz=timezone.utc).isoformat()
    if now:
        return datetime.now(timezone.utc).isoformat(timespec="seconds")
    return "unrecorded"


def run_metadata(config: dict[str, Any], seed: int | None, stamp: bool = False) -> dict[str, Any]:
    return {
        "tool": f"tddyn v{__version__}",
        "timestamp": timestamp(stamp),
        "seed": seed,
        "config": config,
    }


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool) or (hasattr(value, "dtype") and value.dtype.kind == "b"):
        return "true" if bool(value) else "false"
    if isinstance(value, (int,)) or (hasattr(value, "dtype") and value.dtype.kind in "iu"):
        return str(int(value))
    if isinstance(value, float) or (hasattr(value, "dtype") and value.dtype.kind == "f"):
        return format(float(value), ".17g")
    return str(value)


def _parse_value(text: str) -> Any:
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def render_csv(
    columns: Sequence[str], rows: Iterable[Sequence[Any]], metadata: dict[str, Any]
) -> str:
    buf = io.StringIO()
    for key, value in metadata.items():
        buf.write(f"# {key}: {json.dumps(value, sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def write_table(
    path: str | os.PathLike | None,
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    metadata: dict[str, Any],
) -> str:
    """Write a table; ``path=None`` returns the text without writing."""
    text = render_csv(columns, rows, metadata)
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def write_csv(result: SweepResult, path: str | os.PathLike | None) -> str:
    rows = ([row.get(c) for c in result.columns] for row in result.rows)
    return write_table(path, result.columns, rows, result.metadata)


def read_csv(path: str | os.PathLike) -> SweepResult:
    """Parse a file written by :func:`write_csv` back into a SweepResult."""
    metadata: dict[str, Any] = {}
    body = []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("# "):
                key, _, value = line[2:].rstrip("\n").partition(": ")
                metadata[key] = json.loads(value)
            else:
                body.append(line)
    reader = csv.reader(body)
    columns = next(reader)
    rows = [dict(zip(columns, map(_parse_value, rec))) for rec in reader]
    return SweepResult(columns=columns, rows=rows, metadata=metadata)


def _hex_to_rgb(color: str) -> tuple[int, int, int]:
    color = color.lstrip("#")
    return tuple(int(color[i : i + 2], 16) for i in (0, 2, 4))


def ramp_color(z: float, z_low: float, z_high: float) -> str:
    """Colour for ``z`` on the linear low->high ramp (clamped to its ends)."""
    t = 0.0 if z_high == z_low else (z - z_low) / (z_high - z_low)
    t = min(1.0, max(0.0, t))
    lo, hi = _hex_to_rgb(LOW_COLOR), _hex_to_rgb(HIGH_COLOR)
    rgb = [round(a + (b - a) * t) for a, b in zip(lo, hi)]
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def _tick(value: Any) -> str:
    if isinstance(value, float):
        return format(value, "g")
    return str(value)


def write_heatmap_svg(
    result: SweepResult,
    x_col: str,
    y_col: str,
    z_col: str,
    path: str | os.PathLike | None,
    z_range: tuple[float, float],
    title: str = "",
    where: dict[str, Any] | None = None,
) -> str:
    """Render one cell per ``(x, y)`` grid point coloured by ``z``.

    Rows sharing a cell (replicates) are averaged.  ``where`` keeps only rows
    whose columns equal the given values.  ``z_range`` is the claim interval
    mapped onto the colour ramp.

    Raises
    ------
    ValueError
        If the ``(x, y)`` pairs do not form a complete rectangular grid.
    """
    cells: dict[tuple[Any, Any], list[float]] = defaultdict(list)
    for row in result.rows:
        if where and any(row.get(k) != v for k, v in where.items()):
            continue
        if row.get("error"):
            continue
        cells[(row[x_col], row[y_col])].append(float(row[z_col]))
    xs = sorted({x for x, _ in cells})
    ys = sorted({y for _, y in cells})
    missing = [(x, y) for x in xs for y in ys if (x, y) not in cells]
    if missing or not cells:
        raise ValueError(f"incomplete grid, missing cells {missing}")

    z_low, z_high = z_range
    cw, ch = max(12, 480 // len(xs)), max(12, 360 // len(ys))
    left, top = 70, 40 if title else 20
    width, height = cw * len(xs), ch * len(ys)
    bar_x = left + width + 30
    total_w, total_h = bar_x + 80, top + height + 60

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" height="{total_h}" '
        f'font-family="sans-serif" font-size="11">'
    ]
    if title:
        out.append(f'<text x="{left}" y="20" font-size="14">{escape(title)}</text>')
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            z = sum(cells[(x, y)]) / len(cells[(x, y)])
            # y grows upward
            py = top + (len(ys) - 1 - j) * ch
            out.append(
                f'<rect class="cell" x="{left + i * cw}" y="{py}" width="{cw}" height="{ch}" '
                f'fill="{ramp_color(z, z_low, z_high)}"><title>{escape(x_col)}={_tick(x)} '
                f'{escape(y_col)}={_tick(y)} {escape(z_col)}={z:.6g}</title></rect>'
            )
    step_x = max(1, math.ceil(len(xs) / 12))
    for i in range(0, len(xs), step_x):
        cx = left + i * cw + cw / 2
        out.append(
            f'<text class="xtick" x="{cx}" y="{top + height + 14}" text-anchor="middle">{_tick(xs[i])}</text>'
        )
    step_y = max(1, math.ceil(len(ys) / 12))
    for j in range(0, len(ys), step_y):
        cy = top + (len(ys) - 1 - j) * ch + ch / 2 + 4
        out.append(f'<text class="ytick" x="{left - 6}" y="{cy}" text-anchor="end">{_tick(ys[j])}</text>')
    out.append(
        f'<text class="xlabel" x="{left + width / 2}" y="{top + height + 34}" '
        f'text-anchor="middle" font-size="13">{escape(x_col)}</text>'
    )
    out.append(
        f'<text class="ylabel" x="18" y="{top + height / 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 18 {top + height / 2})">{escape(y_col)}</text>'
    )
    out.append(
        '<defs><linearGradient id="ramp" x1="0" y1="1" x2="0" y2="0">'
        f'<stop offset="0" stop-color="{LOW_COLOR}"/><stop offset="1" stop-color="{HIGH_COLOR}"/>'
        "</linearGradient></defs>"
    )
    out.append(
        f'<rect class="colorbar" x="{bar_x}" y="{top}" width="16" height="{height}" fill="url(#ramp)"/>'
    )
    out.append(f'<text x="{bar_x + 22}" y="{top + 10}">{_tick(z_high)}</text>')
    out.append(f'<text x="{bar_x + 22}" y="{top + height}">{_tick(z_low)}</text>')
    out.append(
        f'<text x="{bar_x}" y="{top + height + 34}">{escape(z_col)}</text>'
    )
    out.append("</svg>\n")
    text = "\n".join(out)
    if path is not None:
        Path(path).write_text(text)
    return text
