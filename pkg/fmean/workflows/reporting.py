"""Render command results as aligned text, CSV or a structured JSON document."""

from __future__ import annotations

import csv
import io
import json

from ..core.models import Cell, CommandResult, ResultTable, Scalar

FLOAT_DIGITS = 12


def format_number(value: Scalar | Cell) -> str:
    """Short float text that still reads as a float: 2.0, 0.333333333333, 1e-12."""
    if value is None:
        return "-"
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int | str):
        return str(value)
    text = f"{value:.{FLOAT_DIGITS}g}"
    if text.lstrip("-").isdigit():
        text += ".0"
    return text


def render_table(result: CommandResult) -> str:
    lines = [f"command: {result.command}   f: {result.mean_function}   status: {result.status}"]
    if result.values:
        width = max(len(key) for key in result.values)
        for key, value in result.values.items():
            lines.append(f"  {key.ljust(width)} = {format_number(value)}")
    for table in result.tables:
        lines.append("")
        lines.extend(_aligned(table))
    return "\n".join(lines) + "\n"


def render_csv(result: CommandResult) -> str | None:
    """CSV of every table, separated by a blank line; None when there are no tables."""
    if not result.tables:
        return None
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    for index, table in enumerate(result.tables):
        if index:
            buffer.write("\n")
        writer.writerow(["table", *table.columns])
        for row in table.rows:
            writer.writerow([table.title, *(format_number(cell) for cell in row)])
    return buffer.getvalue()


def render_structured(result: CommandResult) -> str:
    """JSON with sorted keys and no timestamps, so identical runs give identical bytes."""
    return json.dumps(result.as_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"


def render(result: CommandResult, output_format: str) -> str:
    if output_format == "structured":
        return render_structured(result)
    if output_format == "csv":
        return render_csv(result) or render_table(result)
    return render_table(result)


def _aligned(table: ResultTable) -> list[str]:
    cells = [list(table.columns)] + [[format_number(c) for c in row] for row in table.rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(table.columns))]
    out = [f"{table.title}:"]
    for row_index, row in enumerate(cells):
        out.append("  " + "  ".join(text.rjust(w) for text, w in zip(row, widths, strict=True)))
        if row_index == 0:
            out.append("  " + "  ".join("-" * w for w in widths))
    return out
