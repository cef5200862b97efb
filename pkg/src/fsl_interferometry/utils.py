# Copyright 2024 The FSL Interferometry Authors. All rights reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Utils module of the FSL Interferometry engine."""

import csv
import io
from pathlib import Path
from typing import Any, List, Optional, Sequence, TextIO, Tuple, Union

import mpmath
import numpy as np


def precise_context(dps: int) -> mpmath.MPContext:
    """
    Create a private arbitrary-precision context.

    Each evaluation owns its context, so worker threads never share precision state.

    Args:
        dps: Decimal digits of working precision.

    Returns:
        A fresh mpmath context.
    """
    ctx = mpmath.MPContext()
    ctx.dps = dps

    return ctx


def lift(ctx: Optional[mpmath.MPContext], *values: Any) -> Tuple[Any, ...]:
    """Convert values to the context's numbers, or to floats without a context."""
    if ctx is None:
        return tuple(float(value) for value in values)

    return tuple(ctx.mpf(value) for value in values)


def log_log_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """
    Fit log|y| against log x with a straight line and return its slope.

    Args:
        x: Positive abscissae.
        y: Non-zero ordinates.

    Returns:
        The fitted slope.
    """
    log_x = np.log(np.asarray(x, dtype=float))
    log_y = np.log(np.abs(np.asarray(y, dtype=float)))
    slope, _ = np.polyfit(log_x, log_y, 1)

    return float(slope)


def parse_float_list(text: str) -> List[float]:
    """
    Parse a comma separated list of numbers.

    Args:
        text: e.g. "1e5, 3e5,1e6".

    Returns:
        The parsed values in order.

    Raises:
        ValueError: If an item is not a number.
    """
    values = [item.strip() for item in text.split(",") if item.strip()]
    if not values:
        raise ValueError("Expected at least one number.")

    return [float(value) for value in values]


def format_value(value: Any) -> str:
    """Render a cell: floats in shortest round-trip form, the rest with `str`."""
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""

    return str(value)


def write_csv(
    header: Sequence[str],
    rows: Sequence[Sequence[Any]],
    target: Union[str, Path, TextIO],
) -> None:
    """
    Write rows with a fixed header, dot decimals and `\\n` line endings.

    Args:
        header: Column names.
        rows: Rows in output order.
        target: Path or open text stream.
    """
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8", newline="") as stream:
            write_csv(header, rows, stream)
        return

    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(value) for value in row])


def csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    """Return the CSV rendering as a string."""
    buffer = io.StringIO()
    write_csv(header, rows, buffer)

    return buffer.getvalue()


def format_table(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    """Render rows as a left-aligned plain-text table."""
    cells = [list(header)] + [[format_value(value) for value in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(width) for cell, width in zip(row, widths)) for row in cells]
    lines.insert(1, "  ".join("-" * width for width in widths))

    return "\n".join(line.rstrip() for line in lines)
