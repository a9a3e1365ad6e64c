"""CSV reading and writing for observation and tick series."""

from __future__ import annotations

import csv
import io
import math
from decimal import Decimal
from pathlib import Path
from typing import Optional

import numpy as np

from .core import ObservationSeries
from .simulate import TickSeries

TICK_TOLERANCE = 1e-6  # in tick units


class CsvFormatError(ValueError):
    pass


def _writer(buf):
    return csv.writer(buf, lineterminator="\r\n")


def _read_rows(text: str, expected_first: str):
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise CsvFormatError("empty file")
    header = [c.strip() for c in rows[0]]
    if not header or header[0] != expected_first:
        raise CsvFormatError(f"row 1: expected header starting with {expected_first!r}, got {rows[0]}")
    body = [r for r in rows[1:] if r]
    if not body:
        raise CsvFormatError("no data rows")
    return header, body


def _float(cell: str, row: int, col: str) -> float:
    try:
        x = float(cell)
    except ValueError:
        raise CsvFormatError(f"row {row}, column {col!r}: not a number: {cell!r}") from None
    if not math.isfinite(x):
        raise CsvFormatError(f"row {row}, column {col!r}: non-finite value")
    return x


# ---------------------------------------------------------------------------
# observation series: dt,value[,value2,...]


def observation_header(d: int):
    return ["dt", "value"] + [f"value{k}" for k in range(2, d + 1)]


def format_observations(series: ObservationSeries) -> str:
    vals = series.values.reshape(len(series), -1)
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(observation_header(vals.shape[1]))
    for dt, row in zip(series.dts, vals):
        w.writerow([repr(float(dt))] + [repr(float(v)) for v in row])
    return buf.getvalue()


def parse_observations(text: str, horizon: Optional[float] = None) -> ObservationSeries:
    """Parse ``dt,value...`` rows; the horizon defaults to the sum of ``dt``."""
    header, body = _read_rows(text, "dt")
    if header != observation_header(len(header) - 1) or len(header) < 2:
        raise CsvFormatError(f"row 1: bad header {header}")
    width = len(header)
    data = np.empty((len(body), width))
    for i, r in enumerate(body, start=2):
        if len(r) != width:
            raise CsvFormatError(f"row {i}: expected {width} columns, got {len(r)}")
        data[i - 2] = [_float(c, i, header[j]) for j, c in enumerate(r)]
    dts = data[:, 0]
    bad = np.flatnonzero(dts <= 0)
    if len(bad):
        raise CsvFormatError(f"row {bad[0] + 2}: dt must be positive")
    values = data[:, 1] if width == 2 else data[:, 1:]
    T = math.fsum(dts) if horizon is None else horizon
    return ObservationSeries(values, dts, T)


# ---------------------------------------------------------------------------
# tick series: time,price


def tick_decimals(tick: float) -> int:
    exp = Decimal(repr(float(tick))).normalize().as_tuple().exponent
    return max(0, -exp)


def format_ticks(ticks: TickSeries) -> str:
    dec = tick_decimals(ticks.tick)
    scale = Decimal(repr(float(ticks.tick)))
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(["time", "price"])
    for t, z in zip(ticks.times, ticks.ticks):
        # exact decimal arithmetic keeps prices on the printed grid
        w.writerow([repr(float(t)), f"{Decimal(int(z)) * scale:.{dec}f}"])
    return buf.getvalue()


def parse_ticks(text: str, tick: float) -> TickSeries:
    """Parse ``time,price`` rows, check prices against the tick grid and keep
    the first row plus every row where the price changes."""
    if not tick > 0:
        raise ValueError("tick must be positive")
    header, body = _read_rows(text, "time")
    if header != ["time", "price"]:
        raise CsvFormatError(f"row 1: expected header time,price, got {header}")
    times = np.empty(len(body))
    z = np.empty(len(body), dtype=np.int64)
    for i, r in enumerate(body, start=2):
        if len(r) != 2:
            raise CsvFormatError(f"row {i}: expected 2 columns, got {len(r)}")
        times[i - 2] = _float(r[0], i, "time")
        q = _float(r[1], i, "price") / tick
        k = round(q)
        if abs(q - k) > TICK_TOLERANCE:
            raise CsvFormatError(f"row {i}: price {r[1]} is not a multiple of tick {tick}")
        z[i - 2] = k
    keep = np.ones(len(z), dtype=bool)
    keep[1:] = np.diff(z) != 0
    times, z = times[keep], z[keep]
    if np.any(np.diff(times) <= 0):
        i = int(np.flatnonzero(np.diff(times) <= 0)[0])
        raise CsvFormatError(f"price change {i + 1}: times must be strictly increasing")
    return TickSeries(tick, times, z)


# ---------------------------------------------------------------------------
# files


def write_text(path, text: str) -> None:
    Path(path).write_bytes(text.encode("utf-8"))


def read_text(path) -> str:
    return Path(path).read_bytes().decode("utf-8")


def write_observations(path, series: ObservationSeries) -> None:
    write_text(path, format_observations(series))


def read_observations(path, horizon: Optional[float] = None) -> ObservationSeries:
    return parse_observations(read_text(path), horizon)


def write_ticks(path, ticks: TickSeries) -> None:
    write_text(path, format_ticks(ticks))


def read_ticks(path, tick: float) -> TickSeries:
    return parse_ticks(read_text(path), tick)
