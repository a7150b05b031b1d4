"""Server-side filters: stride/thin decimation, missing-value handling, and
tumbling-window block aggregates with contributor counts."""

from __future__ import annotations

import math

import numpy as np

from .errors import BadArg
from .table import ResultTable

BLOCK_KINDS = ("avg", "min", "max", "count")


def filter_stride(table: ResultTable, n: int) -> ResultTable:
    """Keep rows 0, n, 2n, ...; output length is ceil(len/n)."""
    if n < 1:
        raise BadArg(f"stride step must be >= 1, got {n}")
    return table.take(np.arange(0, table.n_rows, n))


def filter_thin(table: ResultTable, n: int) -> ResultTable:
    """Stride so that approximately n rows survive (exact when n divides len)."""
    if n < 1:
        raise BadArg(f"thin target must be >= 1, got {n}")
    if table.n_rows <= n:
        return table.take(np.arange(table.n_rows))
    k = max(1, math.ceil(table.n_rows / n))
    return filter_stride(table, k)


def filter_replace_missing(table: ResultTable, v: float) -> ResultTable:
    """Rewrite every element equal to its variable's fill value (NaN fill means
    NaN elements) to ``v``. Other values, including NaN under a non-NaN fill,
    are untouched."""
    out = table.take(np.arange(table.n_rows))
    for name, col in out.columns.items():
        fill = out.fill_values.get(name, np.nan)
        mask = np.isnan(col) if np.isnan(fill) else col == fill
        col[mask] = v
    return out


def filter_exclude_missing(table: ResultTable) -> ResultTable:
    """Drop any row in which any component of any column is missing
    (NaN or the variable's fill value)."""
    keep = np.ones(table.n_rows, dtype=bool)
    for name in table.columns:
        keep &= ~table.missing_mask(name).any(axis=1)
    return table.take(keep)


def _window_indices(times: np.ndarray, width: float) -> tuple[np.ndarray, int, float]:
    """Window index per row under t0 + i*width <= t < t0 + (i+1)*width.

    The floor-division fast path is corrected element-wise against that exact
    interval test so boundary rows land deterministically.
    """
    t0 = float(times[0])
    idx = np.floor((times - t0) / width).astype(np.int64)
    for _ in range(3):
        too_high = times < t0 + idx * width
        too_low = times >= t0 + (idx + 1) * width
        if not (too_high.any() or too_low.any()):
            break
        idx = idx - too_high.astype(np.int64) + too_low.astype(np.int64)
    return idx, int(idx[-1]) + 1, t0


def filter_block(table: ResultTable, width: float, kind: str) -> ResultTable:
    """Tumbling-window aggregate anchored at the first row's time.

    Missing values (NaN or fill) are omitted; a window with no contributors
    yields NaN with count 0. Output times are window centers, and the trailing
    partial window is included. ``kind="count"`` returns the counts themselves
    as the value columns.
    """
    if not width > 0:
        raise BadArg(f"window width must be > 0, got {width}")
    if kind not in BLOCK_KINDS:
        raise BadArg(f"unknown block aggregate {kind!r}")
    if table.n_rows == 0:
        empty_counts = {name: np.zeros((0, col.shape[1]), dtype=np.int64)
                        for name, col in table.columns.items()}
        if kind == "count":
            return ResultTable(table.times, {n: c.astype(np.float64) for n, c in empty_counts.items()})
        return ResultTable(table.times, dict(table.columns), {}, empty_counts)

    idx, n_windows, t0 = _window_indices(table.times, width)
    out_times = t0 + (np.arange(n_windows) + 0.5) * width

    out_cols: dict[str, np.ndarray] = {}
    out_counts: dict[str, np.ndarray] = {}
    for name, col in table.columns.items():
        k = col.shape[1]
        present = ~table.missing_mask(name)
        counts = np.zeros((n_windows, k), dtype=np.int64)
        np.add.at(counts, idx, present.astype(np.int64))
        out_counts[name] = counts

        if kind == "avg":
            sums = np.zeros((n_windows, k))
            np.add.at(sums, idx, np.where(present, col, 0.0))
            with np.errstate(invalid="ignore"):
                agg = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
        elif kind == "min":
            agg = np.full((n_windows, k), np.inf)
            np.minimum.at(agg, idx, np.where(present, col, np.inf))
            agg = np.where(counts > 0, agg, np.nan)
        elif kind == "max":
            agg = np.full((n_windows, k), -np.inf)
            np.maximum.at(agg, idx, np.where(present, col, -np.inf))
            agg = np.where(counts > 0, agg, np.nan)
        else:  # count
            agg = counts.astype(np.float64)
        out_cols[name] = agg

    if kind == "count":
        return ResultTable(out_times, out_cols)
    return ResultTable(out_times, out_cols, {}, out_counts)
