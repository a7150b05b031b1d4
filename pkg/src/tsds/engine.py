"""Query pipeline: time-range planning, bulk reads, row selection, one filter,
projection. The pipeline order is fixed; clause order in the request string
carries no meaning.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Callable

import numpy as np

from .constraints import ConstraintExpression, FilterSpec, Selection
from .errors import BadArg, MissingRequired, UnknownVariable
from .filters import (
    filter_block,
    filter_exclude_missing,
    filter_replace_missing,
    filter_stride,
    filter_thin,
)
from .ncml import ASCII_IOSP, DatasetDescriptor, FileSource, TimeAxis, UniformValues
from .store import TsdbStore
from .table import ResultTable
from .timecodec import TimeEncoding, parse_timestamp, to_offset

_BLOCK_KIND = {"binavg": "avg", "binmin": "min", "binmax": "max", "bincount": "count"}


def _first_true(pred: Callable[[int], bool], n: int) -> int:
    """Smallest i in [0, n) with pred(i) true (pred monotone false->true); n if none."""
    lo, hi = 0, n
    while lo < hi:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


def plan_time_range(axis: TimeAxis, selections: list[tuple[str, float]],
                    time_at: Callable[[int], float] | None = None) -> tuple[int, int]:
    """Reduce conjunctive time bounds to an inclusive sample index range.

    ``selections`` holds (op, offset) pairs with op in {<, <=, >, >=, ==}.
    An empty or contradictory conjunction is not an error: the result may be
    the full range or an empty one (lo > hi). The range never exceeds
    [0, length-1].

    For an explicit axis ``time_at`` must fetch the stamp at one index; for a
    uniform axis the same expression the linear-scan oracle would use
    (start + i*increment) is evaluated, so boundary behavior is identical.
    """
    n = axis.length
    if axis.mode == "uniform":
        start, inc = axis.start, axis.increment

        def t(i: int) -> float:
            return start + i * inc
    else:
        if time_at is None:
            raise ValueError("explicit axis needs a time_at lookup")
        t = time_at

    lo, hi = 0, n - 1
    for op, v in selections:
        if op == ">":
            lo = max(lo, _first_true(lambda i: t(i) > v, n))
        elif op == ">=":
            lo = max(lo, _first_true(lambda i: t(i) >= v, n))
        elif op == "<":
            hi = min(hi, _first_true(lambda i: not (t(i) < v), n) - 1)
        elif op == "<=":
            hi = min(hi, _first_true(lambda i: not (t(i) <= v), n) - 1)
        elif op == "==":
            lo = max(lo, _first_true(lambda i: t(i) >= v, n))
            hi = min(hi, _first_true(lambda i: t(i) > v, n) - 1)
        else:
            raise BadArg(f"cannot plan time range for operator {op!r}")
    return lo, hi


def apply_selections(table: ResultTable,
                     selections: list[tuple[str, str, float]]) -> ResultTable:
    """Keep rows where every clause holds. Multi-component variables satisfy a
    clause when ANY component does; NaN compares false to everything."""
    if not selections:
        return table
    ops = {
        "<": np.less, "<=": np.less_equal, ">": np.greater, ">=": np.greater_equal,
        "==": np.equal, "!=": np.not_equal,
    }
    keep = np.ones(table.n_rows, dtype=bool)
    for operand, op, value in selections:
        if operand == "time":
            col = table.times.reshape(-1, 1)
        elif operand in table.columns:
            col = table.columns[operand]
        else:
            raise UnknownVariable(f"no variable named {operand!r}")
        with np.errstate(invalid="ignore"):
            mask = ops[op](col, value)
            if op == "!=":  # NaN compares false even under != (unlike IEEE)
                mask &= ~np.isnan(col)
            keep &= mask.any(axis=1)
    return table.take(keep)


def run_filter(table: ResultTable, spec: FilterSpec) -> ResultTable:
    args = spec.args
    if spec.name == "stride":
        return filter_stride(table, int(args[0]))
    if spec.name == "thin":
        return filter_thin(table, int(args[0]))
    if spec.name == "replace_missing":
        return filter_replace_missing(table, args[0])
    if spec.name == "exclude_missing":
        return filter_exclude_missing(table)
    if spec.name in _BLOCK_KIND:
        return filter_block(table, args[0], _BLOCK_KIND[spec.name])
    raise BadArg(f"unhandled filter {spec.name!r}")


class _AsciiCache:
    """Per-request parse of an ASCII table source (time column + value columns)."""

    def __init__(self):
        self._tables: dict[str, tuple[np.ndarray, np.ndarray]] = {}

    def load(self, path: Path, enc: TimeEncoding, time_column: int) -> tuple[np.ndarray, np.ndarray]:
        key = str(path)
        if key not in self._tables:
            self._tables[key] = _read_ascii_table(path, enc, time_column)
        return self._tables[key]


def _read_ascii_table(path: Path, enc: TimeEncoding, time_column: int,
                      delimiter: str = ",") -> tuple[np.ndarray, np.ndarray]:
    """Parse a served ASCII table: the time column holds ISO-8601 stamps or
    native offsets; every other cell is a double (blank/unparseable -> NaN).
    Leading lines whose time cell does not parse are treated as headers."""
    times: list[float] = []
    rows: list[list[float]] = []
    width = 0
    header_budget = 10
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            cells = [c.strip() for c in line.split(delimiter)]
            if time_column >= len(cells):
                continue
            try:
                t = float(cells[time_column])
            except ValueError:
                try:
                    t = to_offset(parse_timestamp(cells[time_column]), enc)
                except Exception:
                    if not times and header_budget > 0:
                        header_budget -= 1
                        continue
                    continue
            values = []
            for i, cell in enumerate(cells):
                if i == time_column:
                    continue
                try:
                    values.append(float(cell))
                except ValueError:
                    values.append(math.nan)
            times.append(t)
            rows.append(values)
            width = max(width, len(values))
    out = np.full((len(rows), max(width, 1)), np.nan)
    for r, vals in enumerate(rows):
        out[r, :len(vals)] = vals
    return np.asarray(times, dtype=np.float64), out


def _ascii_value_column(source: FileSource, position: int) -> int:
    # stored column indices count the raw table columns including time (by
    # convention time sits in column 0); values array has time removed
    col = source.column if source.column is not None else position + 1
    return col - 1 if col >= 1 else col


def execute(descriptor: DatasetDescriptor, constraint: ConstraintExpression,
            store: TsdbStore) -> ResultTable:
    """Run the fixed pipeline: plan time range, bulk read, row selection,
    single filter, projection. The time column is always present."""
    enc = descriptor.time_encoding
    var_names = [v.name for v in descriptor.variables]

    # empty projection means all variables; "time" in a projection is redundant
    # (the time column is always emitted) but a projection of just "time"
    # requests the time column alone
    projection = [p for p in constraint.projection if p != "time"]
    for name in projection:
        if name not in var_names:
            raise UnknownVariable(f"no variable named {name!r}")
    if not constraint.projection:
        projection = list(var_names)

    time_plan: list[tuple[str, float]] = []
    row_selections: list[tuple[str, str, float]] = []
    for sel in constraint.selections:
        value = _resolve_literal(sel, enc)
        if sel.operand == "time" and sel.op != "!=":
            time_plan.append((sel.op, value))
        else:
            if sel.operand != "time" and sel.operand not in var_names:
                raise UnknownVariable(f"no variable named {sel.operand!r}")
            row_selections.append((sel.operand, sel.op, value))

    needed = list(dict.fromkeys(projection + [s[0] for s in row_selections if s[0] != "time"]))

    ascii_cache = _AsciiCache()
    axis = descriptor.time_axis
    time_at = _time_lookup(axis, enc, store, ascii_cache)
    lo, hi = plan_time_range(axis, time_plan, time_at)

    if lo > hi:
        cols = {name: np.zeros((0, descriptor.variable(name).layout.components_per_sample))
                for name in needed}
        fills = {name: descriptor.variable(name).fill_value for name in needed}
        table = ResultTable(np.zeros(0), cols, fills)
    else:
        times = _read_times(axis, enc, store, ascii_cache, lo, hi)
        cols = {}
        fills = {}
        for name in needed:
            spec = descriptor.variable(name)
            cols[name] = _read_variable(descriptor, spec, store, ascii_cache, enc, lo, hi)
            fills[name] = spec.fill_value
        table = ResultTable(times, cols, fills)

    table = apply_selections(table, row_selections)
    # selection-only columns are spent once rows are chosen; the filter must
    # see exactly the projected variables (exclude_missing is defined over
    # projected components)
    table = table.project(projection)
    if constraint.filter is not None:
        table = run_filter(table, constraint.filter)
    return table


def _resolve_literal(sel: Selection, enc: TimeEncoding) -> float:
    if sel.literal.is_time:
        if sel.operand != "time":
            raise BadArg(
                f"timestamp literal {sel.literal.lexeme!r} on non-time variable {sel.operand!r}")
        return to_offset(parse_timestamp(sel.literal.lexeme), enc)
    return sel.literal.number


def _time_lookup(axis: TimeAxis, enc: TimeEncoding, store: TsdbStore,
                 ascii_cache: _AsciiCache) -> Callable[[int], float] | None:
    if axis.mode == "uniform":
        return None
    if axis.iosp == ASCII_IOSP:
        times, _ = ascii_cache.load(store.path(axis.time_file), enc, 0)

        def at(i: int) -> float:
            return float(times[i]) if i < len(times) else math.inf
        return at

    def at(i: int) -> float:
        v = float(store.read_elements(axis.time_file, i, i).values[0])
        # stamps past EOF read as NaN; order them last so the search stays monotone
        return v if not math.isnan(v) else math.inf
    return at


def _read_times(axis: TimeAxis, enc: TimeEncoding, store: TsdbStore,
                ascii_cache: _AsciiCache, lo: int, hi: int) -> np.ndarray:
    if axis.mode == "uniform":
        return axis.start + axis.increment * np.arange(lo, hi + 1, dtype=np.float64)
    if axis.iosp == ASCII_IOSP:
        times, _ = ascii_cache.load(store.path(axis.time_file), enc, 0)
        out = np.full(hi - lo + 1, np.nan)
        avail = times[lo:hi + 1]
        out[:len(avail)] = avail
        return out
    return store.read_elements(axis.time_file, lo, hi).values


def _read_variable(descriptor: DatasetDescriptor, spec, store: TsdbStore,
                   ascii_cache: _AsciiCache, enc: TimeEncoding,
                   lo: int, hi: int) -> np.ndarray:
    n = hi - lo + 1
    k = spec.layout.components_per_sample
    if isinstance(spec.source, UniformValues):
        if k != 1:
            raise MissingRequired(f"inline uniform values for {spec.name!r} must be scalar")
        vals = spec.source.start + spec.source.increment * np.arange(lo, hi + 1, dtype=np.float64)
        return vals.reshape(-1, 1)
    if spec.source.iosp == ASCII_IOSP:
        if k != 1:
            raise MissingRequired(f"ASCII source for {spec.name!r} must be scalar")
        _, values = ascii_cache.load(store.path(spec.source.location), enc, 0)
        position = [v.name for v in descriptor.variables].index(spec.name)
        col = _ascii_value_column(spec.source, position)
        out = np.full((n, 1), np.nan)
        if col < values.shape[1]:
            avail = values[lo:hi + 1, col]
            out[:len(avail), 0] = avail
        return out
    return store.read_samples(spec.source.location, spec.layout, lo, hi)
