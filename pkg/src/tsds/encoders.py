"""Response encoders: csv/dat/asc text tables, json, raw binary, and the
info/dds/das metadata listings.

ASCII value rendering honors each variable's cformatstring fragment, treated
as the body of a C-style ``%`` conversion (``".16f"`` renders fixed 16
decimals, ``"d"`` renders a rounded integer). Without a fragment, values use
the shortest round-trip decimal. NaN always renders as ``NaN``.
"""

from __future__ import annotations

import json
import math
import re
from typing import Iterator

import numpy as np

from .constraints import FILTER_SIGNATURES
from .errors import BadFormatFragment
from .ncml import DatasetDescriptor
from .table import ResultTable
from .timecodec import offset_to_time

_FRAGMENT_RE = re.compile(r"[-+ 0#]*\d*(\.\d+)?[diouxXeEfFgG]\Z")
_INT_CONVERSIONS = "diouxX"

OUTPUT_SUFFIXES = ("asc", "bin", "csv", "dat", "das", "dds", "info", "json", "ncml")


def format_value(x: float, fragment: str | None) -> str:
    """Render one double with an optional C-style format fragment."""
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Inf" if x > 0 else "-Inf"
    if fragment is None:
        return repr(float(x))
    if not _FRAGMENT_RE.match(fragment):
        raise BadFormatFragment(f"unknown format fragment {fragment!r}")
    conversion = fragment[-1]
    if conversion in _INT_CONVERSIONS:
        spec = fragment[:-1] + ("d" if conversion in "iu" else conversion)
        return ("%" + spec) % int(round(x))
    return ("%" + fragment) % x


class _Column:
    """One flattened output column: header plus a per-row string renderer."""

    def __init__(self, header: str, values: np.ndarray, fragment: str | None,
                 integer: bool = False):
        self.header = header
        self.values = values
        self.fragment = fragment
        self.integer = integer

    def cell(self, row: int) -> str:
        v = float(self.values[row])
        if self.integer:
            return str(int(v))
        return format_value(v, self.fragment)

    def raw(self, row: int):
        v = float(self.values[row])
        if self.integer:
            return int(v)
        return None if math.isnan(v) else v


def _component_headers(name: str, layout) -> list[str]:
    k = layout.components_per_sample
    if k == 1:
        return [name]
    labels = layout.component_labels or tuple(str(i) for i in range(k))
    return [f"{name}_{label}" for label in labels]


def _fragments_for(var) -> list[str | None]:
    k = var.layout.components_per_sample
    if var.cformat is None:
        return [None] * k
    if len(var.cformat) == 1:
        return [var.cformat[0]] * k
    return list(var.cformat)


def flatten_columns(table: ResultTable, descriptor: DatasetDescriptor) -> list[_Column]:
    """Value columns in table order (components flattened), then count columns."""
    out: list[_Column] = []
    for name, col in table.columns.items():
        try:
            var = descriptor.variable(name)
            headers = _component_headers(name, var.layout)
            fragments = _fragments_for(var)
        except KeyError:
            headers = [name] if col.shape[1] == 1 else [
                f"{name}_{i}" for i in range(col.shape[1])]
            fragments = [None] * col.shape[1]
        if len(headers) != col.shape[1]:  # post-aggregation shape wins
            headers = [name] if col.shape[1] == 1 else [
                f"{name}_{i}" for i in range(col.shape[1])]
            fragments = [None] * col.shape[1]
        for c in range(col.shape[1]):
            out.append(_Column(headers[c], col[:, c], fragments[c]))
    if table.count_columns:
        for name, col in table.count_columns.items():
            if name not in table.columns:
                continue
            headers = _component_headers(
                name, descriptor.variable(name).layout
            ) if _has_variable(descriptor, name) else [name]
            if len(headers) != col.shape[1]:
                headers = [name] if col.shape[1] == 1 else [
                    f"{name}_{i}" for i in range(col.shape[1])]
            for c in range(col.shape[1]):
                out.append(_Column(f"{headers[c]}_count", col[:, c], None, integer=True))
    return out


def _has_variable(descriptor: DatasetDescriptor, name: str) -> bool:
    try:
        descriptor.variable(name)
        return True
    except KeyError:
        return False


def _time_cell(x: float, enc) -> str:
    if math.isnan(x):
        return "NaN"
    return offset_to_time(x, enc)


# --- tabular text ------------------------------------------------------------------

def iter_csv(table: ResultTable, descriptor: DatasetDescriptor) -> Iterator[str]:
    enc = descriptor.time_encoding
    cols = flatten_columns(table, descriptor)
    yield ",".join(["time"] + [c.header for c in cols]) + "\n"
    for row in range(table.n_rows):
        cells = [_time_cell(float(table.times[row]), enc)]
        cells.extend(c.cell(row) for c in cols)
        yield ",".join(cells) + "\n"


def encode_csv(table: ResultTable, descriptor: DatasetDescriptor) -> str:
    return "".join(iter_csv(table, descriptor))


def encode_dat(table: ResultTable, descriptor: DatasetDescriptor) -> str:
    """Whitespace-aligned tabular ASCII, no header row."""
    enc = descriptor.time_encoding
    cols = flatten_columns(table, descriptor)
    rendered = []
    for row in range(table.n_rows):
        cells = [_time_cell(float(table.times[row]), enc)]
        cells.extend(c.cell(row) for c in cols)
        rendered.append(cells)
    if not rendered:
        return ""
    widths = [max(len(r[i]) for r in rendered) for i in range(len(rendered[0]))]
    lines = []
    for cells in rendered:
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(cells, widths)).rstrip())
    return "\n".join(lines) + "\n"


def encode_asc(table: ResultTable, descriptor: DatasetDescriptor) -> str:
    """Name-then-values block layout: one block per column."""
    enc = descriptor.time_encoding
    cols = flatten_columns(table, descriptor)
    blocks = []
    time_values = ", ".join(
        _time_cell(float(table.times[r]), enc) for r in range(table.n_rows))
    blocks.append("time\n" + time_values + "\n")
    for c in cols:
        values = ", ".join(c.cell(r) for r in range(table.n_rows))
        blocks.append(f"{c.header}\n" + values + "\n")
    return "\n".join(blocks)


# --- json ------------------------------------------------------------------------------

def encode_json(table: ResultTable, descriptor: DatasetDescriptor,
                dataset_name: str | None = None) -> str:
    enc = descriptor.time_encoding
    cols = flatten_columns(table, descriptor)
    units = {}
    for name in table.columns:
        units[name] = descriptor.variable(name).units if _has_variable(descriptor, name) else ""
    metadata = {
        "dataset": dataset_name,
        "title": descriptor.title,
        "tsdsId": descriptor.tsds_id_raw,
        "dataType": descriptor.data_type,
        "timeUnits": descriptor.time_units,
        "units": units,
        "columns": ["time"] + [c.header for c in cols],
    }
    data = []
    for row in range(table.n_rows):
        t = float(table.times[row])
        out_row = [None if math.isnan(t) else offset_to_time(t, enc)]
        out_row.extend(c.raw(row) for c in cols)
        data.append(out_row)
    return json.dumps({"metadata": metadata, "data": data}, allow_nan=False,
                      separators=(",", ":")) + "\n"


# --- raw binary --------------------------------------------------------------------------

def encode_bin(table: ResultTable, descriptor: DatasetDescriptor) -> bytes:
    """Rows flattened time-major: time offset, then every value column
    (components in order), then any count columns, all little-endian doubles."""
    parts = [table.times.reshape(-1, 1)]
    for col in table.columns.values():
        parts.append(col)
    if table.count_columns:
        for name, col in table.count_columns.items():
            if name in table.columns:
                parts.append(col.astype(np.float64))
    stacked = np.hstack(parts) if parts else np.zeros((0, 0))
    return np.ascontiguousarray(stacked, dtype="<f8").tobytes()


# --- metadata listings --------------------------------------------------------------------

def encode_info(descriptor: DatasetDescriptor, dataset_name: str,
                first_time: str | None = None, last_time: str | None = None) -> str:
    d = descriptor
    lines = [
        f"Dataset: {dataset_name}",
        f"Title: {d.title}",
    ]
    if d.tsds_id_raw:
        lines.append(f"TSDSID: {d.tsds_id_raw}")
    lines += [
        f"DataType: {d.data_type}",
        f"StartDate: {d.start_date.isoformat()}",
        f"StopDate: {d.stop_date.isoformat()}",
        f"TimeUnits: {d.time_units}",
        f"Samples: {d.length}",
    ]
    if first_time and last_time:
        lines.append(f"TimeCoverage: {first_time} to {last_time}")
    if d.points_per_day is not None:
        lines.append(f"PointsPerDay: {d.points_per_day}")
    if d.md5 is not None:
        lines.append(f"MD5: {d.md5}")
    if d.science_metadata is not None:
        lines.append(f"ScienceMetaData: {d.science_metadata}")
    lines.append("Variables:")
    for v in d.variables:
        k = v.layout.components_per_sample
        lines.append(f"  {v.name} ({v.long_name or v.name})"
                     f" units={v.units or '-'} components={k}")
    signatures = ", ".join(
        f"{name}({'n' if kinds and kinds[0] == 'posint' else 'width' if kinds else ''})"
        if name != "replace_missing" else "replace_missing(v)"
        for name, (kinds, _) in sorted(FILTER_SIGNATURES.items()))
    lines.append(f"Filters: {signatures}")
    lines.append(f"Suffixes: {' '.join(OUTPUT_SUFFIXES)}")
    return "\n".join(lines) + "\n"


def encode_dds(descriptor: DatasetDescriptor, dataset_name: str) -> str:
    n = descriptor.length
    lines = ["Dataset {", f"    Float64 time[time = {n}];"]
    for v in descriptor.variables:
        k = v.layout.components_per_sample
        dims = f"[time = {n}]"
        if k > 1:
            dims += f"[component = {k}]"
        lines.append(f"    Float64 {v.name}{dims};")
    lines.append(f"}} {dataset_name};")
    return "\n".join(lines) + "\n"


def _das_string(name: str, value: str) -> str:
    escaped = value.replace("\\", "\\\\").replace('"', '\\"')
    return f'        String {name} "{escaped}";'


def encode_das(descriptor: DatasetDescriptor, dataset_name: str) -> str:
    d = descriptor
    lines = ["Attributes {", "    NC_GLOBAL {"]
    lines.append(_das_string("title", d.title))
    lines.append(_das_string("Conventions", d.conventions))
    if d.tsds_id_raw:
        lines.append(_das_string("TSDSID", d.tsds_id_raw))
    if d.science_metadata is not None:
        lines.append(_das_string("ScienceMetaData", d.science_metadata))
    lines.append(_das_string("DataType", d.data_type))
    lines.append(_das_string("StartDate", d.start_date.isoformat()))
    lines.append(_das_string("StopDate", d.stop_date.isoformat()))
    if d.md5 is not None:
        lines.append(_das_string("MD5", d.md5))
    if d.points_per_day is not None:
        lines.append(_das_string("PointsPerDay", d.points_per_day))
    for name in sorted(d.extra_attrs):
        lines.append(_das_string(name, d.extra_attrs[name]))
    lines.append("    }")
    lines.append("    time {")
    lines.append(_das_string("long_name", "time"))
    lines.append(_das_string("units", d.time_units))
    lines.append("    }")
    for v in d.variables:
        lines.append(f"    {v.name} {{")
        lines.append(_das_string("long_name", v.long_name or v.name))
        lines.append(_das_string("units", v.units))
        if v.cformat is not None:
            lines.append(_das_string("cformatstring", ",".join(v.cformat)))
        fill = "NaN" if math.isnan(v.fill_value) else repr(v.fill_value)
        lines.append(f"        Float64 _FillValue {fill};")
        lines.append("    }")
    lines.append("}")
    return "\n".join(lines) + "\n"
