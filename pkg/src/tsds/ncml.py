"""NcML-subset metadata: parse and emit dataset descriptors.

Only the element/attribute subset used by the TSDS conventions is understood:
a root ``<netcdf>`` with flat ``<attribute>`` children, one
``<aggregation type="union">`` holding a time block and one or more data
blocks, each with a ``<dimension>``, a ``<variable>`` and either an inline
``<values increment start/>`` grid or a ``location``/``iosp`` delegation to a
binary (or ASCII table) file.
"""

from __future__ import annotations

import logging
import math
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

from .errors import (
    LengthMismatch,
    MalformedId,
    MissingRequired,
    XmlMalformed,
)
from .store import SeriesLayout
from .timecodec import TimeEncoding, parse_time_units

log = logging.getLogger(__name__)

BIN_IOSP = "tsdb.iosp.BinIOSP"
ASCII_IOSP = "tsdb.iosp.AsciiIOSP"

DATA_TYPES = ("time_series", "vector", "spectrogram")
_KIND_FOR_DATA_TYPE = {"time_series": "scalar", "vector": "vector", "spectrogram": "spectrogram"}

# root attributes in their conventional order
_ROOT_ATTR_ORDER = ("title", "Conventions", "TSDSID", "ScienceMetaData", "DataType",
                    "StartDate", "StopDate", "MD5", "PointsPerDay")


@dataclass(frozen=True)
class TsdsId:
    """``tsds://{provider}/{dataset}/{seriesNumber}/{version}/{stopDate}``"""

    provider: str
    dataset: str
    series_number: str
    version: int
    stop_date: date


def parse_tsds_id(s: str) -> TsdsId:
    if not s.startswith("tsds://"):
        raise MalformedId(f"missing tsds:// scheme in {s!r}")
    parts = s[len("tsds://"):].split("/")
    if len(parts) != 5:
        raise MalformedId(f"expected 5 path segments, got {len(parts)} in {s!r}")
    provider, dataset, series, version_text, stop_text = parts
    if not re.fullmatch(r"0|[1-9][0-9]*", version_text):
        raise MalformedId(f"version {version_text!r} is not a non-padded integer")
    try:
        stop = date.fromisoformat(stop_text)
    except ValueError:
        raise MalformedId(f"unparseable stop date {stop_text!r}") from None
    if not (provider and dataset and series):
        raise MalformedId(f"empty segment in {s!r}")
    return TsdsId(provider, dataset, series, int(version_text), stop)


def format_tsds_id(tid: TsdsId) -> str:
    return (f"tsds://{tid.provider}/{tid.dataset}/{tid.series_number}"
            f"/{tid.version}/{tid.stop_date.isoformat()}")


@dataclass(frozen=True)
class TimeAxis:
    """Either a uniform grid (start + i*increment) or a file of explicit stamps."""

    mode: str  # "uniform" | "explicit"
    length: int
    start: float | None = None
    increment: float | None = None
    time_file: str | None = None
    iosp: str | None = None

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("time axis length must be positive")
        if self.mode == "uniform":
            if self.start is None or self.increment is None:
                raise ValueError("uniform axis needs start and increment")
            if not self.increment > 0:
                raise ValueError("uniform axis increment must be positive")
        elif self.mode == "explicit":
            if not self.time_file:
                raise ValueError("explicit axis needs a time file")
        else:
            raise ValueError(f"unknown time axis mode {self.mode!r}")

    @classmethod
    def uniform(cls, start: float, increment: float, length: int) -> "TimeAxis":
        return cls("uniform", length, start=float(start), increment=float(increment))

    @classmethod
    def explicit(cls, time_file: str, length: int, iosp: str = BIN_IOSP) -> "TimeAxis":
        return cls("explicit", length, time_file=time_file, iosp=iosp)


@dataclass(frozen=True)
class UniformValues:
    """Inline data grid: value(i) = start + i*increment."""

    start: float
    increment: float


@dataclass(frozen=True)
class FileSource:
    """Data delegated to a file read by the named IOSP."""

    location: str
    iosp: str = BIN_IOSP
    column: int | None = None  # ASCII sources: table column index


def _float_eq(a: float, b: float) -> bool:
    return a == b or (math.isnan(a) and math.isnan(b))


@dataclass(eq=False)
class VariableSpec:
    """One served variable: identity, rendering hints, layout, and data source."""

    name: str
    layout: SeriesLayout
    source: UniformValues | FileSource
    long_name: str = ""
    units: str = ""
    fill_value: float = math.nan
    cformat: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.cformat is not None and len(self.cformat) not in (1, self.layout.components_per_sample):
            raise ValueError("cformatstring must have one entry or one per component")

    def __eq__(self, other):
        if not isinstance(other, VariableSpec):
            return NotImplemented
        return (self.name == other.name and self.layout == other.layout
                and self.source == other.source and self.long_name == other.long_name
                and self.units == other.units and self.cformat == other.cformat
                and _float_eq(self.fill_value, other.fill_value))


@dataclass
class DatasetDescriptor:
    """Everything needed to serve one dataset: identity, time axis, variables."""

    title: str
    data_type: str
    start_date: date
    stop_date: date
    time_units: str          # raw units attribute, preserved verbatim
    time_axis: TimeAxis
    variables: list[VariableSpec]
    conventions: str = "COARDS, TSDS"
    tsds_id_raw: str | None = None
    science_metadata: str | None = None
    md5: str | None = None
    points_per_day: str | None = None   # served verbatim; may be an estimate
    extra_attrs: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.data_type not in DATA_TYPES:
            raise MissingRequired(f"unknown DataType {self.data_type!r}")
        if self.start_date > self.stop_date:
            raise ValueError("StartDate is after StopDate")
        if not self.variables:
            raise MissingRequired("descriptor has no data variable")

    @property
    def time_encoding(self) -> TimeEncoding:
        return parse_time_units(self.time_units)

    @property
    def tsds_id(self) -> TsdsId | None:
        """Parsed TSDS ID, or None when absent or not well-formed."""
        if not self.tsds_id_raw:
            return None
        try:
            return parse_tsds_id(self.tsds_id_raw)
        except MalformedId:
            return None

    @property
    def length(self) -> int:
        return self.time_axis.length

    def variable(self, name: str) -> VariableSpec:
        for v in self.variables:
            if v.name == name:
                return v
        raise KeyError(name)


# --- parsing -----------------------------------------------------------------

def _attr_map(elem: ET.Element) -> dict[str, str]:
    out: dict[str, str] = {}
    for child in elem.findall("attribute"):
        name = child.get("name")
        if name is None:
            raise XmlMalformed("<attribute> without a name")
        out[name] = child.get("value", "")
    return out


def _parse_date(text: str, what: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise MissingRequired(f"{what} {text!r} is not a calendar date") from None


def _parse_float(text: str, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise XmlMalformed(f"{what} {text!r} is not a number") from None


@dataclass
class _Block:
    location: str | None
    iosp: str | None
    dims: list[tuple[str, int]]
    var_name: str
    var_shape: str
    var_attrs: dict[str, str]
    values: ET.Element | None


def _parse_block(elem: ET.Element) -> _Block:
    dims = []
    for d in elem.findall("dimension"):
        name = d.get("name", "")
        length_text = d.get("length")
        if length_text is None:
            raise XmlMalformed(f"dimension {name!r} has no length")
        dims.append((name, int(_parse_float(length_text, "dimension length"))))
    var = elem.find("variable")
    if var is None:
        raise MissingRequired("netcdf block without a variable")
    name = var.get("name")
    if not name:
        raise XmlMalformed("variable without a name")
    return _Block(
        location=elem.get("location"),
        iosp=elem.get("iosp"),
        dims=dims,
        var_name=name,
        var_shape=var.get("shape", ""),
        var_attrs=_attr_map(var),
        values=var.find("values"),
    )


def _block_sample_length(block: _Block) -> int:
    if not block.dims:
        raise MissingRequired(f"block for {block.var_name!r} has no dimension")
    return block.dims[0][1]


def _split_list(text: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in text.split(","))


def parse_ncml(text: str) -> DatasetDescriptor:
    """Parse an NcML document into a DatasetDescriptor.

    Unknown root attributes are preserved in ``extra_attrs``; a TSDSID that is
    present but not a well-formed ID is kept verbatim (the parsed form is then
    unavailable).
    """
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise XmlMalformed(f"not well-formed XML: {exc}") from None
    if root.tag != "netcdf":
        raise XmlMalformed(f"root element is <{root.tag}>, expected <netcdf>")

    attrs = _attr_map(root)
    missing = [k for k in ("DataType", "StartDate", "StopDate") if k not in attrs]
    if missing:
        raise MissingRequired(f"missing root attribute(s): {', '.join(missing)}")
    data_type = attrs["DataType"]
    if data_type not in DATA_TYPES:
        raise MissingRequired(f"unknown DataType {data_type!r}")

    agg = root.find("aggregation")
    if agg is None:
        raise MissingRequired("no <aggregation> element")
    blocks = [_parse_block(b) for b in agg.findall("netcdf")]

    time_blocks = [b for b in blocks if b.var_name == "time"]
    data_blocks = [b for b in blocks if b.var_name != "time"]
    if not time_blocks:
        raise MissingRequired("no time variable")
    if not data_blocks:
        raise MissingRequired("no data variable")
    tb = time_blocks[0]

    time_units = tb.var_attrs.get("units")
    if not time_units:
        raise MissingRequired("time variable has no units attribute")
    parse_time_units(time_units)  # validate early
    time_length = _block_sample_length(tb)

    if tb.values is not None:
        axis = TimeAxis.uniform(
            _parse_float(tb.values.get("start", ""), "time start"),
            _parse_float(tb.values.get("increment", ""), "time increment"),
            time_length,
        )
    elif tb.location:
        axis = TimeAxis.explicit(tb.location, time_length, tb.iosp or BIN_IOSP)
    else:
        raise MissingRequired("time variable has neither inline values nor a location")

    kind = _KIND_FOR_DATA_TYPE[data_type]
    variables = []
    for b in data_blocks:
        n = _block_sample_length(b)
        if n != time_length:
            raise LengthMismatch(
                f"variable {b.var_name!r} has length {n}, time axis has {time_length}")
        k = b.dims[1][1] if len(b.dims) > 1 else 1
        if kind == "scalar" and k != 1:
            raise XmlMalformed(
                f"DataType {data_type!r} is scalar but {b.var_name!r} declares {k} components")
        labels_text = b.var_attrs.get("component_labels")
        layout = SeriesLayout(
            kind,
            components_per_sample=k,
            component_labels=_split_list(labels_text) if labels_text else None,
        )
        if b.values is not None:
            source: UniformValues | FileSource = UniformValues(
                _parse_float(b.values.get("start", ""), "values start"),
                _parse_float(b.values.get("increment", ""), "values increment"),
            )
        elif b.location:
            column_text = b.var_attrs.get("column")
            source = FileSource(b.location, b.iosp or BIN_IOSP,
                                int(column_text) if column_text is not None else None)
        else:
            raise MissingRequired(
                f"variable {b.var_name!r} has neither inline values nor a location")
        fill_text = b.var_attrs.get("_FillValue")
        cformat_text = b.var_attrs.get("cformatstring")
        variables.append(VariableSpec(
            name=b.var_name,
            layout=layout,
            source=source,
            long_name=b.var_attrs.get("long_name", ""),
            units=b.var_attrs.get("units", ""),
            fill_value=_parse_float(fill_text, "_FillValue") if fill_text is not None else math.nan,
            cformat=_split_list(cformat_text) if cformat_text else None,
        ))

    tsds_id_raw = attrs.get("TSDSID")
    if tsds_id_raw:
        try:
            parse_tsds_id(tsds_id_raw)
        except MalformedId as exc:
            log.debug("TSDSID %r kept verbatim: %s", tsds_id_raw, exc)

    extra = {k: v for k, v in attrs.items() if k not in _ROOT_ATTR_ORDER}
    return DatasetDescriptor(
        title=attrs.get("title", ""),
        data_type=data_type,
        start_date=_parse_date(attrs["StartDate"], "StartDate"),
        stop_date=_parse_date(attrs["StopDate"], "StopDate"),
        time_units=time_units,
        time_axis=axis,
        variables=variables,
        conventions=attrs.get("Conventions", "COARDS, TSDS"),
        tsds_id_raw=tsds_id_raw,
        science_metadata=attrs.get("ScienceMetaData"),
        md5=attrs.get("MD5"),
        points_per_day=attrs.get("PointsPerDay"),
        extra_attrs=extra,
    )


# --- emission ------------------------------------------------------------------

def _fmt_float(x: float) -> str:
    return repr(float(x))


def _add_attr(parent: ET.Element, name: str, value: str, type_: str | None = None) -> None:
    el = ET.SubElement(parent, "attribute")
    el.set("name", name)
    if type_:
        el.set("type", type_)
    el.set("value", value)


def emit_ncml(d: DatasetDescriptor) -> str:
    """Serialize a descriptor; ``parse_ncml(emit_ncml(d))`` reproduces ``d``."""
    root = ET.Element("netcdf")
    _add_attr(root, "title", d.title)
    _add_attr(root, "Conventions", d.conventions)
    if d.tsds_id_raw:
        _add_attr(root, "TSDSID", d.tsds_id_raw)
    if d.science_metadata is not None:
        _add_attr(root, "ScienceMetaData", d.science_metadata)
    _add_attr(root, "DataType", d.data_type)
    _add_attr(root, "StartDate", d.start_date.isoformat())
    _add_attr(root, "StopDate", d.stop_date.isoformat())
    if d.md5 is not None:
        _add_attr(root, "MD5", d.md5)
    if d.points_per_day is not None:
        _add_attr(root, "PointsPerDay", d.points_per_day)
    for name in sorted(d.extra_attrs):
        _add_attr(root, name, d.extra_attrs[name])

    agg = ET.SubElement(root, "aggregation")
    agg.set("type", "union")

    axis = d.time_axis
    tblock = ET.SubElement(agg, "netcdf")
    if axis.mode == "explicit":
        tblock.set("location", axis.time_file)
        tblock.set("iosp", axis.iosp or BIN_IOSP)
    dim = ET.SubElement(tblock, "dimension")
    dim.set("name", "time")
    dim.set("isUnlimited", "true")
    dim.set("length", str(axis.length))
    tvar = ET.SubElement(tblock, "variable")
    tvar.set("name", "time")
    tvar.set("shape", "time")
    tvar.set("type", "double")
    _add_attr(tvar, "long_name", "time", "String")
    _add_attr(tvar, "units", d.time_units, "String")
    if axis.mode == "uniform":
        values = ET.SubElement(tvar, "values")
        values.set("increment", _fmt_float(axis.increment))
        values.set("start", _fmt_float(axis.start))

    for v in d.variables:
        block = ET.SubElement(agg, "netcdf")
        if isinstance(v.source, FileSource):
            block.set("location", v.source.location)
            block.set("iosp", v.source.iosp)
        dim = ET.SubElement(block, "dimension")
        dim.set("name", "time")
        dim.set("isUnlimited", "false")
        dim.set("length", str(axis.length))
        k = v.layout.components_per_sample
        if k > 1:
            cdim = ET.SubElement(block, "dimension")
            cdim.set("name", "component")
            cdim.set("isUnlimited", "false")
            cdim.set("length", str(k))
        var = ET.SubElement(block, "variable")
        var.set("name", v.name)
        var.set("shape", "time component" if k > 1 else "time")
        var.set("type", "double")
        _add_attr(var, "long_name", v.long_name, "String")
        if v.cformat is not None:
            _add_attr(var, "cformatstring", ",".join(v.cformat), "String")
        _add_attr(var, "units", v.units, "String")
        if not math.isnan(v.fill_value):
            _add_attr(var, "_FillValue", _fmt_float(v.fill_value), "double")
        if v.layout.component_labels is not None:
            _add_attr(var, "component_labels", ",".join(v.layout.component_labels), "String")
        if isinstance(v.source, FileSource) and v.source.column is not None:
            _add_attr(var, "column", str(v.source.column))
        if isinstance(v.source, UniformValues):
            values = ET.SubElement(var, "values")
            values.set("increment", _fmt_float(v.source.increment))
            values.set("start", _fmt_float(v.source.start))

    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def load_ncml(path) -> DatasetDescriptor:
    return parse_ncml(Path(path).read_text(encoding="utf-8"))
