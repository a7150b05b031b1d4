"""Time-series data server: flat binary cache, NcML-subset catalog, and a
constraint-expression HTTP service with server-side filtering."""

from .catalog import Catalog, CatalogEntry, scan_catalog, resolve_dataset
from .constraints import (
    ConstraintExpression,
    FilterSpec,
    Literal,
    Selection,
    parse_constraint,
    render_constraint,
)
from .engine import apply_selections, execute, plan_time_range
from .errors import TsdsError
from .filters import (
    filter_block,
    filter_exclude_missing,
    filter_replace_missing,
    filter_stride,
    filter_thin,
)
from .ncml import (
    DatasetDescriptor,
    FileSource,
    TimeAxis,
    TsdsId,
    UniformValues,
    VariableSpec,
    emit_ncml,
    format_tsds_id,
    load_ncml,
    parse_ncml,
    parse_tsds_id,
)
from .store import (
    Float64Block,
    SeriesKey,
    SeriesLayout,
    TsdbStore,
    metadata_filename,
    parse_series_filename,
    read_elements,
    read_samples,
    series_filename,
    verify_md5,
    write_series,
)
from .table import ResultTable
from .timecodec import (
    TimeEncoding,
    format_timestamp,
    offset_to_time,
    parse_time_units,
    parse_timestamp,
    time_to_offset,
)

__version__ = "0.1.0"

__all__ = [
    "Catalog", "CatalogEntry", "scan_catalog", "resolve_dataset",
    "ConstraintExpression", "FilterSpec", "Literal", "Selection",
    "parse_constraint", "render_constraint",
    "apply_selections", "execute", "plan_time_range",
    "TsdsError",
    "filter_block", "filter_exclude_missing", "filter_replace_missing",
    "filter_stride", "filter_thin",
    "DatasetDescriptor", "FileSource", "TimeAxis", "TsdsId", "UniformValues",
    "VariableSpec", "emit_ncml", "format_tsds_id", "load_ncml", "parse_ncml",
    "parse_tsds_id",
    "Float64Block", "SeriesKey", "SeriesLayout", "TsdbStore",
    "metadata_filename", "parse_series_filename", "read_elements",
    "read_samples", "series_filename", "verify_md5", "write_series",
    "ResultTable",
    "TimeEncoding", "format_timestamp", "offset_to_time", "parse_time_units",
    "parse_timestamp", "time_to_offset",
    "__version__",
]
