"""Cache builder: enumerate granules by filename date template, parse ASCII
tables, concatenate into per-parameter .bin files, and publish NcML metadata,
a version number, an MD5, and a provenance log.

A build is driven by one JSON manifest per dataset (format documented in the
README): granule template, table schema, output time encoding and cadence,
and one entry per value column, each of which becomes its own parameter file.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from . import __version__ as _tool_version
from .errors import BuildLocked, NoGranules, SchemaMismatch
from .ncml import (
    DatasetDescriptor,
    FileSource,
    TimeAxis,
    TsdsId,
    VariableSpec,
    emit_ncml,
    format_tsds_id,
)
from .store import SeriesKey, SeriesLayout, file_md5, parse_series_filename
from .timecodec import TimeEncoding, parse_time_units, parse_timestamp

log = logging.getLogger(__name__)

_EPOCH64 = np.datetime64("1970-01-01T00:00:00", "us")


def _to_datetime64(dt: datetime) -> np.datetime64:
    return np.datetime64(dt.strftime("%Y-%m-%dT%H:%M:%S.%f"), "us")


# --- granule enumeration ---------------------------------------------------------

@dataclass(frozen=True)
class GranuleTemplate:
    directory: Path
    pattern: str          # strftime template, e.g. "%Y%m%d.csv"
    period: str = "day"   # "day" | "month"

    def __post_init__(self):
        if self.period not in ("day", "month"):
            raise ValueError(f"unknown granule period {self.period!r}")


@dataclass(frozen=True)
class GranuleSlot:
    period_start: date
    path: Path
    present: bool


def _next_period(d: date, period: str) -> date:
    if period == "day":
        return d + timedelta(days=1)
    if d.month == 12:
        return date(d.year + 1, 1, 1)
    return date(d.year, d.month + 1, 1)


def list_granules(tmpl: GranuleTemplate, start: date, stop: date) -> list[GranuleSlot]:
    """One expected path per period in [start, stop]; missing files are gaps,
    not errors."""
    slots = []
    d = start if tmpl.period == "day" else date(start.year, start.month, 1)
    while d <= stop:
        path = tmpl.directory / d.strftime(tmpl.pattern)
        slots.append(GranuleSlot(d, path, path.is_file()))
        d = _next_period(d, tmpl.period)
    return slots


def infer_granule_range(tmpl: GranuleTemplate) -> tuple[date, date]:
    """Derive [start, stop] from the files present in the granule directory."""
    found = []
    for path in tmpl.directory.iterdir():
        try:
            found.append(datetime.strptime(path.name, tmpl.pattern).date())
        except ValueError:
            continue
    if not found:
        raise NoGranules(f"no files matching {tmpl.pattern!r} in {tmpl.directory}")
    return min(found), max(found)


# --- ASCII table schema -------------------------------------------------------------

@dataclass(frozen=True)
class IsoTimeColumn:
    column: int = 0


@dataclass(frozen=True)
class YearDoyHourColumns:
    year_column: int
    doy_column: int
    hour_column: int


@dataclass(frozen=True)
class OffsetTimeColumn:
    column: int
    units: str  # e.g. "seconds since 1970-01-01"

    @property
    def encoding(self) -> TimeEncoding:
        return parse_time_units(self.units)


@dataclass(frozen=True)
class ValueColumn:
    index: int
    fill: float | None = None


@dataclass(frozen=True)
class AsciiTableSchema:
    time_rule: object               # IsoTimeColumn | YearDoyHourColumns | OffsetTimeColumn
    value_columns: tuple[ValueColumn, ...]
    delimiter: str = ","
    header_lines: int = 0

    def __post_init__(self):
        if not self.value_columns:
            raise ValueError("schema needs at least one value column")
        indices = self.time_indices() + [c.index for c in self.value_columns]
        if len(set(indices)) != len(indices):
            raise ValueError("schema column indices must be distinct")

    def time_indices(self) -> list[int]:
        r = self.time_rule
        if isinstance(r, IsoTimeColumn):
            return [r.column]
        if isinstance(r, YearDoyHourColumns):
            return [r.year_column, r.doy_column, r.hour_column]
        if isinstance(r, OffsetTimeColumn):
            return [r.column]
        raise TypeError(f"unknown time rule {r!r}")


@dataclass(frozen=True)
class QuarantinedRow:
    line_number: int
    reason: str


@dataclass
class GranuleFragment:
    """Parsed slice of one granule: microsecond timestamps plus value columns
    (sentinels already normalized to NaN)."""

    times: np.ndarray                 # datetime64[us], strictly increasing
    values: np.ndarray                # (n, n_value_columns) float64
    quarantined: list[QuarantinedRow] = field(default_factory=list)


def _parse_row_time(cells: list[str], rule) -> np.datetime64:
    if isinstance(rule, IsoTimeColumn):
        return _to_datetime64(parse_timestamp(cells[rule.column]))
    if isinstance(rule, YearDoyHourColumns):
        year = int(cells[rule.year_column])
        doy = int(cells[rule.doy_column])
        hour = float(cells[rule.hour_column])
        base = datetime(year, 1, 1) + timedelta(days=doy - 1, hours=hour)
        return _to_datetime64(base)
    if isinstance(rule, OffsetTimeColumn):
        enc = rule.encoding
        offset = float(cells[rule.column])
        return _to_datetime64(enc.epoch) + np.timedelta64(
            round(offset * enc.unit_seconds * 1e6), "us")
    raise TypeError(f"unknown time rule {rule!r}")


def read_ascii_granule(path, schema: AsciiTableSchema) -> GranuleFragment:
    """Parse one granule. Rows with an unparseable time or value cell, or a
    non-monotone timestamp, are quarantined with their line numbers; a column
    count wrong on more than half the data lines raises SchemaMismatch."""
    needed = max(schema.time_indices() + [c.index for c in schema.value_columns]) + 1
    times: list[np.datetime64] = []
    rows: list[list[float]] = []
    quarantined: list[QuarantinedRow] = []
    n_lines = 0
    n_bad_shape = 0
    prev: np.datetime64 | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if line_no <= schema.header_lines:
                continue
            text = line.strip()
            if not text:
                continue
            n_lines += 1
            cells = [c.strip() for c in text.split(schema.delimiter)]
            if len(cells) < needed:
                n_bad_shape += 1
                quarantined.append(QuarantinedRow(line_no, "wrong column count"))
                continue
            try:
                t = _parse_row_time(cells, schema.time_rule)
            except Exception as exc:
                quarantined.append(QuarantinedRow(line_no, f"bad time: {exc}"))
                continue
            values = []
            bad_cell = None
            for col in schema.value_columns:
                cell = cells[col.index]
                if cell == "":
                    values.append(np.nan)
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    bad_cell = cell
                    break
                values.append(np.nan if col.fill is not None and v == col.fill else v)
            if bad_cell is not None:
                quarantined.append(QuarantinedRow(line_no, f"bad value: {bad_cell!r}"))
                continue
            if prev is not None and t <= prev:
                quarantined.append(QuarantinedRow(line_no, "non-monotone timestamp"))
                continue
            prev = t
            times.append(t)
            rows.append(values)
    if n_lines and n_bad_shape > n_lines / 2:
        raise SchemaMismatch(
            f"{path}: {n_bad_shape} of {n_lines} lines have the wrong column count")
    k = len(schema.value_columns)
    values_arr = np.array(rows, dtype=np.float64).reshape(len(rows), k)
    times_arr = np.array(times, dtype="datetime64[us]")
    return GranuleFragment(times_arr, values_arr, quarantined)


# --- manifest -------------------------------------------------------------------------

@dataclass(frozen=True)
class SeriesConfig:
    number: str
    column: int
    name: str | None = None
    fill: float | None = None
    long_name: str = ""
    units: str = ""
    cformat: tuple[str, ...] | None = None

    @property
    def variable_name(self) -> str:
        return self.name or self.number


@dataclass
class BuildManifest:
    provider: str
    dataset: str
    template: GranuleTemplate
    schema: AsciiTableSchema
    time_units: str
    series: list[SeriesConfig]
    cadence: float | None = None          # in time units; None -> explicit time file
    range_start: date | None = None
    range_stop: date | None = None
    title: str | None = None

    @property
    def encoding(self) -> TimeEncoding:
        return parse_time_units(self.time_units)


def _parse_time_rule(spec: dict):
    kind = spec.get("kind", "iso")
    if kind == "iso":
        return IsoTimeColumn(int(spec.get("column", 0)))
    if kind == "year_doy_hour":
        return YearDoyHourColumns(int(spec["year_column"]), int(spec["doy_column"]),
                                  int(spec["hour_column"]))
    if kind == "offset":
        return OffsetTimeColumn(int(spec["column"]), spec["units"])
    raise ValueError(f"unknown time rule kind {kind!r}")


def load_manifest(path) -> BuildManifest:
    path = Path(path)
    raw = json.loads(path.read_text(encoding="utf-8"))
    g = raw["granules"]
    template = GranuleTemplate(
        directory=(path.parent / g["directory"]).resolve(),
        pattern=g["pattern"],
        period=g.get("period", "day"),
    )
    series = []
    for s in raw["series"]:
        cfs = s.get("cformatstring")
        series.append(SeriesConfig(
            number=s["number"],
            column=int(s["column"]),
            name=s.get("name"),
            fill=float(s["fill"]) if "fill" in s and s["fill"] is not None else None,
            long_name=s.get("long_name", ""),
            units=s.get("units", ""),
            cformat=tuple(p.strip() for p in cfs.split(",")) if cfs else None,
        ))
    t = raw["table"]
    schema = AsciiTableSchema(
        time_rule=_parse_time_rule(t.get("time", {})),
        value_columns=tuple(ValueColumn(s.column, s.fill) for s in series),
        delimiter=t.get("delimiter", ","),
        header_lines=int(t.get("header_lines", 0)),
    )
    time_spec = raw["time"]
    cadence = time_spec.get("cadence")
    r = raw.get("range", {})
    return BuildManifest(
        provider=raw["provider"],
        dataset=raw["dataset"],
        template=template,
        schema=schema,
        time_units=time_spec["units"],
        series=series,
        cadence=float(cadence) if cadence is not None else None,
        range_start=date.fromisoformat(r["start"]) if "start" in r else None,
        range_stop=date.fromisoformat(r["stop"]) if "stop" in r else None,
        title=raw.get("title"),
    )


# --- cache build ------------------------------------------------------------------------

@dataclass
class BuildResult:
    key: SeriesKey
    status: str                 # "new" | "unchanged"
    bin_path: Path
    ncml_path: Path
    provenance_path: Path
    time_bin_path: Path | None = None
    gaps: int = 0
    quarantined: int = 0


@dataclass
class ProvenanceLog:
    built_key: SeriesKey
    tsds_id: str
    inputs: list[tuple[str, int, str]]   # (path, byte length, md5), in read order
    gaps: list[str]
    build_timestamp: str
    tool_version: str
    samples: int
    md5: str

    def to_jsonl(self) -> str:
        lines = [json.dumps({
            "record": "build",
            "key": self.built_key.base_name,
            "id": self.tsds_id,
            "built": self.build_timestamp,
            "tool": self.tool_version,
            "samples": self.samples,
            "md5": self.md5,
        }, sort_keys=True)]
        for path, nbytes, digest in self.inputs:
            lines.append(json.dumps(
                {"record": "input", "path": path, "bytes": nbytes, "md5": digest},
                sort_keys=True))
        for missing in self.gaps:
            lines.append(json.dumps({"record": "gap", "path": missing}, sort_keys=True))
        return "\n".join(lines) + "\n"


class _BuildLock:
    """Advisory one-build-at-a-time lock per output dataset."""

    def __init__(self, out_dir: Path, provider: str, dataset: str):
        self.path = out_dir / f"{provider}_{dataset}.build.lock"

    def __enter__(self):
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise BuildLocked(
                f"another build holds {self.path} (remove it if that build crashed)"
            ) from None
        with os.fdopen(fd, "w") as fh:
            fh.write(str(os.getpid()))
        return self

    def __exit__(self, *exc):
        try:
            self.path.unlink()
        except FileNotFoundError:
            pass
        return False


def _atomic_write_bytes(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _atomic_write_text(path: Path, text: str) -> None:
    _atomic_write_bytes(path, text.encode("utf-8"))


def _existing_versions(out_dir: Path, provider: str, dataset: str, number: str) -> list[int]:
    versions = []
    for path in out_dir.glob(f"{provider}_{dataset}_*-v*.bin"):
        try:
            key = parse_series_filename(path.name)
        except Exception:
            continue
        if key.series_number == number:
            versions.append(key.version)
    return sorted(versions)


def _grid_snap(offsets: np.ndarray, values: np.ndarray, cadence: float):
    """Place samples on the uniform grid anchored at the first sample; gaps
    stay NaN, off-grid rows are quarantined."""
    t0 = float(offsets[0])
    idx_f = (offsets - t0) / cadence
    idx = np.rint(idx_f).astype(np.int64)
    residual = np.abs(offsets - (t0 + idx * cadence))
    on_grid = residual <= cadence * 1e-6
    n = int(idx[on_grid][-1]) + 1 if on_grid.any() else 0
    grid = np.full((n, values.shape[1]), np.nan)
    grid[idx[on_grid]] = values[on_grid]
    off_grid_count = int((~on_grid).sum())
    return t0, grid, off_grid_count


def build_cache(manifest: BuildManifest, out_dir, jobs: int = 1) -> list[BuildResult]:
    """Build (or refresh) every parameter declared by the manifest.

    Version assignment: 0 when no prior version exists; otherwise the previous
    version plus one when anything (data bytes or metadata) changed, else no
    new files are written and the result reports "unchanged".
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    enc = manifest.encoding

    start, stop = manifest.range_start, manifest.range_stop
    if start is None or stop is None:
        inferred = infer_granule_range(manifest.template)
        start = start or inferred[0]
        stop = stop or inferred[1]
    slots = list_granules(manifest.template, start, stop)
    present = [s for s in slots if s.present]
    gaps = [s for s in slots if not s.present]
    if not present:
        raise NoGranules(
            f"no granules found in {manifest.template.directory} for {start}..{stop}")
    for gap in gaps:
        log.info("gap: expected granule %s is missing", gap.path.name)

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        fragments = list(pool.map(
            lambda s: read_ascii_granule(s.path, manifest.schema), present))

    quarantined = sum(len(f.quarantined) for f in fragments)
    times_parts, value_parts = [], []
    prev_last: np.datetime64 | None = None
    for slot, frag in zip(present, fragments):
        t, v = frag.times, frag.values
        if len(t) and prev_last is not None:
            keep = t > prev_last
            if not keep.all():
                dropped = int((~keep).sum())
                quarantined += dropped
                log.warning("%s: dropped %d rows overlapping the previous granule",
                            slot.path.name, dropped)
                t, v = t[keep], v[keep]
        if len(t):
            prev_last = t[-1]
            times_parts.append(t)
            value_parts.append(v)
    if not times_parts:
        raise NoGranules("granules were found but no rows survived parsing")
    times64 = np.concatenate(times_parts)
    values = np.concatenate(value_parts, axis=0)

    epoch64 = _to_datetime64(enc.epoch)
    offsets = (times64 - epoch64) / np.timedelta64(1, "us") / (enc.unit_seconds * 1e6)

    if manifest.cadence is not None:
        t_start, grid, off_grid = _grid_snap(offsets, values, manifest.cadence)
        quarantined += off_grid
        n = len(grid)
        axis_times = None
        data = grid
    else:
        t_start = float(offsets[0])
        n = len(offsets)
        axis_times = offsets
        data = values

    first_dt = enc.epoch + timedelta(seconds=float(offsets[0]) * enc.unit_seconds)
    last_dt = enc.epoch + timedelta(seconds=float(offsets[-1]) * enc.unit_seconds)
    inputs = [(str(s.path), s.path.stat().st_size, file_md5(s.path)) for s in present]
    built_at = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")

    results = []
    with _BuildLock(out_dir, manifest.provider, manifest.dataset):
        for i, series in enumerate(manifest.series):
            results.append(_publish_series(
                manifest, out_dir, series, data[:, i], axis_times, t_start, n,
                first_dt.date(), last_dt.date(), enc, inputs,
                [str(g.path) for g in gaps], built_at, len(gaps), quarantined))
    return results


def _points_per_day(enc: TimeEncoding, cadence: float) -> str:
    per_day = 86400.0 / enc.unit_seconds / cadence
    return f"{per_day:g}"


def _descriptor_for(manifest: BuildManifest, series: SeriesConfig, version: int,
                    data_md5: str, t_start: float, n: int,
                    start_date: date, stop_date: date, explicit: bool) -> DatasetDescriptor:
    key = SeriesKey(manifest.provider, manifest.dataset, series.number, version)
    if manifest.cadence is not None:
        axis = TimeAxis.uniform(t_start, manifest.cadence, n)
        ppd = _points_per_day(manifest.encoding, manifest.cadence)
    else:
        time_key = SeriesKey(manifest.provider, manifest.dataset,
                             f"{series.number}.time", version)
        axis = TimeAxis.explicit(time_key.base_name + ".bin", n)
        ppd = None
    tsds_id = format_tsds_id(TsdsId(manifest.provider, manifest.dataset,
                                    series.number, version, stop_date))
    title = manifest.title or (
        f"{series.long_name or series.variable_name} "
        f"({manifest.provider} {manifest.dataset})")
    variable = VariableSpec(
        name=series.variable_name,
        layout=SeriesLayout("scalar"),
        source=FileSource(key.base_name + ".bin"),
        long_name=series.long_name or series.variable_name,
        units=series.units,
        cformat=series.cformat,
    )
    return DatasetDescriptor(
        title=title,
        data_type="time_series",
        start_date=start_date,
        stop_date=stop_date,
        time_units=manifest.time_units,
        time_axis=axis,
        variables=[variable],
        tsds_id_raw=tsds_id,
        md5=data_md5,
        points_per_day=ppd,
    )


def _publish_series(manifest: BuildManifest, out_dir: Path, series: SeriesConfig,
                    column: np.ndarray, axis_times: np.ndarray | None,
                    t_start: float, n: int, start_date: date, stop_date: date,
                    enc: TimeEncoding, inputs, gap_paths, built_at: str,
                    n_gaps: int, n_quarantined: int) -> BuildResult:
    explicit = axis_times is not None
    data_bytes = np.asarray(column, dtype="<f8").tobytes()
    data_md5 = hashlib.md5(data_bytes).hexdigest()
    time_bytes = (np.asarray(axis_times, dtype="<f8").tobytes() if explicit else None)

    versions = _existing_versions(out_dir, manifest.provider, manifest.dataset,
                                  series.number)
    version = 0
    status = "new"
    if versions:
        latest = versions[-1]
        candidate = _descriptor_for(manifest, series, latest, data_md5, t_start, n,
                                    start_date, stop_date, explicit)
        latest_key = SeriesKey(manifest.provider, manifest.dataset, series.number, latest)
        ncml_path = out_dir / (latest_key.base_name + ".ncml")
        unchanged = (ncml_path.is_file()
                     and ncml_path.read_text(encoding="utf-8") == emit_ncml(candidate))
        if unchanged and explicit:
            time_name = candidate.time_axis.time_file
            time_path = out_dir / time_name
            unchanged = (time_path.is_file()
                         and hashlib.md5(time_bytes).hexdigest() == file_md5(time_path))
        if unchanged:
            bin_path = out_dir / (latest_key.base_name + ".bin")
            unchanged = bin_path.is_file() and file_md5(bin_path) == data_md5
        if unchanged:
            key = latest_key
            d = candidate
            return BuildResult(
                key=key, status="unchanged",
                bin_path=out_dir / (key.base_name + ".bin"),
                ncml_path=out_dir / (key.base_name + ".ncml"),
                provenance_path=out_dir / (key.base_name + ".provenance.jsonl"),
                time_bin_path=(out_dir / d.time_axis.time_file) if explicit else None,
                gaps=n_gaps, quarantined=n_quarantined)
        version = latest + 1

    key = SeriesKey(manifest.provider, manifest.dataset, series.number, version)
    d = _descriptor_for(manifest, series, version, data_md5, t_start, n,
                        start_date, stop_date, explicit)
    bin_path = out_dir / (key.base_name + ".bin")
    ncml_path = out_dir / (key.base_name + ".ncml")
    provenance_path = out_dir / (key.base_name + ".provenance.jsonl")
    time_bin_path = (out_dir / d.time_axis.time_file) if explicit else None

    _atomic_write_bytes(bin_path, data_bytes)
    if explicit:
        _atomic_write_bytes(time_bin_path, time_bytes)
    provenance = ProvenanceLog(
        built_key=key,
        tsds_id=d.tsds_id_raw,
        inputs=list(inputs),
        gaps=list(gap_paths),
        build_timestamp=built_at,
        tool_version=f"tsds {_tool_version}",
        samples=n,
        md5=data_md5,
    )
    _atomic_write_text(provenance_path, provenance.to_jsonl())
    # the .ncml is written last: its presence marks the version as published
    _atomic_write_text(ncml_path, emit_ncml(d))
    return BuildResult(key=key, status=status, bin_path=bin_path, ncml_path=ncml_path,
                       provenance_path=provenance_path, time_bin_path=time_bin_path,
                       gaps=n_gaps, quarantined=n_quarantined)
