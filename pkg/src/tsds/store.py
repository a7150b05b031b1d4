"""Flat binary series files: raw little-endian float64, one parameter per file.

A published file is immutable; any content change gets a new version number
and therefore a new filename, so concurrent readers never need locks. Writes
go through a temp file and an atomic rename.
"""

from __future__ import annotations

import hashlib
import logging
import os
import re
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import IndexInverted, IndexNegative, InvalidKey, MalformedDigest

log = logging.getLogger(__name__)

DOUBLE = np.dtype("<f8")
WORD = DOUBLE.itemsize  # 8 bytes per stored value

LAYOUT_KINDS = ("scalar", "vector", "spectrogram")

_FIELD_RE = re.compile(r"[^_/\s]+\Z")
_FILENAME_RE = re.compile(
    r"(?P<provider>[^_/\s]+)_(?P<dataset>[^_/\s]+)_(?P<series>[^_/\s]+)"
    r"-v(?P<version>\d+)\.bin\Z"
)
_MD5_RE = re.compile(r"[0-9a-f]{32}\Z")

EMPTY_MD5 = "d41d8cd98f00b204e9800998ecf8427e"


def _check_field(value: str, what: str) -> None:
    if not _FIELD_RE.match(value or ""):
        raise InvalidKey(
            f"{what} {value!r} is empty or contains a reserved character (_, /, whitespace)"
        )


@dataclass(frozen=True)
class SeriesKey:
    """Versioned identity of one stored parameter.

    ``stop_date`` is not part of the filename and is therefore optional here;
    it becomes mandatory in the full TSDS ID.
    """

    provider: str
    dataset: str
    series_number: str
    version: int
    stop_date: date | None = None

    def __post_init__(self):
        _check_field(self.provider, "provider")
        _check_field(self.dataset, "dataset")
        _check_field(self.series_number, "series number")
        if not isinstance(self.version, int) or isinstance(self.version, bool) or self.version < 0:
            raise InvalidKey(f"version must be a non-negative integer, got {self.version!r}")

    @property
    def base_name(self) -> str:
        return f"{self.provider}_{self.dataset}_{self.series_number}-v{self.version}"


def series_filename(key: SeriesKey) -> str:
    """``{provider}_{dataset}_{seriesNumber}-v{version}.bin``"""
    return key.base_name + ".bin"


def metadata_filename(key: SeriesKey) -> str:
    return key.base_name + ".ncml"


def parse_series_filename(name: str) -> SeriesKey:
    m = _FILENAME_RE.match(name)
    if m is None:
        raise InvalidKey(f"not a series filename: {name!r}")
    version_text = m.group("version")
    if version_text != "0" and version_text.startswith("0"):
        raise InvalidKey(f"zero-padded version in {name!r}")
    return SeriesKey(m.group("provider"), m.group("dataset"), m.group("series"),
                     int(version_text))


@dataclass(frozen=True)
class SeriesLayout:
    """Shape of one sample: scalar, k-component vector, or k-bin spectrogram."""

    kind: str
    components_per_sample: int = 1
    component_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.kind not in LAYOUT_KINDS:
            raise ValueError(f"unknown layout kind {self.kind!r}")
        if self.components_per_sample < 1:
            raise ValueError("components_per_sample must be positive")
        if self.kind == "scalar" and self.components_per_sample != 1:
            raise ValueError("scalar layout implies one component per sample")
        if (self.component_labels is not None
                and len(self.component_labels) != self.components_per_sample):
            raise ValueError("component_labels length must equal components_per_sample")


@dataclass
class Float64Block:
    """A run of stored values starting at a given element index."""

    values: np.ndarray
    start_element: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=DOUBLE).reshape(-1)

    def __len__(self) -> int:
        return len(self.values)


def _as_doubles(values) -> np.ndarray:
    if isinstance(values, Float64Block):
        values = values.values
    return np.asarray(values, dtype=DOUBLE).reshape(-1)


def write_series(path, values) -> str:
    """Write values as raw little-endian doubles; returns the file's MD5 hex digest.

    Publication is atomic: data goes to a temp sibling first, then an
    ``os.replace`` onto the final name.
    """
    path = Path(path)
    data = _as_doubles(values).tobytes()
    digest = hashlib.md5(data).hexdigest()
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)
    return digest


def read_elements(path, start_index: int, stop_index: int) -> Float64Block:
    """Read elements [start_index, stop_index] inclusive; positions past EOF are NaN.

    Exactly ``stop_index - start_index + 1`` values come back regardless of the
    file length. A trailing partial word (file length not a multiple of 8) is
    treated as absent.
    """
    if start_index < 0:
        raise IndexNegative(f"start index {start_index} is less than zero")
    if stop_index < start_index:
        raise IndexInverted(f"stop index {stop_index} is less than start index {start_index}")
    count = stop_index - start_index + 1
    with open(path, "rb") as fh:
        fh.seek(start_index * WORD)
        raw = fh.read(count * WORD)
    whole = len(raw) // WORD
    if len(raw) % WORD:
        log.warning("%s: dropping %d trailing bytes (partial value)", path, len(raw) % WORD)
    if whole == count:  # fully satisfied: zero-copy view over the read buffer
        return Float64Block(np.frombuffer(raw, dtype=DOUBLE), start_index)
    out = np.full(count, np.nan, dtype=DOUBLE)
    if whole:
        out[:whole] = np.frombuffer(raw, dtype=DOUBLE, count=whole)
    return Float64Block(out, start_index)


def read_samples(path, layout: SeriesLayout, start_sample: int, stop_sample: int) -> np.ndarray:
    """Sample-indexed view: returns an (nsamples, k) array, k components per row."""
    k = layout.components_per_sample
    if start_sample < 0:
        raise IndexNegative(f"start sample {start_sample} is less than zero")
    if stop_sample < start_sample:
        raise IndexInverted(f"stop sample {stop_sample} is less than start sample {start_sample}")
    block = read_elements(path, start_sample * k, (stop_sample + 1) * k - 1)
    return block.values.reshape(-1, k)


def element_count(path) -> int:
    """Number of whole stored values in the file."""
    return os.path.getsize(path) // WORD


def iter_element_bytes(path, start_index: int, stop_index: int,
                       chunk_elements: int = 131072) -> Iterator[bytes]:
    """Stream the byte encoding of elements [start, stop], NaN-padded past EOF.

    Index validation happens eagerly (before the first chunk), so callers can
    commit a response status before consuming the stream. Bounded memory: at
    most ``chunk_elements`` values are held at a time.
    """
    if start_index < 0:
        raise IndexNegative(f"start index {start_index} is less than zero")
    if stop_index < start_index:
        raise IndexInverted(f"stop index {stop_index} is less than start index {start_index}")

    def chunks() -> Iterator[bytes]:
        remaining = stop_index - start_index + 1
        nan_word = np.full(1, np.nan, dtype=DOUBLE).tobytes()
        with open(path, "rb") as fh:
            fh.seek(start_index * WORD)
            while remaining > 0:
                want = min(remaining, chunk_elements)
                raw = fh.read(want * WORD)
                whole = len(raw) // WORD
                if whole:
                    yield raw[: whole * WORD]
                    remaining -= whole
                if whole < want:  # EOF: emit NaN words for the rest
                    while remaining > 0:
                        n = min(remaining, chunk_elements)
                        yield nan_word * n
                        remaining -= n
    return chunks()


def file_md5(path) -> str:
    h = hashlib.md5()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def verify_md5(path, expected: str) -> bool:
    """True iff the file's MD5 equals ``expected`` (32 lowercase hex chars)."""
    if not _MD5_RE.match(expected or ""):
        raise MalformedDigest(f"not a lowercase 32-char hex digest: {expected!r}")
    return file_md5(path) == expected


class TsdbStore:
    """A directory of published series files.

    Files are immutable once published, so the store is safe for any number of
    concurrent readers. Alternate backings (e.g. compressed) can subclass and
    override the read methods.
    """

    def __init__(self, root):
        self.root = Path(root)

    def path(self, filename: str) -> Path:
        return self.root / filename

    def exists(self, filename: str) -> bool:
        return self.path(filename).is_file()

    def element_count(self, filename: str) -> int:
        return element_count(self.path(filename))

    def read_elements(self, filename: str, start_index: int, stop_index: int) -> Float64Block:
        return read_elements(self.path(filename), start_index, stop_index)

    def read_samples(self, filename: str, layout: SeriesLayout,
                     start_sample: int, stop_sample: int) -> np.ndarray:
        return read_samples(self.path(filename), layout, start_sample, stop_sample)

    def iter_element_bytes(self, filename: str, start_index: int, stop_index: int,
                           chunk_elements: int = 131072) -> Iterator[bytes]:
        return iter_element_bytes(self.path(filename), start_index, stop_index, chunk_elements)

    def write(self, filename: str, values) -> str:
        return write_series(self.path(filename), values)
