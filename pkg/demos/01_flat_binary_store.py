"""Flat binary store walkthrough: one parameter per file, 64-bit little-endian
doubles, single-seek range reads with NaN padding past end-of-file."""

import tempfile
from pathlib import Path

import numpy as np

from tsds import (
    SeriesKey, SeriesLayout, parse_series_filename, read_elements, read_samples,
    series_filename, verify_md5, write_series,
)

root = Path(tempfile.mkdtemp(prefix="tsds-demo-"))

# Versioned filenames carry the identity: provider_dataset_series-vN.bin
key = SeriesKey("Obs", "Magnetometer", "Bx", 0)
name = series_filename(key)
print("filename:", name)
print("parsed back:", parse_series_filename(name))

# A day of hourly temperatures is just 8 x 24 bytes on disk.
temps = 20 + 5 * np.sin(np.linspace(0, 2 * np.pi, 24))
path = root / name
digest = write_series(path, temps)
print(f"\nwrote {path.stat().st_size} bytes (8 x {len(temps)}), md5 {digest}")
print("digest verifies:", verify_md5(path, digest))

# Range reads are index-based. Requests past EOF come back as NaN, so the
# caller always receives exactly the number of values asked for.
block = read_elements(path, 20, 27)
print("\nelements [20:27]:", np.round(block.values, 3))

# A 3-vector series interleaves components per sample...
vec_path = root / series_filename(SeriesKey("Obs", "Magnetometer", "B", 0))
write_series(vec_path, np.arange(12, dtype=float))  # x0 y0 z0 x1 y1 z1 ...
rows = read_samples(vec_path, SeriesLayout("vector", 3), 1, 3)
print("\nvector samples 1..3 (rows of x,y,z):")
print(rows)
