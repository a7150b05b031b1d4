"""Ingest walkthrough: daily ASCII granules are aggregated into one flat
binary parameter file with NcML metadata, an MD5, a version number, and a
provenance log; rebuilds are no-ops until the content changes."""

import json
import tempfile
from pathlib import Path

from tsds.ingest import build_cache, load_manifest

root = Path(tempfile.mkdtemp(prefix="tsds-demo-"))
raw = root / "raw"
raw.mkdir()

# Five daily granules of hourly data; day 3 is missing (a gap) and one value
# uses the provider's -999 fill sentinel.
for day in (1, 2, 4, 5):
    lines = []
    for hour in range(24):
        value = -999.0 if (day, hour) == (2, 6) else day + hour / 24
        lines.append(f"2001-01-0{day}T{hour:02d}:00:00,{value}")
    (raw / f"2001010{day}.csv").write_text("\n".join(lines))

manifest_path = root / "manifest.json"
manifest_path.write_text(json.dumps({
    "provider": "Obs",
    "dataset": "Station7",
    "granules": {"directory": "raw", "pattern": "%Y%m%d.csv", "period": "day"},
    "table": {"delimiter": ",", "time": {"kind": "iso", "column": 0}},
    "time": {"units": "hours since 2001-01-01 00:00:00", "cadence": 1.0},
    "series": [{"number": "T", "column": 1, "fill": -999.0,
                "long_name": "Temperature", "units": "K"}],
}, indent=2))

out = root / "cache"
result = build_cache(load_manifest(manifest_path), out)[0]
print("built:", result.status, result.bin_path.name,
      f"({result.bin_path.stat().st_size} bytes, {result.gaps} gap granule)")

print("\nprovenance log:")
for line in result.provenance_path.read_text().splitlines():
    print(" ", line)

# Same inputs, same bytes: nothing new is written.
print("\nrebuild:", build_cache(load_manifest(manifest_path), out)[0].status)

# Change one value and the version increments; v0 stays untouched on disk.
text = (raw / "20010104.csv").read_text().replace("4.0\n", "40.0\n", 1)
(raw / "20010104.csv").write_text(text)
changed = build_cache(load_manifest(manifest_path), out)[0]
print("after edit:", changed.status, changed.bin_path.name)
print("cache now holds:", sorted(p.name for p in out.glob("*.bin")))
