"""Query walkthrough: constraint expressions, time-range planning, row
selections, and the server-side filters (stride, thin, missing-value
handling, block aggregates with counts)."""

import tempfile
from pathlib import Path

import numpy as np

from tsds import TsdbStore, execute, load_ncml, parse_constraint
from tsds.encoders import encode_csv

import sys
sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
from conftest import make_bin_dataset  # reuse the fixture builder

root = Path(tempfile.mkdtemp(prefix="tsds-demo-"))

# A bin-backed scalar series on an hourly grid, with some NaN gaps.
ncml_path, values = make_bin_dataset(root, "Obs_Demo_S-v0", n=240, seed=42,
                                     nan_fraction=0.08, var_name="S")
descriptor = load_ncml(ncml_path)
store = TsdbStore(root)

# The query mini-language: projection, inequality selections, one filter.
for text in (
    "time>=2001-01-02&time<2001-01-03",        # ISO range (24 hourly samples)
    "S>1.0",                                   # amplitude constraint
    "time>=24&time<48&stride(6)",              # native offsets + decimation
    "&replace_missing(0.0)&time<12",           # leading & form
    "binavg(24.0)",                            # daily means + counts
    "thin(10)",                                # approximately 10 samples back
):
    table = execute(descriptor, parse_constraint(text), store)
    extra = ""
    if table.count_columns:
        extra = f", counts {table.count_columns['S'].ravel()[:5]}"
    print(f"{text!r:>46} -> {table.n_rows} rows{extra}")

# Encoded output is what the HTTP layer returns for .csv
table = execute(descriptor, parse_constraint("time<5&binavg(2.0)"), store)
print("\ncsv rendering of 'time<5&binavg(2.0)':\n")
print(encode_csv(table, descriptor))
