"""Metadata walkthrough: the NcML subset that fully specifies a served time
series, the versioned tsds:// identity, and catalog scanning."""

import tempfile
from datetime import date
from pathlib import Path

import numpy as np

from tsds import (
    DatasetDescriptor, FileSource, SeriesLayout, TimeAxis, VariableSpec,
    emit_ncml, format_tsds_id, parse_ncml, parse_tsds_id, scan_catalog,
    write_series,
)

root = Path(tempfile.mkdtemp(prefix="tsds-demo-"))

# The five-segment ID pins provider, dataset, series, version, and stop date.
tid = parse_tsds_id("tsds://Obs/Magnetometer/Bx/0/2001-12-31")
print("identity:", tid)
print("rendered:", format_tsds_id(tid))

# A descriptor is everything the server needs: a time axis (here a uniform
# 1-minute grid), the variables, and where their bytes live.
write_series(root / "Obs_Magnetometer_Bx-v0.bin", np.random.default_rng(0).normal(size=1440))
descriptor = DatasetDescriptor(
    title="Bx (Obs Magnetometer 1-minute)",
    data_type="time_series",
    start_date=date(2001, 1, 1),
    stop_date=date(2001, 1, 1),
    time_units="minutes since 2001-01-01 00:00:00",
    time_axis=TimeAxis.uniform(start=0.5, increment=1.0, length=1440),
    variables=[VariableSpec(
        name="Bx",
        layout=SeriesLayout("scalar"),
        source=FileSource("Obs_Magnetometer_Bx-v0.bin"),
        long_name="Bx component",
        units="nT",
        cformat=(".3f",),
    )],
    tsds_id_raw=format_tsds_id(tid),
)

text = emit_ncml(descriptor)
print("\nNcML document:\n")
print(text)
assert parse_ncml(text) == descriptor  # emit/parse round-trips exactly

# Datasets are served under the stem of their .ncml file.
(root / "Obs_Magnetometer_Bx-v0.ncml").write_text(text)
catalog = scan_catalog(root)
print("catalog entries:", catalog.names())
print("quarantined:", catalog.quarantined)
