import shutil
from datetime import date, datetime
from pathlib import Path

import numpy as np
import pytest

from tsds.ncml import DatasetDescriptor, FileSource, TimeAxis, VariableSpec, emit_ncml
from tsds.store import SeriesLayout, TsdbStore, write_series

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def variable1_text() -> str:
    return (DATA_DIR / "variable1.ncml").read_text()


@pytest.fixture
def variable1_bin_text() -> str:
    return (DATA_DIR / "variable1_bin.ncml").read_text()


def make_bin_dataset(directory: Path, name: str = "Obs_Site_B-v0", *,
                     n: int = 200, k: int = 1, seed: int = 0,
                     nan_fraction: float = 0.05,
                     units: str = "hours since 2001-01-01 00:00:00",
                     start: float = 0.0, increment: float = 1.0,
                     var_name: str = "B") -> tuple[Path, np.ndarray]:
    """Write a bin-backed uniform dataset (values + ncml) into ``directory``."""
    rng = np.random.default_rng(seed)
    values = rng.normal(size=(n, k))
    if nan_fraction:
        values[rng.random(size=(n, k)) < nan_fraction] = np.nan
    write_series(directory / f"{name}.bin", values.reshape(-1))
    layout = SeriesLayout("scalar" if k == 1 else "vector", k)
    d = DatasetDescriptor(
        title=f"{var_name} test series",
        data_type="time_series" if k == 1 else "vector",
        start_date=date(2001, 1, 1),
        stop_date=date(2001, 12, 31),
        time_units=units,
        time_axis=TimeAxis.uniform(start, increment, n),
        variables=[VariableSpec(var_name, layout, FileSource(f"{name}.bin"),
                                long_name=var_name, units="nT")],
    )
    (directory / f"{name}.ncml").write_text(emit_ncml(d))
    return directory / f"{name}.ncml", values


@pytest.fixture
def bin_dataset(tmp_path):
    ncml_path, values = make_bin_dataset(tmp_path)
    return ncml_path, values, TsdbStore(tmp_path)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    lines = []
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" in nodeid:
                label = nodeid.split("::")[-1]
                lines.append((label, status.upper()))
    if lines:
        terminalreporter.section("acceptance criteria")
        for label, status in sorted(lines):
            mark = "PASS" if status == "PASSED" else "FAIL"
            terminalreporter.write_line(f"[{mark}] {label}")
